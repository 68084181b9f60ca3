//! Algebraic network coding for ADT deterministic wireless relay networks.
//!
//! Networks are modelled as supernodes with ordered input and output ports. An output port
//! broadcasts one symbol to every input port it is wired to, and an input port receives the
//! finite-field sum of everything arriving on it. Coding is linear: sources mix processes onto
//! their outputs (`alpha`), every supernode mixes its inputs onto its outputs (`beta`), and
//! destinations combine their inputs into output processes (`epsilon`). The end-to-end map is the
//! system matrix `M = A (I - F)^-1 B^T`.

#![allow(clippy::needless_range_loop)]

pub mod codegen;
pub mod coding;
pub mod delay;
pub mod error;
pub mod fixtures;
pub mod ff;
pub mod mincut;
pub mod network;
pub mod robust;
pub mod seed;
pub mod transfer;

pub use error::{Error, Result};
