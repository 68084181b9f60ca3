//! Exact arithmetic: GF(2^m), polynomials and rational functions in `D`,
//! sparse multivariate polynomials, and dense matrices over all of them.

mod field;
mod matrix;
mod mpoly;
mod poly;
mod rational;

use std::fmt::Debug;

pub use field::{is_irreducible_gf2, Fe, Field, MAX_DEGREE};
pub use matrix::Matrix;
pub use mpoly::{MPoly, MPolyRing, Monomial, VarTable};
pub use poly::{DPolynomial, PolyRing};
pub use rational::{DRational, RationalField};

/// A commutative ring whose elements are plain values; the ring object carries context.
pub trait Ring {
    type Elem: Clone + PartialEq + Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }
}

/// Rings where every nonzero element is invertible.
pub trait FieldOps: Ring {
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
}

/// Integral domains with exact division, as needed by fraction-free elimination.
pub trait ExactDiv: Ring {
    /// `a / b`, assuming `b` divides `a`.
    fn div_exact(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
}

impl Ring for Field {
    type Elem = Fe;

    fn zero(&self) -> Fe {
        Fe::ZERO
    }
    fn one(&self) -> Fe {
        Fe::ONE
    }
    fn add(&self, a: &Fe, b: &Fe) -> Fe {
        *a + *b
    }
    fn neg(&self, a: &Fe) -> Fe {
        *a
    }
    fn mul(&self, a: &Fe, b: &Fe) -> Fe {
        Field::mul(self, *a, *b)
    }
    fn is_zero(&self, a: &Fe) -> bool {
        a.is_zero()
    }
}

impl FieldOps for Field {
    fn inv(&self, a: &Fe) -> Option<Fe> {
        Field::inv(self, *a)
    }
}

impl ExactDiv for Field {
    fn div_exact(&self, a: &Fe, b: &Fe) -> Fe {
        Field::div(self, *a, *b).expect("division by zero")
    }
}
