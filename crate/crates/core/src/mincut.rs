//! Min-cut by cut enumeration (rank of the crossing incidence matrix over GF(2)) and by
//! maximizing the rank of the system matrix over random coefficient draws.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ff::{Fe, Field, Matrix};
use crate::network::{AdtNetwork, Endpoint};
use crate::seed;
use crate::transfer::{self, CodingAssignment};

/// Largest number of undecided supernodes the enumeration will take on.
pub const MAX_FREE_NODES: usize = 22;

/// Rank over GF(2) of 0/1 rows packed into 64-bit words.
pub fn gf2_rank(mut rows: Vec<Vec<u64>>) -> usize {
    let words = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for w in 0..words {
        for bit in 0..64 {
            let mask = 1u64 << bit;
            let Some(p) = (rank..rows.len()).find(|&r| rows[r][w] & mask != 0) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row[w] & mask != 0 {
                    for (a, b) in row.iter_mut().zip(&pivot) {
                        *a ^= b;
                    }
                }
            }
            rank += 1;
            if rank == rows.len() {
                return rank;
            }
        }
    }
    rank
}

/// Supernodes reachable from `s` (including `s`).
pub fn reachable_from(net: &AdtNetwork, s: usize) -> Vec<bool> {
    let mut seen = vec![false; net.num_nodes()];
    let mut stack = vec![s];
    seen[s] = true;
    while let Some(u) = stack.pop() {
        for v in net.successors(u) {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

/// Supernodes from which `t` is reachable (including `t`).
pub fn reaching(net: &AdtNetwork, t: usize) -> Vec<bool> {
    let n = net.num_nodes();
    let mut pred: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for e in net.edges() {
        pred[e.to.0].insert(e.from.0);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![t];
    seen[t] = true;
    while let Some(u) = stack.pop() {
        for &v in &pred[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

/// 0/1 incidence between output ports in `omega` and input ports outside it, over GF(2).
/// Rows follow (node, port) order of the outputs, columns of the inputs.
pub fn cut_incidence(net: &AdtNetwork, omega: &[bool]) -> Matrix<Fe> {
    let mut rows = Vec::new();
    let mut cols = Vec::new();
    for (v, node) in net.nodes().iter().enumerate() {
        if omega[v] {
            rows.extend((0..node.outputs).map(|k| (v, k)));
        } else {
            cols.extend((0..node.inputs).map(|k| (v, k)));
        }
    }
    let mut m = Matrix::filled(rows.len(), cols.len(), Fe::ZERO);
    for e in net.edges() {
        if omega[e.from.0] && !omega[e.to.0] {
            let r = rows.binary_search(&e.from).unwrap();
            let c = cols.binary_search(&e.to).unwrap();
            m.set(r, c, Fe::ONE);
        }
    }
    m
}

/// Number of physical edges crossing the cut.
pub fn crossing_edges(net: &AdtNetwork, omega: &[bool]) -> usize {
    net.edges()
        .filter(|e| omega[e.from.0] && !omega[e.to.0])
        .count()
}

fn cut_rank(net: &AdtNetwork, omega: &[bool], col_of: &[Vec<usize>], words: usize) -> usize {
    let mut rows: Vec<Vec<u64>> = Vec::new();
    let mut row_of = std::collections::HashMap::new();
    for e in net.edges() {
        if omega[e.from.0] && !omega[e.to.0] {
            let idx = *row_of.entry(e.from).or_insert_with(|| {
                rows.push(vec![0u64; words]);
                rows.len() - 1
            });
            let c = col_of[e.to.0][e.to.1];
            rows[idx][c / 64] |= 1u64 << (c % 64);
        }
    }
    gf2_rank(rows)
}

/// Result of the exact enumeration together with a minimizing cut.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CutReport {
    pub value: usize,
    /// Supernode ids on the source side of a minimizing cut.
    pub omega: Vec<String>,
    /// Number of cuts examined after pruning.
    pub cuts_examined: u64,
}

/// Exact ADT min-cut from `s` to `t`: the minimum over supernode cuts of the GF(2) rank of the
/// crossing incidence matrix.
///
/// Supernodes that `s` cannot reach are pinned to the sink side and supernodes that cannot reach
/// `t` to the source side. Both moves turn the incidence matrix of any cut into a submatrix of it,
/// so the minimum is unchanged and only the remaining supernodes are enumerated.
pub fn mincut_combinatorial(net: &AdtNetwork, s: usize, t: usize) -> Result<CutReport> {
    if s == t {
        return Err(Error::usage("source and destination must differ"));
    }
    let n = net.num_nodes();
    if s >= n || t >= n {
        return Err(Error::usage("unknown supernode"));
    }
    let from_s = reachable_from(net, s);
    if !from_s[t] {
        return Ok(CutReport {
            value: 0,
            omega: vec![net.node(s).id.clone()],
            cuts_examined: 0,
        });
    }
    let to_t = reaching(net, t);
    let mut omega = vec![false; n];
    let mut free = Vec::new();
    for v in 0..n {
        if v == s {
            omega[v] = true;
        } else if v == t || !from_s[v] {
            omega[v] = false;
        } else if !to_t[v] {
            omega[v] = true;
        } else {
            free.push(v);
        }
    }
    if free.len() > MAX_FREE_NODES {
        return Err(Error::ComplexityRefusal(format!(
            "{} undecided supernodes exceed the enumeration limit of {MAX_FREE_NODES}; use the algebraic method",
            free.len()
        )));
    }
    let mut col_of: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut cols = 0;
    for node in net.nodes() {
        col_of.push((cols..cols + node.inputs).collect());
        cols += node.inputs;
    }
    let words = cols.div_ceil(64).max(1);
    let mut best = usize::MAX;
    let mut best_omega = omega.clone();
    let total = 1u64 << free.len();
    for mask in 0..total {
        for (b, &v) in free.iter().enumerate() {
            omega[v] = mask >> b & 1 == 1;
        }
        let r = cut_rank(net, &omega, &col_of, words);
        if r < best {
            best = r;
            best_omega = omega.clone();
            if best == 0 {
                break;
            }
        }
    }
    Ok(CutReport {
        value: best,
        omega: (0..n)
            .filter(|&v| best_omega[v])
            .map(|v| net.node(v).id.clone())
            .collect(),
        cuts_examined: total,
    })
}

/// Convenience wrapper returning only the value.
pub fn mincut(net: &AdtNetwork, s: usize, t: usize) -> Result<usize> {
    mincut_combinatorial(net, s, t).map(|r| r.value)
}

/// `net` with `s` as the only source (one process per output port) and `t` as the only
/// destination (one process per input port).
pub fn full_dimension(net: &AdtNetwork, s: usize, t: usize) -> AdtNetwork {
    net.with_endpoints(
        vec![Endpoint {
            node: s,
            processes: net.node(s).outputs,
        }],
        vec![Endpoint {
            node: t,
            processes: net.node(t).inputs,
        }],
    )
}

fn trial_rank(net: &AdtNetwork, field: &Field, seed: u64, trial: u64) -> usize {
    let mut rng = seed::rng(seed, &[trial]);
    let a = CodingAssignment::random(net, field, &mut rng);
    transfer::system_matrix(net, &a, field)
        .expect("acyclic")
        .matrix
        .rank(field)
}

/// Largest system-matrix rank over `trials` random assignments with full-dimension encoding and
/// decoding. Never exceeds the true min-cut; trials run in parallel with per-trial seeds.
pub fn mincut_algebraic(
    net: &AdtNetwork,
    s: usize,
    t: usize,
    field: &Field,
    trials: usize,
    seed: u64,
) -> Result<usize> {
    batch_max(net, s, t, field, 0..trials as u64, seed)
}

fn batch_max(
    net: &AdtNetwork,
    s: usize,
    t: usize,
    field: &Field,
    trials: std::ops::Range<u64>,
    seed: u64,
) -> Result<usize> {
    if s == t {
        return Err(Error::usage("source and destination must differ"));
    }
    net.longest_path_depth()?;
    let sub = full_dimension(net, s, t);
    let bound = net.node(s).outputs.min(net.node(t).inputs);
    let mut best = 0;
    const CHUNK: u64 = 32;
    let mut start = trials.start;
    while start < trials.end && best < bound {
        let end = (start + CHUNK).min(trials.end);
        let m = (start..end)
            .into_par_iter()
            .map(|k| trial_rank(&sub, field, seed, k))
            .max()
            .unwrap_or(0);
        best = best.max(m);
        start = end;
    }
    Ok(best)
}

/// Repeats batches of `trials` until two consecutive batch maxima agree (at most `max_batches`).
pub fn mincut_algebraic_strict(
    net: &AdtNetwork,
    s: usize,
    t: usize,
    field: &Field,
    trials: usize,
    seed: u64,
    max_batches: usize,
) -> Result<usize> {
    let t64 = trials as u64;
    let mut prev = batch_max(net, s, t, field, 0..t64, seed)?;
    let mut best = prev;
    for b in 1..max_batches.max(2) as u64 {
        let cur = batch_max(net, s, t, field, b * t64..(b + 1) * t64, seed)?;
        best = best.max(cur);
        if cur == prev {
            break;
        }
        prev = cur;
    }
    Ok(best)
}

/// `V(R)`: supernodes whose min-cut from `s` is at least `r`. The source itself belongs to the
/// set when `r` does not exceed its output count.
pub fn compute_vr(net: &AdtNetwork, s: usize, r: usize) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for v in 0..net.num_nodes() {
        let ok = if r == 0 {
            true
        } else if v == s {
            r <= net.node(s).outputs
        } else {
            mincut(net, s, v)? >= r
        };
        if ok {
            out.push(v);
        }
    }
    Ok(out)
}
