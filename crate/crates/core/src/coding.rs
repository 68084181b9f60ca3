//! Random linear codes, decoders and feasibility decisions for unicast, multicast, disjoint and
//! two-level multicast, and a sufficiency certificate for arbitrary connection sets.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::{Fe, Field, Matrix};
use crate::mincut;
use crate::network::{AdtNetwork, Endpoint, PortId, Side};
use crate::seed;
use crate::transfer::{
    self, destination_offsets, inverse_i_minus_f, source_offsets, total_source_processes, CodingAssignment,
    FreePositions, SystemMatrix,
};

/// Redraws allowed before a randomized solver gives up.
pub const RETRY_BUDGET: usize = 64;

/// Random source vectors used to certify every returned solution.
pub const VERIFY_VECTORS: usize = 20;

/// Shape of a connection set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConnectionKind {
    Empty,
    Unicast,
    Multicast,
    MultipleMulticast,
    DisjointMulticast,
    TwoLevel,
    General,
}

/// Demanded source-process rows of the system matrix, per destination in declaration order.
pub fn demands(net: &AdtNetwork) -> Vec<(usize, Vec<usize>)> {
    let so = source_offsets(net);
    let mut per: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for c in net.connections() {
        let set = per.entry(c.destination).or_default();
        set.extend(c.processes.iter().map(|&i| so[&c.source] + i));
    }
    net.destinations()
        .iter()
        .filter_map(|d| per.get(&d.node).map(|s| (d.node, s.iter().copied().collect())))
        .collect()
}

fn source_process_count(net: &AdtNetwork, s: usize) -> usize {
    net.source(s).map_or(0, |e| e.processes)
}

pub fn classify(net: &AdtNetwork) -> ConnectionKind {
    let conns = net.connections();
    if conns.is_empty() {
        return ConnectionKind::Empty;
    }
    let sources: BTreeSet<usize> = conns.iter().map(|c| c.source).collect();
    let dests: BTreeSet<usize> = conns.iter().map(|c| c.destination).collect();
    let full = |s: usize, p: &[usize]| p.len() == source_process_count(net, s);
    if sources.len() == 1 && dests.len() == 1 {
        return ConnectionKind::Unicast;
    }
    // Every destination demands every process of every source.
    let all_full = dests.iter().all(|&t| {
        sources.iter().all(|&s| {
            conns
                .iter()
                .find(|c| c.source == s && c.destination == t)
                .is_some_and(|c| full(s, &c.processes))
        })
    });
    if all_full {
        return if sources.len() == 1 {
            ConnectionKind::Multicast
        } else {
            ConnectionKind::MultipleMulticast
        };
    }
    if sources.len() > 1 || conns.len() != dests.len() {
        return ConnectionKind::General;
    }
    let partial: Vec<&[usize]> = conns
        .iter()
        .filter(|c| !full(c.source, &c.processes))
        .map(|c| c.processes.as_slice())
        .collect();
    if !pairwise_disjoint(&partial) {
        return ConnectionKind::General;
    }
    if partial.len() == conns.len() {
        ConnectionKind::DisjointMulticast
    } else {
        ConnectionKind::TwoLevel
    }
}

fn pairwise_disjoint(sets: &[&[usize]]) -> bool {
    let mut seen = BTreeSet::new();
    sets.iter().all(|s| s.iter().all(|p| seen.insert(*p)))
}

/// A verified code: coefficients plus one decoding matrix per destination. The decoder of `T` maps
/// the row vector of `T`'s output processes to the demanded source processes, in row order.
#[derive(Clone, Debug)]
pub struct CodeSolution {
    pub field: Field,
    pub assign: CodingAssignment,
    pub decoders: BTreeMap<usize, Matrix<Fe>>,
    pub seed: Option<u64>,
    pub attempts: usize,
}

/// Solves `m · x = e`, returning one solution (free variables zero) or `None`.
pub fn solve_right(field: &Field, m: &Matrix<Fe>, e: &Matrix<Fe>) -> Option<Matrix<Fe>> {
    let (c, k) = (m.cols(), e.cols());
    let mut aug = m.hstack(e);
    let pivots = aug.rref_in_place(field);
    if pivots.iter().any(|&p| p >= c) {
        return None;
    }
    let mut x = Matrix::filled(c, k, Fe::ZERO);
    for (row, &pc) in pivots.iter().enumerate() {
        for j in 0..k {
            x.set(pc, j, *aug.get(row, c + j));
        }
    }
    Some(x)
}

/// Selector with a one at `(rows[j], j)`.
fn selector(total: usize, rows: &[usize]) -> Matrix<Fe> {
    let mut e = Matrix::filled(total, rows.len(), Fe::ZERO);
    for (j, &r) in rows.iter().enumerate() {
        e.set(r, j, Fe::ONE);
    }
    e
}

/// Decoders for every destination with demands, or the first destination that cannot decode.
pub fn decoders(
    net: &AdtNetwork,
    sys: &SystemMatrix,
    field: &Field,
) -> std::result::Result<BTreeMap<usize, Matrix<Fe>>, usize> {
    let total = sys.matrix.rows();
    let mut out = BTreeMap::new();
    for (t, rows) in demands(net) {
        let mt = sys.destination_block(net, t);
        let d = solve_right(field, &mt, &selector(total, &rows)).ok_or(t)?;
        out.insert(t, d);
    }
    Ok(out)
}

/// Outcome of decoding random source vectors at one destination.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecodeCheck {
    pub destination: String,
    pub demanded: usize,
    pub ok: bool,
}

/// Simulates `vectors` random source vectors and checks every decoder output against the
/// demanded processes.
pub fn verify_solution(net: &AdtNetwork, sol: &CodeSolution, vectors: usize, seed: u64) -> Result<Vec<DecodeCheck>> {
    sol.assign.check(net, &sol.field)?;
    let field = &sol.field;
    let total = total_source_processes(net);
    let dof = destination_offsets(net);
    let dem = demands(net);
    let mut ok = vec![true; dem.len()];
    let mut rng = seed::rng(seed, &[0x7665_7269]);
    for _ in 0..vectors {
        let x: Vec<Fe> = (0..total).map(|_| Fe(rng.gen_range(0..field.order()) as u16)).collect();
        let z = transfer::simulate(net, &sol.assign, field, &x)?;
        for (i, (t, rows)) in dem.iter().enumerate() {
            let Some(d) = sol.decoders.get(t) else {
                ok[i] = false;
                continue;
            };
            let nu = net.destination(*t).map_or(0, |e| e.processes);
            if d.rows() != nu || d.cols() != rows.len() {
                ok[i] = false;
                continue;
            }
            let zt = &z[dof[t]..dof[t] + nu];
            let decoded = d.vec_mul(field, zt);
            if rows.iter().zip(&decoded).any(|(&r, &v)| x[r] != v) {
                ok[i] = false;
            }
        }
    }
    Ok(dem
        .iter()
        .zip(ok)
        .map(|((t, rows), ok)| DecodeCheck {
            destination: net.node(*t).id.clone(),
            demanded: rows.len(),
            ok,
        })
        .collect())
}

/// Builds decoders for `assign` and certifies them by simulation.
fn finalize(
    net: &AdtNetwork,
    field: &Field,
    assign: CodingAssignment,
    seed: Option<u64>,
    attempts: usize,
) -> std::result::Result<CodeSolution, usize> {
    let sys = transfer::system_matrix(net, &assign, field).expect("acyclic network");
    let decoders = decoders(net, &sys, field)?;
    let sol = CodeSolution {
        field: field.clone(),
        assign,
        decoders,
        seed,
        attempts,
    };
    let checks = verify_solution(net, &sol, VERIFY_VECTORS, seed.unwrap_or(0)).expect("consistent solution");
    match checks.iter().position(|c| !c.ok) {
        None => Ok(sol),
        Some(i) => Err(demands(net)[i].0),
    }
}

fn cut_value(net: &AdtNetwork, s: usize, t: usize) -> Result<Option<usize>> {
    match mincut::mincut(net, s, t) {
        Ok(v) => Ok(Some(v)),
        Err(Error::ComplexityRefusal(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Necessary cut conditions for every destination: each demanded source alone, and all demanded
/// sources of a destination together through a super-source. Checks the enumeration refuses are
/// skipped.
pub fn check_cut_conditions(net: &AdtNetwork) -> Result<()> {
    for (t, _) in demands(net) {
        let conns: Vec<_> = net.connections().iter().filter(|c| c.destination == t).collect();
        let mut per_source: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for c in &conns {
            per_source.entry(c.source).or_default().extend(&c.processes);
        }
        for (&s, procs) in &per_source {
            if let Some(v) = cut_value(net, s, t)? {
                if v < procs.len() {
                    return Err(Error::Infeasible(format!(
                        "mincut({}, {}) = {v} < demanded rate {}",
                        net.node(s).id,
                        net.node(t).id,
                        procs.len()
                    )));
                }
            }
        }
        if per_source.len() > 1 {
            let srcs: Vec<usize> = per_source.keys().copied().collect();
            let need: usize = per_source.values().map(|p| p.len()).sum();
            let (joined, star) = net.add_super_source(&srcs)?;
            if let Some(v) = cut_value(&joined, star, t)? {
                if v < need {
                    return Err(Error::Infeasible(format!(
                        "mincut(super-source, {}) = {v} < total demanded rate {need}",
                        net.node(t).id
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Draws every free coefficient uniformly, retrying up to [`RETRY_BUDGET`] times until every
/// destination decodes. Feasibility is checked first with exact min-cuts.
pub fn random_code(net: &AdtNetwork, field: &Field, seed: u64) -> Result<CodeSolution> {
    random_code_with_budget(net, field, seed, RETRY_BUDGET)
}

pub fn random_code_with_budget(net: &AdtNetwork, field: &Field, seed: u64, budget: usize) -> Result<CodeSolution> {
    net.longest_path_depth()?;
    check_cut_conditions(net)?;
    let mut last = None;
    for attempt in 0..budget {
        let mut rng = seed::rng(seed, &[attempt as u64]);
        let assign = CodingAssignment::random(net, field, &mut rng);
        match finalize(net, field, assign, Some(seed), attempt + 1) {
            Ok(sol) => return Ok(sol),
            Err(t) => last = Some(t),
        }
    }
    Err(Error::RandomizationExhausted {
        attempts: budget,
        detail: format!(
            "destination {} never decoded",
            last.map_or("?".to_string(), |t| net.node(t).id.clone())
        ),
    })
}

/// Unicast feasibility with a witness assignment when feasible.
#[derive(Clone, Debug)]
pub struct UnicastReport {
    pub feasible: bool,
    pub mincut: usize,
    pub witness: Option<CodingAssignment>,
}

/// `rate` processes from `s` to `t`: feasible iff the min-cut is at least `rate`. When feasible,
/// a random assignment with a nonsingular system matrix is exhibited on the network restricted
/// to this connection.
pub fn feasible_unicast(
    net: &AdtNetwork,
    s: usize,
    t: usize,
    rate: usize,
    field: &Field,
    seed: u64,
) -> Result<UnicastReport> {
    let cut = mincut::mincut(net, s, t)?;
    if rate == 0 || cut < rate {
        return Ok(UnicastReport {
            feasible: rate == 0,
            mincut: cut,
            witness: None,
        });
    }
    let mut sub = net.with_endpoints(
        vec![Endpoint { node: s, processes: rate }],
        vec![Endpoint { node: t, processes: rate }],
    );
    sub.set_connections(vec![crate::network::Connection {
        source: s,
        destination: t,
        processes: (0..rate).collect(),
    }]);
    for attempt in 0..RETRY_BUDGET as u64 {
        let mut rng = seed::rng(seed, &[attempt]);
        let a = CodingAssignment::random(&sub, field, &mut rng);
        let m = transfer::system_matrix(&sub, &a, field)?.matrix;
        if !m.det(field).is_zero() {
            return Ok(UnicastReport {
                feasible: true,
                mincut: cut,
                witness: Some(a),
            });
        }
    }
    Err(Error::RandomizationExhausted {
        attempts: RETRY_BUDGET,
        detail: format!("no nonsingular system matrix from {} to {}", net.node(s).id, net.node(t).id),
    })
}

/// Largest number of destinations for which every subset cut condition is enumerated.
pub const MAX_SUBSET_DESTINATIONS: usize = 12;

fn single_source(net: &AdtNetwork, what: &str) -> Result<usize> {
    let sources: BTreeSet<usize> = net.connections().iter().map(|c| c.source).collect();
    match sources.len() {
        1 => Ok(*sources.first().unwrap()),
        0 => Err(Error::usage(format!("{what} needs at least one connection"))),
        _ => Err(Error::NotSupported(format!("{what} with more than one source"))),
    }
}

/// `mincut(S, T') >= sum of demands` for every nonempty subset `T'` of `dests`.
fn check_subset_cuts(net: &AdtNetwork, s: usize, dests: &[(usize, usize)]) -> Result<()> {
    if dests.len() > MAX_SUBSET_DESTINATIONS {
        return Err(Error::ComplexityRefusal(format!(
            "{} destinations exceed the subset enumeration limit of {MAX_SUBSET_DESTINATIONS}",
            dests.len()
        )));
    }
    for mask in 1u32..1 << dests.len() {
        let chosen: Vec<usize> = (0..dests.len()).filter(|&i| mask >> i & 1 == 1).collect();
        let need: usize = chosen.iter().map(|&i| dests[i].1).sum();
        let ids: Vec<usize> = chosen.iter().map(|&i| dests[i].0).collect();
        let v = if ids.len() == 1 {
            cut_value(net, s, ids[0])?
        } else {
            let (joined, star) = net.add_super_destination(&ids)?;
            cut_value(&joined, s, star)?
        };
        if let Some(v) = v {
            if v < need {
                let names: Vec<&str> = ids.iter().map(|&t| net.node(t).id.as_str()).collect();
                return Err(Error::Infeasible(format!(
                    "mincut({}, {{{}}}) = {v} < total demanded rate {need}",
                    net.node(s).id,
                    names.join(", ")
                )));
            }
        }
    }
    Ok(())
}

/// Rows of `(I - F)^-1 B^T` at the output ports of `s` that feed something; columns are all
/// destination processes.
fn source_transfer(net: &AdtNetwork, assign: &CodingAssignment, field: &Field, s: usize) -> (Vec<usize>, Matrix<Fe>) {
    let order = net.topological_port_order().expect("acyclic network");
    let f = transfer::build_f(net, &order, assign);
    let inv = inverse_i_minus_f(field, &f);
    let b = transfer::build_b(net, &order, assign);
    let outs: Vec<usize> = (0..net.node(s).outputs)
        .filter(|&e| !net.out_neighbors(s, e).is_empty())
        .collect();
    let rows: Vec<usize> = outs.iter().map(|&e| order.output(s, e)).collect();
    let k = inv.select_rows(&rows).mul(field, &b.transpose());
    (outs, k)
}

fn random_inner(net: &AdtNetwork, field: &Field, rng: &mut impl Rng, active: &BTreeMap<usize, usize>) -> CodingAssignment {
    let mut a = CodingAssignment::random(net, field, rng);
    a.alpha.clear();
    a.epsilon.retain(|&(t, _, k), _| active.get(&t).is_some_and(|&n| k < n));
    a
}

/// Checks the shape shared by the disjoint and two-level solvers and returns the source, the
/// partial receivers `(T, demanded rows)` and the full-rate receivers.
#[allow(clippy::type_complexity)]
fn split_levels(net: &AdtNetwork, what: &str) -> Result<(usize, Vec<(usize, Vec<usize>)>, Vec<usize>)> {
    net.longest_path_depth()?;
    let s = single_source(net, what)?;
    let mu = source_process_count(net, s);
    let mut partial = Vec::new();
    let mut full = Vec::new();
    for (t, rows) in demands(net) {
        let nu = net.destination(t).map_or(0, |d| d.processes);
        if nu < rows.len() {
            return Err(Error::usage(format!(
                "destination {} has {nu} output processes but demands {}",
                net.node(t).id,
                rows.len()
            )));
        }
        if rows.len() == mu {
            full.push(t);
        } else {
            partial.push((t, rows));
        }
    }
    let sets: Vec<&[usize]> = partial.iter().map(|(_, r)| r.as_slice()).collect();
    if !pairwise_disjoint(&sets) {
        return Err(Error::NotSupported(
            "partially overlapping demands (three or more nested multicast levels) are not covered by the two-level construction"
                .into(),
        ));
    }
    Ok((s, partial, full))
}

/// Disjoint multicast: every destination demands its own disjoint subset of the source's
/// processes. Internal and decoding coefficients are drawn at random and the encoding matrix is
/// solved so that the system matrix over all receivers is the identity.
pub fn solve_disjoint_multicast(net: &AdtNetwork, field: &Field, seed: u64) -> Result<CodeSolution> {
    let (s, partial, full) = split_levels(net, "disjoint multicast")?;
    if !full.is_empty() && partial.is_empty() {
        return random_code(net, field, seed);
    }
    if !full.is_empty() {
        return Err(Error::usage(
            "full-rate receivers present; use the two-level solver",
        ));
    }
    solve_levels(net, field, seed, s, &partial, &[])
}

/// Two-level multicast: receivers demanding disjoint subsets plus receivers demanding every
/// process. The encoding matrix is a particular solution of the disjoint constraints plus a
/// random combination from their left null space.
pub fn solve_two_level(net: &AdtNetwork, field: &Field, seed: u64) -> Result<CodeSolution> {
    let (s, partial, full) = split_levels(net, "two-level multicast")?;
    if partial.is_empty() {
        return random_code(net, field, seed);
    }
    solve_levels(net, field, seed, s, &partial, &full)
}

/// Multiple multicast through a super-source. The lifted encoding matrix is block structured:
/// the processes of `S_i` only reach the super-source outputs wired into `S_i`. Each draw is
/// folded back into `alpha` of the original sources and verified on the original network.
///
/// Without the block structure the lifted problem is strictly easier, since the super-source
/// could route one source's processes through another source.
pub fn solve_multiple_multicast(net: &AdtNetwork, field: &Field, seed: u64) -> Result<CodeSolution> {
    match classify(net) {
        ConnectionKind::MultipleMulticast => {}
        ConnectionKind::Multicast | ConnectionKind::Unicast => return random_code(net, field, seed),
        k => return Err(Error::usage(format!("expected a multiple multicast, got {k:?}"))),
    }
    net.longest_path_depth()?;
    let sources: Vec<usize> = net.sources().iter().map(|e| e.node).collect();
    let (g, star) = net.add_super_source(&sources)?;
    // Super-source outputs and processes owned by each source, in declaration order.
    let mut blocks = Vec::new();
    let (mut out, mut proc) = (0, 0);
    for &s in &sources {
        let (k, mu) = (net.node(s).outputs, source_process_count(net, s));
        blocks.push((s, out..out + k, proc..proc + mu));
        out += k;
        proc += mu;
    }
    let total = proc;
    for t in net.destinations().iter().map(|d| d.node) {
        for (s, _, procs) in &blocks {
            if let Some(v) = cut_value(&g, *s, t)? {
                if v < procs.len() {
                    return Err(Error::Infeasible(format!(
                        "mincut({}, {}) = {v} < demanded rate {}",
                        net.node(*s).id,
                        net.node(t).id,
                        procs.len()
                    )));
                }
            }
        }
        if let Some(v) = cut_value(&g, star, t)? {
            if v < total {
                return Err(Error::Infeasible(format!(
                    "mincut(super-source, {}) = {v} < total demanded rate {total}",
                    net.node(t).id
                )));
            }
        }
    }
    let mut failing = None;
    for attempt in 0..RETRY_BUDGET {
        let mut rng = seed::rng(seed, &[attempt as u64]);
        let lifted = CodingAssignment::random(&g, field, &mut rng);
        let mut assign = CodingAssignment::new();
        assign.epsilon = lifted.epsilon.clone();
        for (&(v, x, y), &c) in &lifted.beta {
            let new_input = sources.contains(&v) && x >= net.node(v).inputs;
            if !new_input {
                assign.set_beta(v, x, y, c);
            }
        }
        // alpha_i(p, e) = sum_k alpha*(p, j_k) beta_{S_i}(first_new + k, e)
        for (s, outs, procs) in &blocks {
            let first_new = net.node(*s).inputs;
            for (p, gp) in procs.clone().enumerate() {
                for e in 0..net.node(*s).outputs {
                    let mut acc = Fe::ZERO;
                    for (k, j) in outs.clone().enumerate() {
                        acc += field.mul(lifted.alpha(star, gp, j), lifted.beta(*s, first_new + k, e));
                    }
                    assign.set_alpha(*s, p, e, acc);
                }
            }
        }
        match finalize(net, field, assign, Some(seed), attempt + 1) {
            Ok(sol) => return Ok(sol),
            Err(t) => failing = Some(t),
        }
    }
    Err(Error::RandomizationExhausted {
        attempts: RETRY_BUDGET,
        detail: format!(
            "{} never decoded",
            failing.map_or_else(|| "a destination".to_string(), |t| net.node(t).id.clone())
        ),
    })
}

const NULL_SPACE_DRAWS: u64 = 8;

fn solve_levels(
    net: &AdtNetwork,
    field: &Field,
    seed: u64,
    s: usize,
    partial: &[(usize, Vec<usize>)],
    full: &[usize],
) -> Result<CodeSolution> {
    let mu = source_process_count(net, s);
    let so = source_offsets(net)[&s];
    let dof = destination_offsets(net);
    let sizes: Vec<(usize, usize)> = partial.iter().map(|(t, r)| (*t, r.len())).collect();
    check_subset_cuts(net, s, &sizes)?;
    for &t in full {
        if let Some(v) = cut_value(net, s, t)? {
            if v < mu {
                return Err(Error::Infeasible(format!(
                    "mincut({}, {}) = {v} < multicast rate {mu}",
                    net.node(s).id,
                    net.node(t).id
                )));
            }
        }
    }
    let mut active: BTreeMap<usize, usize> = sizes.iter().copied().collect();
    for &t in full {
        active.insert(t, mu);
    }
    let dcols: Vec<usize> = partial
        .iter()
        .flat_map(|(t, r)| dof[t]..dof[t] + r.len())
        .collect();
    let mut target = Matrix::filled(mu, dcols.len(), Fe::ZERO);
    let mut j = 0;
    for (_, rows) in partial {
        for &r in rows {
            target.set(r - so, j, Fe::ONE);
            j += 1;
        }
    }
    let mut failing = String::from("disjoint receivers");
    for attempt in 0..RETRY_BUDGET as u64 {
        let mut rng = seed::rng(seed, &[attempt]);
        let mut assign = random_inner(net, field, &mut rng, &active);
        let (outs, k) = source_transfer(net, &assign, field, s);
        let kd = k.select_columns(&dcols);
        let piv = kd.independent_rows(field);
        if piv.len() < dcols.len() {
            failing = "disjoint receivers".into();
            continue;
        }
        let ksub = kd.select_rows(&piv);
        let asub = target.mul(field, &ksub.inverse(field)?);
        let mut a0 = Matrix::filled(mu, outs.len(), Fe::ZERO);
        for p in 0..mu {
            for (c, &r) in piv.iter().enumerate() {
                a0.set(p, r, *asub.get(p, c));
            }
        }
        let basis = kd.left_null_space(field);
        let blocks: Vec<Matrix<Fe>> = full
            .iter()
            .map(|t| k.select_columns(&(dof[t]..dof[t] + mu).collect::<Vec<_>>()))
            .collect();
        let mut chosen = None;
        for draw in 0..if full.is_empty() { 1 } else { NULL_SPACE_DRAWS } {
            let mut a = a0.clone();
            if !full.is_empty() {
                let mut nrng = seed::rng(seed, &[attempt, draw + 1]);
                for p in 0..mu {
                    for v in &basis {
                        let c = Fe(nrng.gen_range(0..field.order()) as u16);
                        for (col, &x) in v.iter().enumerate() {
                            let cur = *a.get(p, col);
                            a.set(p, col, cur + field.mul(c, x));
                        }
                    }
                }
            }
            match blocks.iter().position(|b| a.mul(field, b).det(field).is_zero()) {
                None => {
                    chosen = Some(a);
                    break;
                }
                Some(i) => failing = net.node(full[i]).id.clone(),
            }
        }
        let Some(a) = chosen else { continue };
        for p in 0..mu {
            for (c, &e) in outs.iter().enumerate() {
                assign.set_alpha(s, p, e, *a.get(p, c));
            }
        }
        match finalize(net, field, assign, Some(seed), attempt as usize + 1) {
            Ok(sol) => return Ok(sol),
            Err(t) => failing = net.node(t).id.clone(),
        }
    }
    Err(Error::RandomizationExhausted {
        attempts: RETRY_BUDGET,
        detail: format!("{failing} never decoded"),
    })
}

/// Sufficiency certificate for an arbitrary connection set: (1) every destination block of the
/// system matrix vanishes on source processes the destination does not demand, and (2) the
/// demanded rows of each block have full row rank. `false` does not prove infeasibility.
pub fn check_general_sufficiency(net: &AdtNetwork, assign: &CodingAssignment, field: &Field) -> Result<bool> {
    let sys = transfer::system_matrix(net, assign, field)?;
    let total = sys.matrix.rows();
    for (t, rows) in demands(net) {
        let block = sys.destination_block(net, t);
        let wanted: BTreeSet<usize> = rows.iter().copied().collect();
        for r in (0..total).filter(|r| !wanted.contains(r)) {
            if block.row(r).iter().any(|v| !v.is_zero()) {
                return Ok(false);
            }
        }
        if block.select_rows(&rows).rank(field) < rows.len() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Randomized positions counted in the success bound: source coefficients, and internal or
/// decoding coefficients whose input port lies downstream of some source output.
pub fn randomized_positions(net: &AdtNetwork) -> usize {
    let mut live: BTreeSet<PortId> = BTreeSet::new();
    let mut stack: Vec<PortId> = Vec::new();
    for s in net.sources() {
        for e in 0..net.node(s.node).outputs {
            stack.push(PortId::output(s.node, e));
        }
    }
    while let Some(p) = stack.pop() {
        if !live.insert(p) {
            continue;
        }
        match p.side {
            Side::Out => {
                for (v, x) in net.out_neighbors(p.node, p.index) {
                    stack.push(PortId::input(v, x));
                }
            }
            Side::In => {
                for y in 0..net.node(p.node).outputs {
                    stack.push(PortId::output(p.node, y));
                }
            }
        }
    }
    let pos = FreePositions::of(net);
    pos.alpha.len()
        + pos.beta.iter().filter(|&&(v, x, _)| live.contains(&PortId::input(v, x))).count()
        + pos.epsilon.iter().filter(|&&(t, x, _)| live.contains(&PortId::input(t, x))).count()
}

/// Empirical success rate of one-shot random coding next to the bound `(1 - N/q)^eta`.
#[derive(Clone, Debug, Serialize)]
pub struct SuccessEstimate {
    pub trials: usize,
    pub successes: usize,
    pub rate: f64,
    /// Number of receivers.
    pub receivers: usize,
    pub q: u32,
    pub eta: usize,
    pub bound: f64,
    /// The bound is zero because `N >= q`.
    pub vacuous: bool,
    pub feasible: bool,
}

impl SuccessEstimate {
    /// Binomial standard deviation of the rate at success probability `bound`.
    pub fn sigma(&self) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        (self.bound * (1.0 - self.bound) / self.trials as f64).sqrt()
    }
}

pub fn success_bound(receivers: usize, q: u32, eta: usize) -> f64 {
    if receivers as u64 >= q as u64 {
        0.0
    } else {
        (1.0 - receivers as f64 / q as f64).powi(eta as i32)
    }
}

pub fn estimate_success_probability(net: &AdtNetwork, field: &Field, trials: usize, seed: u64) -> Result<SuccessEstimate> {
    net.longest_path_depth()?;
    let receivers = demands(net).len();
    let q = field.order();
    let eta = randomized_positions(net);
    let feasible = match check_cut_conditions(net) {
        Ok(()) => true,
        Err(Error::Infeasible(_)) => false,
        Err(e) => return Err(e),
    };
    let successes = if feasible {
        (0..trials as u64)
            .into_par_iter()
            .filter(|&k| {
                let mut rng = seed::rng(seed, &[k]);
                let a = CodingAssignment::random(net, field, &mut rng);
                let sys = transfer::system_matrix(net, &a, field).expect("acyclic network");
                decoders(net, &sys, field).is_ok()
            })
            .count()
    } else {
        0
    };
    Ok(SuccessEstimate {
        trials,
        successes,
        rate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
        receivers,
        q,
        eta,
        bound: success_bound(receivers, q, eta),
        vacuous: receivers as u64 >= q as u64,
        feasible,
    })
}

/// Result of enumerating every binary source and internal coefficient.
#[derive(Clone, Debug, Serialize)]
pub struct ExhaustiveReport {
    pub alpha_positions: usize,
    pub beta_positions: usize,
    /// Source coefficient patterns with enough rank to serve the largest demand.
    pub alpha_patterns_kept: u64,
    pub assignments_checked: u64,
    pub solutions: u64,
}

/// Largest number of binary positions the exhaustive search enumerates.
pub const MAX_EXHAUSTIVE_BITS: usize = 30;

/// Counts binary (GF(2)) assignments of source and internal coefficients under which every
/// destination can decode for some choice of its decoding coefficients.
///
/// Decoding coefficients are eliminated exactly: a destination can decode iff each demanded
/// unit vector lies in the span of the coding vectors at its input ports. Source patterns whose
/// rank is below the largest demand are skipped, since no coding vector can leave their span.
pub fn exhaustive_gf2_search(net: &AdtNetwork) -> Result<ExhaustiveReport> {
    let s = single_source(net, "exhaustive search")?;
    let order = net.topological_port_order()?;
    let mu = source_process_count(net, s);
    if mu > 32 {
        return Err(Error::ComplexityRefusal("more than 32 source processes".into()));
    }
    let dem = demands(net);
    let so = source_offsets(net)[&s];
    let pos = FreePositions::of(net);
    let na = pos.alpha.len();
    let nb = pos.beta.len();
    if na + nb > MAX_EXHAUSTIVE_BITS {
        return Err(Error::ComplexityRefusal(format!(
            "{} binary positions exceed the exhaustive limit of {MAX_EXHAUSTIVE_BITS}",
            na + nb
        )));
    }
    enum Step {
        In(Vec<usize>),
        Out(Vec<(usize, usize)>, Vec<(usize, usize)>),
    }
    let mut alpha_at: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for (bit, &(_, i, e)) in pos.alpha.iter().enumerate() {
        alpha_at.entry(e).or_default().push((bit, i));
    }
    let mut beta_at: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
    for (bit, &(v, x, y)) in pos.beta.iter().enumerate() {
        beta_at.entry((v, y)).or_default().push((bit, order.input(v, x)));
    }
    let steps: Vec<Step> = order
        .ports()
        .iter()
        .map(|p| match p.side {
            Side::In => Step::In(
                net.in_neighbors(p.node, p.index)
                    .into_iter()
                    .map(|(u, o)| order.output(u, o))
                    .collect(),
            ),
            Side::Out => Step::Out(
                if p.node == s { alpha_at.get(&p.index).cloned().unwrap_or_default() } else { Vec::new() },
                beta_at.get(&(p.node, p.index)).cloned().unwrap_or_default(),
            ),
        })
        .collect();
    let sinks: Vec<(Vec<usize>, Vec<u64>)> = dem
        .iter()
        .map(|(t, rows)| {
            let ins = (0..net.node(*t).inputs).map(|x| order.input(*t, x)).collect();
            let units = rows.iter().map(|&r| 1u64 << (r - so)).collect();
            (ins, units)
        })
        .collect();
    let need = dem.iter().map(|(_, r)| r.len()).max().unwrap_or(0);
    let alpha_masks: Vec<u64> = (0..1u64 << na)
        .filter(|&m| {
            let mut rows = vec![0u64; mu];
            for (bit, &(_, i, e)) in pos.alpha.iter().enumerate() {
                if m >> bit & 1 == 1 {
                    rows[i] |= 1 << e;
                }
            }
            mincut::gf2_rank(rows.into_iter().map(|r| vec![r]).collect()) >= need
        })
        .collect();
    let eval = |am: u64, bm: u64| -> bool {
        let mut vec = vec![0u64; steps.len()];
        for (k, st) in steps.iter().enumerate() {
            vec[k] = match st {
                Step::In(tails) => tails.iter().fold(0, |a, &t| a ^ vec[t]),
                Step::Out(al, be) => {
                    let mut v = 0u64;
                    for &(bit, i) in al {
                        if am >> bit & 1 == 1 {
                            v ^= 1 << i;
                        }
                    }
                    for &(bit, x) in be {
                        if bm >> bit & 1 == 1 {
                            v ^= vec[x];
                        }
                    }
                    v
                }
            };
        }
        sinks.iter().all(|(ins, units)| {
            let base: Vec<Vec<u64>> = ins.iter().map(|&x| vec![vec[x]]).collect();
            let r = mincut::gf2_rank(base.clone());
            let mut ext = base;
            ext.extend(units.iter().map(|&u| vec![u]));
            mincut::gf2_rank(ext) == r
        })
    };
    let solutions: u64 = alpha_masks
        .par_iter()
        .map(|&am| (0..1u64 << nb).filter(|&bm| eval(am, bm)).count() as u64)
        .sum();
    Ok(ExhaustiveReport {
        alpha_positions: na,
        beta_positions: nb,
        alpha_patterns_kept: alpha_masks.len() as u64,
        assignments_checked: alpha_masks.len() as u64 * (1u64 << nb),
        solutions,
    })
}

/// Field description inside solution files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDoc {
    pub m: u32,
    pub poly: u32,
}

impl FieldDoc {
    pub fn of(field: &Field) -> Self {
        FieldDoc {
            m: field.degree(),
            poly: field.polynomial(),
        }
    }

    pub fn field(&self) -> Result<Field> {
        Field::with_polynomial(self.m, self.poly)
    }
}

/// Serialized [`CodeSolution`]. Coefficients are keyed `S[i]->S:out:e`, `V:in:x->V:out:y` and
/// `T:in:x->T[k]`; decoders are integer grids keyed by destination id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionDoc {
    pub field: FieldDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    pub alpha: BTreeMap<String, u32>,
    pub beta: BTreeMap<String, u32>,
    pub epsilon: BTreeMap<String, u32>,
    pub decoders: BTreeMap<String, Vec<Vec<u32>>>,
}

fn split_key(k: &str) -> Result<(&str, &str)> {
    k.split_once("->")
        .ok_or_else(|| Error::usage(format!("malformed coefficient key {k:?}")))
}

fn parse_process(net: &AdtNetwork, s: &str) -> Result<(usize, usize)> {
    let bad = || Error::usage(format!("malformed process reference {s:?}"));
    let (id, rest) = s.rsplit_once('[').ok_or_else(bad)?;
    let k: usize = rest.strip_suffix(']').ok_or_else(bad)?.parse().map_err(|_| bad())?;
    Ok((net.require(id)?, k))
}

impl CodeSolution {
    pub fn to_doc(&self, net: &AdtNetwork) -> SolutionDoc {
        let out = |v, e| net.port_ref(PortId::output(v, e));
        let inp = |v, x| net.port_ref(PortId::input(v, x));
        let id = |v: usize| net.node(v).id.clone();
        SolutionDoc {
            field: FieldDoc::of(&self.field),
            seed: self.seed,
            strategy: None,
            alpha: self
                .assign
                .alpha
                .iter()
                .map(|(&(s, i, e), v)| (format!("{}[{i}]->{}", id(s), out(s, e)), v.0 as u32))
                .collect(),
            beta: self
                .assign
                .beta
                .iter()
                .map(|(&(v, x, y), c)| (format!("{}->{}", inp(v, x), out(v, y)), c.0 as u32))
                .collect(),
            epsilon: self
                .assign
                .epsilon
                .iter()
                .map(|(&(t, x, k), c)| (format!("{}->{}[{k}]", inp(t, x), id(t)), c.0 as u32))
                .collect(),
            decoders: self
                .decoders
                .iter()
                .map(|(&t, d)| {
                    let grid = (0..d.rows()).map(|r| d.row(r).iter().map(|e| e.0 as u32).collect()).collect();
                    (id(t), grid)
                })
                .collect(),
        }
    }

    pub fn from_doc(net: &AdtNetwork, doc: &SolutionDoc) -> Result<CodeSolution> {
        let field = doc.field.field()?;
        let fe = |v: u32| field.element(v);
        let side = |p: PortId, want: Side, k: &str| {
            if p.side == want {
                Ok(p)
            } else {
                Err(Error::usage(format!("wrong port side in {k:?}")))
            }
        };
        let mut assign = CodingAssignment::new();
        for (k, &v) in &doc.alpha {
            let (l, r) = split_key(k)?;
            let (s, i) = parse_process(net, l)?;
            let p = side(net.parse_port(r)?, Side::Out, k)?;
            if p.node != s {
                return Err(Error::usage(format!("alpha key {k:?} crosses supernodes")));
            }
            assign.set_alpha(s, i, p.index, fe(v)?);
        }
        for (k, &v) in &doc.beta {
            let (l, r) = split_key(k)?;
            let a = side(net.parse_port(l)?, Side::In, k)?;
            let b = side(net.parse_port(r)?, Side::Out, k)?;
            if a.node != b.node {
                return Err(Error::usage(format!("beta key {k:?} crosses supernodes")));
            }
            assign.set_beta(a.node, a.index, b.index, fe(v)?);
        }
        for (k, &v) in &doc.epsilon {
            let (l, r) = split_key(k)?;
            let a = side(net.parse_port(l)?, Side::In, k)?;
            let (t, kk) = parse_process(net, r)?;
            if a.node != t {
                return Err(Error::usage(format!("epsilon key {k:?} crosses supernodes")));
            }
            assign.set_epsilon(t, a.index, kk, fe(v)?);
        }
        assign.check(net, &field)?;
        let mut decoders = BTreeMap::new();
        for (id, grid) in &doc.decoders {
            let t = net.require(id)?;
            let rows = grid
                .iter()
                .map(|r| r.iter().map(|&v| fe(v)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            let cols = rows.first().map_or(0, |r| r.len());
            if rows.iter().any(|r| r.len() != cols) {
                return Err(Error::usage(format!("decoder for {id} is not rectangular")));
            }
            decoders.insert(t, Matrix::from_rows(rows));
        }
        Ok(CodeSolution {
            field,
            assign,
            decoders,
            seed: doc.seed,
            attempts: 0,
        })
    }

    pub fn to_json(&self, net: &AdtNetwork) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_doc(net)).expect("serializable");
        s.push('\n');
        s
    }
}

impl SolutionDoc {
    pub fn from_json(text: &str) -> Result<SolutionDoc> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            col: e.column(),
            msg: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }
}
