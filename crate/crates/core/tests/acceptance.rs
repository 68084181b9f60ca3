//! Acceptance suite. Prints one PASS/FAIL line per criterion, then fails if any criterion failed.
//!
//! Run with `cargo test -p adtnc-core --test acceptance -- --nocapture` to see the lines on
//! success as well.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use adtnc_core::codegen::{self, BoundPolicy, CodegenConfig, FieldBounds, MulticastCode, Strategy};
use adtnc_core::coding::{self, ConnectionKind};
use adtnc_core::delay;
use adtnc_core::ff::{Fe, Field, Matrix, RationalField};
use adtnc_core::fixtures::{self, RandomLayered};
use adtnc_core::mincut;
use adtnc_core::network::AdtNetwork;
use adtnc_core::robust::{self, ErasureDistribution, FailurePattern};
use adtnc_core::seed;
use adtnc_core::transfer::{self, CodingAssignment};
use num_bigint::BigUint;
use num_rational::BigRational;
use rand::Rng;

// Pinned tolerances and budgets.
const C1_LIMIT: Duration = Duration::from_secs(1);
const C2_LIMIT: Duration = Duration::from_secs(5);
const C2_DRAWS: u64 = 20;
const C2_DEGREE: usize = 5;
const C3_LIMIT: Duration = Duration::from_secs(60);
const C3_NETWORKS: u64 = 200;
const C3_TRIALS: usize = 200;
const C4_SEEDS: u64 = 200;
const C5_LIMIT: Duration = Duration::from_secs(60);
const C5_TRIALS: usize = 1000;
const C5_SIGMAS: f64 = 3.0;
const C6_LIMIT: Duration = Duration::from_secs(300);
const C6_INSTANCES: usize = 100;
const C6_MAX_MEAN_DRAWS: f64 = 2.0;
const C9_INSTANCES: usize = 20;

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome {
        ok: true,
        detail: detail.into(),
    }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome {
        ok: false,
        detail: detail.into(),
    }
}

fn gf(q: u32) -> Field {
    Field::with_order(q).unwrap()
}

fn within(o: Outcome, took: Duration, limit: Option<Duration>) -> Outcome {
    match limit {
        Some(l) if took > l => fail(format!("{}; took {took:.2?} > {l:?}", o.detail)),
        _ => o,
    }
}

/// 12x12 grid from 1-indexed entries, `diag` on the diagonal and "0" elsewhere.
fn grid(entries: &[(usize, usize, &str)], diag: &str) -> Vec<Vec<String>> {
    let mut g = vec![vec!["0".to_string(); 12]; 12];
    for (i, row) in g.iter_mut().enumerate() {
        row[i] = diag.to_string();
    }
    for &(r, c, s) in entries {
        g[r - 1][c - 1] = s.to_string();
    }
    g
}

fn first_mismatch(got: &[Vec<String>], want: &[Vec<String>]) -> Option<String> {
    if got.len() != want.len() {
        return Some(format!("{} rows, expected {}", got.len(), want.len()));
    }
    for (r, (a, b)) in got.iter().zip(want).enumerate() {
        for (c, (x, y)) in a.iter().zip(b).enumerate() {
            if x != y {
                return Some(format!("entry ({}, {}) is {x:?}, expected {y:?}", r + 1, c + 1));
            }
        }
    }
    None
}

fn c1_symbolic_f() -> Outcome {
    let want = grid(
        &[
            (1, 3, "1"),
            (1, 6, "1"),
            (2, 4, "1"),
            (3, 7, "b(e3,e7)"),
            (4, 7, "b(e4,e7)"),
            (6, 9, "b(e6,e9)"),
            (6, 10, "b(e6,e10)"),
            (7, 12, "1"),
            (9, 11, "1"),
            (10, 12, "1"),
        ],
        "0",
    );
    let net = fixtures::fig3();
    let order = net.topological_port_order().unwrap();
    let mut vars = adtnc_core::ff::VarTable::new();
    let f = transfer::symbolic_f(&net, &order, &mut vars);
    let got = transfer::format_symbolic(&f, &vars);
    match first_mismatch(&got, &want) {
        None => pass("12x12 symbolic F matches entrywise"),
        Some(m) => fail(m),
    }
}

fn c2_delay_inverse() -> Outcome {
    let want = grid(
        &[
            (1, 3, "D"),
            (1, 6, "D"),
            (1, 7, "D^2*b(e3,e7)"),
            (1, 9, "D^2*b(e6,e9)"),
            (1, 10, "D^2*b(e6,e10)"),
            (1, 11, "D^3*b(e6,e9)"),
            (1, 12, "D^3*b(e3,e7) + D^3*b(e6,e10)"),
            (2, 4, "D"),
            (2, 7, "D^2*b(e4,e7)"),
            (2, 12, "D^3*b(e4,e7)"),
            (3, 7, "D*b(e3,e7)"),
            (3, 12, "D^2*b(e3,e7)"),
            (4, 7, "D*b(e4,e7)"),
            (4, 12, "D^2*b(e4,e7)"),
            (6, 9, "D*b(e6,e9)"),
            (6, 10, "D*b(e6,e10)"),
            (6, 11, "D^2*b(e6,e9)"),
            (6, 12, "D^2*b(e6,e10)"),
            (7, 12, "D"),
            (9, 11, "D"),
            (10, 12, "D"),
        ],
        "1",
    );
    let net = fixtures::fig3();
    let field = gf(16);
    let (inv, vars, _) = delay::symbolic_delay_inverse(&net, &field, None).unwrap();
    let got = transfer::format_symbolic(&inv, &vars);
    if let Some(m) = first_mismatch(&got, &want) {
        return fail(format!("symbolic inverse: {m}"));
    }
    let rf = RationalField::new(field.clone());
    let order = net.topological_port_order().unwrap();
    for k in 0..C2_DRAWS {
        let mut rng = seed::rng(2, &[k]);
        let a = CodingAssignment::random(&net, &field, &mut rng);
        let f = transfer::build_f(&net, &order, &a);
        let exact = delay::inverse_i_minus_df(&field, &f);
        let series = delay::truncated_series(&field, &f, C2_DEGREE);
        for (r, c, e) in exact.iter() {
            let Some(s) = rf.series(e, C2_DEGREE) else {
                return fail(format!("draw {k}: entry ({r}, {c}) has no power series"));
            };
            if &s != series.get(r, c) {
                return fail(format!("draw {k}: entry ({r}, {c}) differs from the truncated series"));
            }
        }
    }
    pass(format!("symbolic inverse matches; {C2_DRAWS} GF(16) draws agree through D^{C2_DEGREE}"))
}

fn c3_mincut_agreement() -> Outcome {
    let field = gf(256);
    let shape = RandomLayered::default();
    let mut positive = 0;
    for k in 0..C3_NETWORKS {
        let mut rng = seed::rng(3, &[k]);
        let net = fixtures::random_layered(&mut rng, &shape);
        let s = net.node_index("S").unwrap();
        let sinks: Vec<usize> = (0..net.num_nodes()).filter(|&v| net.node(v).id.starts_with('t')).collect();
        let t = sinks[rng.gen_range(0..sinks.len())];
        let comb = mincut::mincut_combinatorial(&net, s, t).unwrap().value;
        let alg = mincut::mincut_algebraic(&net, s, t, &field, C3_TRIALS, k).unwrap();
        if comb != alg {
            return fail(format!("network {k}: combinatorial {comb}, algebraic {alg}"));
        }
        positive += usize::from(comb > 0);
    }
    pass(format!("{C3_NETWORKS} networks agree ({positive} with a positive cut)"))
}

fn all_ok(checks: &[coding::DecodeCheck]) -> bool {
    checks.iter().all(|c| c.ok)
}

fn c4_two_hop_relay() -> Outcome {
    let net = fixtures::fig2();
    let ex = coding::exhaustive_gf2_search(&net).unwrap();
    if ex.solutions != 0 {
        return fail(format!("{} binary solutions found", ex.solutions));
    }
    let f4 = gf(4);
    let random = (0..C4_SEEDS).find_map(|s| {
        let sol = coding::random_code(&net, &f4, s).ok()?;
        let checks = coding::verify_solution(&net, &sol, coding::VERIFY_VECTORS, s).ok()?;
        (checks.len() == 6 && all_ok(&checks)).then_some(s)
    });
    let Some(random_seed) = random else {
        return fail(format!("no random GF(4) code within seeds 0..{C4_SEEDS}"));
    };
    let cfg = CodegenConfig {
        strategy: Strategy::Deterministic,
        policy: BoundPolicy::BestEffort,
        list_cap: usize::MAX,
        ..CodegenConfig::default()
    };
    let head = format!(
        "GF(2): 0 of {} assignments; random GF(4) at seed {random_seed}: 6/6",
        ex.assignments_checked
    );
    match codegen::construct_multicast_code(&net, 2, &f4, &cfg) {
        Ok(code) => {
            let checks = coding::verify_solution(&net, &code.solution, coding::VERIFY_VECTORS, 0).unwrap();
            if checks.len() == 6 && all_ok(&checks) {
                pass(format!("{head}; deterministic GF(4): 6/6"))
            } else {
                fail(format!("{head}; deterministic GF(4) code does not decode"))
            }
        }
        Err(e) => fail(format!("{head}; deterministic GF(4): {e}")),
    }
}

fn c5_random_bound() -> Outcome {
    let cases = [("diamond", fixtures::diamond(), 16), ("fig3", fixtures::fig3(), 16), ("fig2", fixtures::fig2(), 256)];
    let mut parts = Vec::new();
    for (name, net, q) in cases {
        let est = coding::estimate_success_probability(&net, &gf(q), C5_TRIALS, 5).unwrap();
        if est.bound <= 0.0 {
            return fail(format!("{name}: bound is not positive"));
        }
        let floor = est.bound - C5_SIGMAS * est.sigma();
        if est.rate < floor {
            return fail(format!("{name}: rate {:.3} < bound {:.3} - 3 sigma", est.rate, est.bound));
        }
        parts.push(format!("{name} GF({q}) {:.3} >= {:.3}", est.rate, est.bound));
    }
    pass(parts.join("; "))
}

/// Smallest power of two at least `x`.
fn field_at_least(x: u64) -> Option<Field> {
    let m = 64 - x.max(2).saturating_sub(1).leading_zeros();
    Field::new(m).ok()
}

/// Every node of `V(R)` other than the source has a decoder `D` with `G D = I`, where `G` holds
/// the global coding vectors of its decoding ports.
fn node_decoders_sound(net: &AdtNetwork, code: &MulticastCode, field: &Field) -> Result<(), String> {
    let order = net.topological_port_order().unwrap();
    let pv = transfer::port_vectors(net, &order, &code.solution.assign, field).unwrap();
    for v in mincut::compute_vr(net, code.source, code.rate).unwrap() {
        if v == code.source {
            continue;
        }
        let d = code
            .node_decoders
            .get(&v)
            .ok_or_else(|| format!("{} has no decoder", net.node(v).id))?;
        let cols: Vec<usize> = d.ports.iter().map(|&x| order.input(v, x)).collect();
        if !pv.select_columns(&cols).mul(field, &d.matrix).is_identity(field) {
            return Err(format!("{} decoder is wrong", net.node(v).id));
        }
    }
    Ok(())
}

fn c6_construction() -> Outcome {
    let shape = RandomLayered::default();
    let mut instances = Vec::new();
    let mut k = 0u64;
    while instances.len() < C6_INSTANCES {
        let mut rng = seed::rng(6, &[k]);
        k += 1;
        if let Some(net) = fixtures::random_multicast(&mut rng, &shape) {
            instances.push(net);
        }
    }
    let mut draws = Vec::new();
    for (i, net) in instances.iter().enumerate() {
        let s = net.node_index("S").unwrap();
        let rate = net.source(s).unwrap().processes;
        let b = FieldBounds::of(net, s, rate, 0).unwrap();
        let sufficient = b.output_bound.max(b.input_bound) + 1;
        let runs = [
            (Strategy::Deterministic, sufficient),
            (Strategy::LasVegas, b.two_draw_field().max(sufficient)),
        ];
        for (strategy, need) in runs {
            let Some(field) = field_at_least(need) else {
                return fail(format!("instance {i}: no field of order >= {need}"));
            };
            let cfg = CodegenConfig {
                strategy,
                policy: BoundPolicy::Strict,
                seed: i as u64,
                list_cap: usize::MAX,
                ..CodegenConfig::default()
            };
            let code = match codegen::construct_multicast_code(net, rate, &field, &cfg) {
                Ok(c) => c,
                Err(e) => return fail(format!("instance {i} {strategy:?} over GF({}): {e}", field.order())),
            };
            let checks = coding::verify_solution(net, &code.solution, coding::VERIFY_VECTORS, i as u64).unwrap();
            if !all_ok(&checks) {
                return fail(format!("instance {i} {strategy:?}: a destination does not decode"));
            }
            if let Err(e) = node_decoders_sound(net, &code, &field) {
                return fail(format!("instance {i} {strategy:?}: {e}"));
            }
            if strategy == Strategy::LasVegas {
                draws.extend(code.trace.iter().filter(|s| s.phase == "output" && s.draws > 0).map(|s| s.draws));
            }
        }
    }
    let mean = draws.iter().sum::<usize>() as f64 / draws.len().max(1) as f64;
    if mean > C6_MAX_MEAN_DRAWS {
        return fail(format!("mean output draws {mean:.3} > {C6_MAX_MEAN_DRAWS}"));
    }
    pass(format!(
        "{C6_INSTANCES} instances decode at every V(R) node in both modes; mean output draws {mean:.3} over {} steps",
        draws.len()
    ))
}

fn brute_nonsingular(q: u32, p: usize) -> u64 {
    let field = gf(q);
    let cells = p * p;
    let total = (q as u64).pow(cells as u32);
    (0..total)
        .filter(|&code| {
            let mut c = code;
            let m = Matrix::from_fn(p, p, |_, _| {
                let v = Fe((c % q as u64) as u16);
                c /= q as u64;
                v
            });
            !m.det(&field).is_zero()
        })
        .count() as u64
}

fn c7_nonsingular_counts() -> Outcome {
    let mut parts = Vec::new();
    for (q, p) in [(2u32, 1u32), (2, 2), (4, 1), (4, 2)] {
        let want = brute_nonsingular(q, p as usize);
        let got = codegen::count_nonsingular_matrices(q as u64, p);
        if got != BigUint::from(want) {
            return fail(format!("q={q} p={p}: formula {got}, enumeration {want}"));
        }
        parts.push(format!("({q},{p})={want}"));
    }
    pass(parts.join(" "))
}

fn c8_static_erasure_code() -> Outcome {
    let net = fixtures::diamond();
    let pats: Vec<FailurePattern> = fixtures::diamond_failures()
        .iter()
        .map(|e| FailurePattern::parse(&net, &[e.to_string()]).unwrap())
        .collect();
    let receivers = coding::demands(&net).len() as u32;
    let field = gf((pats.len() as u32 * receivers + 1).next_power_of_two());
    let sol = match robust::find_static_solution(&net, &pats, &field, 8) {
        Ok(s) => s,
        Err(e) => return fail(format!("no static solution over GF({}): {e}", field.order())),
    };
    for (i, f) in pats.iter().enumerate() {
        let g = robust::apply_failure(&net, f).unwrap();
        let sys = transfer::system_matrix(&g, &sol.assign, &field).unwrap();
        for (t, rows) in coding::demands(&g) {
            let got = sys.destination_block(&g, t).mul(&field, &sol.decoders[i][&t]);
            let ok = (0..got.rows())
                .all(|r| (0..got.cols()).all(|c| *got.get(r, c) == if rows[c] == r { Fe::ONE } else { Fe::ZERO }));
            if !ok {
                return fail(format!("pattern {i}: {} does not decode", g.node(t).id));
            }
        }
    }
    let half = BigRational::new(1.into(), 2.into());
    let dist = ErasureDistribution::new(pats.into_iter().map(|p| (p, half.clone())).collect(), true).unwrap();
    let (s, t) = (net.node_index("S").unwrap(), net.node_index("T").unwrap());
    let avg = robust::time_average_mincut(&net, s, t, &dist).unwrap();
    if avg.value != BigRational::from_integer(1.into()) || avg.per_pattern != [1, 1] {
        return fail(format!("average min-cut {} ({:?}), expected exactly 1", avg.value, avg.per_pattern));
    }
    pass(format!("GF({}) static code decodes under both patterns; average min-cut = 1", field.order()))
}

/// Whether a single source can deliver `demands[t]` fresh processes to each listed sink at once:
/// each sink gets `demands[t]` new outputs into a common receiver whose min-cut must reach the sum.
fn disjoint_feasible(net: &AdtNetwork, s: usize, demands: &[(usize, usize)]) -> bool {
    let mut g = net.clone();
    let total: usize = demands.iter().map(|&(_, d)| d).sum();
    let star = g.add_node("T*", total, 0, None).unwrap();
    let mut j = 0;
    for &(t, d) in demands {
        let first = g.add_output_ports(t, d);
        for k in 0..d {
            g.add_edge((t, first + k), (star, j)).unwrap();
            j += 1;
        }
    }
    mincut::mincut(&g, s, star).unwrap() >= total
}

/// Random disjoint (and, with `full`, two-level) connection sets on random layered networks.
/// Demands are consecutive process blocks in sink order so the disjoint system matrix is the
/// identity; full-rate sinks are appended after the partial ones.
fn random_levels(rng: &mut impl Rng, full: bool) -> Option<AdtNetwork> {
    let shape = RandomLayered {
        max_layers: 3,
        ..RandomLayered::default()
    };
    let mut net = fixtures::random_layered(rng, &shape);
    let s = net.node_index("S").unwrap();
    let sinks: Vec<usize> = (0..net.num_nodes()).filter(|&v| net.node(v).id.starts_with('t')).collect();
    let need = if full { 3 } else { 2 };
    if sinks.len() < need {
        return None;
    }
    let partial = &sinks[..sinks.len() - usize::from(full)];
    let mut demands = Vec::new();
    for &t in partial {
        let cut = mincut::mincut(&net, s, t).unwrap();
        if cut == 0 {
            return None;
        }
        demands.push((t, rng.gen_range(1..=cut)));
    }
    if !disjoint_feasible(&net, s, &demands) {
        return None;
    }
    let mu: usize = demands.iter().map(|&(_, d)| d).sum();
    if full {
        let t = *sinks.last().unwrap();
        if mincut::mincut(&net, s, t).unwrap() < mu {
            return None;
        }
    }
    net.add_source("S", mu).unwrap();
    let mut next = 0;
    for &(t, d) in &demands {
        let id = net.node(t).id.clone();
        net.add_destination(&id, d).unwrap();
        net.add_connection("S", &id, (next..next + d).collect()).unwrap();
        next += d;
    }
    if full {
        let id = net.node(*sinks.last().unwrap()).id.clone();
        net.add_destination(&id, mu).unwrap();
        net.add_connection("S", &id, (0..mu).collect()).unwrap();
    }
    Some(net)
}

fn c9_disjoint_and_two_level() -> Outcome {
    let field = gf(256);
    let mut counts = BTreeMap::new();
    for full in [false, true] {
        let mut done = 0;
        let mut k = 0u64;
        while done < C9_INSTANCES {
            let mut rng = seed::rng(9, &[u64::from(full), k]);
            k += 1;
            let Some(net) = random_levels(&mut rng, full) else { continue };
            let want = if full { ConnectionKind::TwoLevel } else { ConnectionKind::DisjointMulticast };
            if coding::classify(&net) != want {
                return fail(format!("instance {k} classified as {:?}", coding::classify(&net)));
            }
            if full {
                let sol = match coding::solve_two_level(&net, &field, k) {
                    Ok(s) => s,
                    Err(e) => return fail(format!("two-level instance {k}: {e}")),
                };
                let checks = coding::verify_solution(&net, &sol, coding::VERIFY_VECTORS, k).unwrap();
                if !all_ok(&checks) {
                    return fail(format!("two-level instance {k}: a receiver does not decode"));
                }
            } else {
                let sol = match coding::solve_disjoint_multicast(&net, &field, k) {
                    Ok(s) => s,
                    Err(e) => return fail(format!("disjoint instance {k}: {e}")),
                };
                let sys = transfer::system_matrix(&net, &sol.assign, &field).unwrap();
                if !sys.matrix.is_identity(&field) {
                    return fail(format!("disjoint instance {k}: system matrix is not the identity"));
                }
            }
            done += 1;
        }
        counts.insert(if full { "two-level" } else { "disjoint" }, k);
    }
    pass(format!(
        "{C9_INSTANCES} disjoint (identity) and {C9_INSTANCES} two-level (all decode); drew {} and {} candidates",
        counts["disjoint"], counts["two-level"]
    ))
}

#[test]
fn acceptance_criteria() {
    type Check = fn() -> Outcome;
    let criteria: [(&str, Check, Option<Duration>); 9] = [
        ("1 symbolic transfer matrix F", c1_symbolic_f, Some(C1_LIMIT)),
        ("2 symbolic (I - DF)^-1 and truncated series", c2_delay_inverse, Some(C2_LIMIT)),
        ("3 algebraic vs combinatorial min-cut", c3_mincut_agreement, Some(C3_LIMIT)),
        ("4 rate-2 relay network codes", c4_two_hop_relay, None),
        ("5 random coding success bound", c5_random_bound, Some(C5_LIMIT)),
        ("6 multicast code construction", c6_construction, Some(C6_LIMIT)),
        ("7 nonsingular matrix count", c7_nonsingular_counts, None),
        ("8 static erasure code and average min-cut", c8_static_erasure_code, None),
        ("9 disjoint and two-level multicast", c9_disjoint_and_two_level, None),
    ];
    let mut failed = Vec::new();
    for (name, check, limit) in criteria {
        let start = Instant::now();
        let o = check();
        let took = start.elapsed();
        let o = within(o, took, limit);
        println!("{} criterion {name}: {} ({took:.2?})", if o.ok { "PASS" } else { "FAIL" }, o.detail);
        if !o.ok {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
