//! Invariants checked over random instances.

use adtnc_core::coding;
use adtnc_core::delay::{self, DelayAssignment};
use adtnc_core::ff::{DPolynomial, DRational, Fe, Field, Matrix, PolyRing, RationalField, Ring};
use adtnc_core::fixtures::{self, RandomLayered};
use adtnc_core::mincut;
use adtnc_core::network::AdtNetwork;
use adtnc_core::robust::{self, ErasureDistribution, FailurePattern};
use adtnc_core::seed;
use adtnc_core::transfer::{self, CodingAssignment, FreePositions};
use adtnc_core::Error;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::Rng;

fn random_field(m: u32) -> Field {
    Field::new(m).unwrap()
}

fn multicast(seed: u64) -> Option<AdtNetwork> {
    fixtures::random_multicast(&mut seed::rng(seed, &[]), &RandomLayered::default())
}

fn random_matrix(rng: &mut impl Rng, field: &Field, rows: usize, cols: usize) -> Matrix<Fe> {
    Matrix::from_fn(rows, cols, |_, _| Fe(rng.gen_range(0..field.order()) as u16))
}

/// Adds a second source `S2` in layer 0 wired at random into layer 1, multicasting both sources'
/// processes to every sink.
fn two_source(seed: u64) -> Option<AdtNetwork> {
    let mut rng = seed::rng(seed, &[]);
    let shape = RandomLayered {
        max_layers: 3,
        ..RandomLayered::default()
    };
    let mut net = fixtures::random_layered(&mut rng, &shape);
    let n = net.node(0).outputs;
    let s2 = net.add_node("S2", 0, n, Some(0)).unwrap();
    let layer1: Vec<usize> = (0..net.num_nodes()).filter(|&v| net.node(v).layer == Some(1)).collect();
    for out in 0..n {
        for &v in &layer1 {
            if rng.gen_bool(0.5) {
                let inp = rng.gen_range(0..net.node(v).inputs);
                net.add_edge((s2, out), (v, inp)).unwrap();
            }
        }
    }
    let (a, b) = (rng.gen_range(1..=n), rng.gen_range(1..=n));
    if a + b > 3 {
        return None;
    }
    net.add_source("S", a).unwrap();
    net.add_source("S2", b).unwrap();
    let sinks: Vec<String> = net.nodes().iter().filter(|v| v.id.starts_with('t')).map(|v| v.id.clone()).collect();
    for t in &sinks {
        net.add_destination(t, a + b).unwrap();
        net.add_connection("S", t, (0..a).collect()).unwrap();
        net.add_connection("S2", t, (0..b).collect()).unwrap();
    }
    Some(net)
}

/// Min over supernode cuts with both sources on one side and `t` on the other, by enumeration.
fn brute_multi_source_cut(net: &AdtNetwork, sources: &[usize], t: usize) -> usize {
    let field = random_field(1);
    let free: Vec<usize> = (0..net.num_nodes()).filter(|v| !sources.contains(v) && *v != t).collect();
    (0..1u64 << free.len())
        .map(|mask| {
            let mut omega = vec![false; net.num_nodes()];
            for &s in sources {
                omega[s] = true;
            }
            for (i, &v) in free.iter().enumerate() {
                omega[v] = mask >> i & 1 == 1;
            }
            mincut::cut_incidence(net, &omega).rank(&field)
        })
        .min()
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn inverse_times_matrix_is_identity(m in 1u32..=8, size in 1usize..=8, s in any::<u64>()) {
        let field = random_field(m);
        let a = random_matrix(&mut seed::rng(s, &[]), &field, size, size);
        if !a.det(&field).is_zero() {
            let inv = a.inverse(&field).unwrap();
            prop_assert!(inv.mul(&field, &a).is_identity(&field));
        } else {
            prop_assert!(a.inverse(&field).is_err());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rationals_with_unit_denominator_match_polynomials(s in any::<u64>()) {
        let field = random_field(4);
        let (pr, rf) = (PolyRing::new(field.clone()), RationalField::new(field.clone()));
        let mut rng = seed::rng(s, &[]);
        let mut poly = || {
            let len = rng.gen_range(0..5);
            DPolynomial::from_coeffs((0..len).map(|_| Fe(rng.gen_range(0..16))).collect())
        };
        let (a, b) = (poly(), poly());
        let (ra, rb) = (DRational::from_poly(a.clone()), DRational::from_poly(b.clone()));
        prop_assert!(rf.equal(&rf.add(&ra, &rb), &DRational::from_poly(pr.add(&a, &b))));
        prop_assert!(rf.equal(&rf.mul(&ra, &rb), &DRational::from_poly(pr.mul(&a, &b))));
    }

    #[test]
    fn simulate_agrees_with_system_matrix(s in any::<u64>(), m in 1u32..=8) {
        let Some(net) = multicast(s) else { return Ok(()) };
        let field = random_field(m);
        let mut rng = seed::rng(s, &[1]);
        let assign = CodingAssignment::random(&net, &field, &mut rng);
        let sys = transfer::system_matrix(&net, &assign, &field).unwrap();
        let x: Vec<Fe> = (0..sys.matrix.rows()).map(|_| Fe(rng.gen_range(0..field.order()) as u16)).collect();
        let z = transfer::simulate(&net, &assign, &field, &x).unwrap();
        prop_assert_eq!(z, Matrix::from_rows(vec![x]).mul(&field, &sys.matrix).row(0).to_vec());
    }

    #[test]
    fn f_is_nilpotent_and_inverse_is_exact(s in any::<u64>()) {
        let Some(net) = multicast(s) else { return Ok(()) };
        let field = random_field(4);
        let assign = CodingAssignment::random(&net, &field, &mut seed::rng(s, &[2]));
        let order = net.topological_port_order().unwrap();
        let f = transfer::build_f(&net, &order, &assign);
        let p = f.rows();
        let mut power = Matrix::identity(&field, p);
        let mut series = Matrix::identity(&field, p);
        for _ in 1..p {
            power = power.mul(&field, &f);
            series = series.add(&field, &power);
        }
        prop_assert!(power.mul(&field, &f).is_zero(&field));
        let i_minus_f = Matrix::identity(&field, p).sub(&field, &f);
        prop_assert!(i_minus_f.mul(&field, &series).is_identity(&field));
        prop_assert_eq!(transfer::inverse_i_minus_f(&field, &f), series);
    }

    #[test]
    fn system_matrix_is_affine_in_each_coefficient(s in any::<u64>()) {
        let Some(net) = multicast(s) else { return Ok(()) };
        let field = random_field(4);
        let mut rng = seed::rng(s, &[3]);
        let base = CodingAssignment::random(&net, &field, &mut rng);
        let pos = FreePositions::of(&net);
        if pos.beta.is_empty() {
            return Ok(());
        }
        let (v, x, y) = pos.beta[rng.gen_range(0..pos.beta.len())];
        let at = |c: Fe| {
            let mut a = base.clone();
            a.set_beta(v, x, y, c);
            transfer::system_matrix(&net, &a, &field).unwrap().matrix
        };
        let (m0, m1) = (at(Fe::ZERO), at(Fe::ONE));
        let c = Fe(rng.gen_range(0..16));
        let slope = m1.sub(&field, &m0);
        prop_assert_eq!(at(c), m0.add(&field, &slope.scale(&field, &c)));
    }

    #[test]
    fn port_order_and_json_are_deterministic(s in any::<u64>()) {
        let Some(net) = multicast(s) else { return Ok(()) };
        let a = net.topological_port_order().unwrap();
        let back = AdtNetwork::from_json(&net.to_json()).unwrap();
        prop_assert_eq!(a.labels(), back.topological_port_order().unwrap().labels());
        prop_assert_eq!(net.to_json(), back.to_json());
    }

    #[test]
    fn mincut_is_bounded_and_monotone_under_port_silencing(s in any::<u64>()) {
        let mut rng = seed::rng(s, &[]);
        let net = fixtures::random_layered(&mut rng, &RandomLayered::default());
        let src = net.node_index("S").unwrap();
        let sinks: Vec<usize> = (0..net.num_nodes()).filter(|&v| net.node(v).id.starts_with('t')).collect();
        let t = sinks[rng.gen_range(0..sinks.len())];
        let cut = mincut::mincut(&net, src, t).unwrap();
        prop_assert!(cut <= net.node(src).outputs.min(net.node(t).inputs));
        let edges: Vec<_> = net.edges().cloned().collect();
        if let Some(e) = edges.get(rng.gen_range(0..edges.len().max(1))) {
            let silenced = |keep: &dyn Fn(&adtnc_core::network::Edge) -> bool| {
                let mut g = net.clone();
                for d in edges.iter().filter(|d| !keep(d)) {
                    g.remove_edge(d);
                }
                mincut::mincut(&g, src, t).unwrap()
            };
            prop_assert!(silenced(&|d| d.from != e.from) <= cut);
            prop_assert!(silenced(&|d| d.to != e.to) <= cut);
        }
    }

    #[test]
    fn super_source_cut_matches_multi_source_cuts(s in any::<u64>()) {
        let Some(net) = two_source(s) else { return Ok(()) };
        let sources: Vec<usize> = net.sources().iter().map(|e| e.node).collect();
        let (g, star) = net.add_super_source(&sources).unwrap();
        for t in (0..net.num_nodes()).filter(|&v| net.node(v).id.starts_with('t')) {
            prop_assert_eq!(mincut::mincut(&g, star, t).unwrap(), brute_multi_source_cut(&net, &sources, t));
        }
    }

    #[test]
    fn time_average_is_bounded_by_the_unfailed_cut(s in any::<u64>()) {
        let Some(net) = multicast(s) else { return Ok(()) };
        let mut rng = seed::rng(s, &[4]);
        let edges: Vec<_> = net.edges().cloned().collect();
        // Each pattern silences whole output ports, so no pattern can raise the cut.
        let pats: Vec<FailurePattern> = (0..3)
            .map(|_| {
                let mut dead = std::collections::BTreeSet::new();
                for e in &edges {
                    if rng.gen_bool(0.3) {
                        dead.insert(e.from);
                    }
                }
                FailurePattern::new(edges.iter().filter(|e| dead.contains(&e.from)).cloned())
            })
            .collect();
        let third = BigRational::new(1.into(), 3.into());
        let dist = ErasureDistribution::new(pats.into_iter().map(|p| (p, third.clone())).collect(), true).unwrap();
        let (src, t) = (net.sources()[0].node, net.destinations()[0].node);
        let avg = robust::time_average_mincut(&net, src, t, &dist).unwrap();
        let full = mincut::mincut(&net, src, t).unwrap();
        prop_assert!(avg.value <= BigRational::from_integer(full.into()));
        let sum: usize = avg.per_pattern.iter().sum();
        prop_assert_eq!(avg.value, BigRational::new(sum.into(), 3.into()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn multiple_multicast_matches_super_source(s in any::<u64>()) {
        let Some(net) = two_source(s) else { return Ok(()) };
        let field = random_field(8);
        let sources: Vec<usize> = net.sources().iter().map(|e| e.node).collect();
        let (g, _) = net.add_super_source(&sources).unwrap();
        let feasible = |r: adtnc_core::Result<coding::CodeSolution>| match r {
            Ok(_) => Ok(true),
            Err(Error::Infeasible(_)) => Ok(false),
            Err(e) => Err(TestCaseError::fail(e.to_string())),
        };
        let direct = feasible(coding::random_code(&net, &field, s))?;
        let lifted = feasible(coding::solve_multiple_multicast(&net, &field, s))?;
        prop_assert_eq!(direct, lifted);
        // Unrestricted super-source encoding only ever helps.
        if direct {
            prop_assert!(feasible(coding::random_code(&g, &field, s))?);
        }
    }

    #[test]
    fn delay_system_matches_truncated_response(s in any::<u64>()) {
        let Some(net) = multicast(s) else { return Ok(()) };
        let field = random_field(4);
        let a = CodingAssignment::random(&net, &field, &mut seed::rng(s, &[5]));
        let da = DelayAssignment::from_constant(&a);
        let m = delay::delay_system_matrix(&net, &da, &field);
        let l = net.num_ports() + 2;
        let series = delay::truncated_delay_response(&net, &da, &field, l).unwrap();
        for (r, c, e) in m.iter() {
            prop_assert!(e.is_polynomial());
            prop_assert_eq!(e.numerator(), series.get(r, c));
        }
        let at_one = delay::eval_at_one(&field, &m).unwrap();
        prop_assert_eq!(at_one, transfer::system_matrix(&net, &a, &field).unwrap().matrix);
    }
}

#[test]
fn bundled_fixture_files_match_the_builders() {
    let dir = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let cases = [
        ("fig3.json", fixtures::fig3()),
        ("fig2.json", fixtures::fig2()),
        ("diamond.json", fixtures::diamond()),
        ("ring3.json", fixtures::ring3()),
        ("disconnected.json", fixtures::disconnected()),
        ("chain25.json", fixtures::chain(25)),
    ];
    for (file, net) in cases {
        let text = std::fs::read_to_string(dir.join(file)).unwrap();
        assert_eq!(text.trim_end(), net.to_json().trim_end(), "{file}");
    }
}


#[test]
fn deleting_an_interfering_edge_can_raise_the_cut() {
    // Both outputs reach both inputs: the incidence [[1,1],[1,1]] has rank 1. Deleting one edge
    // leaves [[1,0],[1,1]] with rank 2.
    let mut net = AdtNetwork::new();
    net.add_node("S", 0, 2, Some(0)).unwrap();
    net.add_node("T", 2, 0, Some(1)).unwrap();
    for (o, i) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        net.connect("S", o, "T", i).unwrap();
    }
    assert_eq!(mincut::mincut(&net, 0, 1).unwrap(), 1);
    let e = net.parse_edge("S:out:0->T:in:1").unwrap();
    net.remove_edge(&e);
    assert_eq!(mincut::mincut(&net, 0, 1).unwrap(), 2);
}

#[test]
fn unrestricted_super_source_can_relay_another_sources_processes() {
    // S reaches t1 with rank 1 but demands 2 processes; through the super-source, S2 can carry
    // them, so only the block-structured lift agrees with the original problem.
    let net = two_source(6518427017930565350).unwrap();
    let field = random_field(8);
    let sources: Vec<usize> = net.sources().iter().map(|e| e.node).collect();
    let (g, _) = net.add_super_source(&sources).unwrap();
    assert!(matches!(coding::random_code(&net, &field, 1), Err(Error::Infeasible(_))));
    assert!(matches!(coding::solve_multiple_multicast(&net, &field, 1), Err(Error::Infeasible(_))));
    assert!(coding::random_code(&g, &field, 1).is_ok());
}
