//! Small reference networks used by tests, the CLI and the bundled JSON fixtures.

use rand::Rng;

use crate::mincut;
use crate::network::AdtNetwork;

/// Two-relay network with a broadcast at the source and a MAC at the sink.
///
/// Ports in topological order are `e1..e12`: `S` outputs `e1,e2`; `V1` inputs `e3,e4`; `V2` inputs
/// `e5,e6`; `V1` outputs `e7,e8`; `V2` outputs `e9,e10`; `T` inputs `e11,e12`. Ports `e5` and `e8`
/// are unused.
pub fn fig3() -> AdtNetwork {
    let mut net = AdtNetwork::new();
    net.add_node("S", 0, 2, Some(0)).unwrap();
    net.add_node("V1", 2, 2, Some(1)).unwrap();
    net.add_node("V2", 2, 2, Some(1)).unwrap();
    net.add_node("T", 2, 0, Some(2)).unwrap();
    net.connect("S", 0, "V1", 0).unwrap();
    net.connect("S", 0, "V2", 1).unwrap();
    net.connect("S", 1, "V1", 1).unwrap();
    net.connect("V1", 0, "T", 1).unwrap();
    net.connect("V2", 0, "T", 0).unwrap();
    net.connect("V2", 1, "T", 1).unwrap();
    net.add_source("S", 2).unwrap();
    net.add_destination("T", 2).unwrap();
    net.add_connection("S", "T", vec![0, 1]).unwrap();
    net
}

/// Ids of the six sinks of [`fig2`], one per unordered pair `j < k` of third-layer relays.
pub fn fig2_sinks() -> Vec<String> {
    let mut v = Vec::new();
    for j in 1..=4 {
        for k in j + 1..=4 {
            v.push(format!("t{j}{k}"));
        }
    }
    v
}

/// Four-layer rate-2 multicast network with six sinks, uniform `n = 2`.
///
/// `S` broadcasts both outputs to every `v2_i`; `v2_i` forwards one symbol to `v3_i`; `v3_j`
/// sends its upper output to the upper input of every sink `t_jk` and to the lower input of
/// every sink `t_ij`, where it is added to the lower output of `v3_i`. No binary scalar code
/// serves all six sinks.
pub fn fig2() -> AdtNetwork {
    let mut net = AdtNetwork::new();
    net.add_node("S", 2, 2, Some(0)).unwrap();
    for i in 1..=4 {
        net.add_node(&format!("v2_{i}"), 2, 2, Some(1)).unwrap();
    }
    for i in 1..=4 {
        net.add_node(&format!("v3_{i}"), 2, 2, Some(2)).unwrap();
    }
    for t in fig2_sinks() {
        net.add_node(&t, 2, 2, Some(3)).unwrap();
    }
    for i in 1..=4 {
        let v2 = format!("v2_{i}");
        net.connect("S", 0, &v2, 0).unwrap();
        net.connect("S", 1, &v2, 1).unwrap();
        net.connect(&v2, 0, &format!("v3_{i}"), 0).unwrap();
    }
    for j in 1..=4 {
        for k in j + 1..=4 {
            let t = format!("t{j}{k}");
            net.connect(&format!("v3_{j}"), 0, &t, 0).unwrap();
            net.connect(&format!("v3_{j}"), 1, &t, 1).unwrap();
            net.connect(&format!("v3_{k}"), 0, &t, 1).unwrap();
        }
    }
    net.add_source("S", 2).unwrap();
    for t in fig2_sinks() {
        net.add_destination(&t, 2).unwrap();
        net.add_connection("S", &t, vec![0, 1]).unwrap();
    }
    net
}

/// `S -> {V1, V2} -> T`, one unit path through each relay, rate 1.
pub fn diamond() -> AdtNetwork {
    let mut net = AdtNetwork::new();
    net.add_node("S", 0, 2, Some(0)).unwrap();
    net.add_node("V1", 1, 1, Some(1)).unwrap();
    net.add_node("V2", 1, 1, Some(1)).unwrap();
    net.add_node("T", 2, 0, Some(2)).unwrap();
    net.connect("S", 0, "V1", 0).unwrap();
    net.connect("S", 1, "V2", 0).unwrap();
    net.connect("V1", 0, "T", 0).unwrap();
    net.connect("V2", 0, "T", 1).unwrap();
    net.add_source("S", 1).unwrap();
    net.add_destination("T", 1).unwrap();
    net.add_connection("S", "T", vec![0]).unwrap();
    net
}

/// Edge references of the two single-path failures of [`diamond`]: top path, then bottom path.
pub fn diamond_failures() -> [&'static str; 2] {
    ["S:out:0->V1:in:0", "S:out:1->V2:in:0"]
}

/// Directed ring `S -> V -> T -> S`; the only route from `S` to `T` lies on the cycle.
pub fn ring3() -> AdtNetwork {
    let mut net = AdtNetwork::new();
    net.add_node("S", 1, 1, None).unwrap();
    net.add_node("V", 1, 1, None).unwrap();
    net.add_node("T", 1, 1, None).unwrap();
    net.connect("S", 0, "V", 0).unwrap();
    net.connect("V", 0, "T", 0).unwrap();
    net.connect("T", 0, "S", 0).unwrap();
    net.add_source("S", 1).unwrap();
    net.add_destination("T", 1).unwrap();
    net.add_connection("S", "T", vec![0]).unwrap();
    net
}

/// Source and sink joined by `width` parallel port pairs.
pub fn parallel(width: usize) -> AdtNetwork {
    let mut net = AdtNetwork::new();
    net.add_node("S", width, width, Some(0)).unwrap();
    net.add_node("T", width, width, Some(1)).unwrap();
    for k in 0..width {
        net.connect("S", k, "T", k).unwrap();
    }
    net.add_source("S", width).unwrap();
    net.add_destination("T", width).unwrap();
    net.add_connection("S", "T", (0..width).collect()).unwrap();
    net
}

/// Source and sink with no edges.
pub fn disconnected() -> AdtNetwork {
    let mut net = AdtNetwork::new();
    net.add_node("S", 0, 1, Some(0)).unwrap();
    net.add_node("T", 1, 0, Some(1)).unwrap();
    net.add_source("S", 1).unwrap();
    net.add_destination("T", 1).unwrap();
    net.add_connection("S", "T", vec![0]).unwrap();
    net
}

/// Chain of `len` supernodes with one port per side; used to exercise size guards.
pub fn chain(len: usize) -> AdtNetwork {
    let mut net = AdtNetwork::new();
    for i in 0..len {
        let ins = usize::from(i > 0);
        let outs = usize::from(i + 1 < len);
        net.add_node(&format!("n{i}"), ins, outs, Some(i)).unwrap();
    }
    for i in 0..len.saturating_sub(1) {
        net.add_edge((i, 0), (i + 1, 0)).unwrap();
    }
    if len >= 2 {
        net.add_source("n0", 1).unwrap();
        let last = format!("n{}", len - 1);
        net.add_destination(&last, 1).unwrap();
        net.add_connection("n0", &last, vec![0]).unwrap();
    }
    net
}

/// Shape limits for [`random_layered`].
#[derive(Clone, Copy, Debug)]
pub struct RandomLayered {
    /// Total layers including the source layer and the sink layer (at least 2).
    pub max_layers: usize,
    pub max_per_layer: usize,
    /// Every supernode of an instance gets the same number `n` of ports on each side.
    pub max_ports: usize,
    /// Probability that an output port reaches a given supernode of the next layer.
    pub edge_prob: f64,
}

impl Default for RandomLayered {
    fn default() -> Self {
        RandomLayered {
            max_layers: 4,
            max_per_layer: 3,
            max_ports: 3,
            edge_prob: 0.6,
        }
    }
}

/// Random strictly layered network: `S` alone in layer 0, relays `v{l}_{i}`, sinks `t{i}` in
/// the last layer. An output port reaches at most one input port of each next-layer supernode.
/// No endpoints are declared.
pub fn random_layered<R: Rng + ?Sized>(rng: &mut R, p: &RandomLayered) -> AdtNetwork {
    let layers = rng.gen_range(2..=p.max_layers.max(2));
    let n = rng.gen_range(1..=p.max_ports.max(1));
    let mut net = AdtNetwork::new();
    let mut by_layer: Vec<Vec<usize>> = vec![vec![net.add_node("S", 0, n, Some(0)).unwrap()]];
    for l in 1..layers {
        let k = rng.gen_range(1..=p.max_per_layer.max(1));
        let last = l + 1 == layers;
        let ids = (0..k)
            .map(|i| {
                let id = if last { format!("t{i}") } else { format!("v{l}_{i}") };
                net.add_node(&id, n, if last { 0 } else { n }, Some(l)).unwrap()
            })
            .collect();
        by_layer.push(ids);
    }
    for l in 0..layers - 1 {
        for &u in &by_layer[l] {
            for out in 0..n {
                for &v in &by_layer[l + 1] {
                    if rng.gen_bool(p.edge_prob) {
                        let inp = rng.gen_range(0..n);
                        net.add_edge((u, out), (v, inp)).unwrap();
                    }
                }
            }
        }
    }
    net
}

/// [`random_layered`] with a multicast of rate `R = min_t mincut(S, t)` from `S` to every sink,
/// or `None` when some sink is cut off.
pub fn random_multicast<R: Rng + ?Sized>(rng: &mut R, p: &RandomLayered) -> Option<AdtNetwork> {
    let mut net = random_layered(rng, p);
    let s = net.node_index("S").unwrap();
    let sinks: Vec<String> = net.nodes().iter().filter(|v| v.id.starts_with('t')).map(|v| v.id.clone()).collect();
    let rate = sinks
        .iter()
        .map(|t| mincut::mincut(&net, s, net.node_index(t).unwrap()).unwrap())
        .min()
        .unwrap_or(0);
    if rate == 0 {
        return None;
    }
    net.add_source("S", rate).unwrap();
    for t in &sinks {
        net.add_destination(t, rate).unwrap();
        net.add_connection("S", t, (0..rate).collect()).unwrap();
    }
    Some(net)
}
