//! Supernodes, ports, edges, sources, destinations and connections.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    In,
    Out,
}

impl Side {
    fn tag(self) -> &'static str {
        match self {
            Side::In => "in",
            Side::Out => "out",
        }
    }
}

/// A port, addressed by supernode index, side and 0-based top-to-bottom position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PortId {
    pub node: usize,
    pub side: Side,
    pub index: usize,
}

impl PortId {
    pub fn input(node: usize, index: usize) -> Self {
        PortId {
            node,
            side: Side::In,
            index,
        }
    }

    pub fn output(node: usize, index: usize) -> Self {
        PortId {
            node,
            side: Side::Out,
            index,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Supernode {
    pub id: String,
    pub inputs: usize,
    pub outputs: usize,
    pub layer: Option<usize>,
}

/// Physical edge from output port `from` of one supernode to input port `to` of another.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub from: (usize, usize),
    pub to: (usize, usize),
}

impl Edge {
    pub fn tail(&self) -> PortId {
        PortId::output(self.from.0, self.from.1)
    }

    pub fn head(&self) -> PortId {
        PortId::input(self.to.0, self.to.1)
    }
}

/// A source or destination designation with its process count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Endpoint {
    pub node: usize,
    pub processes: usize,
}

/// Demand that `destination` reproduces the listed processes of `source`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Connection {
    pub source: usize,
    pub destination: usize,
    pub processes: Vec<usize>,
}

impl Connection {
    pub fn rate(&self) -> usize {
        self.processes.len()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AdtNetwork {
    nodes: Vec<Supernode>,
    ids: HashMap<String, usize>,
    edges: BTreeSet<Edge>,
    sources: Vec<Endpoint>,
    destinations: Vec<Endpoint>,
    connections: Vec<Connection>,
}

/// `⌈½·log₂(snr)⌉`, floored at zero.
pub fn edges_from_snr(snr: f64) -> Result<u32> {
    // Written so that NaN is rejected too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(snr > 0.0) || !snr.is_finite() {
        return Err(Error::usage(format!("snr must be positive, got {snr}")));
    }
    let v = (0.5 * snr.log2()).ceil();
    Ok(if v <= 0.0 { 0 } else { v as u32 })
}

impl AdtNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(
        &mut self,
        id: &str,
        inputs: usize,
        outputs: usize,
        layer: Option<usize>,
    ) -> Result<usize> {
        if self.ids.contains_key(id) {
            return Err(Error::InvalidNetwork(format!("duplicate supernode id {id:?}")));
        }
        if id.is_empty() || id.contains(':') || id.contains("->") {
            return Err(Error::InvalidNetwork(format!(
                "supernode id {id:?} must be non-empty and free of ':' and '->'"
            )));
        }
        let idx = self.nodes.len();
        self.nodes.push(Supernode {
            id: id.to_string(),
            inputs,
            outputs,
            layer,
        });
        self.ids.insert(id.to_string(), idx);
        Ok(idx)
    }

    pub fn add_edge(&mut self, from: (usize, usize), to: (usize, usize)) -> Result<()> {
        let n = self.nodes.len();
        if from.0 >= n || to.0 >= n {
            return Err(Error::InvalidNetwork("edge references unknown supernode".into()));
        }
        if from.0 == to.0 {
            return Err(Error::InvalidNetwork(format!(
                "edge {} -> {} stays inside supernode {}",
                self.port_ref(PortId::output(from.0, from.1)),
                self.port_ref(PortId::input(to.0, to.1)),
                self.nodes[from.0].id
            )));
        }
        if from.1 >= self.nodes[from.0].outputs {
            return Err(Error::InvalidNetwork(format!(
                "{} has no output port {}",
                self.nodes[from.0].id, from.1
            )));
        }
        if to.1 >= self.nodes[to.0].inputs {
            return Err(Error::InvalidNetwork(format!(
                "{} has no input port {}",
                self.nodes[to.0].id, to.1
            )));
        }
        if !self.edges.insert(Edge { from, to }) {
            return Err(Error::InvalidNetwork(format!(
                "duplicate edge {} -> {}",
                self.port_ref(PortId::output(from.0, from.1)),
                self.port_ref(PortId::input(to.0, to.1))
            )));
        }
        Ok(())
    }

    /// Convenience form of [`add_edge`](Self::add_edge) using supernode ids.
    pub fn connect(&mut self, from: &str, out: usize, to: &str, inp: usize) -> Result<()> {
        let a = self.require(from)?;
        let b = self.require(to)?;
        self.add_edge((a, out), (b, inp))
    }

    /// Appends `k` output ports to `node`; returns the index of the first new one.
    pub fn add_output_ports(&mut self, node: usize, k: usize) -> usize {
        let first = self.nodes[node].outputs;
        self.nodes[node].outputs += k;
        first
    }

    pub fn remove_edge(&mut self, e: &Edge) -> bool {
        self.edges.remove(e)
    }

    pub fn add_source(&mut self, node: &str, processes: usize) -> Result<()> {
        let node = self.require(node)?;
        if self.sources.iter().any(|s| s.node == node) {
            return Err(Error::InvalidNetwork("source declared twice".into()));
        }
        self.sources.push(Endpoint { node, processes });
        Ok(())
    }

    pub fn add_destination(&mut self, node: &str, processes: usize) -> Result<()> {
        let node = self.require(node)?;
        if self.destinations.iter().any(|s| s.node == node) {
            return Err(Error::InvalidNetwork("destination declared twice".into()));
        }
        self.destinations.push(Endpoint { node, processes });
        Ok(())
    }

    pub fn add_connection(&mut self, source: &str, dest: &str, processes: Vec<usize>) -> Result<()> {
        let s = self.require(source)?;
        let t = self.require(dest)?;
        let src = self
            .source(s)
            .ok_or_else(|| Error::InvalidNetwork(format!("{source} is not a source")))?;
        if self.destination(t).is_none() {
            return Err(Error::InvalidNetwork(format!("{dest} is not a destination")));
        }
        if let Some(&bad) = processes.iter().find(|&&p| p >= src.processes) {
            return Err(Error::InvalidNetwork(format!(
                "{source} has no process {bad} ({} declared)",
                src.processes
            )));
        }
        let mut processes = processes;
        processes.sort_unstable();
        processes.dedup();
        self.connections.push(Connection {
            source: s,
            destination: t,
            processes,
        });
        Ok(())
    }

    pub fn set_connections(&mut self, conns: Vec<Connection>) {
        self.connections = conns;
    }

    pub fn require(&self, id: &str) -> Result<usize> {
        self.ids
            .get(id)
            .copied()
            .ok_or_else(|| Error::usage(format!("unknown supernode {id:?}")))
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.ids.get(id).copied()
    }

    pub fn nodes(&self) -> &[Supernode] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &Supernode {
        &self.nodes[i]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, e: &Edge) -> bool {
        self.edges.contains(e)
    }

    pub fn num_ports(&self) -> usize {
        self.nodes.iter().map(|n| n.inputs + n.outputs).sum()
    }

    pub fn sources(&self) -> &[Endpoint] {
        &self.sources
    }

    pub fn destinations(&self) -> &[Endpoint] {
        &self.destinations
    }

    pub fn connections(&self) -> &[Connection] {
        &self.connections
    }

    pub fn source(&self, node: usize) -> Option<&Endpoint> {
        self.sources.iter().find(|s| s.node == node)
    }

    pub fn destination(&self, node: usize) -> Option<&Endpoint> {
        self.destinations.iter().find(|s| s.node == node)
    }

    /// Replaces the process count of a source (used when widening to the full output dimension).
    pub fn with_endpoints(&self, sources: Vec<Endpoint>, destinations: Vec<Endpoint>) -> Self {
        let mut n = self.clone();
        n.sources = sources;
        n.destinations = destinations;
        n.connections.clear();
        n
    }

    /// Input ports fed by output port `(node, out)`.
    pub fn out_neighbors(&self, node: usize, out: usize) -> Vec<(usize, usize)> {
        self.edges
            .range(
                Edge {
                    from: (node, out),
                    to: (0, 0),
                }..,
            )
            .take_while(|e| e.from == (node, out))
            .map(|e| e.to)
            .collect()
    }

    /// Output ports feeding input port `(node, inp)`.
    pub fn in_neighbors(&self, node: usize, inp: usize) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .filter(|e| e.to == (node, inp))
            .map(|e| e.from)
            .collect()
    }

    /// Distinct supernodes directly downstream of `node`.
    pub fn successors(&self, node: usize) -> BTreeSet<usize> {
        self.edges
            .iter()
            .filter(|e| e.from.0 == node)
            .map(|e| e.to.0)
            .collect()
    }

    pub fn port_ref(&self, p: PortId) -> String {
        format!("{}:{}:{}", self.nodes[p.node].id, p.side.tag(), p.index)
    }

    pub fn edge_ref(&self, e: &Edge) -> String {
        format!("{}->{}", self.port_ref(e.tail()), self.port_ref(e.head()))
    }

    /// Parses `node:side:index`.
    pub fn parse_port(&self, s: &str) -> Result<PortId> {
        let (node, side, index) = split_port_ref(s)?;
        let n = self.require(node)?;
        let p = PortId {
            node: n,
            side,
            index,
        };
        let count = match side {
            Side::In => self.nodes[n].inputs,
            Side::Out => self.nodes[n].outputs,
        };
        if index >= count {
            return Err(Error::usage(format!("port {s} out of range")));
        }
        Ok(p)
    }

    /// Parses `V:out:i->W:in:j` into an existing edge.
    pub fn parse_edge(&self, s: &str) -> Result<Edge> {
        let (a, b) = s
            .split_once("->")
            .ok_or_else(|| Error::usage(format!("edge reference {s:?} lacks '->'")))?;
        let from = self.parse_port(a.trim())?;
        let to = self.parse_port(b.trim())?;
        if from.side != Side::Out || to.side != Side::In {
            return Err(Error::usage(format!("edge {s} must go from out to in")));
        }
        let e = Edge {
            from: (from.node, from.index),
            to: (to.node, to.index),
        };
        if !self.edges.contains(&e) {
            return Err(Error::usage(format!("no such edge {s}")));
        }
        Ok(e)
    }

    /// Supernode order used for port numbering: by layer (declared when every node has one and
    /// every edge increases it, longest-path depth otherwise), then declaration order.
    pub fn node_order(&self) -> Result<Vec<usize>> {
        let layers = self.effective_layers()?;
        let mut order: Vec<usize> = (0..self.nodes.len()).collect();
        order.sort_by_key(|&i| (layers[i], i));
        Ok(order)
    }

    /// Layer of every supernode as used for ordering. Errors on cycles.
    pub fn effective_layers(&self) -> Result<Vec<usize>> {
        let depth = self.longest_path_depth()?;
        if self.declared_layers_consistent() {
            Ok(self.nodes.iter().map(|n| n.layer.unwrap()).collect())
        } else {
            Ok(depth)
        }
    }

    fn declared_layers_consistent(&self) -> bool {
        self.nodes.iter().all(|n| n.layer.is_some())
            && self
                .edges
                .iter()
                .all(|e| self.nodes[e.from.0].layer < self.nodes[e.to.0].layer)
    }

    /// True when every node has a declared layer and every edge goes from layer `l` to `l + 1`.
    pub fn is_strictly_layered(&self) -> bool {
        self.nodes.iter().all(|n| n.layer.is_some())
            && self
                .edges
                .iter()
                .all(|e| self.nodes[e.from.0].layer.unwrap() + 1 == self.nodes[e.to.0].layer.unwrap())
    }

    /// Depth of each supernode along the longest path from any node without predecessors.
    pub fn longest_path_depth(&self) -> Result<Vec<usize>> {
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n];
        let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for e in &self.edges {
            if succ[e.from.0].insert(e.to.0) {
                indeg[e.to.0] += 1;
            }
        }
        let mut depth = vec![0usize; n];
        let mut queue: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut seen = 0;
        while let Some(u) = queue.pop() {
            seen += 1;
            for &v in &succ[u] {
                depth[v] = depth[v].max(depth[u] + 1);
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    queue.push(v);
                }
            }
        }
        if seen < n {
            let stuck = (0..n).find(|&i| indeg[i] > 0).unwrap();
            return Err(Error::CyclicNetwork(self.nodes[stuck].id.clone()));
        }
        Ok(depth)
    }

    pub fn is_acyclic(&self) -> bool {
        self.longest_path_depth().is_ok()
    }

    /// All ports in topological order: layer by layer, every input port of the layer (supernodes
    /// top to bottom, ports top to bottom) before every output port of the layer.
    pub fn topological_port_order(&self) -> Result<PortOrder> {
        let layers = self.effective_layers()?;
        let mut ports: Vec<(usize, Side, usize, usize)> = Vec::with_capacity(self.num_ports());
        for (i, n) in self.nodes.iter().enumerate() {
            for k in 0..n.inputs {
                ports.push((layers[i], Side::In, i, k));
            }
            for k in 0..n.outputs {
                ports.push((layers[i], Side::Out, i, k));
            }
        }
        ports.sort();
        let order: Vec<PortId> = ports
            .into_iter()
            .map(|(_, side, node, index)| PortId { node, side, index })
            .collect();
        Ok(PortOrder::new(self, order))
    }

    /// Port order without the acyclicity requirement (used for networks with cycles): supernodes
    /// in declaration order, inputs before outputs.
    pub fn declaration_port_order(&self) -> PortOrder {
        let mut order = Vec::with_capacity(self.num_ports());
        for (i, n) in self.nodes.iter().enumerate() {
            order.extend((0..n.inputs).map(|k| PortId::input(i, k)));
            order.extend((0..n.outputs).map(|k| PortId::output(i, k)));
        }
        PortOrder::new(self, order)
    }

    /// Port order for any network: topological when acyclic, declaration order otherwise.
    pub fn port_order(&self) -> PortOrder {
        self.topological_port_order()
            .unwrap_or_else(|_| self.declaration_port_order())
    }

    pub fn validate(&self) -> ValidationReport {
        validate_doc(&self.to_doc())
    }

    pub(crate) fn fresh_id(&self, base: &str) -> String {
        let mut id = base.to_string();
        while self.ids.contains_key(&id) {
            id.push('*');
        }
        id
    }

    /// Adds a super-source feeding every listed source; returns the new network and the
    /// super-source index. A single source is returned unchanged.
    ///
    /// Each original source `S_i` gains one new input port per output port, and the super-source
    /// output `j` feeds the `j`-th new input overall. Original sources become relays, and
    /// connections are rewritten onto the concatenated process list of the super-source.
    pub fn add_super_source(&self, sources: &[usize]) -> Result<(AdtNetwork, usize)> {
        if sources.is_empty() {
            return Err(Error::usage("add_super_source needs at least one source"));
        }
        if sources.len() == 1 {
            return Ok((self.clone(), sources[0]));
        }
        let mut net = self.clone();
        let shift = sources
            .iter()
            .filter_map(|&s| self.nodes[s].layer)
            .min()
            .map_or(0, |m| if m == 0 { 1 } else { 0 });
        for n in &mut net.nodes {
            if let Some(l) = n.layer.as_mut() {
                *l += shift;
            }
        }
        let total: usize = sources.iter().map(|&s| self.nodes[s].outputs).sum();
        let min_layer = sources.iter().filter_map(|&s| net.nodes[s].layer).min();
        let all_layered = net.nodes.iter().all(|n| n.layer.is_some());
        let id = self.fresh_id("S*");
        let star = net.add_node(&id, 0, total, if all_layered { min_layer.map(|l| l - 1) } else { None })?;
        let mut j = 0;
        let mut offsets = HashMap::new();
        let mut proc_offset = 0;
        for &s in sources {
            let outs = net.nodes[s].outputs;
            let first_new = net.nodes[s].inputs;
            net.nodes[s].inputs += outs;
            for k in 0..outs {
                net.add_edge((star, j), (s, first_new + k))?;
                j += 1;
            }
            let mu = self.source(s).map_or(0, |e| e.processes);
            offsets.insert(s, proc_offset);
            proc_offset += mu;
        }
        net.sources.retain(|e| !sources.contains(&e.node));
        net.sources.insert(
            0,
            Endpoint {
                node: star,
                processes: proc_offset,
            },
        );
        for c in &mut net.connections {
            if let Some(&off) = offsets.get(&c.source) {
                c.source = star;
                for p in &mut c.processes {
                    *p += off;
                }
            }
        }
        Ok((net, star))
    }

    /// Adds a super-destination fed by every listed destination; returns the new network and the
    /// super-destination index.
    ///
    /// Each `T_i` gains `|I(T_i)|` new output ports wired one-to-one into consecutive input ports
    /// of the super-destination. Connections to the listed destinations are merged per source.
    pub fn add_super_destination(&self, dests: &[usize]) -> Result<(AdtNetwork, usize)> {
        if dests.is_empty() {
            return Err(Error::usage("add_super_destination needs at least one destination"));
        }
        let mut net = self.clone();
        let total: usize = dests.iter().map(|&t| self.nodes[t].inputs).sum();
        let all_layered = net.nodes.iter().all(|n| n.layer.is_some());
        let max_layer = net.nodes.iter().filter_map(|n| n.layer).max();
        let id = self.fresh_id("T*");
        let star = net.add_node(&id, total, 0, if all_layered { max_layer.map(|l| l + 1) } else { None })?;
        let mut j = 0;
        let mut nu = 0;
        for &t in dests {
            let ins = net.nodes[t].inputs;
            let first_new = net.nodes[t].outputs;
            net.nodes[t].outputs += ins;
            for k in 0..ins {
                net.add_edge((t, first_new + k), (star, j))?;
                j += 1;
            }
            nu += self.destination(t).map_or(0, |e| e.processes);
        }
        net.destinations.retain(|e| !dests.contains(&e.node));
        net.destinations.push(Endpoint {
            node: star,
            processes: nu,
        });
        let mut merged: Vec<Connection> = Vec::new();
        for c in &self.connections {
            if dests.contains(&c.destination) {
                if let Some(m) = merged.iter_mut().find(|m| m.source == c.source && m.destination == star) {
                    m.processes.extend(&c.processes);
                    m.processes.sort_unstable();
                    m.processes.dedup();
                } else {
                    merged.push(Connection {
                        source: c.source,
                        destination: star,
                        processes: c.processes.clone(),
                    });
                }
            } else {
                merged.push(c.clone());
            }
        }
        net.connections = merged;
        Ok((net, star))
    }

    pub fn to_doc(&self) -> NetworkDoc {
        NetworkDoc {
            supernodes: self
                .nodes
                .iter()
                .map(|n| NodeDoc {
                    id: n.id.clone(),
                    inputs: n.inputs,
                    outputs: n.outputs,
                    layer: n.layer,
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeDoc {
                    from: self.port_ref(e.tail()),
                    to: self.port_ref(e.head()),
                })
                .collect(),
            sources: self
                .sources
                .iter()
                .map(|e| EndpointDoc {
                    node: self.nodes[e.node].id.clone(),
                    processes: e.processes,
                })
                .collect(),
            destinations: self
                .destinations
                .iter()
                .map(|e| EndpointDoc {
                    node: self.nodes[e.node].id.clone(),
                    processes: e.processes,
                })
                .collect(),
            connections: self
                .connections
                .iter()
                .map(|c| ConnectionDoc {
                    source: self.nodes[c.source].id.clone(),
                    destination: self.nodes[c.destination].id.clone(),
                    process_indices: c.processes.clone(),
                })
                .collect(),
        }
    }

    /// Builds a network from its document form, failing on the first violation.
    pub fn from_doc(doc: &NetworkDoc) -> Result<AdtNetwork> {
        let mut net = AdtNetwork::new();
        for n in &doc.supernodes {
            net.add_node(&n.id, n.inputs, n.outputs, n.layer)?;
        }
        for e in &doc.edges {
            let from = net.parse_port(&e.from).map_err(|err| Error::InvalidNetwork(err.to_string()))?;
            let to = net.parse_port(&e.to).map_err(|err| Error::InvalidNetwork(err.to_string()))?;
            if from.side != Side::Out {
                return Err(Error::InvalidNetwork(format!(
                    "edge {} -> {}: edge must leave an output port",
                    e.from, e.to
                )));
            }
            if to.side != Side::In {
                return Err(Error::InvalidNetwork(format!(
                    "edge {} -> {}: edge must enter an input port",
                    e.from, e.to
                )));
            }
            net.add_edge((from.node, from.index), (to.node, to.index))?;
        }
        for s in &doc.sources {
            net.add_source(&s.node, s.processes)
                .map_err(|err| Error::InvalidNetwork(err.to_string()))?;
        }
        for d in &doc.destinations {
            net.add_destination(&d.node, d.processes)
                .map_err(|err| Error::InvalidNetwork(err.to_string()))?;
        }
        for c in &doc.connections {
            net.add_connection(&c.source, &c.destination, c.process_indices.clone())
                .map_err(|err| Error::InvalidNetwork(err.to_string()))?;
        }
        Ok(net)
    }

    pub fn from_json(text: &str) -> Result<AdtNetwork> {
        AdtNetwork::from_doc(&NetworkDoc::from_json(text)?)
    }

    /// Canonical pretty-printed JSON.
    pub fn to_json(&self) -> String {
        self.to_doc().to_json()
    }
}

/// Topological port numbering with the reverse lookup.
#[derive(Clone, Debug)]
pub struct PortOrder {
    order: Vec<PortId>,
    in_offset: Vec<usize>,
    out_offset: Vec<usize>,
    position: Vec<usize>,
}

impl PortOrder {
    fn new(net: &AdtNetwork, order: Vec<PortId>) -> Self {
        let mut in_offset = Vec::with_capacity(net.num_nodes());
        let mut out_offset = Vec::with_capacity(net.num_nodes());
        let mut acc = 0;
        for n in net.nodes() {
            in_offset.push(acc);
            acc += n.inputs;
            out_offset.push(acc);
            acc += n.outputs;
        }
        let mut position = vec![0; acc];
        for (pos, p) in order.iter().enumerate() {
            let slot = match p.side {
                Side::In => in_offset[p.node] + p.index,
                Side::Out => out_offset[p.node] + p.index,
            };
            position[slot] = pos;
        }
        PortOrder {
            order,
            in_offset,
            out_offset,
            position,
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn ports(&self) -> &[PortId] {
        &self.order
    }

    pub fn port(&self, pos: usize) -> PortId {
        self.order[pos]
    }

    /// Position of a port in the order.
    pub fn index(&self, p: PortId) -> usize {
        match p.side {
            Side::In => self.position[self.in_offset[p.node] + p.index],
            Side::Out => self.position[self.out_offset[p.node] + p.index],
        }
    }

    pub fn input(&self, node: usize, k: usize) -> usize {
        self.index(PortId::input(node, k))
    }

    pub fn output(&self, node: usize, k: usize) -> usize {
        self.index(PortId::output(node, k))
    }

    /// `e1`, `e2`, ... by position.
    pub fn label(&self, pos: usize) -> String {
        format!("e{}", pos + 1)
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.len()).map(|i| self.label(i)).collect()
    }
}

impl fmt::Display for PortId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}:{}:{}", self.node, self.side.tag(), self.index)
    }
}

fn split_port_ref(s: &str) -> Result<(&str, Side, usize)> {
    let mut parts = s.rsplitn(3, ':');
    let (Some(idx), Some(side), Some(node)) = (parts.next(), parts.next(), parts.next()) else {
        return Err(Error::usage(format!("port reference {s:?} is not node:side:index")));
    };
    let side = match side {
        "in" => Side::In,
        "out" => Side::Out,
        other => return Err(Error::usage(format!("unknown port side {other:?} in {s:?}"))),
    };
    let index = idx
        .parse::<usize>()
        .map_err(|_| Error::usage(format!("bad port index in {s:?}")))?;
    Ok((node, side, index))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub id: String,
    pub inputs: usize,
    pub outputs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layer: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub from: String,
    pub to: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointDoc {
    pub node: String,
    pub processes: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionDoc {
    pub source: String,
    pub destination: String,
    pub process_indices: Vec<usize>,
}

/// On-disk network description.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDoc {
    pub supernodes: Vec<NodeDoc>,
    #[serde(default)]
    pub edges: Vec<EdgeDoc>,
    #[serde(default)]
    pub sources: Vec<EndpointDoc>,
    #[serde(default)]
    pub destinations: Vec<EndpointDoc>,
    #[serde(default)]
    pub connections: Vec<ConnectionDoc>,
}

impl NetworkDoc {
    pub fn from_json(text: &str) -> Result<NetworkDoc> {
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

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<String>,
    pub acyclic: bool,
    pub layered: bool,
    pub supernodes: usize,
    pub ports: usize,
    pub edges: usize,
    /// Ports with no incident edge; informational only.
    pub unused_ports: Vec<String>,
}

/// Checks a network document without building it.
pub fn validate_doc(doc: &NetworkDoc) -> ValidationReport {
    let mut violations = Vec::new();
    let mut ids: HashMap<&str, usize> = HashMap::new();
    for (i, n) in doc.supernodes.iter().enumerate() {
        if ids.insert(n.id.as_str(), i).is_some() {
            violations.push(format!("duplicate supernode id {:?}", n.id));
        }
        if n.id.is_empty() || n.id.contains(':') || n.id.contains("->") {
            violations.push(format!("invalid supernode id {:?}", n.id));
        }
    }
    let ports: usize = doc.supernodes.iter().map(|n| n.inputs + n.outputs).sum();
    let resolve = |r: &str| -> std::result::Result<(usize, Side, usize), String> {
        let (node, side, index) = split_port_ref(r).map_err(|e| e.to_string())?;
        let &n = ids.get(node).ok_or_else(|| format!("unknown supernode {node:?} in {r:?}"))?;
        let count = match side {
            Side::In => doc.supernodes[n].inputs,
            Side::Out => doc.supernodes[n].outputs,
        };
        if index >= count {
            return Err(format!("port {r} out of range"));
        }
        Ok((n, side, index))
    };
    let mut seen = BTreeSet::new();
    let mut used = BTreeSet::new();
    let mut graph: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); doc.supernodes.len()];
    for e in &doc.edges {
        let (from, to) = match (resolve(&e.from), resolve(&e.to)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(m), _) | (_, Err(m)) => {
                violations.push(m);
                continue;
            }
        };
        if from.1 != Side::Out {
            violations.push(format!("{} -> {}: edge must leave an output port", e.from, e.to));
            continue;
        }
        if to.1 != Side::In {
            violations.push(format!("{} -> {}: edge must enter an input port", e.from, e.to));
            continue;
        }
        if from.0 == to.0 {
            violations.push(format!("{} -> {}: edge stays inside one supernode", e.from, e.to));
            continue;
        }
        if !seen.insert((from, to)) {
            violations.push(format!("{} -> {}: duplicate edge", e.from, e.to));
            continue;
        }
        used.insert(from);
        used.insert(to);
        graph[from.0].insert(to.0);
    }
    // Kahn's algorithm on the supernode graph.
    let mut indeg = vec![0usize; graph.len()];
    for s in &graph {
        for &v in s {
            indeg[v] += 1;
        }
    }
    let mut stack: Vec<usize> = (0..graph.len()).filter(|&i| indeg[i] == 0).collect();
    let mut visited = 0;
    while let Some(u) = stack.pop() {
        visited += 1;
        for &v in &graph[u] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                stack.push(v);
            }
        }
    }
    let acyclic = visited == graph.len();
    if !acyclic {
        violations.push("network contains a cycle".into());
    }
    let all_layered = !doc.supernodes.is_empty() && doc.supernodes.iter().all(|n| n.layer.is_some());
    let mut layered = all_layered;
    if all_layered {
        for (u, s) in graph.iter().enumerate() {
            for &v in s {
                let (lu, lv) = (doc.supernodes[u].layer.unwrap(), doc.supernodes[v].layer.unwrap());
                if lv <= lu {
                    violations.push(format!(
                        "edge from {} (layer {lu}) to {} (layer {lv}) does not go forward",
                        doc.supernodes[u].id, doc.supernodes[v].id
                    ));
                    layered = false;
                } else if lv != lu + 1 {
                    layered = false;
                }
            }
        }
    }
    for s in &doc.sources {
        if !ids.contains_key(s.node.as_str()) {
            violations.push(format!("unknown source supernode {:?}", s.node));
        }
    }
    for d in &doc.destinations {
        if !ids.contains_key(d.node.as_str()) {
            violations.push(format!("unknown destination supernode {:?}", d.node));
        }
    }
    for c in &doc.connections {
        match doc.sources.iter().find(|s| s.node == c.source) {
            None => violations.push(format!("connection source {:?} is not a source", c.source)),
            Some(s) => {
                if let Some(p) = c.process_indices.iter().find(|&&p| p >= s.processes) {
                    violations.push(format!("connection references process {p} of {:?}", c.source));
                }
            }
        }
        if !doc.destinations.iter().any(|d| d.node == c.destination) {
            violations.push(format!(
                "connection destination {:?} is not a destination",
                c.destination
            ));
        }
    }
    let mut unused_ports = Vec::new();
    for (i, n) in doc.supernodes.iter().enumerate() {
        for k in 0..n.inputs {
            if !used.contains(&(i, Side::In, k)) {
                unused_ports.push(format!("{}:in:{k}", n.id));
            }
        }
        for k in 0..n.outputs {
            if !used.contains(&(i, Side::Out, k)) {
                unused_ports.push(format!("{}:out:{k}", n.id));
            }
        }
    }
    ValidationReport {
        valid: violations.is_empty(),
        violations,
        acyclic,
        layered,
        supernodes: doc.supernodes.len(),
        ports,
        edges: seen.len(),
        unused_ports,
    }
}
