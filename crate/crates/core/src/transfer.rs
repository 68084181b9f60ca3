//! Adjacency, encoding and decoding matrices, the system matrix, and symbol propagation.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::ff::{Fe, Field, MPoly, Matrix, VarTable};
use crate::network::{AdtNetwork, PortOrder, Side};

/// Linear coding coefficients. Missing entries are zero.
///
/// * `alpha[(s, i, e)]`: source process `i` of source node `s` onto output port `e` of `s`.
/// * `beta[(v, x, y)]`: input port `x` of node `v` onto output port `y` of `v`.
/// * `epsilon[(t, x, k)]`: input port `x` of destination `t` into output process `k` of `t`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CodingAssignment {
    pub alpha: BTreeMap<(usize, usize, usize), Fe>,
    pub beta: BTreeMap<(usize, usize, usize), Fe>,
    pub epsilon: BTreeMap<(usize, usize, usize), Fe>,
}

impl CodingAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn alpha(&self, s: usize, i: usize, e: usize) -> Fe {
        self.alpha.get(&(s, i, e)).copied().unwrap_or(Fe::ZERO)
    }

    pub fn beta(&self, v: usize, x: usize, y: usize) -> Fe {
        self.beta.get(&(v, x, y)).copied().unwrap_or(Fe::ZERO)
    }

    pub fn epsilon(&self, t: usize, x: usize, k: usize) -> Fe {
        self.epsilon.get(&(t, x, k)).copied().unwrap_or(Fe::ZERO)
    }

    pub fn set_alpha(&mut self, s: usize, i: usize, e: usize, v: Fe) {
        set_or_clear(&mut self.alpha, (s, i, e), v);
    }

    pub fn set_beta(&mut self, v: usize, x: usize, y: usize, c: Fe) {
        set_or_clear(&mut self.beta, (v, x, y), c);
    }

    pub fn set_epsilon(&mut self, t: usize, x: usize, k: usize, v: Fe) {
        set_or_clear(&mut self.epsilon, (t, x, k), v);
    }

    /// Every coefficient that can influence the system matrix set to one.
    pub fn all_ones(net: &AdtNetwork) -> Self {
        let pos = FreePositions::of(net);
        let mut a = Self::new();
        for &(s, i, e) in &pos.alpha {
            a.set_alpha(s, i, e, Fe::ONE);
        }
        for &(v, x, y) in &pos.beta {
            a.set_beta(v, x, y, Fe::ONE);
        }
        for &(t, x, k) in &pos.epsilon {
            a.set_epsilon(t, x, k, Fe::ONE);
        }
        a
    }

    /// Independent uniform draws for every free position.
    pub fn random<R: Rng + ?Sized>(net: &AdtNetwork, field: &Field, rng: &mut R) -> Self {
        let pos = FreePositions::of(net);
        let mut a = Self::new();
        let q = field.order();
        let mut draw = || Fe(rng.gen_range(0..q) as u16);
        for &(s, i, e) in &pos.alpha {
            a.set_alpha(s, i, e, draw());
        }
        for &(v, x, y) in &pos.beta {
            a.set_beta(v, x, y, draw());
        }
        for &(t, x, k) in &pos.epsilon {
            a.set_epsilon(t, x, k, draw());
        }
        a
    }

    /// Checks that every coefficient lies in `field` and sits at a structurally valid position.
    pub fn check(&self, net: &AdtNetwork, field: &Field) -> Result<()> {
        let bad = |what: &str| Err(Error::usage(format!("invalid {what} coefficient")));
        for (&(s, i, e), &v) in &self.alpha {
            let Some(src) = net.source(s) else { return bad("alpha") };
            if i >= src.processes || e >= net.node(s).outputs || !field.contains(v) {
                return bad("alpha");
            }
        }
        for (&(n, x, y), &v) in &self.beta {
            if n >= net.num_nodes() || x >= net.node(n).inputs || y >= net.node(n).outputs || !field.contains(v) {
                return bad("beta");
            }
        }
        for (&(t, x, k), &v) in &self.epsilon {
            let Some(dst) = net.destination(t) else { return bad("epsilon") };
            if k >= dst.processes || x >= net.node(t).inputs || !field.contains(v) {
                return bad("epsilon");
            }
        }
        Ok(())
    }
}

fn set_or_clear(map: &mut BTreeMap<(usize, usize, usize), Fe>, key: (usize, usize, usize), v: Fe) {
    if v.is_zero() {
        map.remove(&key);
    } else {
        map.insert(key, v);
    }
}

/// Coefficient positions that can affect the system matrix. Ports without the relevant edges
/// (an input nothing feeds, an output that feeds nothing) are excluded; their coefficients are
/// structurally zero.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FreePositions {
    pub alpha: Vec<(usize, usize, usize)>,
    pub beta: Vec<(usize, usize, usize)>,
    pub epsilon: Vec<(usize, usize, usize)>,
}

impl FreePositions {
    pub fn of(net: &AdtNetwork) -> Self {
        let n = net.num_nodes();
        let mut fed = vec![Vec::new(); n];
        let mut feeds = vec![Vec::new(); n];
        for (i, node) in net.nodes().iter().enumerate() {
            fed[i] = vec![false; node.inputs];
            feeds[i] = vec![false; node.outputs];
        }
        for e in net.edges() {
            feeds[e.from.0][e.from.1] = true;
            fed[e.to.0][e.to.1] = true;
        }
        let mut pos = FreePositions::default();
        for s in net.sources() {
            for i in 0..s.processes {
                for e in 0..net.node(s.node).outputs {
                    if feeds[s.node][e] {
                        pos.alpha.push((s.node, i, e));
                    }
                }
            }
        }
        for (v, node) in net.nodes().iter().enumerate() {
            for x in 0..node.inputs {
                for y in 0..node.outputs {
                    if fed[v][x] && feeds[v][y] {
                        pos.beta.push((v, x, y));
                    }
                }
            }
        }
        for t in net.destinations() {
            for x in 0..net.node(t.node).inputs {
                if fed[t.node][x] {
                    for k in 0..t.processes {
                        pos.epsilon.push((t.node, x, k));
                    }
                }
            }
        }
        pos
    }

    pub fn len(&self) -> usize {
        self.alpha.len() + self.beta.len() + self.epsilon.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Row labels `S[i]` for all source processes, in source declaration order.
pub fn source_labels(net: &AdtNetwork) -> Vec<String> {
    net.sources()
        .iter()
        .flat_map(|s| (0..s.processes).map(move |i| format!("{}[{i}]", net.node(s.node).id)))
        .collect()
}

/// Column labels `T[k]` for all destination processes, in destination declaration order.
pub fn destination_labels(net: &AdtNetwork) -> Vec<String> {
    net.destinations()
        .iter()
        .flat_map(|t| (0..t.processes).map(move |k| format!("{}[{k}]", net.node(t.node).id)))
        .collect()
}

/// Offset of each source's first process row.
pub fn source_offsets(net: &AdtNetwork) -> BTreeMap<usize, usize> {
    let mut acc = 0;
    net.sources()
        .iter()
        .map(|s| {
            let o = acc;
            acc += s.processes;
            (s.node, o)
        })
        .collect()
}

/// Offset of each destination's first process column.
pub fn destination_offsets(net: &AdtNetwork) -> BTreeMap<usize, usize> {
    let mut acc = 0;
    net.destinations()
        .iter()
        .map(|t| {
            let o = acc;
            acc += t.processes;
            (t.node, o)
        })
        .collect()
}

pub fn total_source_processes(net: &AdtNetwork) -> usize {
    net.sources().iter().map(|s| s.processes).sum()
}

pub fn total_destination_processes(net: &AdtNetwork) -> usize {
    net.destinations().iter().map(|t| t.processes).sum()
}

/// Port-indexed adjacency matrix: 1 per physical edge, `beta` inside supernodes.
pub fn build_f(net: &AdtNetwork, order: &PortOrder, assign: &CodingAssignment) -> Matrix<Fe> {
    let p = order.len();
    let mut f = Matrix::filled(p, p, Fe::ZERO);
    for e in net.edges() {
        f.set(order.index(e.tail()), order.index(e.head()), Fe::ONE);
    }
    for (&(v, x, y), &c) in &assign.beta {
        f.set(order.input(v, x), order.output(v, y), c);
    }
    f
}

/// Encoding matrix, one row per source process.
pub fn build_a(net: &AdtNetwork, order: &PortOrder, assign: &CodingAssignment) -> Matrix<Fe> {
    let offsets = source_offsets(net);
    let mut a = Matrix::filled(total_source_processes(net), order.len(), Fe::ZERO);
    for (&(s, i, e), &c) in &assign.alpha {
        if let Some(&o) = offsets.get(&s) {
            a.set(o + i, order.output(s, e), c);
        }
    }
    a
}

/// Decoding matrix, one row per destination process.
pub fn build_b(net: &AdtNetwork, order: &PortOrder, assign: &CodingAssignment) -> Matrix<Fe> {
    let offsets = destination_offsets(net);
    let mut b = Matrix::filled(total_destination_processes(net), order.len(), Fe::ZERO);
    for (&(t, x, k), &c) in &assign.epsilon {
        if let Some(&o) = offsets.get(&t) {
            b.set(o + k, order.input(t, x), c);
        }
    }
    b
}

/// `(I - F)^-1` for an acyclic network by column-wise back-substitution on the unit upper
/// triangular system.
pub fn inverse_i_minus_f(field: &Field, f: &Matrix<Fe>) -> Matrix<Fe> {
    let p = f.rows();
    // Row i of X = (I - F)^-1 satisfies X[i] = e_i + F[i] X, and F[i][j] != 0 only for j > i.
    let mut x = Matrix::filled(p, p, Fe::ZERO);
    for i in (0..p).rev() {
        x.set(i, i, Fe::ONE);
        for j in i + 1..p {
            let fij = *f.get(i, j);
            if fij.is_zero() {
                continue;
            }
            for c in j..p {
                let v = *x.get(i, c) + field.mul(fij, *x.get(j, c));
                x.set(i, c, v);
            }
        }
    }
    x
}

/// Coding vector of every port: the columns of `A (I - F)^-1`, computed by forward propagation.
pub fn port_vectors(
    net: &AdtNetwork,
    order: &PortOrder,
    assign: &CodingAssignment,
    field: &Field,
) -> Result<Matrix<Fe>> {
    net.longest_path_depth()?;
    let rows = total_source_processes(net);
    let offsets = source_offsets(net);
    let p = order.len();
    let mut g = Matrix::filled(rows, p, Fe::ZERO);
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); p];
    for e in net.edges() {
        incoming[order.index(e.head())].push(order.index(e.tail()));
    }
    for pos in 0..p {
        let port = order.port(pos);
        let mut col = vec![Fe::ZERO; rows];
        match port.side {
            Side::In => {
                for &src in &incoming[pos] {
                    for (r, c) in col.iter_mut().enumerate() {
                        *c += *g.get(r, src);
                    }
                }
            }
            Side::Out => {
                let v = port.node;
                if let Some(&o) = offsets.get(&v) {
                    let mu = net.source(v).map_or(0, |s| s.processes);
                    for i in 0..mu {
                        col[o + i] += assign.alpha(v, i, port.index);
                    }
                }
                for x in 0..net.node(v).inputs {
                    let b = assign.beta(v, x, port.index);
                    if b.is_zero() {
                        continue;
                    }
                    let xi = order.input(v, x);
                    for (r, c) in col.iter_mut().enumerate() {
                        *c += field.mul(b, *g.get(r, xi));
                    }
                }
            }
        }
        for (r, c) in col.into_iter().enumerate() {
            g.set(r, pos, c);
        }
    }
    Ok(g)
}

/// Source-process by destination-process transfer matrix with labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemMatrix {
    pub matrix: Matrix<Fe>,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
}

impl SystemMatrix {
    /// Columns belonging to destination node `t`.
    pub fn destination_block(&self, net: &AdtNetwork, t: usize) -> Matrix<Fe> {
        let off = destination_offsets(net)[&t];
        let nu = net.destination(t).map_or(0, |d| d.processes);
        let cols: Vec<usize> = (off..off + nu).collect();
        self.matrix.select_columns(&cols)
    }

    /// Rows belonging to source node `s`.
    pub fn source_block(&self, net: &AdtNetwork, s: usize) -> Matrix<Fe> {
        let off = source_offsets(net)[&s];
        let mu = net.source(s).map_or(0, |d| d.processes);
        let rows: Vec<usize> = (off..off + mu).collect();
        self.matrix.select_rows(&rows)
    }
}

/// `M = A (I - F)^-1 B^T`.
pub fn system_matrix(net: &AdtNetwork, assign: &CodingAssignment, field: &Field) -> Result<SystemMatrix> {
    let order = net.topological_port_order()?;
    let g = port_vectors(net, &order, assign, field)?;
    Ok(system_from_port_vectors(net, &order, assign, field, &g))
}

pub(crate) fn system_from_port_vectors(
    net: &AdtNetwork,
    order: &PortOrder,
    assign: &CodingAssignment,
    field: &Field,
    g: &Matrix<Fe>,
) -> SystemMatrix {
    let rows = g.rows();
    let offsets = destination_offsets(net);
    let mut m = Matrix::filled(rows, total_destination_processes(net), Fe::ZERO);
    for (&(t, x, k), &c) in &assign.epsilon {
        let Some(&o) = offsets.get(&t) else { continue };
        let xi = order.input(t, x);
        for r in 0..rows {
            let v = *m.get(r, o + k) + field.mul(c, *g.get(r, xi));
            m.set(r, o + k, v);
        }
    }
    SystemMatrix {
        matrix: m,
        row_labels: source_labels(net),
        col_labels: destination_labels(net),
    }
}

/// Propagates one symbol per source process and returns the symbol carried by every port, indexed
/// by the returned topological port order.
pub fn port_symbols(
    net: &AdtNetwork,
    assign: &CodingAssignment,
    field: &Field,
    source_symbols: &[Fe],
) -> Result<(PortOrder, Vec<Fe>)> {
    let total = total_source_processes(net);
    if source_symbols.len() != total {
        return Err(Error::usage(format!(
            "expected {total} source symbols, got {}",
            source_symbols.len()
        )));
    }
    let order = net.topological_port_order()?;
    let offsets = source_offsets(net);
    let mut y = vec![Fe::ZERO; order.len()];
    for pos in 0..order.len() {
        let port = order.port(pos);
        let v = port.node;
        y[pos] = match port.side {
            // MAC: sum of everything arriving.
            Side::In => net
                .in_neighbors(v, port.index)
                .into_iter()
                .fold(Fe::ZERO, |acc, (u, o)| acc + y[order.output(u, o)]),
            Side::Out => {
                let mut acc = Fe::ZERO;
                if let Some(&off) = offsets.get(&v) {
                    let mu = net.source(v).map_or(0, |s| s.processes);
                    for i in 0..mu {
                        acc += field.mul(assign.alpha(v, i, port.index), source_symbols[off + i]);
                    }
                }
                for x in 0..net.node(v).inputs {
                    acc += field.mul(assign.beta(v, x, port.index), y[order.input(v, x)]);
                }
                acc
            }
        };
    }
    Ok((order, y))
}

/// Propagates one symbol per source process through the network and returns the symbol of every
/// destination process (destination declaration order).
pub fn simulate(
    net: &AdtNetwork,
    assign: &CodingAssignment,
    field: &Field,
    source_symbols: &[Fe],
) -> Result<Vec<Fe>> {
    let (order, y) = port_symbols(net, assign, field, source_symbols)?;
    let mut out = Vec::with_capacity(total_destination_processes(net));
    for t in net.destinations() {
        for k in 0..t.processes {
            let mut z = Fe::ZERO;
            for x in 0..net.node(t.node).inputs {
                z += field.mul(assign.epsilon(t.node, x, k), y[order.input(t.node, x)]);
            }
            out.push(z);
        }
    }
    Ok(out)
}

/// Symbolic adjacency matrix: `1` for edges and a variable `b(eX,eY)` for every free internal
/// coefficient, registered in row-major port order.
pub fn symbolic_f(net: &AdtNetwork, order: &PortOrder, vars: &mut VarTable) -> Matrix<MPoly> {
    let p = order.len();
    let mut f = Matrix::filled(p, p, MPoly::zero());
    for e in net.edges() {
        f.set(order.index(e.tail()), order.index(e.head()), MPoly::one());
    }
    let mut betas: Vec<(usize, usize)> = FreePositions::of(net)
        .beta
        .into_iter()
        .map(|(v, x, y)| (order.input(v, x), order.output(v, y)))
        .collect();
    betas.sort_unstable();
    for (i, j) in betas {
        let var = vars.intern(&beta_var_name(order, i, j));
        f.set(i, j, MPoly::var(var));
    }
    f
}

pub fn beta_var_name(order: &PortOrder, i: usize, j: usize) -> String {
    format!("b({},{})", order.label(i), order.label(j))
}

/// Symbolic encoding matrix with variables `a(i,eX)` (1-based process index).
pub fn symbolic_a(net: &AdtNetwork, order: &PortOrder, vars: &mut VarTable) -> Matrix<MPoly> {
    let offsets = source_offsets(net);
    let mut a = Matrix::filled(total_source_processes(net), order.len(), MPoly::zero());
    for (s, i, e) in FreePositions::of(net).alpha {
        let col = order.output(s, e);
        let var = vars.intern(&format!("a({},{})", i + 1, order.label(col)));
        a.set(offsets[&s] + i, col, MPoly::var(var));
    }
    a
}

/// Symbolic decoding matrix with variables `eps(eX,T,k)` (1-based process index).
pub fn symbolic_b(net: &AdtNetwork, order: &PortOrder, vars: &mut VarTable) -> Matrix<MPoly> {
    let offsets = destination_offsets(net);
    let mut b = Matrix::filled(total_destination_processes(net), order.len(), MPoly::zero());
    for (t, x, k) in FreePositions::of(net).epsilon {
        let col = order.input(t, x);
        let var = vars.intern(&format!("eps({},{},{})", order.label(col), net.node(t).id, k + 1));
        b.set(offsets[&t] + k, col, MPoly::var(var));
    }
    b
}

/// Renders a symbolic matrix as a grid of strings.
pub fn format_symbolic(m: &Matrix<MPoly>, vars: &VarTable) -> Vec<Vec<String>> {
    (0..m.rows())
        .map(|r| m.row(r).iter().map(|e| e.format(vars)).collect())
        .collect()
}

/// CSV dump with a header row of column labels.
pub fn matrix_csv(m: &Matrix<Fe>, labels: &[String]) -> String {
    let mut s = labels.join(",");
    s.push('\n');
    for r in 0..m.rows() {
        let row: Vec<String> = m.row(r).iter().map(|e| e.0.to_string()).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}
