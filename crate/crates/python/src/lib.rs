//! Python bindings: networks, min-cuts, code construction, verification and delay analysis.
//!
//! Structured results are returned as plain Python dicts and lists.

use adtnc_core::codegen::{self, BoundPolicy, CodegenConfig, Strategy};
use adtnc_core::coding::{self, CodeSolution, ConnectionKind, SolutionDoc};
use adtnc_core::delay;
use adtnc_core::ff::{Fe, Field, VarTable};
use adtnc_core::fixtures;
use adtnc_core::mincut as cuts;
use adtnc_core::network::AdtNetwork;
use adtnc_core::robust::{self, ErasureDistribution, FailureDoc};
use adtnc_core::transfer;
use adtnc_core::Error;
use num_bigint::BigUint;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(adtnc, AdtncError, PyException);
create_exception!(adtnc, InfeasibleError, AdtncError);
create_exception!(adtnc, ComplexityRefusal, AdtncError);
create_exception!(adtnc, RandomizationExhausted, AdtncError);

fn err(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::Infeasible(_) | Error::InfeasibleUnderFailure { .. } => InfeasibleError::new_err(msg),
        Error::ComplexityRefusal(_) => ComplexityRefusal::new_err(msg),
        Error::RandomizationExhausted { .. } => RandomizationExhausted::new_err(msg),
        _ => AdtncError::new_err(msg),
    }
}

fn to_py<'py>(py: Python<'py>, v: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| AdtncError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn field(q: u32) -> PyResult<Field> {
    Field::with_order(q).map_err(err)
}

fn node(net: &AdtNetwork, id: &str) -> PyResult<usize> {
    net.require(id).map_err(err)
}

fn matrix_values(m: &adtnc_core::ff::Matrix<Fe>) -> Vec<Vec<u16>> {
    (0..m.rows()).map(|r| m.row(r).iter().map(|x| x.0).collect()).collect()
}

/// ADT network with supernodes, ports, hyperedges and connection requirements.
#[pyclass(module = "adtnc", name = "Network")]
struct PyNetwork {
    inner: AdtNetwork,
}

#[pymethods]
impl PyNetwork {
    #[new]
    fn new() -> Self {
        PyNetwork {
            inner: AdtNetwork::new(),
        }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyNetwork {
            inner: AdtNetwork::from_json(text).map_err(err)?,
        })
    }

    /// One of `fig2`, `fig3`, `diamond`, `ring3`, `disconnected`.
    #[staticmethod]
    fn fixture(name: &str) -> PyResult<Self> {
        let inner = match name {
            "fig2" => fixtures::fig2(),
            "fig3" => fixtures::fig3(),
            "diamond" => fixtures::diamond(),
            "ring3" => fixtures::ring3(),
            "disconnected" => fixtures::disconnected(),
            _ => return Err(AdtncError::new_err(format!("unknown fixture {name:?}"))),
        };
        Ok(PyNetwork { inner })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[pyo3(signature = (id, inputs, outputs, layer=None))]
    fn add_node(&mut self, id: &str, inputs: usize, outputs: usize, layer: Option<usize>) -> PyResult<usize> {
        self.inner.add_node(id, inputs, outputs, layer).map_err(err)
    }

    fn connect(&mut self, from: &str, out: usize, to: &str, inp: usize) -> PyResult<()> {
        self.inner.connect(from, out, to, inp).map_err(err)
    }

    fn add_source(&mut self, id: &str, processes: usize) -> PyResult<()> {
        self.inner.add_source(id, processes).map_err(err)
    }

    fn add_destination(&mut self, id: &str, processes: usize) -> PyResult<()> {
        self.inner.add_destination(id, processes).map_err(err)
    }

    fn add_connection(&mut self, source: &str, dest: &str, processes: Vec<usize>) -> PyResult<()> {
        self.inner.add_connection(source, dest, processes).map_err(err)
    }

    fn validate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.validate())
    }

    /// Port labels in topological order.
    fn port_labels(&self) -> PyResult<Vec<String>> {
        Ok(self.inner.topological_port_order().map_err(err)?.labels())
    }

    #[getter]
    fn num_nodes(&self) -> usize {
        self.inner.num_nodes()
    }

    #[getter]
    fn num_ports(&self) -> usize {
        self.inner.num_ports()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.inner.num_edges()
    }

    fn connection_kind(&self) -> String {
        format!("{:?}", coding::classify(&self.inner))
    }

    fn __repr__(&self) -> String {
        format!(
            "Network(supernodes={}, ports={}, edges={})",
            self.inner.num_nodes(),
            self.inner.num_ports(),
            self.inner.num_edges()
        )
    }
}

/// A verified linear code: coefficients plus one decoder per destination.
#[pyclass(module = "adtnc", name = "Solution")]
struct PySolution {
    inner: CodeSolution,
}

#[pymethods]
impl PySolution {
    #[staticmethod]
    fn from_json(net: &PyNetwork, text: &str) -> PyResult<Self> {
        let doc = SolutionDoc::from_json(text).map_err(err)?;
        Ok(PySolution {
            inner: CodeSolution::from_doc(&net.inner, &doc).map_err(err)?,
        })
    }

    fn to_json(&self, net: &PyNetwork) -> String {
        self.inner.to_json(&net.inner)
    }

    #[getter]
    fn field_order(&self) -> u32 {
        self.inner.field.order()
    }

    #[getter]
    fn attempts(&self) -> usize {
        self.inner.attempts
    }

    /// Decodes `vectors` random source vectors; one `{destination, demanded, ok}` per receiver.
    #[pyo3(signature = (net, vectors=20, seed=0))]
    fn verify<'py>(&self, py: Python<'py>, net: &PyNetwork, vectors: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &coding::verify_solution(&net.inner, &self.inner, vectors, seed).map_err(err)?)
    }

    fn system_matrix(&self, net: &PyNetwork) -> PyResult<Vec<Vec<u16>>> {
        let sys = transfer::system_matrix(&net.inner, &self.inner.assign, &self.inner.field).map_err(err)?;
        Ok(matrix_values(&sys.matrix))
    }

    /// Destination output symbols for the given source symbols, in destination order.
    fn simulate(&self, net: &PyNetwork, symbols: Vec<u16>) -> PyResult<Vec<u16>> {
        let x: Vec<Fe> = symbols.into_iter().map(Fe).collect();
        let z = transfer::simulate(&net.inner, &self.inner.assign, &self.inner.field, &x).map_err(err)?;
        Ok(z.into_iter().map(|v| v.0).collect())
    }

    /// Demanded source symbols recovered at destination `dest` from its output symbols.
    fn decode(&self, net: &PyNetwork, dest: &str, outputs: Vec<u16>) -> PyResult<Vec<u16>> {
        let t = node(&net.inner, dest)?;
        let d = self
            .inner
            .decoders
            .get(&t)
            .ok_or_else(|| AdtncError::new_err(format!("{dest} has no decoder")))?;
        if outputs.len() != d.rows() {
            return Err(AdtncError::new_err(format!("{dest} expects {} symbols", d.rows())));
        }
        let z: Vec<Fe> = outputs.into_iter().map(Fe).collect();
        Ok(d.vec_mul(&self.inner.field, &z).into_iter().map(|v| v.0).collect())
    }
}

/// Exact (`combinatorial`) or randomized (`algebraic`) min-cut between two supernodes.
#[pyfunction]
#[pyo3(signature = (net, source, sink, method="combinatorial", field=256, trials=200, seed=0))]
fn mincut(
    net: &PyNetwork,
    source: &str,
    sink: &str,
    method: &str,
    field: u32,
    trials: usize,
    seed: u64,
) -> PyResult<usize> {
    let (s, t) = (node(&net.inner, source)?, node(&net.inner, sink)?);
    match method {
        "combinatorial" => Ok(cuts::mincut_combinatorial(&net.inner, s, t).map_err(err)?.value),
        "algebraic" => cuts::mincut_algebraic(&net.inner, s, t, &self::field(field)?, trials, seed).map_err(err),
        _ => Err(AdtncError::new_err(format!("unknown method {method:?}"))),
    }
}

/// Random linear code for the network's connection set, verified before it is returned.
#[pyfunction]
#[pyo3(signature = (net, field=16, seed=0))]
fn random_code(net: &PyNetwork, field: u32, seed: u64) -> PyResult<PySolution> {
    let f = self::field(field)?;
    let n = &net.inner;
    let inner = match coding::classify(n) {
        ConnectionKind::DisjointMulticast => coding::solve_disjoint_multicast(n, &f, seed),
        ConnectionKind::TwoLevel => coding::solve_two_level(n, &f, seed),
        ConnectionKind::MultipleMulticast => coding::solve_multiple_multicast(n, &f, seed),
        _ => coding::random_code(n, &f, seed),
    }
    .map_err(err)?;
    Ok(PySolution { inner })
}

/// Layer-by-layer multicast code (`las_vegas` or `deterministic`) that also lets every supernode
/// with enough min-cut decode.
#[pyfunction]
#[pyo3(signature = (net, field=256, strategy="las_vegas", seed=0, strict_bounds=false))]
fn construct_code(net: &PyNetwork, field: u32, strategy: &str, seed: u64, strict_bounds: bool) -> PyResult<PySolution> {
    let strategy = match strategy {
        "las_vegas" => Strategy::LasVegas,
        "deterministic" => Strategy::Deterministic,
        _ => return Err(AdtncError::new_err(format!("unknown strategy {strategy:?}"))),
    };
    let cfg = CodegenConfig {
        strategy,
        policy: if strict_bounds { BoundPolicy::Strict } else { BoundPolicy::BestEffort },
        seed,
        ..CodegenConfig::default()
    };
    let rate = match net.inner.sources() {
        [s] => s.processes,
        _ => return Err(AdtncError::new_err("code construction needs exactly one source")),
    };
    let code = codegen::construct_multicast_code(&net.inner, rate, &self::field(field)?, &cfg).map_err(err)?;
    Ok(PySolution { inner: code.solution })
}

/// Exhaustive binary search: `{alpha_positions, beta_positions, ..., solutions}`.
#[pyfunction]
fn exhaustive_gf2_search<'py>(py: Python<'py>, net: &PyNetwork) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &coding::exhaustive_gf2_search(&net.inner).map_err(err)?)
}

/// Symbolic transfer matrix `F` as strings such as `b(e3,e7)`.
#[pyfunction]
fn symbolic_transfer(net: &PyNetwork) -> PyResult<Vec<Vec<String>>> {
    let order = net.inner.topological_port_order().map_err(err)?;
    let mut vars = VarTable::new();
    let f = transfer::symbolic_f(&net.inner, &order, &mut vars);
    Ok(transfer::format_symbolic(&f, &vars))
}

/// Symbolic `(I - DF)^-1`, truncated at `D^truncate` when given (required for cyclic networks).
#[pyfunction]
#[pyo3(signature = (net, truncate=None, field=16))]
fn symbolic_delay_inverse(net: &PyNetwork, truncate: Option<usize>, field: u32) -> PyResult<Vec<Vec<String>>> {
    let (m, vars, _) = delay::symbolic_delay_inverse(&net.inner, &self::field(field)?, truncate).map_err(err)?;
    Ok(transfer::format_symbolic(&m, &vars))
}

/// Exact average min-cut under a failure distribution, as a fraction string.
#[pyfunction]
fn time_average_mincut(net: &PyNetwork, failures_json: &str, source: &str, sink: &str) -> PyResult<String> {
    let doc = FailureDoc::from_json(failures_json).map_err(err)?;
    let dist = ErasureDistribution::from_doc(&net.inner, &doc).map_err(err)?;
    let (s, t) = (node(&net.inner, source)?, node(&net.inner, sink)?);
    Ok(robust::time_average_mincut(&net.inner, s, t, &dist).map_err(err)?.value.to_string())
}

/// Number of nonsingular `p x p` matrices over GF(q).
#[pyfunction]
fn count_nonsingular_matrices(q: u64, p: u32) -> BigUint {
    codegen::count_nonsingular_matrices(q, p)
}

#[pymodule]
pub fn adtnc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNetwork>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(mincut, m)?)?;
    m.add_function(wrap_pyfunction!(random_code, m)?)?;
    m.add_function(wrap_pyfunction!(construct_code, m)?)?;
    m.add_function(wrap_pyfunction!(exhaustive_gf2_search, m)?)?;
    m.add_function(wrap_pyfunction!(symbolic_transfer, m)?)?;
    m.add_function(wrap_pyfunction!(symbolic_delay_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(time_average_mincut, m)?)?;
    m.add_function(wrap_pyfunction!(count_nonsingular_matrices, m)?)?;
    m.add("AdtncError", m.py().get_type::<AdtncError>())?;
    m.add("InfeasibleError", m.py().get_type::<InfeasibleError>())?;
    m.add("ComplexityRefusal", m.py().get_type::<ComplexityRefusal>())?;
    m.add("RandomizationExhausted", m.py().get_type::<RandomizationExhausted>())?;
    Ok(())
}
