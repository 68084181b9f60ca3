use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adtnc_core::codegen::{self, BoundPolicy, CodegenConfig, Strategy};
use adtnc_core::coding::{self, CodeSolution, ConnectionKind, SolutionDoc};
use adtnc_core::delay::{self, DelayAssignment};
use adtnc_core::ff::{Fe, Field, Matrix};
use adtnc_core::network::{self, AdtNetwork, NetworkDoc};
use adtnc_core::robust::{self, ErasureDistribution, FailureDoc};
use adtnc_core::transfer::{self, CodingAssignment};
use adtnc_core::{mincut, seed, Error};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "adtnc", version, about = "Algebraic network coding for ADT deterministic networks")]
struct Cli {
    /// Upper bound on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a network file for structural problems.
    Validate { network: PathBuf },
    /// Min-cut between a source and a destination.
    Mincut {
        network: PathBuf,
        #[command(flatten)]
        ends: Ends,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
        /// Field order for the algebraic method.
        #[arg(long, default_value_t = 256)]
        field: u32,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Repeat algebraic batches until two consecutive maxima agree.
        #[arg(long)]
        strict: bool,
    },
    /// Find a code for the declared connections and verify it.
    Code {
        network: PathBuf,
        #[arg(long, value_enum, default_value_t = CodeStrategy::Random)]
        strategy: CodeStrategy,
        /// Field order q = 2^m.
        #[arg(long, default_value_t = 16)]
        field: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to write the solution; it is embedded in the report otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the construction trace as JSON lines (deterministic strategy).
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Refuse fields below the sufficient size instead of trying anyway.
        #[arg(long)]
        strict_bounds: bool,
        /// Layered construction with Las Vegas redraws instead of Algorithm-style fixing.
        #[arg(long)]
        las_vegas: bool,
    },
    /// Re-verify a solution file by simulation.
    Verify {
        network: PathBuf,
        solution: PathBuf,
        #[arg(long, default_value_t = 20)]
        vectors: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Erasure robustness: average min-cut and a static code over failure patterns.
    Robust {
        network: PathBuf,
        #[arg(long)]
        failures: PathBuf,
        #[command(flatten)]
        ends: Ends,
        #[arg(long, default_value_t = 16)]
        field: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// System matrix over GF(2^m)(D) for networks with unit delays.
    Delay {
        network: PathBuf,
        /// Print (I - DF)^-1 with symbolic coefficients.
        #[arg(long)]
        symbolic: bool,
        /// Truncate power series at D^L.
        #[arg(long)]
        truncate: Option<usize>,
        /// Coefficients to use; random ones are drawn otherwise.
        #[arg(long)]
        solution: Option<PathBuf>,
        #[arg(long, default_value_t = 16)]
        field: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Push source symbols through a coded network.
    Simulate {
        network: PathBuf,
        solution: PathBuf,
        /// Comma-separated source symbols; random when omitted.
        #[arg(long, value_delimiter = ',')]
        symbols: Option<Vec<u32>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(clap::Args)]
struct Ends {
    /// Source supernode id (first declared source by default).
    #[arg(long)]
    source: Option<String>,
    /// Destination supernode id (first declared destination by default).
    #[arg(long)]
    sink: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Combinatorial,
    Algebraic,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CodeStrategy {
    Random,
    Deterministic,
}

enum Failure {
    Lib(Error),
    Io(String),
    /// Command ran but its check did not hold; the report is already printed.
    Check,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Infeasible(_) | Error::InfeasibleUnderFailure { .. } => 2,
        Error::RandomizationExhausted { .. } => 3,
        Error::Parse { .. } => 4,
        Error::ComplexityRefusal(_) => 5,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Check) => ExitCode::from(1),
    }
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load_network(path: &Path) -> std::result::Result<AdtNetwork, Failure> {
    Ok(AdtNetwork::from_json(&read(path)?)?)
}

fn load_solution(net: &AdtNetwork, path: &Path) -> std::result::Result<CodeSolution, Failure> {
    let doc = SolutionDoc::from_json(&read(path)?)?;
    Ok(CodeSolution::from_doc(net, &doc)?)
}

fn field(q: u32) -> std::result::Result<Field, Failure> {
    Ok(Field::with_order(q)?)
}

fn emit(v: &Value) {
    use std::io::Write;
    // A closed pipe downstream is not an error worth a panic.
    let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn endpoints(net: &AdtNetwork, ends: &Ends) -> std::result::Result<(usize, usize), Failure> {
    let pick = |given: &Option<String>, declared: Option<usize>, what: &str| -> std::result::Result<usize, Failure> {
        match given {
            Some(id) => Ok(net.require(id)?),
            None => declared.ok_or_else(|| Failure::Lib(Error::Usage(format!("no {what} given or declared")))),
        }
    };
    let s = pick(&ends.source, net.sources().first().map(|e| e.node), "source")?;
    let t = pick(&ends.sink, net.destinations().first().map(|e| e.node), "destination")?;
    Ok((s, t))
}

fn run(cmd: Cmd) -> Outcome {
    match cmd {
        Cmd::Validate { network } => cmd_validate(&network),
        Cmd::Mincut { network, ends, method, field: q, trials, seed, strict } => {
            cmd_mincut(&network, &ends, method, q, trials, seed, strict)
        }
        Cmd::Code { network, strategy, field: q, seed, out, trace, strict_bounds, las_vegas } => {
            cmd_code(&network, strategy, q, seed, out.as_deref(), trace.as_deref(), strict_bounds, las_vegas)
        }
        Cmd::Verify { network, solution, vectors, seed } => cmd_verify(&network, &solution, vectors, seed),
        Cmd::Robust { network, failures, ends, field: q, seed } => cmd_robust(&network, &failures, &ends, q, seed),
        Cmd::Delay { network, symbolic, truncate, solution, field: q, seed } => {
            cmd_delay(&network, symbolic, truncate, solution.as_deref(), q, seed)
        }
        Cmd::Simulate { network, solution, symbols, seed } => cmd_simulate(&network, &solution, symbols, seed),
    }
}

fn cmd_validate(path: &Path) -> Outcome {
    let doc = NetworkDoc::from_json(&read(path)?)?;
    let report = network::validate_doc(&doc);
    emit(&serde_json::to_value(&report).expect("serializable"));
    if report.valid {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn cmd_mincut(path: &Path, ends: &Ends, method: Method, q: u32, trials: usize, seed: u64, strict: bool) -> Outcome {
    let net = load_network(path)?;
    let (s, t) = endpoints(&net, ends)?;
    let mut out = json!({
        "seed": seed,
        "source": net.node(s).id,
        "sink": net.node(t).id,
    });
    let comb = match method {
        Method::Combinatorial | Method::Both => Some(mincut::mincut_combinatorial(&net, s, t)?),
        Method::Algebraic => None,
    };
    let alg = match method {
        Method::Algebraic | Method::Both => {
            let f = field(q)?;
            Some(if strict {
                mincut::mincut_algebraic_strict(&net, s, t, &f, trials, seed, 64)?
            } else {
                mincut::mincut_algebraic(&net, s, t, &f, trials, seed)?
            })
        }
        Method::Combinatorial => None,
    };
    if let Some(c) = &comb {
        out["combinatorial"] = json!(c.value);
        out["cut"] = json!(c.omega);
    }
    if let Some(a) = alg {
        out["algebraic"] = json!(a);
        out["field"] = json!(q);
        out["trials"] = json!(trials);
    }
    let agree = match (&comb, alg) {
        (Some(c), Some(a)) => Some(c.value == a),
        _ => None,
    };
    if let Some(a) = agree {
        out["agree"] = json!(a);
    }
    emit(&out);
    if agree == Some(false) {
        eprintln!("error: combinatorial and algebraic min-cuts disagree");
        return Err(Failure::Check);
    }
    Ok(())
}

fn checks_json(checks: &[coding::DecodeCheck]) -> Value {
    let ok = checks.iter().filter(|c| c.ok).count();
    json!({
        "checks": checks,
        "verified": format!("{ok}/{}", checks.len()),
        "all_ok": ok == checks.len(),
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_code(
    path: &Path,
    strategy: CodeStrategy,
    q: u32,
    seed: u64,
    out: Option<&Path>,
    trace: Option<&Path>,
    strict_bounds: bool,
    las_vegas: bool,
) -> Outcome {
    let net = load_network(path)?;
    let f = field(q)?;
    let mut report = json!({ "seed": seed, "field": q });
    let (sol, name) = match strategy {
        CodeStrategy::Random => {
            let kind = coding::classify(&net);
            let sol = match kind {
                ConnectionKind::DisjointMulticast => coding::solve_disjoint_multicast(&net, &f, seed)?,
                ConnectionKind::TwoLevel => coding::solve_two_level(&net, &f, seed)?,
                ConnectionKind::MultipleMulticast => coding::solve_multiple_multicast(&net, &f, seed)?,
                _ => coding::random_code(&net, &f, seed)?,
            };
            report["connections"] = json!(format!("{kind:?}"));
            report["attempts"] = json!(sol.attempts);
            (sol, "random")
        }
        CodeStrategy::Deterministic => {
            let rate = net.sources().first().map_or(0, |s| s.processes);
            let cfg = CodegenConfig {
                strategy: if las_vegas { Strategy::LasVegas } else { Strategy::Deterministic },
                policy: if strict_bounds { BoundPolicy::Strict } else { BoundPolicy::BestEffort },
                seed,
                ..CodegenConfig::default()
            };
            let code = codegen::construct_multicast_code(&net, rate, &f, &cfg)?;
            if let Some(p) = trace {
                let lines: String = code
                    .trace
                    .iter()
                    .map(|s| serde_json::to_string(s).expect("serializable") + "\n")
                    .collect();
                write(p, &lines)?;
            }
            report["rate"] = json!(rate);
            report["bounds"] = serde_json::to_value(&code.bounds).expect("serializable");
            report["decoding_nodes"] =
                json!(code.node_decoders.keys().map(|&v| net.node(v).id.clone()).collect::<Vec<_>>());
            report["steps"] = json!(code.trace.len());
            if let Some(d) = code.mean_output_draws() {
                report["mean_output_draws"] = json!(d);
            }
            (code.solution, if las_vegas { "las-vegas" } else { "deterministic" })
        }
    };
    let checks = coding::verify_solution(&net, &sol, coding::VERIFY_VECTORS, seed)?;
    report["strategy"] = json!(name);
    let cj = checks_json(&checks);
    let all_ok = cj["all_ok"].as_bool() == Some(true);
    for k in ["checks", "verified", "all_ok"] {
        report[k] = cj[k].clone();
    }
    let mut doc = sol.to_doc(&net);
    doc.strategy = Some(name.to_string());
    if !all_ok {
        emit(&report);
        eprintln!("error: solution failed verification; nothing written");
        return Err(Failure::Check);
    }
    match out {
        Some(p) => {
            write(p, &doc.to_json())?;
            report["solution_file"] = json!(p.display().to_string());
        }
        None => report["solution"] = serde_json::to_value(&doc).expect("serializable"),
    }
    emit(&report);
    Ok(())
}

fn cmd_verify(path: &Path, solution: &Path, vectors: usize, seed: u64) -> Outcome {
    let net = load_network(path)?;
    let sol = load_solution(&net, solution)?;
    let checks = coding::verify_solution(&net, &sol, vectors, seed)?;
    let mut report = checks_json(&checks);
    report["seed"] = json!(seed);
    report["vectors"] = json!(vectors);
    emit(&report);
    if report["all_ok"].as_bool() == Some(true) {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn cmd_robust(path: &Path, failures: &Path, ends: &Ends, q: u32, seed: u64) -> Outcome {
    let net = load_network(path)?;
    let doc = FailureDoc::from_json(&read(failures)?)?;
    let patterns = doc.patterns(&net)?;
    let (s, t) = endpoints(&net, ends)?;
    let mut report = json!({
        "seed": seed,
        "field": q,
        "source": net.node(s).id,
        "sink": net.node(t).id,
        "patterns": patterns.len(),
    });
    if doc.patterns.iter().all(|p| p.p.is_some()) {
        let dist = ErasureDistribution::from_doc(&net, &doc)?;
        let avg = robust::time_average_mincut(&net, s, t, &dist)?;
        report["average_mincut"] = json!(avg.value.to_string());
        report["per_pattern_mincut"] = json!(avg.per_pattern);
    } else {
        let cuts = patterns
            .iter()
            .map(|p| mincut::mincut(&robust::apply_failure(&net, p)?, s, t))
            .collect::<adtnc_core::Result<Vec<_>>>()?;
        report["per_pattern_mincut"] = json!(cuts);
    }
    if !net.connections().is_empty() {
        let f = field(q)?;
        let sol = robust::find_static_solution(&net, &patterns, &f, seed)?;
        let checks: Vec<Value> = sol.checks.iter().map(|c| checks_json(c)).collect();
        report["static_solution"] = json!({
            "attempts": sol.attempts,
            "bound_satisfied": sol.bound_satisfied,
            "per_pattern": checks,
            "solution": sol.under(0).to_doc(&net),
        });
    }
    emit(&report);
    Ok(())
}

fn matrix_strings<E: std::fmt::Display + Clone + PartialEq>(m: &Matrix<E>) -> Value {
    json!((0..m.rows())
        .map(|r| m.row(r).iter().map(|e| e.to_string()).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

fn cmd_delay(path: &Path, symbolic: bool, truncate: Option<usize>, solution: Option<&Path>, q: u32, seed: u64) -> Outcome {
    let net = load_network(path)?;
    if symbolic {
        let f = field(q)?;
        let (m, vars, order) = delay::symbolic_delay_inverse(&net, &f, truncate)?;
        let grid: Vec<Vec<String>> =
            (0..m.rows()).map(|r| m.row(r).iter().map(|e| e.format(&vars)).collect()).collect();
        emit(&json!({ "labels": order.labels(), "inverse": grid, "truncate": truncate }));
        return Ok(());
    }
    let (assign, f) = match solution {
        Some(p) => {
            let sol = load_solution(&net, p)?;
            (sol.assign, sol.field)
        }
        None => {
            let f = field(q)?;
            let mut rng = seed::rng(seed, &[0x6465_6c61]);
            (CodingAssignment::random(&net, &f, &mut rng), f)
        }
    };
    let da = DelayAssignment::from_constant(&assign);
    let mut report = json!({
        "seed": seed,
        "field": f.order(),
        "rows": transfer::source_labels(&net),
        "cols": transfer::destination_labels(&net),
    });
    match truncate {
        Some(l) => {
            let m = delay::truncated_delay_response(&net, &da, &f, l)?;
            report["truncate"] = json!(l);
            report["response"] = matrix_strings(&m);
        }
        None => {
            let m = delay::delay_system_matrix(&net, &da, &f);
            report["system"] = matrix_strings(&m);
            report["decodable"] = json!(delay::connections_decodable(&net, &m, &f));
        }
    }
    emit(&report);
    Ok(())
}

fn cmd_simulate(path: &Path, solution: &Path, symbols: Option<Vec<u32>>, seed: u64) -> Outcome {
    let net = load_network(path)?;
    let sol = load_solution(&net, solution)?;
    let f = &sol.field;
    let total = transfer::total_source_processes(&net);
    let x: Vec<Fe> = match symbols {
        Some(v) => v.into_iter().map(|s| f.element(s)).collect::<adtnc_core::Result<_>>()?,
        None => {
            use rand::Rng;
            let mut rng = seed::rng(seed, &[0x7369_6d75]);
            (0..total).map(|_| Fe(rng.gen_range(0..f.order()) as u16)).collect()
        }
    };
    let z = transfer::simulate(&net, &sol.assign, f, &x)?;
    let labels = transfer::destination_labels(&net);
    let mut decoded = serde_json::Map::new();
    for (&t, d) in &sol.decoders {
        let offs = transfer::destination_offsets(&net)[&t];
        let nu = d.rows();
        let got = Matrix::from_rows(vec![z[offs..offs + nu].to_vec()]).mul(f, d);
        decoded.insert(net.node(t).id.clone(), json!(got.row(0).iter().map(|e| e.0).collect::<Vec<_>>()));
    }
    emit(&json!({
        "seed": seed,
        "inputs": x.iter().map(|e| e.0).collect::<Vec<_>>(),
        "outputs": labels.iter().zip(&z).map(|(l, e)| (l.clone(), json!(e.0))).collect::<serde_json::Map<_, _>>(),
        "decoded": decoded,
    }));
    Ok(())
}
