use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(name: &str) -> String {
    root().join("fixtures").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adtnc")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited")
}

#[test]
fn mincut_fig3_both_methods_agree() {
    let out = run(&["mincut", &fixture("fig3.json")]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["combinatorial"], 2);
    assert_eq!(v["algebraic"], 2);
    assert_eq!(v["agree"], true);
    assert_eq!(v["seed"], 0);
}

#[test]
fn mincut_disconnected_is_zero() {
    let v = json(&run(&["mincut", &fixture("disconnected.json")]));
    assert_eq!(v["combinatorial"], 0);
    assert_eq!(v["algebraic"], 0);
}

#[test]
fn combinatorial_mincut_refuses_large_networks() {
    let out = run(&["mincut", &fixture("chain25.json"), "--method", "combinatorial"]);
    assert_eq!(code(&out), 5);
    assert!(String::from_utf8_lossy(&out.stderr).contains("complexity refusal"));
    // The algebraic method still answers.
    let v = json(&run(&["mincut", &fixture("chain25.json"), "--method", "algebraic"]));
    assert_eq!(v["algebraic"], 1);
}

#[test]
fn random_code_is_reproducible() {
    let a = run(&["code", &fixture("fig3.json"), "--strategy", "random", "--seed", "7"]);
    let b = run(&["code", &fixture("fig3.json"), "--strategy", "random", "--seed", "7"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["seed"], 7);
}

#[test]
fn solution_file_round_trips_through_verify_and_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("sol.json").display().to_string();
    let out = run(&["code", &fixture("fig3.json"), "--seed", "3", "--out", &sol]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&run(&["verify", &fixture("fig3.json"), &sol, "--seed", "9"]));
    assert_eq!(v["all_ok"], true);
    assert_eq!(v["verified"], "1/1");
    let v = json(&run(&["simulate", &fixture("fig3.json"), &sol, "--symbols", "6,11"]));
    assert_eq!(v["decoded"]["T"], serde_json::json!([6, 11]));
}

#[test]
fn deterministic_construction_on_the_two_hop_relay() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");
    let out = run(&[
        "code",
        &fixture("fig2.json"),
        "--strategy",
        "deterministic",
        "--field",
        "8",
        "--trace",
        &trace.display().to_string(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["verified"], "6/6");
    let lines = std::fs::read_to_string(&trace).unwrap();
    let first: Value = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
    assert_eq!(first["phase"], "init");

    // Over GF(4) the boundary invariant cannot hold (nine directions are needed, five exist).
    let out = run(&["code", &fixture("fig2.json"), "--strategy", "deterministic", "--field", "4"]);
    assert_ne!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("GF(4)"));
}

#[test]
fn strict_bounds_cite_the_violated_bound() {
    let out = run(&[
        "code",
        &fixture("fig2.json"),
        "--strategy",
        "deterministic",
        "--field",
        "8",
        "--strict-bounds",
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("132"));
}

#[test]
fn infeasible_rate_exits_with_two() {
    let text = std::fs::read_to_string(fixture("diamond.json")).unwrap();
    let mut doc: Value = serde_json::from_str(&text).unwrap();
    doc["sources"][0]["processes"] = 3.into();
    doc["destinations"][0]["processes"] = 3.into();
    doc["connections"][0]["process_indices"] = serde_json::json!([0, 1, 2]);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("net.json");
    std::fs::write(&p, doc.to_string()).unwrap();
    let out = run(&["code", &p.display().to_string()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("mincut(S, T) = 2"));
}

#[test]
fn parse_errors_exit_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\n  \"supernodes\": [\n    {\"id\": \"S\",}\n  ]\n}\n").unwrap();
    let out = run(&["validate", &p.display().to_string()]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn validate_reports_fixture_shape() {
    let v = json(&run(&["validate", &fixture("fig3.json")]));
    assert_eq!(v["valid"], true);
    assert_eq!(v["ports"], 12);
    assert_eq!(v["edges"], 6);
}

#[test]
fn symbolic_delay_inverse_entries() {
    let v = json(&run(&["delay", &fixture("fig3.json"), "--symbolic"]));
    let row = &v["inverse"][0];
    assert_eq!(row[11], "D^3*b(e3,e7) + D^3*b(e6,e10)");
    assert_eq!(row[2], "D");
    assert_eq!(row[6], "D^2*b(e3,e7)");
    assert_eq!(v["inverse"][6][11], "D");
}

#[test]
fn cyclic_network_delay_system() {
    let v = json(&run(&["delay", &fixture("ring3.json")]));
    assert_eq!(v["decodable"], true);
    let s = v["system"][0][0].as_str().unwrap();
    assert!(s.contains("D^3") && s.contains("D^6"), "{s}");
    let out = run(&["delay", &fixture("ring3.json"), "--symbolic"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn robust_average_is_exact() {
    let v = json(&run(&[
        "robust",
        &fixture("diamond.json"),
        "--failures",
        &fixture("diamond_failures.json"),
    ]));
    assert_eq!(v["average_mincut"], "1");
    assert_eq!(v["static_solution"]["per_pattern"][0]["all_ok"], true);
    assert_eq!(v["static_solution"]["per_pattern"][1]["all_ok"], true);
}

#[test]
fn no_failures_average_equals_mincut() {
    let avg = json(&run(&[
        "robust",
        &fixture("diamond.json"),
        "--failures",
        &fixture("no_failures.json"),
    ]));
    let cut = json(&run(&["mincut", &fixture("diamond.json"), "--method", "combinatorial"]));
    assert_eq!(avg["average_mincut"], cut["combinatorial"].to_string().as_str());
}

#[test]
fn thread_ceiling_does_not_change_results() {
    let a = run(&["mincut", &fixture("fig2.json"), "--sink", "t12", "--threads", "1"]);
    let b = run(&["mincut", &fixture("fig2.json"), "--sink", "t12", "--threads", "4"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn golden_outputs() {
    let cases: [(&str, Vec<String>); 5] = [
        ("mincut_fig3.json", vec!["mincut".into(), fixture("fig3.json")]),
        ("delay_fig3_symbolic.json", vec!["delay".into(), fixture("fig3.json"), "--symbolic".into()]),
        (
            "robust_diamond.json",
            vec!["robust".into(), fixture("diamond.json"), "--failures".into(), fixture("diamond_failures.json")],
        ),
        ("code_fig3_seed7.json", vec!["code".into(), fixture("fig3.json"), "--seed".into(), "7".into()]),
        (
            "code_fig2_deterministic_gf8.json",
            vec![
                "code".into(),
                fixture("fig2.json"),
                "--strategy".into(),
                "deterministic".into(),
                "--field".into(),
                "8".into(),
            ],
        ),
    ];
    for (golden, args) in cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = run(&args);
        let want = std::fs::read_to_string(fixture(&format!("golden/{golden}"))).unwrap();
        assert_eq!(String::from_utf8_lossy(&out.stdout), want, "{golden}");
    }
}
