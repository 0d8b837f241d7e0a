use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_deltaforms"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn payload(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn fixture() -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    root.join("../core/fixtures/11a1.json").display().to_string()
}

fn golden(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    root.join("tests/golden").join(name).display().to_string()
}

fn scratch(name: &str) -> String {
    let dir = std::env::temp_dir().join(format!("deltaforms-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name).display().to_string()
}

#[test]
fn commutator_of_six_at_two_and_three() {
    let out = run(&["check-commutator", "--p1", "2", "--p2", "3", "--value", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let v = payload(&out);
    assert_eq!(v["lhs"], "-3605");
    assert_eq!(v["rhs"], "-3605");
    assert_eq!(v["pass"], true);
}

#[test]
fn golden_files_match() {
    let cases: [(&[&str], &str); 2] = [
        (&["psi", "--p", "5", "--side", "serretate", "--N", "12"], "psi5_serretate_N12.json"),
        (&["check-commutator", "--p1", "2", "--p2", "3", "--value", "6"], "commutator_2_3_6.json"),
    ];
    for (args, file) in cases {
        let g = golden(file);
        let mut all = args.to_vec();
        all.extend(["--golden", g.as_str()]);
        assert_eq!(run(&all).status.code(), Some(0), "{file}");
    }
}

#[test]
fn golden_mismatch_sets_failure() {
    let g = golden("psi5_serretate_N12.json");
    let out = run(&["psi", "--p", "7", "--N", "12", "--golden", &g]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn output_is_deterministic() {
    let args = ["fe0", "--primes", "5,7", "--N", "20"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn fe0_round_trips_into_covariance() {
    let path = scratch("fe0.json");
    let out = run(&["fe0", "--primes", "5,7", "--N", "20", "--out", &path]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(&path).unwrap(), out.stdout);
    let out = run(&["check-covariance", "--input", &path, "--gamma", "2", "--nu", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(payload(&out)["pass"], true);
}

#[test]
fn f2e0_is_not_covariant() {
    let path = scratch("f2e0.json");
    let fx = fixture();
    let out = run(&["f2e0", "--curve", &fx, "--primes", "5,13", "--N", "20", "--out", &path]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["check-covariance", "--input", &path, "--gamma", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let v = payload(&out);
    assert_eq!(v["pass"], false);
    assert!(v["witness"].is_string());
}

#[test]
fn fourier_psi_carries_its_modulus() {
    let path = scratch("psi7q.json");
    assert_eq!(run(&["psi", "--p", "7", "--side", "fourier", "--M", "4", "--out", &path]).status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["modulus"]["p"], 7);
}

#[test]
fn fe_family_continues() {
    let (a, b) = (scratch("fe1.json"), scratch("fe2.json"));
    for (k, path) in [("1", &a), ("2", &b)] {
        let out = run(&["fe-k", "--primes", "5,7", "--k", k, "--N", "20", "--out", path]);
        assert_eq!(out.status.code(), Some(0));
    }
    let m1 = format!("{a}@5");
    let m2 = format!("{b}@7");
    let out = run(&["check-continuation", "--input", &m1, "--input", &m2]);
    assert_eq!(out.status.code(), Some(0));
    let v = payload(&out);
    assert_eq!(v["continued"], true);
    let fe0 = run(&["fe0", "--primes", "5,7", "--N", "20"]);
    assert_eq!(v["series"], payload(&fe0));
}

#[test]
fn exact_member_needs_its_prime() {
    let a = scratch("fe_only.json");
    run(&["fe-k", "--primes", "5,7", "--k", "1", "--N", "10", "--out", &a]);
    let out = run(&["check-continuation", "--input", &a]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(payload(&out)["error"], "usage");
}

#[test]
fn point_count_for_11a1() {
    let fx = fixture();
    let v = payload(&run(&["ap", "--curve", &fx, "--p", "5"]));
    assert_eq!(v["a_p"], 1);
    let v = payload(&run(&["ap", "--curve", &fx, "--p", "7"]));
    assert_eq!(v["a_p"], -2);
    let out = run(&["ap", "--curve", &fx, "--p", "11"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(payload(&out)["error"], "domain");
}

#[test]
fn eisenstein_feeds_delta_commands() {
    let path = scratch("e4.json");
    assert_eq!(run(&["eisenstein", "--k", "4", "--N", "8", "--out", &path]).status.code(), Some(0));
    let d0 = run(&["delta0", "--input", &path, "--p", "5", "--M", "4"]);
    assert_eq!(d0.status.code(), Some(0));
    assert_eq!(payload(&d0)["modulus"]["p"], 5);
    let d1 = run(&["delta-expand", "--input", &path, "--p", "5", "--n", "1", "--M", "4"]);
    assert_eq!(d1.status.code(), Some(0));
    assert!(!payload(&d1)["terms"].as_array().unwrap().is_empty());
}

#[test]
fn fsharp_for_11a1() {
    let fx = fixture();
    let out = run(&["fsharp", "--curve", &fx, "--p", "13", "--N", "30", "--M", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let v = payload(&out);
    assert_eq!(v["modulus"]["M"], 6);
    let exact = run(&["fsharp", "--curve", &fx, "--p", "13", "--N", "30", "--exact"]);
    assert!(payload(&exact).get("modulus").is_none());
}

#[test]
fn checks_that_pass() {
    for args in [
        &["check-lemma", "--name", "xlaphi", "--p", "5", "--n", "1"][..],
        &["check-lemma", "--name", "logder", "--p", "7", "--n", "1", "--a", "2"],
        &["check-basis", "--primes", "5", "--orders", "2"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        assert_eq!(payload(&out)["pass"], true);
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["psi"]).status.code(), Some(2));
    assert_eq!(run(&["fe-k", "--primes", "5,7", "--k", "3"]).status.code(), Some(2));
    let out = run(&["check-commutator", "--p1", "2", "--p2", "3", "--value", "1/2"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(payload(&out)["error"], "usage");
}

#[test]
fn library_errors_carry_codes() {
    let out = run(&["psi", "--p", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(payload(&out)["error"], "domain");
    let bad = scratch("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    let out = run(&["check-covariance", "--input", &bad, "--gamma", "2"]);
    assert_eq!(payload(&out)["error"], "parse_error");
}
