//! The `fairpay` binary end to end: outputs, exit codes and reproducibility.

use std::path::PathBuf;
use std::process::{Command, Output};

use fairpay::json::{InstanceJson, SolveResultJson};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn fairpay(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fairpay")).args(args).env_remove("FAIRPAY_BRUTE_CAP").output().unwrap()
}

fn solve(file: &str, algorithm: &str, extra: &[&str]) -> Output {
    let path = fixture(file);
    let mut args = vec!["solve", "--instance", path.to_str().unwrap(), "--algorithm", algorithm];
    args.extend_from_slice(extra);
    fairpay(&args)
}

fn objective_value(out: &Output) -> String {
    let r: SolveResultJson = serde_json::from_slice(&out.stdout).unwrap();
    r.objective_value.to_string()
}

#[test]
fn intro_optimum_is_a_quarter() {
    let out = solve("intro.json", "brute", &[]);
    assert_eq!(out.status.code(), Some(0));
    let r: SolveResultJson = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r.objective_value.to_string(), "1/4");
    assert_eq!(r.contract.iter().map(ToString::to_string).collect::<Vec<_>>(), ["1/2", "0/1"]);
    assert_eq!(r.equilibrium, [0, 1]);
}

#[test]
fn additive_exact_on_the_harmonic_fixture() {
    let out = solve("harmonic4.json", "additive_exact", &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(objective_value(&out), "39/50");
    assert_eq!(objective_value(&solve("harmonic4.json", "brute_equal_pay", &[])), "39/50");
}

#[test]
fn empty_instance_gets_the_zero_contract() {
    for algorithm in ["brute", "brute_equal_pay", "additive_exact"] {
        let out = solve("empty.json", algorithm, &[]);
        assert_eq!(out.status.code(), Some(0), "{algorithm}");
        let r: SolveResultJson = serde_json::from_slice(&out.stdout).unwrap();
        assert!(r.contract.is_empty() && r.equilibrium.is_empty(), "{algorithm}");
        assert_eq!(r.objective_value.to_string(), "0/1");
    }
}

#[test]
fn corrupted_table_fails_the_toolbox_with_a_witness() {
    let path = fixture("corrupted_table.json");
    let out = fairpay(&["verify", "toolbox", "--instance", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let monotone = report["checks"].as_array().unwrap().iter().find(|c| c["name"] == "reward_is_monotone").unwrap();
    assert_eq!(monotone["failures"], 1);
    assert_eq!(monotone["counterexample"]["set"], serde_json::json!([0]));
    assert_eq!(monotone["counterexample"]["added_action"], 1);
}

#[test]
fn exit_codes() {
    // Cap exceeded.
    assert_eq!(
        fairpay(&[
            "--brute-cap",
            "3",
            "solve",
            "--instance",
            fixture("intro.json").to_str().unwrap(),
            "--algorithm",
            "brute"
        ])
        .status
        .code(),
        Some(2)
    );
    // Precondition: the intro reward is additive, not a binary XOS instance.
    assert_eq!(solve("intro.json", "xos_binary", &[]).status.code(), Some(3));
    // Profit-only algorithm asked for reward.
    assert_eq!(solve("intro.json", "alg1", &["--objective", "reward"]).status.code(), Some(3));
    // Unreadable input.
    assert_eq!(solve("missing.json", "brute", &[]).status.code(), Some(4));
    // Bad usage never collides with the cap code.
    assert_eq!(fairpay(&["solve", "--algorithm", "nonsense"]).status.code(), Some(64));
    assert_eq!(fairpay(&["--help"]).status.code(), Some(0));
}

#[test]
fn same_seed_same_bytes() {
    for args in [
        &["--seed", "5", "gen", "random_xos_binary"][..],
        &["--seed", "5", "gen", "hardness", "--ell", "2"][..],
        &["--seed", "5", "verify", "alg1"][..],
    ] {
        let a = fairpay(args);
        let b = fairpay(args);
        assert!(a.status.success(), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn generated_instances_round_trip() {
    for family in [
        "intro",
        "harmonic",
        "subadditive",
        "coverage_gap",
        "random_additive",
        "random_coverage",
        "random_partition_matroid",
        "matroid",
    ] {
        let out = fairpay(&["gen", family]);
        assert!(out.status.success(), "{family}: {}", String::from_utf8_lossy(&out.stderr));
        let parsed: InstanceJson = serde_json::from_slice(&out.stdout).unwrap();
        let inst = parsed.to_instance().unwrap();
        let again = InstanceJson::new(&inst, parsed.to_witness().unwrap().as_ref());
        assert_eq!(again, parsed, "{family}");
    }
}

#[test]
fn poe_table_formats() {
    let csv = fairpay(&["poe", "--family", "harmonic", "--n", "4,8", "--precision", "3"]);
    assert!(csv.status.success());
    let text = String::from_utf8(csv.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("n,unconstrained,equal_pay,ratio,unconstrained_approx,equal_pay_approx,ratio_approx")
    );
    assert!(lines.next().unwrap().starts_with("4,25/24,"));
    let json = fairpay(&["--format", "json", "poe", "--family", "coverage_gap", "--objective", "reward"]);
    let rows: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(rows[0]["unconstrained"], "13/10");
    assert_eq!(rows[0]["unconstrained_source"], "witness");
}
