use std::path::PathBuf;
use std::process::{Command, Output};

fn circuit(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../circuits").join(name)
}

fn qcirc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcirc")).args(args).output().expect("binary runs")
}

fn with_files(args: &[&str]) -> Output {
    let resolved: Vec<String> = args
        .iter()
        .map(|a| if a.ends_with(".qc") { circuit(a).display().to_string() } else { a.to_string() })
        .collect();
    qcirc(&resolved.iter().map(String::as_str).collect::<Vec<_>>())
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn swaps_are_unitarily_equal() {
    let o = with_files(&["check", "swap.qc", "altswap.qc", "--mode", "unitary"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "equivalent");
}

#[test]
fn teleport_is_a_wire() {
    for mode in ["channel", "oracle"] {
        let o = with_files(&["check", "teleport.qc", "wire.qc", "--mode", mode]);
        assert_eq!(o.status.code(), Some(0), "{mode}");
    }
}

#[test]
fn x_is_not_identity() {
    for mode in ["unitary", "phase", "channel", "oracle"] {
        let o = with_files(&["check", "x.qc", "id.qc", "--mode", mode]);
        assert_eq!(o.status.code(), Some(4), "{mode}");
        assert!(stdout(&o).contains("distinguishing probe: |0⟩"), "{mode}: {}", stdout(&o));
    }
}

#[test]
fn mismatched_shapes_are_not_equivalent() {
    let o = with_files(&["check", "swap.qc", "x.qc"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn bell_shots_converge() {
    let n = 4000;
    let bound = 3.0 * (0.25 / n as f64).sqrt();
    for seed in 0..4 {
        let o = with_files(&["run", "bell_measure.qc", "--shots", &n.to_string(), "--seed", &seed.to_string()]);
        assert_eq!(o.status.code(), Some(0));
        let out = stdout(&o);
        let row = out.lines().find(|l| l.starts_with("00\t")).expect("00 row");
        let freq: f64 = row.split('\t').nth(2).unwrap().parse().unwrap();
        assert!((freq - 0.5).abs() <= bound, "seed {seed}: {freq}");
        assert!(!out.contains("01\t") && !out.contains("10\t"));
    }
}

#[test]
fn shots_are_reproducible() {
    let args = ["run", "bell_measure.qc", "--shots", "100", "--seed", "7"];
    assert_eq!(stdout(&with_files(&args)), stdout(&with_files(&args)));
}

#[test]
fn branch_table_lists_each_outcome() {
    let o = with_files(&["run", "teleport.qc", "--input", "|1⟩"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 5);
    assert!(out.lines().skip(1).all(|l| l.split('\t').nth(1) == Some("0.25")));
}

#[test]
fn bad_input_spec_is_usage_error() {
    let o = with_files(&["run", "teleport.qc", "--input", "|01⟩"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unitary_rows() {
    let o = with_files(&["unitary", "x.qc"]);
    assert_eq!(stdout(&o), "0+0i, 1+0i\n1+0i, 0+0i\n");
    let o = with_files(&["unitary", "teleport.qc"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn demos_are_verified() {
    for name in ["teleportation", "densecoding", "gateteleportation", "swap"] {
        let o = qcirc(&["demo", name]);
        assert_eq!(o.status.code(), Some(0), "{name}");
        let out = stdout(&o);
        let steps: Vec<&str> = out.lines().filter(|l| l.starts_with("step ") && !l.ends_with("start")).collect();
        assert!(steps.iter().all(|l| l.ends_with(" VERIFIED")), "{name}");
        assert!(name == "swap" || !steps.is_empty());
    }
}

#[test]
fn rewrite_round_trip() {
    let o = with_files(&["rewrite", "swap.qc", "--rule", "R2_CNOTReversal", "--backward", "--site", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.trim_end().ends_with("VERIFIED"));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rewritten.qc");
    let body: String = out.lines().filter(|l| !l.contains("VERIFIED")).map(|l| format!("{l}\n")).collect();
    std::fs::write(&path, body).unwrap();
    let o = qcirc(&["check", path.to_str().unwrap(), circuit("swap.qc").to_str().unwrap(), "--mode", "unitary"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn rewrite_lists_matches() {
    let o = with_files(&["rewrite", "swap.qc", "--rule", "r2_cnotreversal", "--backward", "--list"]);
    assert_eq!(stdout(&o).lines().count(), 3);
    let o = with_files(&["rewrite", "swap.qc", "--rule", "R1_InverseCancel"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simplify_removes_cancelling_pairs() {
    let o = with_files(&["simplify", "redundant.qc"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("final:\nqubits 2\ncbits 0\nCNOT q0 q1\n"));
}

#[test]
fn parse_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.qc");
    std::fs::write(&path, "qubits 1\ncbits 0\nCNOT q0 q0\n").unwrap();
    let o = qcirc(&["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    assert_eq!(qcirc(&["run", "/nonexistent.qc"]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(qcirc(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(qcirc(&["check", "only-one.qc"]).status.code(), Some(1));
    assert_eq!(qcirc(&["rewrite", "x.qc", "--rule", "R9_Nope"]).status.code(), Some(1));
    assert_eq!(qcirc(&["--help"]).status.code(), Some(0));
}
