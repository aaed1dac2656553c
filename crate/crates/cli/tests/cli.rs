use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cctu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cctu")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.display().to_string()
}

const ONE_DIM: &str = "vars 1\nmodulus 3\nresidues 2\ngamma 1\nrow 1 <= 1\nrow -1 <= 0\n";

const CASE_TWO: &str = "1 -1 0 0 -1\n-1 1 -1 0 0\n0 -1 1 -1 0\n0 0 -1 1 -1\n-1 0 0 -1 1\n";

#[test]
fn one_dimensional_family_reports_flat_row() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "flat.txt", ONE_DIM);
    let o = cctu(&["solve", &f]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("status: infeasible"), "{out}");
    assert!(out.contains("flat row: 0 (width 1)"), "{out}");

    let o = cctu(&["--json", "solve", &f]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["status"], "infeasible");
    assert_eq!(v["flat"]["row"], 0);
    assert_eq!(v["flat"]["width"], "1");
}

#[test]
fn widening_the_interval_makes_it_feasible() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "wide.txt", &ONE_DIM.replace("row 1 <= 1", "row 1 <= 2"));
    let o = cctu(&["--json", "solve", &f]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["status"], "feasible");
    assert_eq!(v["x"], serde_json::json!(["2"]));
    assert_eq!(v["verified"], true);
    assert_eq!(v["residue"], 2);
}

#[test]
fn fuzz_seed_seven_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let o = cctu(&["fuzz", "--seed", "7", "-n", "200", "--output", dir.path().to_str().unwrap()]);
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{out}");
    assert!(out.contains("200 cases, 200 agreements"), "{out}");
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn check_tu_accepts_constant_core() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "c2.txt", CASE_TWO);
    let o = cctu(&["check-tu", &f]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "true");

    let g = write(dir.path(), "bad.txt", "1 1 0\n0 1 1\n1 0 1\n");
    let o = cctu(&["--json", "check-tu", &g]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["totally_unimodular"], false);
    assert_eq!(v["violation"]["det"].as_str().map(|d| d.trim_start_matches('-')), Some("2"));
}

#[test]
fn decompose_names_the_base_block() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "c2.txt", CASE_TWO);
    let o = cctu(&["--json", "decompose", &f]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["class"], "constant_core");
}

#[test]
fn generate_then_solve_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for (i, kind) in ["network", "transposed", "sum1", "sum2", "sum3", "pivoted", "const_core"].iter().enumerate() {
        let f = dir.path().join(format!("{kind}.txt"));
        let f = f.to_str().unwrap();
        let seed = (i as u64 + 11).to_string();
        let o = cctu(&["generate", "--kind", kind, "-n", "6", "--m", "3", "--r-size", "2", "--seed", &seed, "--output", f]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let again = cctu(&["generate", "--kind", kind, "-n", "6", "--m", "3", "--r-size", "2", "--seed", &seed]);
        assert_eq!(fs::read_to_string(f).unwrap(), stdout(&again));

        let solved = cctu(&["--json", "solve", f]);
        let oracle = cctu(&["--json", "oracle", f]);
        let a: serde_json::Value = serde_json::from_slice(&solved.stdout).unwrap();
        let b: serde_json::Value = serde_json::from_slice(&oracle.stdout).unwrap();
        assert_eq!(a["status"], b["status"], "{kind}");
        assert_eq!(solved.status.code(), oracle.status.code());
        if a["status"] == "feasible" {
            assert_eq!(a["verified"], true);
            let x: Vec<String> = a["x"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect();
            let v = cctu(&["verify", f, "--solution", &x.join(" ")]);
            assert_eq!(v.status.code(), Some(0), "{}", stdout(&v));
        }
    }
}

#[test]
fn malformed_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "bad.txt", "vars 2\nmodulus 3\nresidues 1\ngamma 1 1\nrow 1 <= 0\n");
    let o = cctu(&["solve", &f]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 5"));

    let g = write(dir.path(), "nontu.txt", "vars 2\nmodulus 3\nresidues 1\ngamma 1 1\nrow 1 1 <= 1\nrow -1 1 <= 1\n");
    let o = cctu(&["solve", &g]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("determinant"));

    let o = cctu(&["solve", "/nonexistent/instance.txt"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn non_prime_modulus_on_a_sum_is_unsupported() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("s.txt");
    let f = f.to_str().unwrap();
    let mut found = false;
    for seed in 0..40 {
        let s = seed.to_string();
        cctu(&["generate", "--kind", "sum3", "-n", "9", "--m", "4", "--r-size", "1", "--boxed", "--seed", &s, "--output", f]);
        let o = cctu(&["--json", "solve", f]);
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        if v["status"] == "unsupported" {
            assert_eq!(o.status.code(), Some(3));
            assert!(v["message"].is_string());
            found = true;
            break;
        }
    }
    assert!(found, "no sum instance reached the unsupported branch");
}

#[test]
fn width_and_proximity_report_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "w.txt", "vars 2\nmodulus 3\nresidues 1 2\ngamma 1 1\nrow 1 0 <= 4\nrow -1 0 <= 0\nrow 0 1 <= 4\nrow 0 -1 <= 0\n");
    let o = cctu(&["--json", "width", &f]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["threshold"], 0);
    assert_eq!(v["widths"][0]["width"], "4");

    let o = cctu(&["--json", "proximity", &f]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["bound"], 1);
    assert_eq!(v["within_bound"], true);
}

#[test]
fn residue_override_flags() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "flat.txt", ONE_DIM);
    let o = cctu(&["solve", &f, "--residues", "0,1"]);
    assert_eq!(o.status.code(), Some(0));
    let o = cctu(&["solve", &f, "--m", "2", "--residues", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("x: 1"));
}
