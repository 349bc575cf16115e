//! End-to-end runs of the `acirc` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn acirc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_acirc")).current_dir(dir).args(args).output().unwrap()
}

fn json(o: &Output) -> Value {
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema"], acirc::cli::SCHEMA);
    v["result"].clone()
}

#[test]
fn non_smooth_file_fails_check_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("f.circ"), "ac 3\n0 var x\n1 var y\n2 + 0 1\nroot 2\n").unwrap();
    let o = acirc(dir.path(), &["check", "f.circ", "--props", "smooth"]);
    assert_eq!(o.status.code(), Some(1));
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("smooth") && out.contains("no") && out.contains("node 2"), "{out}");
}

#[test]
fn phi_preserves_properties_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(acirc(d, &["family", "random-circuit", "--class", "sdD-AC_m", "--n", "6", "--budget", "50", "--seed", "3", "-o", "f.circ"]).status.success());
    let o = acirc(d, &["transform", "f.circ", "--op", "phi", "-o", "g.nnf"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let before = json(&acirc(d, &["--json", "classify", "f.circ"]));
    let after = json(&acirc(d, &["--json", "classify", "g.nnf"]));
    assert_eq!(before["most_specific"], "sdD-AC_m");
    assert_eq!(after["most_specific"], "sd-DNNF");
    let o = acirc(d, &["check", "g.nnf", "--props", "smooth,deterministic,decomposable"]);
    assert_eq!(o.status.code(), Some(0));
    let a = json(&acirc(d, &["--json", "support", "f.circ"]));
    let b = json(&acirc(d, &["--json", "support", "g.nnf"]));
    assert_eq!(a["models"], b["models"]);
}

#[test]
fn exhaustive_lowerbound_reports_a_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(acirc(d, &["family", "random-regular", "--n", "8", "--d", "3", "--seed", "2", "-o", "g.graph"]).status.success());
    let o = acirc(d, &["lowerbound", "g.graph", "--exhaustive", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    assert_eq!(r["exhaustive"], true);
    assert_eq!(r["partitions"].as_array().unwrap().len(), 91);
    assert_eq!(r["all_bounds_hold"], true);
    let min = r["min_rank"].as_u64().unwrap();
    assert!(min >= 1 << r["min_matching"].as_u64().unwrap());
    let x: Vec<String> = r["min_rank_x"].as_array().unwrap().iter().map(|v| format!("x{}", v.as_u64().unwrap())).collect();
    assert!(acirc(d, &["family", "fg", "--graph", "g.graph", "-o", "fg.circ"]).status.success());
    let split = format!("X={}", x.join(","));
    let rr = json(&acirc(d, &["--json", "rank", "fg.circ", "--partition", &split]));
    assert_eq!(rr["rank"].as_u64(), Some(min));
    assert_eq!(rr["rank_modular"].as_u64(), Some(min));
}

#[test]
fn seeded_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let a = acirc(d, &["family", "random-circuit", "--class", "d-wDNNF", "--n", "7", "--seed", "11"]);
    let b = acirc(d, &["family", "random-circuit", "--class", "d-wDNNF", "--n", "7", "--seed", "11"]);
    assert_eq!(a.stdout, b.stdout);
    let a = acirc(d, &["family", "random-regular", "--n", "10", "--seed", "5"]);
    let b = acirc(d, &["family", "random-regular", "--n", "10", "--seed", "5"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn gadget_then_forget_recovers_the_cnf() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(acirc(d, &["family", "random-cnf", "--n", "5", "--m", "4", "--seed", "1", "-o", "f.cnf"]).status.success());
    let o = acirc(d, &["family", "gadget", "--cnf", "f.cnf", "-o", "g.nnf"]);
    let fresh = String::from_utf8(o.stderr).unwrap();
    let z = fresh.trim().strip_prefix("fresh variables: ").unwrap();
    let check = json(&acirc(d, &["--json", "check", "g.nnf", "--props", "deterministic,weakly-decomposable"]));
    assert!(check["reports"].as_array().unwrap().iter().all(|r| r["holds"] == true));
    assert!(acirc(d, &["transform", "g.nnf", "--op", "forget", "--vars", z, "-o", "h.nnf"]).status.success());
    let cnf: acirc::families::Cnf2Monotone = std::fs::read_to_string(d.join("f.cnf")).unwrap().parse().unwrap();
    let h = acirc::format::parse(&std::fs::read_to_string(d.join("h.nnf")).unwrap()).unwrap();
    assert!(acirc::oracle::equivalent_on_union(&h, &cnf.to_circuit(), 16).unwrap());
}

#[test]
fn every_transform_op_runs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(acirc(d, &["family", "random-circuit", "--class", "dD-AC_p", "--n", "5", "--seed", "4", "-o", "p.circ"]).status.success());
    assert!(acirc(d, &["family", "random-circuit", "--class", "D-AC_m", "--n", "5", "--seed", "4", "-o", "m.circ"]).status.success());
    for (file, op, extra) in [
        ("p.circ", "monotonize", vec![]),
        ("p.circ", "smooth-pad", vec![]),
        ("m.circ", "fixweight", vec!["--weight", "2"]),
        ("m.circ", "condition", vec!["--assign", "v0=1,v1=0"]),
        ("m.circ", "phi", vec![]),
    ] {
        let mut args = vec!["transform", file, "--op", op];
        args.extend(extra);
        let o = acirc(d, &args);
        assert_eq!(o.status.code(), Some(0), "{op}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stderr).contains("nodes"));
        acirc::format::parse(&String::from_utf8(o.stdout).unwrap()).unwrap();
    }
    let o = acirc(d, &["transform", "p.circ", "--op", "phi"]);
    assert_eq!(o.status.code(), Some(1));
    let o = acirc(d, &["transform", "m.circ", "--op", "fixweight"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tables_eval_terms_and_decompose() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(acirc(d, &["family", "random-circuit", "--class", "sD-AC_m", "--n", "6", "--seed", "9", "--structured", "-o", "s.circ"]).status.success());
    let o = acirc(d, &["support", "s.circ", "--csv", "-o", "s.csv"]);
    assert!(o.status.success());
    let from_csv = json(&acirc(d, &["--json", "rank", "s.csv"]));
    let from_circ = json(&acirc(d, &["--json", "rank", "s.circ"]));
    assert_eq!(from_csv, from_circ);
    let v = json(&acirc(d, &["--json", "eval", "s.circ", "--assign", "v0=1,v1=1,v2=0,v3=1,v4=0,v5=1"]));
    assert!(v["value"].is_string());
    let t = json(&acirc(d, &["--json", "terms", "s.circ", "--cap", "100000"]));
    assert!(!t.as_array().unwrap().is_empty());
    let dec = json(&acirc(d, &["--json", "decompose", "s.circ"]));
    assert_eq!(dec["sum_matches_table"], true);
    assert_eq!(dec["identical_partitions"], true);
}

#[test]
fn parse_errors_exit_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.circ"), "ac 2\n0 var x\n1 + 0 7\nroot 1\n").unwrap();
    let o = acirc(dir.path(), &["classify", "bad.circ"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    assert_eq!(acirc(dir.path(), &["rank"]).status.code(), Some(2));
}
