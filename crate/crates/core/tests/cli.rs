//! End-to-end runs of the `sas` binary in a scratch directory.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use semstr::circuit::{example_circuit, functionally_differs, inject_bug, mk_miter, random_circuit, write_circuit};
use semstr::harness::Report;
use tempfile::TempDir;

fn sas(dir: &Path, args: &[&str]) -> (i32, String) {
    let Output { status, stdout, stderr } =
        Command::new(env!("CARGO_BIN_EXE_sas")).current_dir(dir).args(args).output().unwrap();
    let code = status.code().expect("exit code");
    let out = String::from_utf8(stdout).unwrap();
    assert!(code != 2 || !stderr.is_empty(), "exit 2 without a message");
    (code, out)
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

#[test]
fn cts_certificate_passes_check_cert() {
    let d = TempDir::new().unwrap();
    write(d.path(), "ex.circ", &write_circuit(&example_circuit()));
    let (code, out) = sas(d.path(), &["cts", "ex.circ"]);
    assert_eq!(code, 0, "{out}");
    let r = Report::parse_kv(&out).unwrap();
    assert_eq!(r.field(0, "outcome"), Some("complete"));
    assert_eq!(r.field(0, "tests"), Some("4"));
    let tests = fs::read_to_string(d.path().join("ex.tests")).unwrap();
    assert_eq!(tests.lines().filter(|l| !l.starts_with('#')).count(), 1 + 4);
    let (code, out) = sas(d.path(), &["check-cert", "ex.h.cnf", "ex.cert"]);
    assert_eq!(code, 0, "{out}");

    // drop a member: the certificate no longer closes under its clauses
    let cert = fs::read_to_string(d.path().join("ex.cert")).unwrap();
    let mut lines: Vec<&str> = cert.lines().collect();
    lines.pop();
    write(d.path(), "bad.cert", &(lines.join("\n") + "\n"));
    let (code, out) = sas(d.path(), &["check-cert", "ex.h.cnf", "bad.cert"]);
    assert_eq!(code, 1);
    assert!(out.starts_with("invalid certificate:"), "{out}");

    let (code, _) = sas(d.path(), &["check-cert", "missing.cnf", "ex.cert"]);
    assert_eq!(code, 2);
}

#[test]
fn buggy_miter_yields_a_counterexample() {
    let d = TempDir::new().unwrap();
    let (c, m) = (0..)
        .map(|s| {
            let c = random_circuit(5, 10, 3, s);
            let m = inject_bug(&c, s).circuit;
            (c, m)
        })
        .find(|(c, m)| functionally_differs(c, m).unwrap().unwrap())
        .unwrap();
    write(d.path(), "bad.circ", &write_circuit(&mk_miter(&c, &m).unwrap()));
    let (code, out) = sas(d.path(), &["cts", "bad.circ"]);
    assert_eq!(code, 40, "{out}");
    assert!(d.path().join("bad.cex").exists());
    let (code, _) = sas(d.path(), &["random", "bad.circ", "--budget", "2000"]);
    assert_eq!(code, 40);
}

#[test]
fn solve_exit_codes() {
    let d = TempDir::new().unwrap();
    write(d.path(), "sat.cnf", "p cnf 2 2\n1 2 0\n-1 0\n");
    write(d.path(), "unsat.cnf", "c keep 1 2\np cnf 3 4\n1 2 0\n-1 2 0\n1 -2 0\n-1 -2 0\n");
    assert_eq!(sas(d.path(), &["solve", "sat.cnf"]).0, 10);
    let (code, out) = sas(d.path(), &["solve", "unsat.cnf", "--h-out", "h.cnf", "--cert-out", "h.cert"]);
    assert_eq!(code, 20, "{out}");
    assert_eq!(sas(d.path(), &["check-cert", "h.cnf", "h.cert"]).0, 0);
    assert_eq!(sas(d.path(), &["--ssa-cap", "1", "solve", "unsat.cnf"]).0, 30);
    assert_eq!(sas(d.path(), &["--time-cap", "0", "solve", "unsat.cnf"]).0, 30);
    write(d.path(), "broken.cnf", "p cnf 2 1\n1 x 0\n");
    assert_eq!(sas(d.path(), &["solve", "broken.cnf"]).0, 2);
}

#[test]
fn reports_are_reproducible_apart_from_timings() {
    let d = TempDir::new().unwrap();
    let circuit = "gen:8:30:3:11";
    let run = |csv: &str| {
        let (code, out) =
            sas(d.path(), &["--seed", "4", "--report", csv, "bugs", circuit, "--bugs", "4", "--random-repeats", "3"]);
        assert_eq!(code, 0, "{out}");
        assert!(fs::read_to_string(d.path().join(csv)).unwrap().starts_with("bug,mutation,"));
        Report::parse_kv(&out).unwrap()
    };
    let (a, b) = (run("a.csv"), run("b.csv"));
    assert_eq!(a.records.len(), 4);
    assert_eq!(a.without_timing(), b.without_timing());

    let (code, out) = sas(d.path(), &["bugs", circuit, "--bugs", "3", "--budget", "0"]);
    assert_eq!(code, 0);
    assert!(Report::parse_kv(&out).unwrap().records.is_empty());
}

#[test]
fn singleton_partition_matches_the_random_stream() {
    let d = TempDir::new().unwrap();
    let circuit = "gen:6:12:2:3";
    let args = ["--seed", "9", "cts", circuit, "--partition", "singletons", "--budget", "50"];
    assert_eq!(sas(d.path(), &args).0, 0);
    let tests = fs::read_to_string(d.path().join("gen_6_12_2_3.tests")).unwrap();
    let stream: Vec<String> = tests.lines().filter(|l| !l.starts_with('#')).skip(1).map(str::to_string).collect();
    let c = semstr::harness::load_circuit(circuit).unwrap();
    let random: Vec<String> =
        semstr::cts::random_tests(c.inputs().len(), 50, 9).iter().map(|t| t.to_string()).collect();
    assert_eq!(stream.len(), 50);
    assert_eq!(stream, random);
}
