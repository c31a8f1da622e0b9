use std::path::Path;
use std::process::{Command, Output};

use isoineq::eds::ReconstructionReport;
use isoineq::io::{read_json, Table};
use isoineq::suite::SuiteReport;
use isoineq::verifier::VerificationReport;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isoineq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    let out = run(args);
    out.status.code().expect("exit code")
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_matrix_exit_codes() {
    assert_eq!(code(&["check-matrix", "--surface", "gross"]), 0);
    assert_eq!(code(&["check-matrix", "--surface", "nash"]), 0);
    assert_eq!(code(&["check-matrix", "--surface", "b_theorem"]), 3);
    assert_eq!(code(&["check-matrix", "--surface", "beckner"]), 2);
    let out = run(&[
        "check-matrix",
        "--surface",
        "beckner",
        "--p",
        "1.5",
        "--report-residual",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("max relative residual"), "{text}");
    assert_eq!(code(&["check-matrix", "--surface", "nosuch"]), 2);
    let grid = [
        "check-matrix",
        "--surface",
        "nash",
        "--grid",
        "-1:1:5,0:1:5:interior",
    ];
    assert_eq!(code(&grid), 0);
}

#[test]
fn reconstruct_exit_codes() {
    let out = run(&["reconstruct", "--boundary", "nash"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        code(&["reconstruct", "--boundary", "bobkov", "--t-max", "0.45"]),
        0
    );
    assert_eq!(
        code(&["reconstruct", "--boundary", "bobkov", "--t-max", "0.6"]),
        2
    );
    assert_eq!(code(&["reconstruct", "--boundary", "power", "--p", "3"]), 2);
}

#[test]
fn bad_arguments_exit_2() {
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(
        code(&["verify", "--inequality", "nonsense", "--f", "x2"]),
        2
    );
    assert_eq!(
        code(&[
            "verify",
            "--inequality",
            "poincare",
            "--f",
            "x2",
            "--sigma",
            "-1"
        ]),
        2
    );
    assert_eq!(
        code(&["verify", "--inequality", "b_theorem_even", "--f", "x"]),
        2
    );
}

#[test]
fn verify_subcommand() {
    for args in [
        &["verify", "--inequality", "log_sobolev", "--f", "exp0.5"][..],
        &[
            "verify",
            "--inequality",
            "poincare",
            "--f",
            "hermite_mix",
            "--n",
            "2",
            "--sigma",
            "2",
        ],
        &[
            "verify",
            "--inequality",
            "beckner",
            "--f",
            "x2p1",
            "--p",
            "1.5",
        ],
        &[
            "verify",
            "--inequality",
            "houdre_kagan",
            "--f",
            "x2",
            "--d",
            "2",
        ],
        &["verify", "--inequality", "erti", "--m", "3", "--seed", "7"],
        &["verify", "--surface", "bobkov", "--f", "logistic"],
        &["ellipticity", "--boundary", "gross"],
        &["interpolate", "--surface", "gross", "--f", "exp0.5"],
        &["monotonicity", "--surface", "nash", "--f", "x"],
    ] {
        assert_eq!(code(args), 0, "{args:?}");
    }
}

#[test]
fn seeded_suite_json_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    assert_eq!(code(&["suite", "--seed", "7", "--out", path_arg(&a)]), 0);
    assert_eq!(code(&["suite", "--seed", "7", "--out", path_arg(&b)]), 0);
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(!ta.is_empty());
    assert_eq!(ta, tb);

    let report: SuiteReport = read_json(&a).unwrap();
    assert!(report.passed());
    assert_eq!(report.config.seed, 7);
    let value: serde_json::Value = serde_json::from_slice(&ta).unwrap();
    assert_eq!(
        value["criteria"].as_array().unwrap().len(),
        report.criteria.len()
    );
}

#[test]
fn csv_outputs_parse() {
    let dir = tempfile::tempdir().unwrap();
    let recon = dir.path().join("nash.csv");
    assert_eq!(
        code(&[
            "reconstruct",
            "--boundary",
            "nash",
            "--out",
            path_arg(&recon)
        ]),
        0
    );
    let table = Table::read_csv(&recon).unwrap();
    for column in ["x", "y", "p", "q", "M", "residual", "iterations"] {
        assert!(
            table.headers.iter().any(|h| h == column),
            "missing {column}"
        );
    }
    assert_eq!(table.rows.len(), 2500);
    let mut reader = csv::Reader::from_path(&recon).unwrap();
    assert_eq!(reader.records().count(), 2500);

    let sweep = dir.path().join("sweep.csv");
    assert_eq!(
        code(&[
            "check-matrix",
            "--surface",
            "gross",
            "--out",
            path_arg(&sweep)
        ]),
        0
    );
    assert!(!Table::read_csv(&sweep).unwrap().rows.is_empty());

    let mono = dir.path().join("mono.csv");
    assert_eq!(
        code(&[
            "monotonicity",
            "--surface",
            "gross",
            "--f",
            "logistic",
            "--out",
            path_arg(&mono)
        ]),
        0
    );
    let g = Table::read_csv(&mono).unwrap();
    let values: Vec<f64> = g
        .column("G")
        .unwrap()
        .into_iter()
        .map(Option::unwrap)
        .collect();
    assert!(values.windows(2).all(|w| w[1] >= w[0] - 1e-12));
}

#[test]
fn json_outputs_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let recon = dir.path().join("nash.json");
    assert_eq!(
        code(&[
            "reconstruct",
            "--boundary",
            "nash",
            "--out",
            path_arg(&recon)
        ]),
        0
    );
    let r: ReconstructionReport = read_json(&recon).unwrap();
    assert!(r.passed());
    assert!(r.max_deviation().unwrap() <= 1e-10);

    let verify = dir.path().join("v.json");
    let args = [
        "verify",
        "--inequality",
        "poincare",
        "--f",
        "x2",
        "--out",
        path_arg(&verify),
    ];
    assert_eq!(code(&args), 0);
    let v: VerificationReport = read_json(&verify).unwrap();
    assert!(v.pass && (v.lhs - 2.0).abs() < 1e-12);

    let out = run(&["catalog", "--format", "json"]);
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value.as_array().unwrap().len(), 7);
}
