//! The twelve acceptance criteria at their stated tolerances. Prints one
//! PASS/FAIL line per criterion and fails if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use disloc_cli::verify::{self, ELL6_NEGATIVE_LEVELS, JUMP2_LEVELS};
use disloc_cli::Check;
use serde_json::Value;

fn disloc(args: &[&str]) -> (std::process::Output, f64) {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_disloc")).args(args).output().expect("run disloc");
    (out, start.elapsed().as_secs_f64())
}

fn csv_energies(stdout: &[u8]) -> Vec<f64> {
    String::from_utf8_lossy(stdout).lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect()
}

fn max_diff(got: &[f64], want: &[f64]) -> f64 {
    if got.len() != want.len() {
        return f64::INFINITY;
    }
    got.iter().zip(want).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max)
}

fn read_report(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).expect("report written")).expect("report json")
}

fn report_check(report: &Value, prefix: &str) -> Option<Check> {
    let c = report["checks"].as_array()?.iter().find(|c| c["name"].as_str().is_some_and(|n| n.starts_with(prefix)))?;
    let residual = c["residual"].as_f64()?;
    let tolerance = c["tolerance"].as_f64()?;
    Some(Check::at_most(c["name"].as_str()?, residual, tolerance))
}

fn missing(name: &str) -> Check {
    Check::at_most(format!("{name} (missing)"), f64::INFINITY, 0.0)
}

fn criterion_1_cli() -> Vec<Check> {
    let (out, secs) = disloc(&["spectrum", "--a", "2"]);
    let levels = if out.status.success() { csv_energies(&out.stdout) } else { Vec::new() };
    vec![
        Check::at_most("spectrum --a 2 vs reference", max_diff(&levels, &JUMP2_LEVELS), 1e-4),
        Check::at_most("spectrum --a 2 wall time [s]", secs, 1.0),
    ]
}

fn criterion_2_cli() -> Vec<Check> {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let (out, _) = disloc(&["spectrum", "--ell", "6", "--report", report.to_str().unwrap()]);
    let levels = if out.status.success() { csv_energies(&out.stdout) } else { Vec::new() };
    let mut checks = vec![Check::at_most("spectrum --ell 6 vs reference", max_diff(&levels, &ELL6_NEGATIVE_LEVELS), 1e-4)];
    let r = read_report(&report);
    checks.push(report_check(&r, "closed forms").unwrap_or_else(|| missing("closed forms")));
    checks
}

fn criterion_12_cli() -> Vec<Check> {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("full.json");
    let (_, secs) = disloc(&["verify", "--suite", "full", "--report", report.to_str().unwrap()]);
    let r = read_report(&report);
    vec![
        report_check(&r, "C12 a=2 gaps").unwrap_or_else(|| missing("gaps")),
        Check::at_most("verify --suite full wall time [s]", secs, verify::FULL_SUITE_BUDGET),
    ]
}

#[test]
fn acceptance_criteria() {
    let mut failed = Vec::new();
    for k in 1..=verify::CRITERIA {
        let checks = match k {
            1 => criterion_1_cli(),
            2 => criterion_2_cli(),
            12 => criterion_12_cli(),
            _ => verify::criterion(k, None),
        };
        let pass = !checks.is_empty() && checks.iter().all(|c| c.pass);
        let detail: Vec<String> = checks
            .iter()
            .map(|c| format!("{}{} = {:.3e} (tol {:.1e})", if c.pass { "" } else { "FAILED " }, c.name, c.residual, c.tolerance))
            .collect();
        println!("{} criterion {k:>2}: {}", if pass { "PASS" } else { "FAIL" }, detail.join("; "));
        if !pass {
            failed.push(k);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
