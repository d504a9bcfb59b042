//! Acceptance battery: one line per criterion, non-zero exit on any failure.

use std::process::Command;

use asymlab::Params;
use asymlab_cli::suite::{self, finite_multiplicity_target};

/// Runs `construct` on the finite-multiplicity target through the binary.
fn binary_rejects_finite_multiplicity() -> (Option<i32>, String) {
    let dir = tempfile::tempdir().expect("temp dir");
    let input = dir.path().join("target.json");
    let output = dir.path().join("report.json");
    std::fs::write(&input, serde_json::to_string(&finite_multiplicity_target()).unwrap()).unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_asymlab"))
        .args(["construct", "--input"])
        .arg(&input)
        .arg("--output")
        .arg(&output)
        .status()
        .expect("binary runs");
    let report = std::fs::read_to_string(&output).unwrap_or_default();
    (status.code(), report)
}

fn main() {
    let seed = Params::default().seed;
    let mut report = suite::acceptance(seed);
    let (code, body) = binary_rejects_finite_multiplicity();
    let c5 = report.criteria.iter_mut().find(|c| c.id == 5).expect("criterion 5");
    let cites = body.contains("finite and nonzero");
    c5.measured.insert("binary_exit_code".into(), serde_json::json!(code));
    c5.measured.insert("binary_message_cites_dichotomy".into(), serde_json::json!(cites));
    c5.passed &= code == Some(2) && cites;

    println!("acceptance suite (seed {seed:#x})");
    for c in &report.criteria {
        println!("{}", c.line());
    }
    let ids: Vec<u8> = report.criteria.iter().map(|c| c.id).collect();
    assert_eq!(ids, (1..=8).collect::<Vec<u8>>(), "every criterion reported");
    let failed: Vec<u8> = report.criteria.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    if failed.is_empty() {
        println!("acceptance: all 8 criteria passed");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
