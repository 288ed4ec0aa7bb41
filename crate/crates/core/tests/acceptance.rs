//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.
//!
//! Criteria run one at a time so that wall-clock bounds measure a single
//! workload. Pass criterion ids (`cargo test --test acceptance -- 2 7`) to
//! run a subset.

use std::process::ExitCode;

use gaborwf::suite::{criterion_name, run_criterion, CRITERIA};

fn main() -> ExitCode {
    let requested: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    // `cargo test -- --list` and similar harness probes.
    if std::env::args().any(|a| a == "--list") {
        for (id, name) in CRITERIA {
            println!("criterion_{id}_{}: test", name.replace('-', "_"));
        }
        return ExitCode::SUCCESS;
    }
    let mut failed = 0;
    for (id, _) in CRITERIA {
        if !requested.is_empty() && !requested.contains(&id) {
            continue;
        }
        match run_criterion(id) {
            Ok(report) => {
                println!("{}", report.summary_line());
                if !report.passed {
                    failed += 1;
                }
            }
            Err(e) => {
                println!("FAIL [{id}] {}: {e}", criterion_name(id).unwrap_or("unknown"));
                failed += 1;
            }
        }
    }
    if failed > 0 {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    } else {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    }
}
