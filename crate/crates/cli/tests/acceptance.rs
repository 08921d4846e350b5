//! One PASS/FAIL line per acceptance criterion, at the default battery size.

use std::process::{Command, ExitCode};

use qmeasure::battery::{run_criterion, BatteryConfig, CRITERIA};
use qmeasure::config::{DEFAULT_SEED, DEFAULT_WORKERS};

/// Criterion 13 across processes: two invocations of the binary, same bytes.
fn binary_runs_identical() -> bool {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_qmeasure"))
            .args(["sample", "--measure", "bures", "--n", "3", "--samples", "2000", "--seed", "13", "--workers", "4"])
            .env_remove("QMEASURE_SEED")
            .output()
            .expect("binary runs")
    };
    let (a, b) = (run(), run());
    a.status.success() && !a.stdout.is_empty() && a.stdout == b.stdout
}

fn main() -> ExitCode {
    let config = BatteryConfig {
        samples: 100_000,
        seed: DEFAULT_SEED,
        workers: DEFAULT_WORKERS,
        quick: false,
    };
    let mut failures = 0;
    for (id, _, _) in CRITERIA {
        let mut report = run_criterion(id, &config).expect("listed criterion");
        if id == 13 {
            report.passed &= binary_runs_identical();
        }
        println!(
            "criterion {:>2}: {}  {}",
            id,
            if report.passed { "PASS" } else { "FAIL" },
            report.title
        );
        if let Some(e) = &report.error {
            println!("      error: {e}");
        }
        for c in &report.checks {
            println!(
                "      [{}] {}: score {:.4e}, limit {:.4e}",
                if c.passed { "ok" } else { "no" },
                c.label,
                c.score,
                c.limit
            );
        }
        failures += usize::from(!report.passed);
    }
    println!("acceptance: {} of {} criteria passed", CRITERIA.len() - failures, CRITERIA.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
