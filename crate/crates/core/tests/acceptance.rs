//! The eleven acceptance criteria. Runs as a plain program so that one
//! pass/fail line per criterion is always printed; exits non-zero if any
//! criterion fails. `cargo test --test acceptance -- 8 10` runs a subset.

use std::process::ExitCode;

use gwldp::verify::{run_criterion, NUM_CRITERIA};

fn main() -> ExitCode {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let ids: Vec<usize> = if selected.is_empty() { (1..=NUM_CRITERIA).collect() } else { selected };
    let mut failed = 0;
    for id in ids {
        match run_criterion(id) {
            Some(r) => {
                println!("{r}");
                if !r.passed {
                    failed += 1;
                }
            }
            None => {
                println!("[FAIL] {id} unknown criterion");
                failed += 1;
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
