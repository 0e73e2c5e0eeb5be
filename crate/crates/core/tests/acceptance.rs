//! Acceptance criteria, one PASS/FAIL line each. The level defaults to
//! `full`; set KLWL_SUITE_LEVEL=quick for the short run and
//! KLWL_SUITE_OPTIONAL=1 to include the gamma separation.

use std::process::ExitCode;

use klwl_core::suite::{run_suite, Level, SuiteOptions};

fn main() -> ExitCode {
    let level = std::env::var("KLWL_SUITE_LEVEL")
        .ok()
        .map(|s| {
            s.parse::<Level>()
                .expect("KLWL_SUITE_LEVEL must be quick or full")
        })
        .unwrap_or(Level::Full);
    let mut opts = SuiteOptions::new(level);
    opts.optional = std::env::var("KLWL_SUITE_OPTIONAL").is_ok_and(|v| v == "1");

    println!("acceptance suite, level {level}");
    let report = run_suite(&opts, |r| println!("{r}"));
    let failed = report
        .criteria
        .iter()
        .filter(|c| !c.passed && !c.skipped)
        .count();
    println!("{} criteria, {failed} failed", report.criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
