use std::process::ExitCode;

use polyent_cli::acceptance::{run_suite_with, Status, SuiteOptions};

fn main() -> ExitCode {
    let report = run_suite_with(&SuiteOptions::default(), |r| println!("{r}"));
    let count = |s: Status| report.results.iter().filter(|r| r.status == s).count();
    let (pass, fail, skip) = (count(Status::Pass), count(Status::Fail), count(Status::Skip));
    println!("acceptance: {pass} passed, {fail} failed, {skip} skipped");
    if report.results.len() == 12 && fail == 0 && skip == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
