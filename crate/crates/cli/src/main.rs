use std::process::ExitCode;

use dschain_cli::{dispatch, Status};

fn main() -> ExitCode {
    let outcome = dispatch(std::env::args_os());
    if let Some(doc) = &outcome.document {
        print!("{doc}");
        eprintln!("{}", outcome.summary.trim_end());
    } else if outcome.status == Status::Ok {
        println!("{}", outcome.summary.trim_end());
    } else {
        eprintln!("{}", outcome.summary.trim_end());
    }
    ExitCode::from(outcome.status.exit_code() as u8)
}
