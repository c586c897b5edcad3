use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;

use clap::Parser;
use fpp_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match catch_unwind(AssertUnwindSafe(|| run(&cli))) {
        Ok(Ok(m)) => {
            eprintln!("fpp {}: wrote {} artifact(s) in {:.3}s", m.command, m.artifacts.len(), m.wall_time_s);
            ExitCode::SUCCESS
        }
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        // a panic means an internal invariant broke
        Err(_) => ExitCode::from(4),
    }
}
