use std::process::ExitCode;

use clap::Parser;

use ballistic_cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(outcome) => {
            if !cli.quiet {
                for c in &outcome.checks {
                    let tag = if c.passed { "PASS" } else { "FAIL" };
                    println!("[{}] {}: {}", tag, c.name, c.detail);
                }
                for (name, value) in &outcome.metrics {
                    println!("{} = {}", name, value);
                }
            }
            if outcome.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(2)
        }
    }
}
