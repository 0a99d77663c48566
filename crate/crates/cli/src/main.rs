use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = tbench::Cli::parse();
    match tbench::run(&cli) {
        Ok(report) => {
            for f in &report.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("tbench: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
