use std::process::ExitCode;

use anyonprop::Args;
use clap::Parser;

fn main() -> ExitCode {
    let args = Args::parse();
    match anyonprop::run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("anyonprop: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
