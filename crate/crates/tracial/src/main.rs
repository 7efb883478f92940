use std::process::ExitCode;

use clap::Parser;
use tracial::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(status) => status.code(),
        Err(e) => {
            eprintln!("error: {e}");
            e.status.code()
        }
    };
    ExitCode::from(code as u8)
}
