use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use glvp::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    let result = run(cli, &mut out);
    if let Err(e) = out.flush() {
        eprintln!("glvp: {e}");
        return ExitCode::from(2);
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("glvp: {e}");
            ExitCode::from(&e)
        }
    }
}
