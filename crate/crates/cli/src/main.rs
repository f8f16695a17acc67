use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use releq_cli::app::{run, tolerance, Cli};
use releq_cli::config::expand_args;
use releq_cli::CliError;

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("releq: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn real_main() -> Result<(), CliError> {
    let args = expand_args(std::env::args().collect())?;
    let cli = Cli::try_parse_from(args).unwrap_or_else(|e| e.exit());
    let tol = tolerance(std::env::var("RELEQ_TOL").ok().as_deref())?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    run(&cli, tol, &mut out)?;
    out.flush().map_err(|e| CliError::io("<stdout>", e))
}
