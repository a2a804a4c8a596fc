use std::io::{self, Write};
use std::process::ExitCode;

use selfrepair::cli::{install_interrupt_handler, run_cli};
use selfrepair::CliError;

fn main() -> ExitCode {
    install_interrupt_handler();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run_cli(std::env::args_os(), &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Help(text)) => {
            let _ = write!(out, "{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let _ = out.flush();
            eprintln!("selfrepair: {e}");
            e.exit_code()
        }
    }
}
