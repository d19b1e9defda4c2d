use std::panic;
use std::process::ExitCode;

fn main() -> ExitCode {
    // Panics map to the generic error code rather than 101.
    let code = panic::catch_unwind(|| relimon::cli::run(std::env::args_os()))
        .unwrap_or(relimon::cli::EXIT_ERROR);
    ExitCode::from(code as u8)
}
