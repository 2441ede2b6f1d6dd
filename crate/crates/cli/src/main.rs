use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(leowb_cli::run_cli(std::env::args_os()))
}
