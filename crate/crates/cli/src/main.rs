use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(obddlab_cli::run_args(std::env::args_os().collect()))
}
