use std::process::ExitCode;

fn main() -> ExitCode {
    trendlab::cli::main_with_args(std::env::args_os())
}
