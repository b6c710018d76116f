use std::process::ExitCode;

fn main() -> ExitCode {
    trackmend::cli::main_with(std::env::args_os())
}
