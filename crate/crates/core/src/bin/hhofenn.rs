use std::process::ExitCode;

fn main() -> ExitCode {
    hhofenn::cli::main_with_args(std::env::args_os())
}
