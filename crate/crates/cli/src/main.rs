use std::process::ExitCode;

fn main() -> ExitCode {
    tubealloc_cli::commands::main_with(std::env::args_os())
}
