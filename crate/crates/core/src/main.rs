use std::process::ExitCode;

fn main() -> ExitCode {
    prototax::cli::run(std::env::args_os())
}
