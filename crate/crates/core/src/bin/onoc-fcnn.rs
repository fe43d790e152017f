use std::process::ExitCode;

fn main() -> ExitCode {
    onoc_fcnn::cli::run(std::env::args_os())
}
