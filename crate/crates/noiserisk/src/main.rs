use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(noiserisk::harness::cli::cli_from_env())
}
