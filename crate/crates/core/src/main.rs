use std::process::ExitCode;

fn main() -> ExitCode {
    factlab::cli::run()
}
