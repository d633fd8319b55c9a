use std::process::ExitCode;

fn main() -> ExitCode {
    dagsmith::cli::run_cli()
}
