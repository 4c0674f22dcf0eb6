use std::process::ExitCode;

fn main() -> ExitCode {
    heisenberg_charges::cli::run(std::env::args().collect())
}
