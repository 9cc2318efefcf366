use std::process::ExitCode;

fn main() -> ExitCode {
    fixpoint_lab::cli::main()
}
