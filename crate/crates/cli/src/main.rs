use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(coindex_lab::run(std::env::args_os()))
}
