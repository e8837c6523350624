use std::process::ExitCode;

fn main() -> ExitCode {
    let outcome = oilcast::cli::run(std::env::args_os());
    print!("{}", outcome.stdout);
    for line in &outcome.messages {
        eprintln!("{line}");
    }
    ExitCode::from(outcome.exit_code as u8)
}
