use std::panic;
use std::process::ExitCode;

fn main() -> ExitCode {
    let code = panic::catch_unwind(|| {
        let mut stdout = std::io::stdout().lock();
        let mut stderr = std::io::stderr().lock();
        typecpd::cli::run(std::env::args_os(), &mut stdout, &mut stderr)
    })
    .unwrap_or(4);
    ExitCode::from(code as u8)
}
