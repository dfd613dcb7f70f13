use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let config = match pagehash_cli::parse_args(std::env::args_os()) {
        Ok(config) => config,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                pagehash_cli::EXIT_ERROR as u8
            } else {
                0
            });
        }
    };
    let stdin = io::stdin();
    let code = pagehash_cli::run(
        &config,
        &mut stdin.lock(),
        &mut io::stdout(),
        &mut io::stderr(),
    );
    ExitCode::from(code as u8)
}
