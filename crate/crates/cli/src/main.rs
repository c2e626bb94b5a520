use std::process::ExitCode;

use nc_retract::{execute, exit, parse_args};

fn main() -> ExitCode {
    let code = match parse_args(std::env::args_os()) {
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                exit::USAGE
            } else {
                exit::OK
            }
        }
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
        Ok(Ok(config)) => execute(&config),
    };
    ExitCode::from(code as u8)
}
