use clap::Parser;
use fdtc_cli::{execute, resolve, Args, EXIT_USAGE};

fn main() {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match resolve(&args).and_then(|inv| execute(&inv)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("fdtc: {e:#}");
            EXIT_USAGE
        }
    };
    std::process::exit(code);
}
