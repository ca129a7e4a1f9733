use std::io::Write;
use std::process::ExitCode;

use aj_cli::{run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let out = run(&cli);
    match &cli.out {
        _ if out.error => eprint!("{}", out.output),
        Some(path) => {
            if let Err(e) = std::fs::write(path, &out.output) {
                eprintln!("error: {}: {}", path.display(), e);
                return ExitCode::from(2);
            }
        }
        None => {
            let _ = std::io::stdout().write_all(out.output.as_bytes());
        }
    }
    ExitCode::from(out.code as u8)
}
