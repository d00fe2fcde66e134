use std::process::ExitCode;

use clap::Parser;
use thermosqueeze_cli::config::Cli;
use thermosqueeze_cli::{run, RunConfig};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version print to stdout and succeed
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match RunConfig::from_cli(cli).and_then(|cfg| run(&cfg)) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("thermosqueeze: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
