use std::process::ExitCode;

use clap::Parser;
use pulsed_squeeze_cli::{configure_threads, run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = configure_threads()
        .and_then(|()| run(&cli, &mut std::io::stdout().lock()))
        .unwrap_or_else(|e| {
            eprintln!("error: {e}");
            e.exit_code()
        });
    ExitCode::from(code as u8)
}
