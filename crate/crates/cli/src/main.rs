mod cli;
mod commands;
mod error;
mod io;

use std::process::ExitCode;

use clap::Parser;

use cli::{Cli, Command};
use error::CliError;

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("UL_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("UL_THREADS={v:?} is not a thread count")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let print = |s: &commands::Summary| {
        println!("{}", serde_json::to_string(s).expect("summary serializes"));
    };
    match cli.command {
        Command::Smooth(a) => print(&commands::smooth(&a)?),
        Command::SmoothMv(a) => print(&commands::smooth_mv(&a)?),
        Command::Trend(a) => print(&commands::trend(&a)?),
        Command::Bench(a) => {
            let rows = thread_pool()?.install(|| commands::bench(&a))?;
            eprintln!("{} rows written to {}", rows.len(), a.out.display());
        }
        Command::Gen(a) => commands::gen(&a)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("seqfit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
