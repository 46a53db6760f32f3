use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;
use log::LevelFilter;
use xyqmc_cli::{run, Cli, EXIT_CHECK, EXIT_OK};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        _ => LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .target(env_logger::Target::Stderr)
        .init();

    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = run(&cli, &mut out);
    let flushed = out.flush();
    match (result, flushed) {
        (Ok(true), Ok(())) => ExitCode::from(EXIT_OK),
        (Ok(false), Ok(())) => {
            log::warn!("one or more checks failed");
            ExitCode::from(EXIT_CHECK)
        }
        (Err(e), _) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
        (Ok(_), Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CHECK)
        }
    }
}
