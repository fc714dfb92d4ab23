use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gibbs_dnls::{emit, parse_config, run, HarnessError, Parallel};

#[derive(Parser)]
#[command(
    name = "gibbs-dnls",
    version,
    about = "Gibbs measure experiments for truncated DNLS on the circle"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its record.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to the config's `output` parameter,
        /// then to `gibbs-dnls-out`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        verbose: bool,
    },
    /// Check a configuration without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Exit status for configuration, I/O and numerical errors; failed verdicts
/// exit with 1.
const ERROR_EXIT: u8 = 2;

fn read(path: &PathBuf) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.clone(),
        source,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let verbose = matches!(cli.command, Command::Run { verbose: true, .. });
    env_logger::Builder::new()
        .filter_level(if verbose {
            log::LevelFilter::Debug
        } else {
            log::LevelFilter::Warn
        })
        .parse_default_env()
        .init();

    let result = match cli.command {
        Command::Validate { config } => read(&config).and_then(|t| parse_config(&t)).map(|c| {
            println!(
                "{}",
                serde_json::to_string_pretty(&c.to_json()).expect("config serializes")
            );
            true
        }),
        Command::Run {
            config,
            out,
            threads,
            ..
        } => (|| {
            let cfg = parse_config(&read(&config)?)?;
            let exec = Parallel::new(threads)?;
            log::info!("using {} threads", exec.threads());
            let record = run(&cfg, &exec)?;
            let dir = out
                .or_else(|| cfg.output.clone())
                .unwrap_or_else(|| PathBuf::from("gibbs-dnls-out"));
            emit(&record, &dir)?;
            for v in &record.verdicts {
                println!("{}", v.line());
            }
            println!("record written to {}", dir.display());
            Ok(record.pass())
        })(),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(ERROR_EXIT)
        }
    }
}
