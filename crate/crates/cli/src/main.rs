use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dsmimo_cli::commands::{self, CliError, Outcome};
use dsmimo_cli::config::{self, RunConfig};
use dsmimo_cli::csv::write_atomic;

#[derive(Parser)]
#[command(name = "dsmimo", version, about = "SEP, diversity and low-SNR analysis of OSTBCs over double-scattering MIMO channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// CSV destination; overrides `output` in the config. Standard output when neither is set.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides `mc.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `mc.trials`.
    #[arg(long, global = true)]
    trials: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// SEP against SNR: closed form, Monte Carlo and diversity order.
    SepCurve,
    /// SEP at a fixed SNR against ρ or n_S.
    Sweep,
    /// Minimum Eb/N0, wideband slopes, EFF and the low-SNR capacity curve.
    Lowsnr,
    /// Closed form against Monte Carlo, formula reductions and majorization chains.
    Validate,
    /// Diversity order against the fitted high-SNR slope.
    Diversity,
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| {
        CliError::Config(config::ConfigError { line: None, key: None, message: "--config <path> is required".into() })
    })?;
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Config(config::ConfigError { line: None, key: None, message: format!("{}: {e}", path.display()) })
    })?;
    let mut cfg = config::parse(&text)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let cfg = load(cli)?;
    let Outcome { table, summary, passed } = match cli.command {
        Command::SepCurve => commands::sep_curve(&cfg),
        Command::Sweep => commands::sweep(&cfg),
        Command::Lowsnr => commands::lowsnr(&cfg),
        Command::Validate => commands::validate(&cfg),
        Command::Diversity => commands::diversity(&cfg),
    }?;
    if let Some((row, column)) = table.first_non_finite() {
        return Err(CliError::Numeric(format!("non-finite `{column}` in row {}", row + 1)));
    }
    let csv = table.render();
    match cli.out.clone().or(cfg.output.map(PathBuf::from)) {
        Some(path) => {
            write_atomic(&path, &csv)?;
            if let Some(s) = summary {
                print!("{s}");
            }
        }
        None => {
            print!("{csv}");
            if let Some(s) = summary {
                eprint!("{s}");
            }
        }
    }
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("dsmimo: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
