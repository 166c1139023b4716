use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use enskog::commands::{self, Outcome};
use enskog::{parse_config_with_env, Error, RunConfig};

/// Stochastic particle simulator for the Enskog equation.
///
/// Configuration keys can be overridden with ENSKOG_<SECTION>_<KEY>
/// environment variables, e.g. ENSKOG_KERNEL_GAMMA=0.5.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides experiment.out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed (overrides system.seed and experiment.seeds).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (overrides experiment.jobs).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One particle run with event log, snapshots, moments and audit.
    Run,
    /// Runs over the grid of particle counts and seeds.
    Sweep,
    /// Weak-form balance defect over seeds.
    Residual,
    /// Povzner constant calibration and validation.
    Povzner,
    /// Distance between independent runs, and tagged-particle consistency.
    Chaos,
    /// Moment envelope calibration and validation.
    Envelope,
    /// Summarizes a results directory with pass/fail per criterion.
    Report {
        /// Results directory; defaults to --out or the configured output.
        dir: Option<PathBuf>,
    },
}

fn load(cli: &Cli) -> Result<RunConfig, Error> {
    let path = cli.config.as_ref().ok_or_else(|| {
        enskog::ConfigError::new(vec!["--config is required for this command".into()])
    })?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })?;
    let mut cfg = parse_config_with_env(&text, std::env::vars())?;
    if let Some(out) = &cli.out {
        cfg.experiment.out = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.system.seed = seed;
        cfg.experiment.seeds = vec![seed];
    }
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(enskog::ConfigError::new(vec!["--jobs must be at least 1".into()]).into());
        }
        cfg.experiment.jobs = jobs;
    }
    Ok(cfg)
}

fn dispatch(cli: &Cli) -> Result<Outcome, Error> {
    if let Command::Report { dir } = &cli.command {
        let dir = match (dir, &cli.out, &cli.config) {
            (Some(d), _, _) => d.clone(),
            (None, Some(d), _) => d.clone(),
            (None, None, Some(_)) => load(cli)?.experiment.out,
            (None, None, None) => PathBuf::from("out"),
        };
        return commands::cmd_report(&dir);
    }
    let cfg = load(cli)?;
    match cli.command {
        Command::Run => commands::cmd_run(&cfg),
        Command::Sweep => commands::cmd_sweep(&cfg),
        Command::Residual => commands::cmd_residual(&cfg),
        Command::Povzner => commands::cmd_povzner(&cfg),
        Command::Chaos => commands::cmd_chaos(&cfg),
        Command::Envelope => commands::cmd_envelope(&cfg),
        Command::Report { .. } => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            for v in &outcome.violations {
                eprintln!("violation: {v}");
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
