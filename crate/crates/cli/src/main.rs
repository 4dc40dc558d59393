use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use wavesum::experiments::{emit_report, run_experiments, ExperimentConfig, ExperimentKind};

#[derive(Parser, Debug)]
#[command(name = "wavesum", version, about = "Random wavelet kernel experiments")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo replicates for every experiment.
    #[arg(long, global = true)]
    replicates: Option<u64>,
    /// Directory for CSV tables and summary.json.
    #[arg(long, global = true, default_value = "wavesum-out")]
    out_dir: PathBuf,
    /// Ten times the replicates.
    #[arg(long, global = true)]
    thorough: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Haar square-sum identity and regularity degeneracy.
    HaarIdentity,
    /// Size and gradient decay of the kernel in L2(Omega).
    CzSweep,
    /// Tail probabilities against the sharp subgaussian bounds.
    Concentration {
        #[arg(value_enum)]
        family: Family,
    },
    /// Three-series convergence certificates.
    ThreeSeries,
    /// Vector-valued L2 bound for the random operator.
    OperatorBound,
    /// Weak-type (1,1) profile of a spike.
    Weak11,
    /// Every experiment.
    Report,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Family {
    Smooth,
    Haar,
    Operator,
}

impl Command {
    fn kinds(&self) -> Vec<ExperimentKind> {
        match self {
            Command::HaarIdentity => vec![ExperimentKind::HaarIdentity],
            Command::CzSweep => vec![ExperimentKind::CzSweep],
            Command::Concentration { family } => vec![match family {
                Family::Smooth => ExperimentKind::ConcentrationSmooth,
                Family::Haar => ExperimentKind::ConcentrationHaar,
                Family::Operator => ExperimentKind::ConcentrationOperator,
            }],
            Command::ThreeSeries => vec![ExperimentKind::ThreeSeries],
            Command::OperatorBound => vec![ExperimentKind::OperatorBound],
            Command::Weak11 => vec![ExperimentKind::Weak11],
            Command::Report => ExperimentKind::ALL.to_vec(),
        }
    }
}

fn load_config(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if cli.replicates.is_some() {
        config.replicates = cli.replicates;
    }
    config.thorough |= cli.thorough;
    config.validate()?;
    Ok(config)
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let config = load_config(cli)?;
    let (summary, outcomes) = run_experiments(&config, &cli.command.kinds())?;
    let written = emit_report(&summary, &outcomes, &cli.out_dir)
        .with_context(|| format!("writing results to {}", cli.out_dir.display()))?;
    for o in &outcomes {
        println!("{:<24} {}", o.name, if o.passed { "PASS" } else { "FAIL" });
    }
    println!("wrote {} files to {}", written.len(), cli.out_dir.display());
    Ok(summary.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
