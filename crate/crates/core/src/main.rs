use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use risk_perception::experiment::{run_stage, ExperimentConfig, RunError, Stage, OUTPUT_ROOT_ENV};

#[derive(Parser)]
#[command(name = "riskperc", version, about = "Risk-driven perception experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the risk MDP (and the DAA controller) and save the tables.
    SolveRisk(Common),
    /// Train perception networks for every configured variant and trial.
    Train(Common),
    /// Evaluate trained networks: MTTF for the pendulum, NMAC and precision for DAA.
    Evaluate(Common),
    /// Fly the reference perceivers through the DAA encounter set.
    Encounters(Common),
    /// Dump weight fields, risk profiles and policy slices as CSV.
    ExportField(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(short, long)]
    config: PathBuf,
    /// Output directory; overrides the config and the environment default.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Base seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated risk levels override.
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    /// Number of trials override.
    #[arg(long)]
    trials: Option<usize>,
    /// Worker thread cap; defaults to all cores.
    #[arg(short, long)]
    jobs: Option<usize>,
}

fn run(stage: Stage, c: Common) -> Result<Vec<String>, RunError> {
    let mut cfg = ExperimentConfig::load(&c.config)?;
    if let Some(o) = c.out {
        cfg.output_dir = Some(o);
    }
    if let Some(s) = c.seed {
        cfg.seeds.base = s;
    }
    if let Some(a) = c.alpha {
        cfg.alphas = a;
    }
    if let Some(t) = c.trials {
        cfg.seeds.trials = t;
    }
    if let Some(j) = c.jobs {
        if j == 0 {
            return Err(RunError::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| RunError::Runtime(e.to_string()))?;
    }
    cfg.validate()?;
    run_stage(&cfg, stage)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (stage, common) = match cli.command {
        Command::SolveRisk(c) => (Stage::SolveRisk, c),
        Command::Train(c) => (Stage::Train, c),
        Command::Evaluate(c) => (Stage::Evaluate, c),
        Command::Encounters(c) => (Stage::Encounters, c),
        Command::ExportField(c) => (Stage::ExportField, c),
    };
    match run(stage, common) {
        Ok(lines) => {
            lines.iter().for_each(|l| println!("{l}"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, RunError::Prerequisite(_)) {
                eprintln!("(default output root comes from {OUTPUT_ROOT_ENV})");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
