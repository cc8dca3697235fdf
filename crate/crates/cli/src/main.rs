use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use lpweights::correction::Strategy;
use lpweights::{Partition, WeightSpec};
use wlp::{run, CliError, Command, ExperimentConfig, Scenario};

/// Seeded experiments on weighted Littlewood-Paley inequalities.
#[derive(Debug, Parser)]
#[command(name = "wlp", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Grid size, a power of two >= 8.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Catalog string, e.g. `power:delta=-0.3`.
    #[arg(long)]
    weight: Option<String>,
    /// Second weight `a`.
    #[arg(long)]
    a_weight: Option<String>,
    /// JSON list of `[lo, hi]` pairs.
    #[arg(long)]
    partition: Option<String>,
    /// `exp:k=..`, `gaussian`, `spikes:count=..`, `analytic:top=..` or a CSV path.
    #[arg(long)]
    function: Option<String>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    t_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    p_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    s_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    b_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    ns: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, value_enum)]
    scenario: Option<Scenario>,
    #[arg(long)]
    gamma: Option<f64>,
    /// `zero-offenders` or `damp`.
    #[arg(long)]
    strategy: Option<String>,
    /// Skip printing the report.
    #[arg(long)]
    quiet: bool,
}

fn config_error(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

impl Cli {
    fn flags(&self) -> Result<ExperimentConfig, CliError> {
        let weight = |s: &Option<String>| -> Result<Option<WeightSpec>, CliError> {
            s.as_deref().map(str::parse).transpose().map_err(config_error)
        };
        Ok(ExperimentConfig {
            command: None,
            n: self.n,
            seed: self.seed,
            partition: self
                .partition
                .as_deref()
                .map(serde_json::from_str::<Partition>)
                .transpose()
                .map_err(config_error)?,
            function: self.function.clone(),
            weight: weight(&self.weight)?,
            a_weight: weight(&self.a_weight)?,
            pairs: None,
            q: self.q,
            t_grid: self.t_grid.clone(),
            p_grid: self.p_grid.clone(),
            s_grid: self.s_grid.clone(),
            b_grid: self.b_grid.clone(),
            ns: self.ns.clone(),
            trials: self.trials,
            scenario: self.scenario,
            gamma: self.gamma,
            strategy: self
                .strategy
                .as_deref()
                .map(str::parse::<Strategy>)
                .transpose()
                .map_err(config_error)?,
            out: self.out.clone(),
        })
    }

    fn config(&self) -> Result<ExperimentConfig, CliError> {
        let base = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        Ok(base.overlay(self.flags()?))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.config().and_then(|c| run(cli.command, c)) {
        Ok((report, _)) => {
            if !cli.quiet {
                print!("{report}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("wlp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
