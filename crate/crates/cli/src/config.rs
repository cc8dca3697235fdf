//! Experiment configuration: a JSON file, overridden field by field by
//! command-line flags, then completed with per-command defaults.

use std::fmt;
use std::path::{Path, PathBuf};

use lpweights::circle::check_grid_size;
use lpweights::correction::Strategy;
use lpweights::{Partition, WeightSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Sigma,
    Weights,
    Lemma1,
    Lemma4,
    Theorem2Sweep,
    Regularize,
    CorrectSweep,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Sigma,
        Command::Weights,
        Command::Lemma1,
        Command::Lemma4,
        Command::Theorem2Sweep,
        Command::Regularize,
        Command::CorrectSweep,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Sigma => "sigma",
            Command::Weights => "weights",
            Command::Lemma1 => "lemma1",
            Command::Lemma4 => "lemma4",
            Command::Theorem2Sweep => "theorem2-sweep",
            Command::Regularize => "regularize",
            Command::CorrectSweep => "correct-sweep",
        }
    }

    fn default_n(&self) -> usize {
        match self {
            Command::Sigma => 64,
            Command::Lemma1 => 128,
            Command::CorrectSweep => 512,
            _ => 256,
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which correction input to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// `w = a = 1`, random `|f| ≤ 1`.
    Unit,
    /// `f` on a random arc, `w = (M|f|)^γ`.
    Maximal,
}

/// Every knob of every command. Unset fields take the command's default in
/// [`ExperimentConfig::resolve`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<Command>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub partition: Option<Partition>,
    /// `exp:k=..`, `gaussian`, `spikes:count=..`, `analytic:top=..`, or a
    /// path to an `index,re,im` CSV file.
    pub function: Option<String>,
    pub weight: Option<WeightSpec>,
    /// The second weight `a`.
    pub a_weight: Option<WeightSpec>,
    /// `(a, w)` pairs for the ratio sweep.
    pub pairs: Option<Vec<(WeightSpec, WeightSpec)>>,
    pub q: Option<f64>,
    pub t_grid: Option<Vec<f64>>,
    pub p_grid: Option<Vec<f64>>,
    pub s_grid: Option<Vec<f64>>,
    pub b_grid: Option<Vec<f64>>,
    pub ns: Option<Vec<usize>>,
    pub trials: Option<usize>,
    pub scenario: Option<Scenario>,
    pub gamma: Option<f64>,
    pub strategy: Option<Strategy>,
    pub out: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($field:ident),*) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field; } )*
    };
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `top` replace those of `self`.
    pub fn overlay(mut self, top: ExperimentConfig) -> Self {
        overlay!(self, top; command, n, seed, partition, function, weight, a_weight, pairs, q,
            t_grid, p_grid, s_grid, b_grid, ns, trials, scenario, gamma, strategy, out);
        self
    }

    /// Fills the defaults of `command` and checks the invariants. The
    /// result has every field its command reads.
    pub fn resolve(mut self, command: Command) -> Result<Self, CliError> {
        if let Some(c) = self.command {
            if c != command {
                return Err(CliError::Config(format!("config is for `{c}`, not `{command}`")));
            }
        }
        self.command = Some(command);
        self.n.get_or_insert(command.default_n());
        self.out.get_or_insert_with(|| PathBuf::from("wlp-out"));
        match command {
            Command::Sigma => {
                self.function.get_or_insert_with(|| "exp:k=1".into());
            }
            Command::Weights => {
                self.weight.get_or_insert(WeightSpec::Unit);
                self.p_grid.get_or_insert_with(|| vec![1.0, 1.25, 1.5, 2.0, 4.0, 8.0]);
                self.s_grid.get_or_insert_with(|| vec![1.05, 1.1, 1.2, 1.5, 2.0]);
            }
            Command::Lemma1 => {
                self.weight.get_or_insert(WeightSpec::Unit);
                self.a_weight.get_or_insert(WeightSpec::Unit);
                self.q.get_or_insert(1.5);
                self.t_grid.get_or_insert_with(|| vec![0.95, 0.99, 1.01, 1.05]);
            }
            Command::Lemma4 => {
                self.weight.get_or_insert(WeightSpec::Unit);
                self.p_grid.get_or_insert_with(|| vec![1.5]);
            }
            Command::Theorem2Sweep => {
                if self.pairs.is_none() && (self.weight.is_some() || self.a_weight.is_some()) {
                    let a = self.a_weight.clone().unwrap_or(WeightSpec::Unit);
                    let w = self.weight.clone().unwrap_or(WeightSpec::Unit);
                    self.pairs = Some(vec![(a, w)]);
                }
                self.pairs.get_or_insert_with(lpweights::trials::theorem2_pairs);
                self.ns.get_or_insert_with(|| vec![64, 128, 256]);
                self.trials.get_or_insert(1000);
            }
            Command::Regularize => {}
            Command::CorrectSweep => {
                let scenario = *self.scenario.get_or_insert(Scenario::Unit);
                if scenario == Scenario::Maximal {
                    self.gamma.get_or_insert(0.3);
                    self.a_weight.get_or_insert(WeightSpec::Unit);
                }
                self.strategy.get_or_insert(Strategy::ZeroOffenders);
                self.b_grid
                    .get_or_insert_with(|| vec![0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 1.0]);
            }
        }
        self.validate(command)?;
        Ok(self)
    }

    fn randomized(&self, command: Command) -> bool {
        match command {
            Command::Theorem2Sweep | Command::CorrectSweep => true,
            Command::Regularize => self.partition.is_none(),
            Command::Sigma => self
                .function
                .as_deref()
                .is_some_and(|f| ["gaussian", "spikes", "analytic"].iter().any(|k| f.starts_with(k))),
            _ => false,
        }
    }

    fn validate(&self, command: Command) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        let n = self.n.expect("resolved");
        check_grid_size(n).map_err(|e| CliError::Config(e.to_string()))?;
        if self.randomized(command) && self.seed.is_none() {
            return bad(format!("`{command}` is randomized and needs --seed"));
        }
        if let Some(p) = &self.partition {
            p.check_window(n).map_err(|e| CliError::Config(e.to_string()))?;
        }
        for (name, grid) in [
            ("t_grid", &self.t_grid),
            ("p_grid", &self.p_grid),
            ("s_grid", &self.s_grid),
            ("b_grid", &self.b_grid),
        ] {
            if let Some(g) = grid {
                if g.is_empty() {
                    return bad(format!("{name} is empty"));
                }
                if g.iter().any(|v| !v.is_finite()) {
                    return bad(format!("{name} has a non-finite entry"));
                }
            }
        }
        if let Some(ns) = &self.ns {
            if ns.is_empty() {
                return bad("ns is empty".into());
            }
            for &m in ns {
                check_grid_size(m).map_err(|e| CliError::Config(e.to_string()))?;
            }
        }
        if let Some(pairs) = &self.pairs {
            if pairs.is_empty() {
                return bad("pairs is empty".into());
            }
        }
        if command == Command::CorrectSweep {
            let b = self.b_grid.as_ref().expect("resolved");
            if b.windows(2).any(|x| !(x[0] < x[1])) {
                return bad("b_grid must be strictly increasing".into());
            }
        }
        Ok(())
    }
}
