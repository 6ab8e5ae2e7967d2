//! Experiment configuration.
//!
//! The config file is JSON. Every field is optional; missing fields take the
//! defaults below and command-line flags override the file.
//!
//! ```json
//! {
//!   "env": { "kind": "garnet", "n": 200, "m": 5, "branching": 10 },
//!   "gammas": [0.9, 0.95, 0.99, 0.999],
//!   "instances": 25,
//!   "seeds": 5,
//!   "algos": ["vi", "pi", "r1vi"],
//!   "thresholds": null,
//!   "max_iters": 100000,
//!   "iters": 5000,
//!   "eval_every": 1,
//!   "master_seed": 0,
//!   "out": "plan.csv",
//!   "threads": 0,
//!   "policy_value": false
//! }
//! ```

use std::path::{Path, PathBuf};

use rankone_core::envs::{
    gen_garnet, gen_graph, gen_gridworld, GarnetSpec, GridworldSpec, GridworldVariant,
};
use rankone_core::Mdp;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

/// Benchmark family and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvSpec {
    Garnet {
        #[serde(default = "garnet_n")]
        n: usize,
        #[serde(default = "garnet_m")]
        m: usize,
        #[serde(default = "garnet_branching")]
        branching: usize,
    },
    Graph {
        #[serde(default = "graph_nodes")]
        nodes: usize,
        #[serde(default = "graph_slip")]
        slip: f64,
    },
    Gridworld {
        #[serde(default = "grid_side")]
        rows: usize,
        #[serde(default = "grid_side")]
        cols: usize,
        #[serde(default = "grid_variant")]
        variant: GridworldVariant,
        goal: Option<(usize, usize)>,
        #[serde(default = "grid_step_cost")]
        step_cost: f64,
    },
    /// A model document written by `gen`; its discount factor is replaced
    /// by each configured one.
    File { path: PathBuf },
}

fn garnet_n() -> usize {
    200
}
fn garnet_m() -> usize {
    5
}
fn garnet_branching() -> usize {
    10
}
fn graph_nodes() -> usize {
    6
}
fn graph_slip() -> f64 {
    0.2
}
fn grid_side() -> usize {
    5
}
fn grid_variant() -> GridworldVariant {
    GridworldVariant::TerminalZeroReward
}
fn grid_step_cost() -> f64 {
    1.0
}

impl Default for EnvSpec {
    fn default() -> Self {
        EnvSpec::Garnet {
            n: garnet_n(),
            m: garnet_m(),
            branching: garnet_branching(),
        }
    }
}

impl EnvSpec {
    /// Family defaults for a name given on the command line.
    pub fn from_name(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "garnet" => Ok(EnvSpec::default()),
            "graph" => Ok(EnvSpec::Graph {
                nodes: graph_nodes(),
                slip: graph_slip(),
            }),
            "gridworld" | "terminal-gridworld" | "terminal_gridworld" => Ok(Self::gridworld(
                GridworldVariant::TerminalZeroReward,
            )),
            "absorbing-gridworld" | "absorbing_gridworld" => Ok(Self::gridworld(
                GridworldVariant::AbsorbingPositiveReward,
            )),
            other => Err(BenchError::Config(format!("unknown environment {other:?}"))),
        }
    }

    fn gridworld(variant: GridworldVariant) -> Self {
        EnvSpec::Gridworld {
            rows: grid_side(),
            cols: grid_side(),
            variant,
            goal: None,
            step_cost: grid_step_cost(),
        }
    }

    /// Short label used in CSV rows.
    pub fn label(&self) -> &'static str {
        match self {
            EnvSpec::Garnet { .. } => "garnet",
            EnvSpec::Graph { .. } => "graph",
            EnvSpec::Gridworld {
                variant: GridworldVariant::TerminalZeroReward,
                ..
            } => "terminal_gridworld",
            EnvSpec::Gridworld { .. } => "absorbing_gridworld",
            EnvSpec::File { .. } => "file",
        }
    }

    pub fn gridworld_spec(&self) -> Option<GridworldSpec> {
        match *self {
            EnvSpec::Gridworld {
                rows,
                cols,
                variant,
                goal,
                step_cost,
            } => Some(GridworldSpec {
                rows,
                cols,
                variant,
                goal: goal.unwrap_or((rows.saturating_sub(1), cols.saturating_sub(1))),
                step_cost,
            }),
            _ => None,
        }
    }

    /// Builds instance `instance` for discount `gamma`. Random families draw
    /// their structure from `instance_seed(master_seed, instance)`, so every
    /// discount factor sees the same instances.
    pub fn build(&self, master_seed: u64, instance: usize, gamma: f64) -> Result<Mdp<f64>> {
        let seed = instance_seed(master_seed, instance);
        let mdp = match *self {
            EnvSpec::Garnet { n, m, branching } => gen_garnet(
                &GarnetSpec {
                    n,
                    m,
                    branching,
                    seed,
                },
                gamma,
            )?,
            EnvSpec::Graph { nodes, slip } => gen_graph(nodes, slip, seed, gamma)?,
            EnvSpec::Gridworld { .. } => gen_gridworld(&self.gridworld_spec().unwrap(), gamma)?,
            EnvSpec::File { ref path } => {
                let text = std::fs::read_to_string(path)?;
                Mdp::<f64>::from_json(&text)?.with_gamma(gamma)?
            }
        };
        Ok(mdp)
    }

    /// `(value, bellman)` stopping thresholds for `gamma`.
    pub fn default_thresholds(&self, gamma: f64) -> Thresholds {
        let col = GAMMA_COLUMNS
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - gamma).abs().total_cmp(&(b.1 - gamma).abs()))
            .map_or(0, |(i, _)| i);
        let value = match self {
            EnvSpec::Garnet { .. } => [1e-5, 1e-4, 1e-4, 1e-2],
            _ => [1e-5, 1e-4, 1e-3, 1e-2],
        };
        let bellman = [1e-5, 1e-5, 1e-5, 1e-4];
        Thresholds {
            value: value[col],
            bellman: bellman[col],
        }
    }
}

/// Discount factors of the threshold table columns.
pub const GAMMA_COLUMNS: [f64; 4] = [0.9, 0.95, 0.99, 0.999];

/// Stopping thresholds for one discount factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub value: f64,
    pub bellman: f64,
}

/// Seed of a generated instance.
pub fn instance_seed(master_seed: u64, instance: usize) -> u64 {
    rankone_core::fnv1a([master_seed, instance as u64, 0x696e_7374])
}

/// Sample-stream seed shared by every learner on `(instance, seed)`.
pub fn stream_seed(master_seed: u64, instance: usize, seed: usize) -> u64 {
    rankone_core::fnv1a([master_seed, instance as u64, seed as u64, 0x7374_726d])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub env: EnvSpec,
    pub gammas: Vec<f64>,
    pub instances: usize,
    /// Sample streams per instance (learning only).
    pub seeds: usize,
    pub algos: Vec<String>,
    /// One entry per discount factor; `None` uses the built-in table.
    pub thresholds: Option<Vec<Thresholds>>,
    /// Planning iteration cap.
    pub max_iters: usize,
    /// Learning rounds.
    pub iters: usize,
    /// Learning rows are emitted every `eval_every` rounds.
    pub eval_every: usize,
    pub master_seed: u64,
    pub out: Option<PathBuf>,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
    pub policy_value: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            env: EnvSpec::default(),
            gammas: GAMMA_COLUMNS.to_vec(),
            instances: 25,
            seeds: 5,
            algos: Vec::new(),
            thresholds: None,
            max_iters: 100_000,
            iters: 5000,
            eval_every: 1,
            master_seed: 0,
            out: None,
            threads: 0,
            policy_value: false,
        }
    }
}

impl BenchConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn thresholds_for(&self, gamma_index: usize) -> Thresholds {
        match &self.thresholds {
            Some(t) => t[gamma_index],
            None => self.env.default_thresholds(self.gammas[gamma_index]),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(BenchError::Config(msg));
        if self.algos.is_empty() {
            return bad("no algorithms selected".into());
        }
        if self.gammas.is_empty() {
            return bad("no discount factors given".into());
        }
        if let Some(g) = self.gammas.iter().find(|g| !(**g >= 0.0 && **g < 1.0)) {
            return bad(format!("discount factor {g} outside [0, 1)"));
        }
        if self.instances == 0 || self.seeds == 0 {
            return bad("instances and seeds must be positive".into());
        }
        if self.max_iters == 0 || self.iters == 0 || self.eval_every == 0 {
            return bad("iteration counts must be positive".into());
        }
        if let Some(t) = &self.thresholds {
            if t.len() != self.gammas.len() {
                return bad(format!(
                    "{} threshold entries for {} discount factors",
                    t.len(),
                    self.gammas.len()
                ));
            }
            if t.iter().any(|t| !(t.value > 0.0 && t.bellman > 0.0)) {
                return bad("thresholds must be positive".into());
            }
        }
        Ok(())
    }
}
