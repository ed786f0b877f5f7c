//! Experiment configuration: a flat TOML table whose keys mirror the search
//! hyperparameter names, plus the problem selection and the grid axes.
//!
//! ```toml
//! problem = "vqls"
//! iterations = [1000, 10000]
//! runs = 10
//! seed = 7
//! ```
//!
//! Axis keys (`iterations`, `fixed_branching`, `noise_bitflip`,
//! `noise_depolarizing`) take a scalar or a list. A `fixed_branching` value
//! of 0 selects progressive widening.

use std::path::{Path, PathBuf};

use qas_core::finetune::AdamConfig;
use qas_core::qsim::NoiseModel;
use qas_core::SearchConfig;
use serde::{Deserialize, Serialize};

use crate::error::{read_to_string, CliError, Result};
use crate::problem::ProblemSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    /// Hamiltonian read from a file.
    Vqe,
    /// Transverse-field Ising chain generated in memory.
    Tfim,
    Vqls,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> Axis<T> {
    pub fn values(&self) -> Vec<T> {
        match self {
            Axis::One(v) => vec![v.clone()],
            Axis::Many(vs) => vs.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: Option<ProblemKind>,
    pub hamiltonian: Option<PathBuf>,
    pub qubits: usize,
    pub field: f64,
    /// Directory written by `gen-dataset`.
    pub dataset: Option<PathBuf>,
    /// Dataset entries to use, by stem (`n4_g5_easy`); empty means all.
    pub targets: Vec<String>,
    /// Single target circuit file, as an alternative to `dataset`.
    pub target: Option<PathBuf>,
    pub epsilon: Option<f64>,

    pub runs: usize,
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,

    pub iterations: Axis<u64>,
    pub fixed_branching: Axis<usize>,
    pub noise_bitflip: Axis<f64>,
    pub noise_depolarizing: Axis<f64>,

    pub rollout_steps: u32,
    pub commit_fraction: f64,
    pub exploration: f64,
    pub pw_coefficient: f64,
    pub pw_exponent: f64,
    pub p_add: f64,
    pub p_swap: f64,
    pub p_delete: f64,
    pub p_change: f64,
    pub angle_deviation: f64,
    pub max_depth: usize,
    pub max_cnots: Option<usize>,
    pub max_adam_steps: u32,
    pub normalize_rewards: bool,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let s = SearchConfig::default();
        Self {
            problem: None,
            hamiltonian: None,
            qubits: 4,
            field: 0.5,
            dataset: None,
            targets: Vec::new(),
            target: None,
            epsilon: None,
            runs: 10,
            seed: 0,
            workers: 0,
            iterations: Axis::One(s.iterations),
            fixed_branching: Axis::One(0),
            noise_bitflip: Axis::One(0.0),
            noise_depolarizing: Axis::One(0.0),
            rollout_steps: s.rollout_steps,
            commit_fraction: s.commit_fraction,
            exploration: s.exploration,
            pw_coefficient: s.pw_coefficient,
            pw_exponent: s.pw_exponent,
            p_add: s.p_add,
            p_swap: s.p_swap,
            p_delete: s.p_delete,
            p_change: s.p_change,
            angle_deviation: s.angle_deviation,
            max_depth: s.max_depth,
            max_cnots: s.max_cnots,
            max_adam_steps: s.max_adam_steps,
            normalize_rewards: s.normalize_rewards,
            learning_rate: s.adam.learning_rate,
            beta1: s.adam.beta1,
            beta2: s.adam.beta2,
            eps: s.adam.eps,
        }
    }
}

/// One point of the experiment grid: a problem instance with fixed axis
/// values, run `runs` times with consecutive seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub problem: ProblemSpec,
    pub iterations: u64,
    pub fixed_branching: Option<usize>,
    pub noise: Option<NoiseModel>,
}

impl Cell {
    /// File-name-safe identifier, e.g. `vqls4_I1000_pw` or `n4_g20_hard_I10000_pw_bf0.1`.
    pub fn id(&self) -> String {
        let mut id = format!("{}_I{}_{}", self.problem.label(), self.iterations, branching_label(self.fixed_branching));
        if let Some(n) = self.noise {
            if n.bit_flip_p > 0.0 {
                id.push_str(&format!("_bf{}", n.bit_flip_p));
            }
            if n.depolarizing_p > 0.0 {
                id.push_str(&format!("_dp{}", n.depolarizing_p));
            }
        }
        id
    }
}

pub fn branching_label(fixed: Option<usize>) -> String {
    match fixed {
        Some(k) => format!("b{k}"),
        None => "pw".into(),
    }
}

impl ExperimentConfig {
    /// Parses a TOML document after applying `overrides` on top of it.
    pub fn from_toml(text: &str, overrides: &toml::Table) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Usage(e.to_string()))?;
        for (k, v) in overrides {
            table.insert(k.clone(), v.clone());
        }
        let cfg: ExperimentConfig =
            toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| CliError::Usage(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config file; relative paths inside it are resolved against
    /// the file's directory.
    pub fn load(path: Option<&Path>, overrides: &toml::Table) -> Result<Self> {
        let Some(path) = path else {
            return Self::from_toml("", overrides);
        };
        let mut cfg = Self::from_toml(&read_to_string(path)?, overrides)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.hamiltonian, &mut cfg.dataset, &mut cfg.target].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let usage = |m: String| Err(CliError::Usage(m));
        if self.problem.is_none() {
            return usage("no problem selected (set `problem` to vqe, tfim, vqls or oracle)".into());
        }
        if self.runs < 1 {
            return usage("runs must be at least 1".into());
        }
        for (name, len) in [
            ("iterations", self.iterations.values().len()),
            ("fixed_branching", self.fixed_branching.values().len()),
            ("noise_bitflip", self.noise_bitflip.values().len()),
            ("noise_depolarizing", self.noise_depolarizing.values().len()),
        ] {
            if len == 0 {
                return usage(format!("axis '{name}' is empty"));
            }
        }
        // surfaces bad hyperparameters before any file is touched
        for cell_cfg in self.axis_configs() {
            cell_cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        }
        Ok(())
    }

    fn base_search_config(&self) -> SearchConfig {
        SearchConfig {
            iterations: 1,
            rollout_steps: self.rollout_steps,
            commit_fraction: self.commit_fraction,
            exploration: self.exploration,
            pw_coefficient: self.pw_coefficient,
            pw_exponent: self.pw_exponent,
            p_add: self.p_add,
            p_swap: self.p_swap,
            p_delete: self.p_delete,
            p_change: self.p_change,
            angle_deviation: self.angle_deviation,
            max_depth: self.max_depth,
            max_cnots: self.max_cnots,
            max_adam_steps: self.max_adam_steps,
            seed: self.seed,
            noise: None,
            fixed_branching: None,
            normalize_rewards: self.normalize_rewards,
            adam: AdamConfig { learning_rate: self.learning_rate, beta1: self.beta1, beta2: self.beta2, eps: self.eps },
        }
    }

    fn axis_configs(&self) -> Vec<SearchConfig> {
        let mut out = Vec::new();
        for iterations in self.iterations.values() {
            for k in self.fixed_branching.values() {
                for bf in self.noise_bitflip.values() {
                    for dp in self.noise_depolarizing.values() {
                        out.push(SearchConfig {
                            iterations,
                            fixed_branching: (k > 0).then_some(k),
                            noise: noise_model(bf, dp),
                            ..self.base_search_config()
                        });
                    }
                }
            }
        }
        out
    }

    /// Grid cells in a fixed order: problem instances outermost, then
    /// iterations, branching, bit-flip and depolarizing levels.
    pub fn cells(&self, problems: &[ProblemSpec]) -> Vec<Cell> {
        let axes = self.axis_configs();
        problems
            .iter()
            .flat_map(|p| {
                axes.iter().map(move |a| Cell {
                    problem: p.clone(),
                    iterations: a.iterations,
                    fixed_branching: a.fixed_branching,
                    noise: a.noise,
                })
            })
            .collect()
    }

    /// Complete search configuration for one run of `cell`.
    pub fn search_config(&self, cell: &Cell, run: usize) -> SearchConfig {
        SearchConfig {
            iterations: cell.iterations,
            fixed_branching: cell.fixed_branching,
            noise: cell.noise,
            seed: self.seed.wrapping_add(run as u64),
            ..self.base_search_config()
        }
    }
}

/// Zero probabilities on both channels mean no noise model at all.
fn noise_model(bit_flip_p: f64, depolarizing_p: f64) -> Option<NoiseModel> {
    let m = NoiseModel { bit_flip_p, depolarizing_p };
    (!m.is_noiseless()).then_some(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::from_toml(text, &toml::Table::new())
    }

    #[test]
    fn defaults_mirror_search_defaults() {
        let cfg = parse("problem = \"vqls\"").unwrap();
        let cell = Cell { problem: ProblemSpec::Vqls, iterations: 1000, fixed_branching: None, noise: None };
        let s = cfg.search_config(&cell, 3);
        assert_eq!(s, SearchConfig { seed: 3, ..SearchConfig::default() });
    }

    #[test]
    fn axes_accept_scalars_and_lists() {
        let cfg = parse("problem = \"tfim\"\niterations = [100, 200]\nfixed_branching = [0, 5]\nnoise_bitflip = 0.1").unwrap();
        let cells = cfg.cells(&[ProblemSpec::Tfim { qubits: 4, field: 0.5 }]);
        assert_eq!(cells.len(), 4);
        assert_eq!(cells[0].id(), "tfim4_h0.5_I100_pw_bf0.1");
        assert_eq!(cells[1].fixed_branching, Some(5));
        assert_eq!(cells[3].iterations, 200);
        assert_eq!(cells[3].noise, Some(NoiseModel { bit_flip_p: 0.1, depolarizing_p: 0.0 }));
    }

    #[test]
    fn overrides_win() {
        let mut o = toml::Table::new();
        o.insert("runs".into(), toml::Value::Integer(3));
        o.insert("seed".into(), toml::Value::Integer(40));
        let cfg = ExperimentConfig::from_toml("problem = \"vqls\"\nruns = 10", &o).unwrap();
        assert_eq!((cfg.runs, cfg.seed), (3, 40));
        let cell = Cell { problem: ProblemSpec::Vqls, iterations: 10, fixed_branching: None, noise: None };
        assert_eq!(cfg.search_config(&cell, 2).seed, 42);
    }

    #[test]
    fn zero_noise_is_no_noise() {
        let cfg = parse("problem = \"vqls\"\nnoise_bitflip = 0.0\nnoise_depolarizing = 0.0").unwrap();
        assert!(cfg.cells(&[ProblemSpec::Vqls])[0].noise.is_none());
    }

    #[test]
    fn usage_errors() {
        for bad in [
            "",
            "problem = \"vqls\"\nrunz = 3",
            "problem = \"quantum\"",
            "problem = \"vqls\"\nruns = 0",
            "problem = \"vqls\"\niterations = []",
            "problem = \"vqls\"\npw_exponent = 2.0",
            "problem = \"vqls\"\nnoise_bitflip = 1.5",
            "problem = \"vqls\"\np_add = 0.9",
        ] {
            assert!(matches!(parse(bad), Err(CliError::Usage(_))), "{bad:?}");
        }
    }
}
