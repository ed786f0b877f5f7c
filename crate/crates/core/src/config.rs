//! Search hyperparameters.

use serde::{Deserialize, Serialize};

use crate::circuit::ActionDistribution;
use crate::error::{Error, Result};
use crate::finetune::AdamConfig;
use crate::qsim::NoiseModel;

/// Complete hyperparameter record for one search plus its fine-tuning.
///
/// Defaults reproduce the reference configuration: `r = 0`, `ρ = 5%`,
/// `c = 0.4`, widening `k = ⌈1·N^0.3⌉`, `p = (0.5, 0.2, 0.1, 0.2)`,
/// `Δφ = 0.2`, `d = 20`, `T = 500`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub iterations: u64,
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
    /// Optional CNOT-count cutoff that suppresses Add like `max_depth` does.
    pub max_cnots: Option<usize>,
    pub max_adam_steps: u32,
    pub seed: u64,
    pub noise: Option<NoiseModel>,
    /// Constant branching factor replacing progressive widening.
    pub fixed_branching: Option<usize>,
    /// Divide rewards by the magnitude of the root reward before backpropagation.
    pub normalize_rewards: bool,
    pub adam: AdamConfig,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            iterations: 1000,
            rollout_steps: 0,
            commit_fraction: 0.05,
            exploration: 0.4,
            pw_coefficient: 1.0,
            pw_exponent: 0.3,
            p_add: 0.5,
            p_swap: 0.2,
            p_delete: 0.1,
            p_change: 0.2,
            angle_deviation: 0.2,
            max_depth: 20,
            max_cnots: None,
            max_adam_steps: 500,
            seed: 0,
            noise: None,
            fixed_branching: None,
            normalize_rewards: false,
            adam: AdamConfig::default(),
        }
    }
}

impl SearchConfig {
    pub fn with_iterations(mut self, iterations: u64) -> Self {
        self.iterations = iterations;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn action_distribution(&self) -> Result<ActionDistribution> {
        ActionDistribution::new(self.p_add, self.p_swap, self.p_delete, self.p_change)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.iterations < 1 {
            return bad("iterations must be at least 1".into());
        }
        if !(self.commit_fraction > 0.0 && self.commit_fraction <= 1.0) {
            return bad(format!("commit_fraction {} outside (0, 1]", self.commit_fraction));
        }
        if !(self.exploration >= 0.0 && self.exploration.is_finite()) {
            return bad(format!("exploration {} must be non-negative", self.exploration));
        }
        if !(self.pw_coefficient > 0.0 && self.pw_coefficient.is_finite()) {
            return bad(format!("pw_coefficient {} must be positive", self.pw_coefficient));
        }
        if !(self.pw_exponent > 0.0 && self.pw_exponent <= 1.0) {
            return bad(format!("pw_exponent {} outside (0, 1]", self.pw_exponent));
        }
        if !(self.angle_deviation >= 0.0 && self.angle_deviation.is_finite()) {
            return bad(format!("angle_deviation {} must be non-negative", self.angle_deviation));
        }
        if self.max_depth < 1 {
            return bad("max_depth must be at least 1".into());
        }
        if self.fixed_branching == Some(0) {
            return bad("fixed_branching must be at least 1".into());
        }
        if let Some(noise) = &self.noise {
            noise.validate()?;
        }
        self.adam.validate()?;
        self.action_distribution().map(|_| ())
    }

    /// Visit threshold a child must reach before the search commits to it.
    pub fn commit_threshold(&self) -> u64 {
        // guard against 0.05 * 1000 landing a hair above 50
        ((self.commit_fraction * self.iterations as f64) - 1e-9).ceil().max(1.0) as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = SearchConfig::default();
        cfg.validate().unwrap();
        let d = cfg.action_distribution().unwrap();
        assert_eq!((d.add, d.swap, d.delete, d.change), (0.5, 0.2, 0.1, 0.2));
    }

    #[test]
    fn commit_threshold_examples() {
        let cfg = SearchConfig::default().with_iterations(1000);
        assert_eq!(cfg.commit_threshold(), 50);
        let cfg = SearchConfig::default().with_iterations(10);
        assert_eq!(cfg.commit_threshold(), 1);
    }

    #[test]
    fn rejects_bad_values() {
        let d = SearchConfig::default;
        assert!(SearchConfig { pw_exponent: 1.5, ..d() }.validate().is_err());
        assert!(SearchConfig { p_add: 0.9, ..d() }.validate().is_err());
        assert!(SearchConfig { iterations: 0, ..d() }.validate().is_err());
        assert!(SearchConfig { commit_fraction: 0.0, ..d() }.validate().is_err());
        assert!(SearchConfig { fixed_branching: Some(0), ..d() }.validate().is_err());
    }
}
