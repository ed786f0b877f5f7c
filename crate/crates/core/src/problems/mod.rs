//! Cost functions the search optimizes, and the evaluator that counts
//! circuit evaluations.

mod dataset;
mod magic;
mod oracle;
mod vqe;
mod vqls;

pub use dataset::{build_dataset, build_dataset_with, gen_random_clifford_t, DatasetAxes, DatasetEntry, Difficulty};
pub use magic::{m2_entropy, MAX_MAGIC_QUBITS};
pub use oracle::{default_epsilon, is_epsilon_approx, OracleProblem};
pub use vqe::{parse_hamiltonian, VqeProblem};
pub use vqls::VqlsProblem;

use std::sync::atomic::{AtomicU64, Ordering};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::qsim::{apply_circuit, apply_circuit_noisy, DensityMatrix, NoiseModel, StateVector, MAX_DENSITY_QUBITS};

/// What one circuit simulation yields for a problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measurement {
    /// The cost is the expectation value of a Hermitian observable.
    Expectation(f64),
    /// The cost is `1 - numerator / denominator`, clamped to `[0, 1]`,
    /// with both parts expectation values of their own observables.
    LocalCost { numerator: f64, denominator: f64 },
}

impl Measurement {
    pub fn cost(&self) -> f64 {
        match *self {
            Measurement::Expectation(e) => e,
            Measurement::LocalCost { numerator, denominator } => (1.0 - numerator / denominator).clamp(0.0, 1.0),
        }
    }

    /// Number of distinct expectation values the measurement is made of.
    pub fn expectation_count(&self) -> u64 {
        match self {
            Measurement::Expectation(_) => 1,
            Measurement::LocalCost { .. } => 2,
        }
    }
}

/// A circuit-to-cost mapping plus the reward transform used by the search.
pub trait Problem: Send + Sync {
    /// Short identifier used in result files.
    fn name(&self) -> String;

    fn qubit_count(&self) -> usize;

    fn measure_state(&self, state: &StateVector) -> Result<Measurement>;

    fn measure_density(&self, rho: &DensityMatrix) -> Result<Measurement>;

    /// Strictly decreasing map from cost to reward.
    fn reward(&self, cost: f64) -> f64;

    /// Best attainable cost, when known.
    fn optimal_cost(&self) -> Option<f64> {
        None
    }

    /// Noiseless cost of a circuit, without touching any evaluation counter.
    fn cost(&self, c: &Circuit) -> Result<f64> {
        check_size(self, c)?;
        Ok(self.measure_state(&apply_circuit(c))?.cost())
    }
}

fn check_size<P: Problem + ?Sized>(p: &P, c: &Circuit) -> Result<()> {
    if c.n_qubits() != p.qubit_count() {
        return Err(Error::Problem(format!(
            "circuit has {} qubits but problem '{}' needs {}",
            c.n_qubits(),
            p.name(),
            p.qubit_count()
        )));
    }
    Ok(())
}

/// Simulates circuits against a problem, optionally under noise, and counts
/// every simulation. Shareable across threads.
pub struct Evaluator<'p> {
    problem: &'p dyn Problem,
    noise: Option<NoiseModel>,
    count: AtomicU64,
}

impl<'p> Evaluator<'p> {
    /// A noise model with both probabilities zero is the identity channel
    /// and is evaluated on the pure-state path.
    pub fn new(problem: &'p dyn Problem, noise: Option<NoiseModel>) -> Result<Self> {
        let noise = match noise {
            Some(m) => {
                m.validate()?;
                (!m.is_noiseless()).then_some(m)
            }
            None => None,
        };
        if noise.is_some() && problem.qubit_count() > MAX_DENSITY_QUBITS {
            return Err(Error::Resource(format!(
                "noisy evaluation needs a density matrix; {} qubits exceeds {MAX_DENSITY_QUBITS}",
                problem.qubit_count()
            )));
        }
        Ok(Self { problem, noise, count: AtomicU64::new(0) })
    }

    pub fn noiseless(problem: &'p dyn Problem) -> Self {
        Self { problem, noise: None, count: AtomicU64::new(0) }
    }

    pub fn problem(&self) -> &'p dyn Problem {
        self.problem
    }

    pub fn noise(&self) -> Option<NoiseModel> {
        self.noise
    }

    pub fn evaluations(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }

    fn simulate(&self, c: &Circuit) -> Result<Measurement> {
        check_size(self.problem, c)?;
        match &self.noise {
            None => self.problem.measure_state(&apply_circuit(c)),
            Some(noise) => self.problem.measure_density(&apply_circuit_noisy(c, noise)?),
        }
    }

    /// One cost evaluation; counts once.
    pub fn measure(&self, c: &Circuit) -> Result<Measurement> {
        check_size(self.problem, c)?;
        self.count.fetch_add(1, Ordering::Relaxed);
        self.simulate(c)
    }

    pub fn cost(&self, c: &Circuit) -> Result<f64> {
        Ok(self.measure(c)?.cost())
    }

    /// A shifted-circuit probe for a gradient; counts once per expectation
    /// value the measurement consists of.
    pub fn probe(&self, c: &Circuit) -> Result<Measurement> {
        let m = self.simulate(c)?;
        self.count.fetch_add(m.expectation_count(), Ordering::Relaxed);
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::qsim::PauliSum;

    #[test]
    fn counter_increments_once_per_cost_call() {
        let p = VqeProblem::new(PauliSum::from_real(&[(1.0, "ZZ")]).unwrap()).unwrap();
        let ev = Evaluator::noiseless(&p);
        let c = Circuit::root(2).unwrap();
        for k in 1..=7 {
            ev.cost(&c).unwrap();
            assert_eq!(ev.evaluations(), k);
        }
        assert!(ev.cost(&Circuit::root(3).unwrap()).is_err());
        assert_eq!(ev.evaluations(), 7);
    }

    #[test]
    fn zero_noise_uses_pure_path() {
        let p = VqeProblem::new(PauliSum::from_real(&[(1.0, "ZZ"), (0.5, "XI")]).unwrap()).unwrap();
        let ev = Evaluator::new(&p, Some(NoiseModel::default())).unwrap();
        assert!(ev.noise().is_none());
        let c = Circuit::new(2, vec![Gate::Ry(0, 0.3), Gate::Cnot(0, 1)]).unwrap();
        assert_eq!(ev.cost(&c).unwrap().to_bits(), p.cost(&c).unwrap().to_bits());
        assert!(Evaluator::new(&p, Some(NoiseModel { bit_flip_p: 2.0, depolarizing_p: 0.0 })).is_err());
    }

    #[test]
    fn noisy_cost_differs() {
        let p = VqeProblem::new(PauliSum::from_real(&[(1.0, "ZI")]).unwrap()).unwrap();
        let ev = Evaluator::new(&p, Some(NoiseModel::new(0.1, 0.0).unwrap())).unwrap();
        let c = Circuit::empty(2).unwrap();
        assert!((ev.cost(&c).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn local_cost_clamps() {
        assert_eq!(Measurement::LocalCost { numerator: 1.0 + 1e-15, denominator: 1.0 }.cost(), 0.0);
        assert_eq!(Measurement::LocalCost { numerator: 0.25, denominator: 1.0 }.cost(), 0.75);
        assert_eq!(Measurement::LocalCost { numerator: 0.25, denominator: 1.0 }.expectation_count(), 2);
    }
}
