use super::{Measurement, Problem};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::qsim::{apply_circuit, fidelity, DensityMatrix, StateVector};

/// Default tolerance per register size: 0.05 at 4 qubits, 0.1 at 6, 0.2 at 8.
pub fn default_epsilon(n: usize) -> Option<f64> {
    match n {
        4 => Some(0.05),
        6 => Some(0.1),
        8 => Some(0.2),
        _ => None,
    }
}

/// Approximating a fixed target state: cost `1 - |⟨φ|ψ⟩|²`, reward `1 - cost`.
#[derive(Debug, Clone)]
pub struct OracleProblem {
    target: StateVector,
    epsilon: f64,
    label: String,
}

impl OracleProblem {
    pub fn new(target: StateVector, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Problem(format!("epsilon {epsilon} outside (0, 1)")));
        }
        if (target.norm_sqr() - 1.0).abs() > 1e-9 {
            return Err(Error::Problem(format!("target norm² is {}", target.norm_sqr())));
        }
        Ok(Self { target, epsilon, label: "oracle".into() })
    }

    /// Target is the output state of `circuit`.
    pub fn from_circuit(circuit: &Circuit, epsilon: f64) -> Result<Self> {
        Self::new(apply_circuit(circuit), epsilon)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn target(&self) -> &StateVector {
        &self.target
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Noiseless fidelity of the circuit's output with the target.
    pub fn fidelity(&self, c: &Circuit) -> Result<f64> {
        if c.n_qubits() != self.target.n_qubits() {
            return Err(Error::Problem(format!(
                "circuit has {} qubits, target has {}",
                c.n_qubits(),
                self.target.n_qubits()
            )));
        }
        fidelity(&self.target, &apply_circuit(c))
    }
}

/// Whether `c` reaches fidelity at least `1 - ε` with the target (noiseless).
pub fn is_epsilon_approx(c: &Circuit, p: &OracleProblem) -> Result<bool> {
    Ok(p.fidelity(c)? >= 1.0 - p.epsilon)
}

impl Problem for OracleProblem {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn qubit_count(&self) -> usize {
        self.target.n_qubits()
    }

    fn measure_state(&self, state: &StateVector) -> Result<Measurement> {
        let f = fidelity(&self.target, state)?;
        Ok(Measurement::Expectation((1.0 - f).clamp(0.0, 1.0)))
    }

    fn measure_density(&self, rho: &DensityMatrix) -> Result<Measurement> {
        let f = rho.overlap_with_pure(&self.target)?;
        Ok(Measurement::Expectation((1.0 - f).clamp(0.0, 1.0)))
    }

    fn reward(&self, cost: f64) -> f64 {
        1.0 - cost
    }

    fn optimal_cost(&self) -> Option<f64> {
        Some(0.0)
    }
}
