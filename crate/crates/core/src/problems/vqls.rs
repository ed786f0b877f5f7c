//! Linear systems `A|x⟩ ∝ |b⟩` with `A = Σ c_m A_m` over Pauli strings and
//! `|b⟩ = U|0⟩`, scored by the local cost with projector
//! `P = I/2 + (1/2n) Σ_j Z_j`.
//!
//! Both expectations are computed exactly from `|w⟩ = A|v⟩`:
//! the denominator is `⟨w|w⟩` and the numerator `⟨w|U P U†|w⟩`, which equals
//! the double sum over term pairs.

use num_complex::Complex64;

use super::{Measurement, Problem};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::qsim::{accumulate_pauli, apply_gate_raw, qubit_mask, DensityMatrix, Pauli, PauliString, StateVector};

const MIN_DENOMINATOR: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct VqlsProblem {
    n: usize,
    terms: Vec<(Complex64, PauliString)>,
    b_prep: Circuit,
    label: String,
}

impl VqlsProblem {
    pub fn new(coefficients: Vec<Complex64>, unitaries: Vec<PauliString>, b_prep: Circuit) -> Result<Self> {
        let n = b_prep.n_qubits();
        if coefficients.len() != unitaries.len() {
            return Err(Error::Problem(format!(
                "{} coefficients for {} unitaries",
                coefficients.len(),
                unitaries.len()
            )));
        }
        if unitaries.is_empty() {
            return Err(Error::Problem("linear system needs at least one term".into()));
        }
        if unitaries.len() > 4 * n * n {
            return Err(Error::Problem(format!("{} terms exceeds the 4n² = {} limit", unitaries.len(), 4 * n * n)));
        }
        if let Some(u) = unitaries.iter().find(|u| u.len() != n) {
            return Err(Error::Problem(format!("unitary {u} does not act on {n} qubits")));
        }
        Ok(Self { n, terms: coefficients.into_iter().zip(unitaries).collect(), b_prep, label: "vqls".into() })
    }

    /// Four-qubit benchmark: `A = 0.1·I + X₁ + X₂ + 0.2·Z₃Z₄` and `|b⟩ = H^{⊗4}|0⟩`.
    pub fn four_qubit_benchmark() -> Self {
        let strings = ["IIII", "XIII", "IXII", "IIZZ"];
        let coefs = [0.1, 1.0, 1.0, 0.2];
        Self::new(
            coefs.iter().map(|c| Complex64::new(*c, 0.0)).collect(),
            strings.iter().map(|s| s.parse().expect("valid literal")).collect(),
            Circuit::root(4).expect("4 qubits"),
        )
        .expect("benchmark instance is well formed")
        .with_label("vqls4")
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn terms(&self) -> &[(Complex64, PauliString)] {
        &self.terms
    }

    pub fn b_prep(&self) -> &Circuit {
        &self.b_prep
    }

    /// `Σ_j ⟨y|Z_j|y⟩` for an unnormalized vector.
    fn z_sum(&self, y: &[Complex64]) -> f64 {
        let mut total = 0.0;
        for j in 0..self.n {
            let mask = qubit_mask(self.n, j);
            total += y.iter().enumerate().map(|(k, a)| if k & mask == 0 { a.norm_sqr() } else { -a.norm_sqr() }).sum::<f64>();
        }
        total
    }

    fn finish(&self, numerator: f64, denominator: f64) -> Result<Measurement> {
        if denominator <= MIN_DENOMINATOR {
            return Err(Error::DegenerateInstance(format!("⟨x|A†A|x⟩ = {denominator:e} vanishes")));
        }
        Ok(Measurement::LocalCost { numerator, denominator })
    }
}

impl Problem for VqlsProblem {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn qubit_count(&self) -> usize {
        self.n
    }

    fn measure_state(&self, state: &StateVector) -> Result<Measurement> {
        if state.n_qubits() != self.n {
            return Err(Error::Problem(format!("state has {} qubits, system has {}", state.n_qubits(), self.n)));
        }
        let mut w = vec![Complex64::new(0.0, 0.0); state.dim()];
        for (c, p) in &self.terms {
            accumulate_pauli(&mut w, state.amplitudes(), p, *c);
        }
        let denominator: f64 = w.iter().map(Complex64::norm_sqr).sum();
        // y = U†w
        for g in self.b_prep.gates().iter().rev() {
            apply_gate_raw(&mut w, self.n, g, true);
        }
        let numerator = 0.5 * denominator + self.z_sum(&w) / (2.0 * self.n as f64);
        self.finish(numerator, denominator)
    }

    fn measure_density(&self, rho: &DensityMatrix) -> Result<Measurement> {
        if rho.n_qubits() != self.n {
            return Err(Error::Problem(format!("state has {} qubits, system has {}", rho.n_qubits(), self.n)));
        }
        let mut sigma = rho.sandwich(&self.terms);
        let denominator = sigma.trace().re;
        for g in self.b_prep.gates().iter().rev() {
            sigma.apply_gate(g, true)?;
        }
        let mut z_total = 0.0;
        for j in 0..self.n {
            z_total += sigma.pauli_expectation(&PauliString::single(self.n, j, Pauli::Z))?.re;
        }
        let numerator = 0.5 * denominator + z_total / (2.0 * self.n as f64);
        self.finish(numerator, denominator)
    }

    fn reward(&self, cost: f64) -> f64 {
        (-10.0 * cost).exp()
    }

    fn optimal_cost(&self) -> Option<f64> {
        Some(0.0)
    }
}
