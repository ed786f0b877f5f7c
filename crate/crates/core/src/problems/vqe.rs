use std::sync::OnceLock;

use num_complex::Complex64;

use super::{Measurement, Problem};
use crate::error::{Error, Result};
use crate::qsim::{
    dm_pauli_sum_expectation, exact_ground_energy, pauli_sum_expectation, DensityMatrix, PauliString, PauliSum,
    StateVector, MAX_EXACT_QUBITS,
};

/// Ground-state energy: cost `⟨ψ|H|ψ⟩`, reward `-cost`.
#[derive(Debug)]
pub struct VqeProblem {
    hamiltonian: PauliSum,
    label: String,
    ground: OnceLock<Option<f64>>,
}

impl VqeProblem {
    pub fn new(hamiltonian: PauliSum) -> Result<Self> {
        if !hamiltonian.is_hermitian() {
            return Err(Error::Problem("VQE Hamiltonian must be Hermitian".into()));
        }
        Ok(Self { hamiltonian, label: "vqe".into(), ground: OnceLock::new() })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn hamiltonian(&self) -> &PauliSum {
        &self.hamiltonian
    }

    /// Open-chain transverse-field Ising model `Σ Z_i Z_{i+1} + h Σ X_i`.
    pub fn transverse_field_ising(n: usize, field: f64) -> Result<Self> {
        let mut terms = Vec::new();
        for i in 0..n.saturating_sub(1) {
            let mut letters = vec![crate::qsim::Pauli::I; n];
            letters[i] = crate::qsim::Pauli::Z;
            letters[i + 1] = crate::qsim::Pauli::Z;
            terms.push((Complex64::new(1.0, 0.0), PauliString::new(letters)));
        }
        for i in 0..n {
            terms.push((Complex64::new(field, 0.0), PauliString::single(n, i, crate::qsim::Pauli::X)));
        }
        Ok(Self::new(PauliSum::new(terms)?)?.with_label(format!("tfim{n}")))
    }
}

impl Problem for VqeProblem {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn qubit_count(&self) -> usize {
        self.hamiltonian.n_qubits()
    }

    fn measure_state(&self, state: &StateVector) -> Result<Measurement> {
        Ok(Measurement::Expectation(pauli_sum_expectation(state, &self.hamiltonian)?))
    }

    fn measure_density(&self, rho: &DensityMatrix) -> Result<Measurement> {
        Ok(Measurement::Expectation(dm_pauli_sum_expectation(rho, &self.hamiltonian)?))
    }

    fn reward(&self, cost: f64) -> f64 {
        -cost
    }

    fn optimal_cost(&self) -> Option<f64> {
        *self.ground.get_or_init(|| {
            (self.hamiltonian.n_qubits() <= MAX_EXACT_QUBITS)
                .then(|| exact_ground_energy(&self.hamiltonian).ok())
                .flatten()
        })
    }
}

/// Reads a Hamiltonian file: one `<real coefficient> <Pauli letters>` term
/// per line. Blank lines and `#` comments are skipped.
pub fn parse_hamiltonian(text: &str) -> Result<PauliSum> {
    let mut terms: Vec<(Complex64, PauliString)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut fields = content.split_whitespace();
        let Some(coef) = fields.next() else { continue };
        let col = |s: &str| s.as_ptr() as usize - raw.as_ptr() as usize + 1;
        let value: f64 = coef
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| Error::parse(line, col(coef), format!("expected real coefficient, found '{coef}'")))?;
        let letters = fields
            .next()
            .ok_or_else(|| Error::parse(line, content.trim_end().len() + 1, "missing Pauli string"))?;
        if let Some(extra) = fields.next() {
            return Err(Error::parse(line, col(extra), format!("unexpected token '{extra}'")));
        }
        let string: PauliString = letters.parse().map_err(|e: Error| Error::parse(line, col(letters), e.to_string()))?;
        if let Some((_, first)) = terms.first() {
            if first.len() != string.len() {
                return Err(Error::parse(
                    line,
                    col(letters),
                    format!("Pauli string length {} differs from earlier terms ({})", string.len(), first.len()),
                ));
            }
        }
        terms.push((Complex64::new(value, 0.0), string));
    }
    if terms.is_empty() {
        return Err(Error::parse(1, 1, "Hamiltonian file has no terms"));
    }
    PauliSum::new(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Circuit, Gate};

    #[test]
    fn parse_examples() {
        let h = parse_hamiltonian("1.0 ZZ").unwrap();
        assert_eq!(h.terms().len(), 1);
        assert!((exact_ground_energy(&h).unwrap() + 1.0).abs() < 1e-12);

        let h = parse_hamiltonian("0.5 Z\n0.5 X\n").unwrap();
        assert_eq!((h.terms().len(), h.n_qubits()), (2, 1));

        match parse_hamiltonian("1.0 ZZ\n0.5 XIX") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 5)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_hamiltonian("abc ZZ"), Err(Error::Parse { line: 1, column: 1, .. })));
        assert!(matches!(parse_hamiltonian("# c\n1.0"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_hamiltonian("1.0 ZQ"), Err(Error::Parse { line: 1, column: 5, .. })));
        assert!(matches!(parse_hamiltonian("1.0 ZZ extra"), Err(Error::Parse { line: 1, column: 8, .. })));
        assert!(parse_hamiltonian("\n# only comments\n").is_err());
        let h = parse_hamiltonian("# header\n -0.2427 ZIII  # comment\n\n0.1 IIIZ\n").unwrap();
        assert_eq!(h.n_qubits(), 4);
    }

    #[test]
    fn cost_and_reward() {
        let p = VqeProblem::new(PauliSum::from_real(&[(1.0, "ZZ")]).unwrap()).unwrap();
        let c = Circuit::new(2, vec![Gate::Rx(0, std::f64::consts::PI)]).unwrap();
        let cost = p.cost(&c).unwrap();
        assert!((cost + 1.0).abs() < 1e-12);
        assert!((p.reward(cost) - 1.0).abs() < 1e-12);
        assert!((p.optimal_cost().unwrap() + 1.0).abs() < 1e-12);
        assert!(p.cost(&Circuit::root(3).unwrap()).is_err());
    }

    #[test]
    fn ising_chain_structure() {
        let p = VqeProblem::transverse_field_ising(4, 0.5).unwrap();
        let names: Vec<String> = p.hamiltonian().terms().iter().map(|(_, s)| s.to_string()).collect();
        assert_eq!(names, ["ZZII", "IZZI", "IIZZ", "XIII", "IXII", "IIXI", "IIIX"]);
    }
}
