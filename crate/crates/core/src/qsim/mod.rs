//! Dense simulation of small registers.
//!
//! Basis index convention: qubit 0 is the most significant bit, so on two
//! qubits `|10⟩` is index 2. Rotations follow `R_a(θ) = exp(-iθa/2)`.

mod density;
mod exact;
mod pauli;

pub use density::{apply_circuit_noisy, dm_pauli_sum_expectation, DensityMatrix, NoiseModel, MAX_DENSITY_QUBITS};
pub use exact::{exact_ground_energy, MAX_EXACT_QUBITS};
pub use pauli::{Pauli, PauliString, PauliSum};

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::circuit::{check_qubit_count, Circuit, Gate};
use crate::error::{Error, Result};

pub(crate) type Matrix2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Single-qubit unitary of `gate`; `None` for CNOT.
pub(crate) fn gate_matrix(gate: &Gate) -> Option<Matrix2> {
    let rot = |theta: f64| ((theta / 2.0).cos(), (theta / 2.0).sin());
    Some(match *gate {
        Gate::H(_) => {
            let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
            [[h, h], [h, -h]]
        }
        Gate::S(_) => [[ONE, ZERO], [ZERO, Complex64::new(0.0, 1.0)]],
        Gate::T(_) => [[ONE, ZERO], [ZERO, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)]],
        Gate::Rx(_, theta) => {
            let (c, s) = rot(theta);
            [[Complex64::new(c, 0.0), Complex64::new(0.0, -s)], [Complex64::new(0.0, -s), Complex64::new(c, 0.0)]]
        }
        Gate::Ry(_, theta) => {
            let (c, s) = rot(theta);
            [[Complex64::new(c, 0.0), Complex64::new(-s, 0.0)], [Complex64::new(s, 0.0), Complex64::new(c, 0.0)]]
        }
        Gate::Rz(_, theta) => {
            let (c, s) = rot(theta);
            [[Complex64::new(c, -s), ZERO], [ZERO, Complex64::new(c, s)]]
        }
        Gate::Cnot(..) => return None,
    })
}

pub(crate) fn adjoint(m: &Matrix2) -> Matrix2 {
    [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]]
}

#[inline]
pub(crate) fn qubit_mask(n: usize, q: usize) -> usize {
    1usize << (n - 1 - q)
}

/// Applies a 2×2 matrix to `qubit` of a raw amplitude vector.
pub(crate) fn apply_matrix(amps: &mut [Complex64], n: usize, qubit: usize, m: &Matrix2) {
    let mask = qubit_mask(n, qubit);
    let dim = amps.len();
    let mut base = 0;
    while base < dim {
        for i in base..base + mask {
            let j = i | mask;
            let (a, b) = (amps[i], amps[j]);
            amps[i] = m[0][0] * a + m[0][1] * b;
            amps[j] = m[1][0] * a + m[1][1] * b;
        }
        base += 2 * mask;
    }
}

pub(crate) fn apply_cnot(amps: &mut [Complex64], n: usize, control: usize, target: usize) {
    let cm = qubit_mask(n, control);
    let tm = qubit_mask(n, target);
    for i in 0..amps.len() {
        if i & cm != 0 && i & tm == 0 {
            amps.swap(i, i | tm);
        }
    }
}

/// Applies `gate` (or its adjoint) to a raw amplitude vector of `n` qubits.
pub(crate) fn apply_gate_raw(amps: &mut [Complex64], n: usize, gate: &Gate, adjoint_of: bool) {
    match gate_matrix(gate) {
        Some(m) => {
            let m = if adjoint_of { adjoint(&m) } else { m };
            apply_matrix(amps, n, gate.target(), &m)
        }
        None => {
            let Gate::Cnot(c, t) = *gate else { unreachable!() };
            apply_cnot(amps, n, c, t)
        }
    }
}

/// Writes `coeff · P|ψ⟩` into `out` (accumulating).
pub(crate) fn accumulate_pauli(out: &mut [Complex64], amps: &[Complex64], p: &PauliString, coeff: Complex64) {
    let yp = p.y_phase() * coeff;
    let x = p.x_mask();
    for (k, a) in amps.iter().enumerate() {
        out[k ^ x] += p.phase_on(k, yp) * a;
    }
}

/// `⟨ψ|P|ψ⟩` on raw amplitudes (possibly unnormalized), complex.
pub(crate) fn raw_pauli_expectation(amps: &[Complex64], p: &PauliString) -> Complex64 {
    let yp = p.y_phase();
    let x = p.x_mask();
    let mut acc = ZERO;
    for (k, a) in amps.iter().enumerate() {
        acc += amps[k ^ x].conj() * p.phase_on(k, yp) * a;
    }
    acc
}

pub(crate) fn raw_inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Pure state of `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(n: usize) -> Result<Self> {
        check_qubit_count(n)?;
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = ONE;
        Ok(Self { n, amps })
    }

    /// Wraps an amplitude vector of length `2^n` with unit norm (within 1e-10).
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Observable(format!("amplitude vector length {len} is not 2^n with n >= 1")));
        }
        let n = len.trailing_zeros() as usize;
        check_qubit_count(n)?;
        let norm: f64 = amps.iter().map(Complex64::norm_sqr).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Observable(format!("state has squared norm {norm}, expected 1")));
        }
        Ok(Self { n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::Observable(format!("qubit counts differ: {} vs {}", self.n, other.n)));
        }
        Ok(raw_inner(&self.amps, &other.amps))
    }

    pub fn apply_gate_in_place(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n)?;
        apply_gate_raw(&mut self.amps, self.n, gate, false);
        Ok(())
    }

    /// Applies `gate†`.
    pub fn apply_gate_adjoint_in_place(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n)?;
        apply_gate_raw(&mut self.amps, self.n, gate, true);
        Ok(())
    }

    /// Multiplies every amplitude by `e^{iφ}`.
    pub fn with_global_phase(&self, phi: f64) -> StateVector {
        let z = Complex64::from_polar(1.0, phi);
        StateVector { n: self.n, amps: self.amps.iter().map(|a| a * z).collect() }
    }
}

/// New state `U|ψ⟩` for a single gate `U`.
pub fn apply_gate(state: &StateVector, gate: &Gate) -> Result<StateVector> {
    let mut next = state.clone();
    next.apply_gate_in_place(gate)?;
    Ok(next)
}

/// `V|0…0⟩` for the circuit `V`.
pub fn apply_circuit(circuit: &Circuit) -> StateVector {
    let n = circuit.n_qubits();
    let mut state = StateVector::zero(n).expect("circuit qubit count already validated");
    for g in circuit.gates() {
        apply_gate_raw(&mut state.amps, n, g, false);
    }
    state
}

/// `⟨ψ|P|ψ⟩`, real for normalized `ψ`.
pub fn pauli_expectation(state: &StateVector, p: &PauliString) -> Result<f64> {
    if p.len() != state.n {
        return Err(Error::Observable(format!(
            "Pauli string {p} has length {} but the state has {} qubits",
            p.len(),
            state.n
        )));
    }
    let v = raw_pauli_expectation(&state.amps, p);
    debug_assert!(v.im.abs() < 1e-10, "imaginary residue {} in <{p}>", v.im);
    Ok(v.re)
}

/// `⟨ψ|H|ψ⟩` for a Hermitian Pauli sum.
pub fn pauli_sum_expectation(state: &StateVector, h: &PauliSum) -> Result<f64> {
    h.require_hermitian()?;
    if h.n_qubits() != state.n {
        return Err(Error::Observable(format!(
            "observable acts on {} qubits but the state has {}",
            h.n_qubits(),
            state.n
        )));
    }
    Ok(h.terms().iter().map(|(c, p)| c.re * raw_pauli_expectation(&state.amps, p).re).sum())
}

/// Pure-state fidelity `|⟨a|b⟩|²`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    fn basis(n: usize, k: usize) -> StateVector {
        let mut amps = vec![ZERO; 1 << n];
        amps[k] = ONE;
        StateVector::from_amplitudes(amps).unwrap()
    }

    #[test]
    fn zero_state_examples() {
        assert_eq!(StateVector::zero(1).unwrap().amplitudes(), &[ONE, ZERO]);
        assert_eq!(StateVector::zero(2).unwrap().amplitudes(), &[ONE, ZERO, ZERO, ZERO]);
        let s = StateVector::zero(4).unwrap();
        assert_eq!(s.dim(), 16);
        assert_eq!(s.amplitudes()[0], ONE);
        assert!(StateVector::zero(0).is_err());
        assert!(StateVector::zero(15).is_err());
    }

    #[test]
    fn gate_examples() {
        // |10⟩ is index 2 with qubit 0 as the high bit
        let s = apply_gate(&basis(2, 2), &Gate::Cnot(0, 1)).unwrap();
        assert!(close(s.amplitudes()[3], ONE));

        let s = apply_gate(&StateVector::zero(1).unwrap(), &Gate::Rx(0, PI)).unwrap();
        assert!(close(s.amplitudes()[0], ZERO));
        assert!(close(s.amplitudes()[1], Complex64::new(0.0, -1.0)));

        let s = apply_gate(&StateVector::zero(1).unwrap(), &Gate::H(0)).unwrap();
        assert!(close(s.amplitudes()[0], Complex64::new(FRAC_1_SQRT_2, 0.0)));
        assert!(close(s.amplitudes()[1], Complex64::new(FRAC_1_SQRT_2, 0.0)));

        assert!(apply_gate(&StateVector::zero(2).unwrap(), &Gate::H(2)).is_err());
        assert!(apply_gate(&StateVector::zero(2).unwrap(), &Gate::Cnot(1, 1)).is_err());
    }

    #[test]
    fn circuit_examples() {
        let s = apply_circuit(&Circuit::empty(2).unwrap());
        assert_eq!(s, StateVector::zero(2).unwrap());

        let bell = apply_circuit(&Circuit::new(2, vec![Gate::H(0), Gate::Cnot(0, 1)]).unwrap());
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        assert!(close(bell.amplitudes()[0], h) && close(bell.amplitudes()[3], h));
        assert!(close(bell.amplitudes()[1], ZERO) && close(bell.amplitudes()[2], ZERO));

        let s = apply_circuit(&Circuit::new(1, vec![Gate::Rz(0, 0.7)]).unwrap());
        assert!((s.amplitudes()[0].norm_sqr() - 1.0).abs() < 1e-12);

        let s = apply_circuit(&Circuit::root(2).unwrap());
        for a in s.amplitudes() {
            assert!(close(*a, Complex64::new(0.5, 0.0)));
        }
    }

    #[test]
    fn expectation_examples() {
        let zero = StateVector::zero(1).unwrap();
        let plus = apply_gate(&zero, &Gate::H(0)).unwrap();
        let z: PauliString = "Z".parse().unwrap();
        let x: PauliString = "X".parse().unwrap();
        assert!((pauli_expectation(&zero, &z).unwrap() - 1.0).abs() < 1e-12);
        assert!((pauli_expectation(&plus, &x).unwrap() - 1.0).abs() < 1e-12);
        assert!(pauli_expectation(&zero, &x).unwrap().abs() < 1e-12);
        assert!(pauli_expectation(&zero, &"ZZ".parse().unwrap()).is_err());

        let zz = PauliSum::from_real(&[(1.0, "ZZ")]).unwrap();
        assert!((pauli_sum_expectation(&StateVector::zero(2).unwrap(), &zz).unwrap() - 1.0).abs() < 1e-12);
        let mix = PauliSum::from_real(&[(0.5, "Z"), (0.5, "X")]).unwrap();
        assert!((pauli_sum_expectation(&zero, &mix).unwrap() - 0.5).abs() < 1e-12);

        let bell = apply_circuit(&Circuit::new(2, vec![Gate::H(0), Gate::Cnot(0, 1)]).unwrap());
        let xx = PauliSum::from_real(&[(1.0, "XX")]).unwrap();
        assert!((pauli_sum_expectation(&bell, &xx).unwrap() - 1.0).abs() < 1e-12);
        let yy = PauliSum::from_real(&[(1.0, "YY")]).unwrap();
        assert!((pauli_sum_expectation(&bell, &yy).unwrap() + 1.0).abs() < 1e-12);

        let complex = PauliSum::new(vec![(Complex64::new(1.0, 0.5), z.clone())]).unwrap();
        assert!(matches!(pauli_sum_expectation(&zero, &complex), Err(Error::Observable(_))));
    }

    #[test]
    fn fidelity_examples() {
        let zero = StateVector::zero(1).unwrap();
        let one = basis(1, 1);
        let plus = apply_gate(&zero, &Gate::H(0)).unwrap();
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&zero, &one).unwrap().abs() < 1e-12);
        assert!((fidelity(&zero, &plus).unwrap() - 0.5).abs() < 1e-12);
        assert!(fidelity(&zero, &StateVector::zero(2).unwrap()).is_err());
    }

    #[test]
    fn adjoint_undoes_gate() {
        let gates = [Gate::T(1), Gate::S(0), Gate::Rx(1, 0.3), Gate::Ry(0, 2.0), Gate::Rz(1, 5.0), Gate::H(0)];
        let start = apply_circuit(&Circuit::new(2, vec![Gate::H(0), Gate::Ry(1, 0.4), Gate::Cnot(0, 1)]).unwrap());
        for g in gates {
            let mut s = start.clone();
            s.apply_gate_in_place(&g).unwrap();
            s.apply_gate_adjoint_in_place(&g).unwrap();
            for (a, b) in s.amplitudes().iter().zip(start.amplitudes()) {
                assert!((a - b).norm() < 1e-12, "{g}");
            }
        }
    }

    fn random_state(n: usize, seed: u64) -> StateVector {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut c = Circuit::root(n).unwrap();
        for _ in 0..15 {
            let q = rng.random_range(0..n);
            let g = match rng.random_range(0..4) {
                0 => Gate::Rx(q, rng.random_range(0.0..6.3)),
                1 => Gate::Ry(q, rng.random_range(0.0..6.3)),
                2 => Gate::Rz(q, rng.random_range(0.0..6.3)),
                _ if n > 1 => Gate::Cnot(q, (q + 1) % n),
                _ => Gate::T(q),
            };
            c.push(g).unwrap();
        }
        apply_circuit(&c)
    }

    proptest! {
        #[test]
        fn gates_preserve_norm_and_invert(seed in any::<u64>(), n in 1usize..5, q in 0usize..4, theta in -7.0f64..7.0) {
            let q = q % n;
            let s = random_state(n, seed);
            let mut gates = vec![
                (Gate::Rx(q, theta), Gate::Rx(q, -theta)),
                (Gate::Ry(q, theta), Gate::Ry(q, -theta)),
                (Gate::Rz(q, theta), Gate::Rz(q, -theta)),
                (Gate::H(q), Gate::H(q)),
            ];
            if n > 1 {
                gates.push((Gate::Cnot(q, (q + 1) % n), Gate::Cnot(q, (q + 1) % n)));
            }
            for (g, inv) in gates {
                let a = apply_gate(&s, &g).unwrap();
                prop_assert!((a.norm_sqr() - 1.0).abs() < 1e-10);
                let b = apply_gate(&a, &inv).unwrap();
                for (x, y) in b.amplitudes().iter().zip(s.amplitudes()) {
                    prop_assert!((x - y).norm() < 1e-10);
                }
            }
        }

        #[test]
        fn fidelity_symmetric_and_bounded(s1 in any::<u64>(), s2 in any::<u64>(), n in 1usize..5) {
            let a = random_state(n, s1);
            let b = random_state(n, s2);
            let f = fidelity(&a, &b).unwrap();
            prop_assert_eq!(f.to_bits(), fidelity(&b, &a).unwrap().to_bits());
            prop_assert!((0.0..=1.0 + 1e-12).contains(&f));
        }
    }
}
