//! Mixed states and the two noise channels.
//!
//! Noise placement: after every gate, a single-qubit depolarizing channel
//! acts on each qubit the gate touched; after the last gate a bit-flip
//! channel acts on every qubit, modelling readout.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{adjoint, gate_matrix, qubit_mask, Matrix2, PauliString, PauliSum, StateVector};
use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};

/// Largest register simulated as a density matrix (`4^n` entries).
pub const MAX_DENSITY_QUBITS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    pub bit_flip_p: f64,
    pub depolarizing_p: f64,
}

impl NoiseModel {
    pub fn new(bit_flip_p: f64, depolarizing_p: f64) -> Result<Self> {
        let m = Self { bit_flip_p, depolarizing_p };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("bit_flip_p", self.bit_flip_p), ("depolarizing_p", self.depolarizing_p)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} = {p} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.bit_flip_p == 0.0 && self.depolarizing_p == 0.0
    }
}

/// `2^n × 2^n` density operator, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    dim: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn from_pure(state: &StateVector) -> Result<Self> {
        let n = state.n_qubits();
        check_size(n)?;
        let a = state.amplitudes();
        let dim = a.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(a[r] * a[c].conj());
            }
        }
        Ok(Self { n, dim, data })
    }

    /// Builds a density matrix from row-major entries; checks Hermiticity
    /// and unit trace within 1e-10.
    pub fn from_entries(n: usize, data: Vec<Complex64>) -> Result<Self> {
        check_size(n)?;
        let dim = 1usize << n;
        if data.len() != dim * dim {
            return Err(Error::Observable(format!("expected {} entries, got {}", dim * dim, data.len())));
        }
        let m = Self { n, dim, data };
        if !m.is_hermitian(1e-10) || (m.trace().re - 1.0).abs() > 1e-10 {
            return Err(Error::Observable("entries are not a unit-trace Hermitian matrix".into()));
        }
        Ok(m)
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_size(n)?;
        let dim = 1usize << n;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for k in 0..dim {
            data[k * dim + k] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        Ok(Self { n, dim, data })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|k| self.get(k, k)).sum()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..self.dim).all(|r| (r..self.dim).all(|c| (self.get(r, c) - self.get(c, r).conj()).norm() <= tol))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = nalgebra::DMatrix::from_row_slice(self.dim, self.dim, &self.data);
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// `ρ → UρU†` (or `U†ρU` when `adjoint_of` is set).
    pub fn apply_gate(&mut self, gate: &Gate, adjoint_of: bool) -> Result<()> {
        gate.validate(self.n)?;
        match gate_matrix(gate) {
            Some(m) => {
                let m = if adjoint_of { adjoint(&m) } else { m };
                self.conjugate_single(gate.target(), &m);
            }
            None => {
                let Gate::Cnot(c, t) = *gate else { unreachable!() };
                self.conjugate_cnot(c, t);
            }
        }
        Ok(())
    }

    fn conjugate_single(&mut self, qubit: usize, u: &Matrix2) {
        let mask = qubit_mask(self.n, qubit);
        let dim = self.dim;
        // left: rows
        for c in 0..dim {
            for r in (0..dim).filter(|r| r & mask == 0) {
                let (a, b) = (self.data[r * dim + c], self.data[(r | mask) * dim + c]);
                self.data[r * dim + c] = u[0][0] * a + u[0][1] * b;
                self.data[(r | mask) * dim + c] = u[1][0] * a + u[1][1] * b;
            }
        }
        // right: multiply by U† on columns
        for r in 0..dim {
            let row = &mut self.data[r * dim..(r + 1) * dim];
            for c in (0..dim).filter(|c| c & mask == 0) {
                let (a, b) = (row[c], row[c | mask]);
                row[c] = a * u[0][0].conj() + b * u[0][1].conj();
                row[c | mask] = a * u[1][0].conj() + b * u[1][1].conj();
            }
        }
    }

    fn conjugate_cnot(&mut self, control: usize, target: usize) {
        let cm = qubit_mask(self.n, control);
        let tm = qubit_mask(self.n, target);
        let dim = self.dim;
        let flip = |k: usize| if k & cm != 0 { k ^ tm } else { k };
        let old = self.data.clone();
        for r in 0..dim {
            for c in 0..dim {
                self.data[flip(r) * dim + flip(c)] = old[r * dim + c];
            }
        }
    }

    /// Visits each 2×2 block `[[a, b], [c, d]]` spanned by `qubit` in the
    /// row and column indices.
    fn map_blocks(&mut self, qubit: usize, f: impl Fn([Complex64; 4]) -> [Complex64; 4]) {
        let mask = qubit_mask(self.n, qubit);
        let dim = self.dim;
        for r in (0..dim).filter(|r| r & mask == 0) {
            for c in (0..dim).filter(|c| c & mask == 0) {
                let idx = [r * dim + c, r * dim + (c | mask), (r | mask) * dim + c, (r | mask) * dim + (c | mask)];
                let out = f(idx.map(|i| self.data[i]));
                for (i, v) in idx.into_iter().zip(out) {
                    self.data[i] = v;
                }
            }
        }
    }

    /// `ρ → (1-p)ρ + (p/3)(XρX + YρY + ZρZ)` on one qubit.
    pub fn depolarize(&mut self, qubit: usize, p: f64) {
        if p == 0.0 {
            return;
        }
        let keep = 1.0 - 2.0 * p / 3.0;
        let moved = 2.0 * p / 3.0;
        let coherence = 1.0 - 4.0 * p / 3.0;
        self.map_blocks(qubit, |[a, b, c, d]| {
            [a * keep + d * moved, b * coherence, c * coherence, d * keep + a * moved]
        });
    }

    /// `ρ → (1-p)ρ + p XρX` on one qubit.
    pub fn bit_flip(&mut self, qubit: usize, p: f64) {
        if p == 0.0 {
            return;
        }
        let q = 1.0 - p;
        self.map_blocks(qubit, |[a, b, c, d]| [a * q + d * p, b * q + c * p, c * q + b * p, d * q + a * p]);
    }

    /// `Tr(ρP)`.
    pub fn pauli_expectation(&self, p: &PauliString) -> Result<Complex64> {
        if p.len() != self.n {
            return Err(Error::Observable(format!(
                "Pauli string {p} has length {} but the state has {} qubits",
                p.len(),
                self.n
            )));
        }
        let yp = p.y_phase();
        let x = p.x_mask();
        Ok((0..self.dim).map(|k| p.phase_on(k, yp) * self.get(k, k ^ x)).sum())
    }

    /// `⟨φ|ρ|φ⟩`.
    pub fn overlap_with_pure(&self, phi: &StateVector) -> Result<f64> {
        if phi.n_qubits() != self.n {
            return Err(Error::Observable(format!(
                "qubit counts differ: {} vs {}",
                phi.n_qubits(),
                self.n
            )));
        }
        let a = phi.amplitudes();
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..self.dim {
            let row = &self.data[r * self.dim..(r + 1) * self.dim];
            let s: Complex64 = row.iter().zip(a).map(|(x, y)| x * y).sum();
            acc += a[r].conj() * s;
        }
        Ok(acc.re)
    }

    /// `σ = A ρ A†` for `A = Σ c_m P_m` (unnormalized result).
    pub(crate) fn sandwich(&self, terms: &[(Complex64, PauliString)]) -> DensityMatrix {
        let dim = self.dim;
        let zero = Complex64::new(0.0, 0.0);
        // left product: (Pρ)[r][c] = φ_{r⊕x} ρ[r⊕x][c]
        let mut left = vec![zero; dim * dim];
        for (coef, p) in terms {
            let yp = p.y_phase() * coef;
            let x = p.x_mask();
            for r in 0..dim {
                let src = r ^ x;
                let ph = p.phase_on(src, yp);
                for c in 0..dim {
                    left[r * dim + c] += ph * self.data[src * dim + c];
                }
            }
        }
        // right product with A† = Σ c̄_m P_m: (MP)[r][c] = M[r][c⊕x] φ_c
        let mut out = vec![zero; dim * dim];
        for (coef, p) in terms {
            let yp = p.y_phase() * coef.conj();
            let x = p.x_mask();
            for c in 0..dim {
                let ph = p.phase_on(c, yp);
                let src = c ^ x;
                for r in 0..dim {
                    out[r * dim + c] += left[r * dim + src] * ph;
                }
            }
        }
        DensityMatrix { n: self.n, dim, data: out }
    }
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DENSITY_QUBITS {
        return Err(Error::Resource(format!(
            "density-matrix simulation supports 1..={MAX_DENSITY_QUBITS} qubits, got {n}"
        )));
    }
    Ok(())
}

/// Noisy execution of `circuit` from `|0…0⟩⟨0…0|`.
pub fn apply_circuit_noisy(circuit: &Circuit, noise: &NoiseModel) -> Result<DensityMatrix> {
    noise.validate()?;
    let n = circuit.n_qubits();
    let mut rho = DensityMatrix::from_pure(&StateVector::zero(n)?)?;
    for g in circuit.gates() {
        rho.apply_gate(g, false)?;
        for q in g.qubits() {
            rho.depolarize(q, noise.depolarizing_p);
        }
    }
    for q in 0..n {
        rho.bit_flip(q, noise.bit_flip_p);
    }
    Ok(rho)
}

/// `Tr(ρH)` for a Hermitian Pauli sum.
pub fn dm_pauli_sum_expectation(rho: &DensityMatrix, h: &PauliSum) -> Result<f64> {
    h.require_hermitian()?;
    if h.n_qubits() != rho.n_qubits() {
        return Err(Error::Observable(format!(
            "observable acts on {} qubits but the state has {}",
            h.n_qubits(),
            rho.n_qubits()
        )));
    }
    let mut acc = 0.0;
    for (c, p) in h.terms() {
        let v = rho.pauli_expectation(p)?;
        debug_assert!(v.im.abs() < 1e-10);
        acc += c.re * v.re;
    }
    Ok(acc)
}
