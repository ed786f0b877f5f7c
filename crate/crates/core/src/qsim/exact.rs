use nalgebra::DMatrix;
use num_complex::Complex64;

use super::PauliSum;
use crate::error::{Error, Result};

pub const MAX_EXACT_QUBITS: usize = 12;

/// Smallest eigenvalue of the dense matrix of `h`, by full diagonalization.
pub fn exact_ground_energy(h: &PauliSum) -> Result<f64> {
    h.require_hermitian()?;
    let n = h.n_qubits();
    if n > MAX_EXACT_QUBITS {
        return Err(Error::Resource(format!(
            "exact diagonalization supports at most {MAX_EXACT_QUBITS} qubits, got {n}"
        )));
    }
    let dim = 1usize << n;
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for (c, p) in h.terms() {
        let yp = p.y_phase() * c.re;
        let x = p.x_mask();
        for k in 0..dim {
            m[(k ^ x, k)] += p.phase_on(k, yp);
        }
    }
    // an even number of Y letters in every term keeps the matrix real
    let real = h.terms().iter().all(|(_, p)| p.y_count() % 2 == 0);
    let min = if real {
        m.map(|z| z.re).symmetric_eigenvalues().min()
    } else {
        m.symmetric_eigenvalues().min()
    };
    Ok(min)
}
