use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qsim::StateVector;

/// Largest register for which all `4^n` Pauli expectations are enumerated.
pub const MAX_MAGIC_QUBITS: usize = 8;

/// Stabilizer 2-Rényi entropy `M₂ = -log₂(Σ_P ⟨ψ|P|ψ⟩⁴ / 2^n)`.
///
/// For a fixed X-mask `x`, the expectations of all `2^n` strings sharing it
/// are (up to a phase) the Walsh–Hadamard transform of
/// `f_x[k] = conj(ψ[k⊕x]) ψ[k]`, so the whole sum costs `O(4^n n)`.
pub fn m2_entropy(state: &StateVector) -> Result<f64> {
    let n = state.n_qubits();
    if n > MAX_MAGIC_QUBITS {
        return Err(Error::Resource(format!("M2 enumeration supports at most {MAX_MAGIC_QUBITS} qubits, got {n}")));
    }
    let psi = state.amplitudes();
    let dim = psi.len();
    let mut f = vec![Complex64::new(0.0, 0.0); dim];
    let mut total = 0.0;
    for x in 0..dim {
        for (k, v) in f.iter_mut().enumerate() {
            *v = psi[k ^ x].conj() * psi[k];
        }
        walsh_hadamard(&mut f);
        total += f.iter().map(|v| v.norm_sqr() * v.norm_sqr()).sum::<f64>();
    }
    Ok(-(total / dim as f64).log2())
}

/// In-place unnormalized Walsh–Hadamard transform.
fn walsh_hadamard(v: &mut [Complex64]) {
    let mut h = 1;
    while h < v.len() {
        for block in v.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (s, d) = (*a + *b, *a - *b);
                *a = s;
                *b = d;
            }
        }
        h *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Circuit, Gate};
    use crate::qsim::{apply_circuit, PauliString};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Builds every Pauli matrix densely and sums fourth powers of the
    /// expectations.
    fn brute_force_m2(state: &StateVector) -> f64 {
        let n = state.n_qubits();
        let dim = 1usize << n;
        let psi = state.amplitudes();
        let mut total = 0.0;
        for x in 0..dim {
            for z in 0..dim {
                let m = PauliString::from_masks(n, x, z).to_dense();
                let mut e = Complex64::new(0.0, 0.0);
                for r in 0..dim {
                    for c in 0..dim {
                        e += psi[r].conj() * m[r * dim + c] * psi[c];
                    }
                }
                assert!(e.im.abs() < 1e-12);
                total += e.re.powi(4);
            }
        }
        -(total / dim as f64).log2()
    }

    fn random_state(rng: &mut ChaCha8Rng, n: usize) -> StateVector {
        let raw: Vec<Complex64> =
            (0..1usize << n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let norm = raw.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        StateVector::from_amplitudes(raw.into_iter().map(|a| a / norm).collect()).unwrap()
    }

    #[test]
    fn agrees_with_dense_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in 1..=3 {
            for _ in 0..10 {
                let s = random_state(&mut rng, n);
                assert!((m2_entropy(&s).unwrap() - brute_force_m2(&s)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn stabilizer_examples_vanish() {
        for n in 1..=4 {
            assert!(m2_entropy(&StateVector::zero(n).unwrap()).unwrap().abs() < 1e-9);
        }
        let bell = apply_circuit(&Circuit::new(2, vec![Gate::H(0), Gate::Cnot(0, 1)]).unwrap());
        assert!(m2_entropy(&bell).unwrap().abs() < 1e-9);
    }

    #[test]
    fn t_on_plus_state() {
        // expectations of I, X, Y, Z are 1, √2/2, √2/2, 0
        let s = apply_circuit(&Circuit::new(1, vec![Gate::H(0), Gate::T(0)]).unwrap());
        let expected = -(0.75f64).log2();
        assert!((m2_entropy(&s).unwrap() - expected).abs() < 1e-12);
        assert!((brute_force_m2(&s) - 0.415037).abs() < 1e-6);
    }

    #[test]
    fn oversized_register() {
        assert!(matches!(m2_entropy(&StateVector::zero(9).unwrap()), Err(Error::Resource(_))));
    }

    fn clifford_t_gate(n: usize) -> impl Strategy<Value = Gate> {
        (0..4usize, 0..n, 1..n.max(2)).prop_map(move |(kind, q, off)| match kind {
            0 => Gate::H(q),
            1 => Gate::S(q),
            2 => Gate::T(q),
            _ if n > 1 => Gate::Cnot(q, (q + off) % n),
            _ => Gate::H(q),
        })
    }

    fn circuit_and_clifford() -> impl Strategy<Value = (Circuit, Vec<Gate>)> {
        (1..=4usize).prop_flat_map(|n| {
            let clifford = clifford_t_gate(n).prop_filter("Clifford only", |g| !matches!(g, Gate::T(_)));
            (proptest::collection::vec(clifford_t_gate(n), 0..12), proptest::collection::vec(clifford, 1..6))
                .prop_map(move |(g, c)| (Circuit::new(n, g).unwrap(), c))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn clifford_gates_leave_m2_unchanged((circuit, tail) in circuit_and_clifford()) {
            let before = m2_entropy(&apply_circuit(&circuit)).unwrap();
            let mut extended = circuit.clone();
            for g in tail {
                extended.push(g).unwrap();
            }
            let after = m2_entropy(&apply_circuit(&extended)).unwrap();
            prop_assert!((before - after).abs() < 1e-9);
            prop_assert!(before >= -1e-9);
        }
    }
}
