use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// Dense 2×2 matrix, row-major.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }
}

/// Tensor product of single-qubit Paulis; letter `q` acts on qubit `q`.
///
/// Internally the string is also kept as bit masks over the basis index
/// (qubit 0 is the most significant bit): `x_mask` marks X/Y letters and
/// `z_mask` marks Z/Y letters, so `P|k⟩ = i^{#Y} (-1)^{|k ∧ z|} |k ⊕ x⟩`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PauliString {
    letters: Vec<Pauli>,
    x_mask: usize,
    z_mask: usize,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        let n = letters.len();
        let (mut x_mask, mut z_mask) = (0usize, 0usize);
        for (q, p) in letters.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            if matches!(p, Pauli::X | Pauli::Y) {
                x_mask |= bit;
            }
            if matches!(p, Pauli::Z | Pauli::Y) {
                z_mask |= bit;
            }
        }
        Self { letters, x_mask, z_mask }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(vec![Pauli::I; n])
    }

    /// `letter` on `qubit`, identity elsewhere.
    pub fn single(n: usize, qubit: usize, letter: Pauli) -> Self {
        let mut letters = vec![Pauli::I; n];
        letters[qubit] = letter;
        Self::new(letters)
    }

    /// Builds the string from X/Z bit masks (basis-index convention); Y where both are set.
    pub fn from_masks(n: usize, x_mask: usize, z_mask: usize) -> Self {
        let letters = (0..n)
            .map(|q| {
                let bit = 1usize << (n - 1 - q);
                match (x_mask & bit != 0, z_mask & bit != 0) {
                    (false, false) => Pauli::I,
                    (true, false) => Pauli::X,
                    (true, true) => Pauli::Y,
                    (false, true) => Pauli::Z,
                }
            })
            .collect();
        Self::new(letters)
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn x_mask(&self) -> usize {
        self.x_mask
    }

    pub fn z_mask(&self) -> usize {
        self.z_mask
    }

    pub fn y_count(&self) -> u32 {
        (self.x_mask & self.z_mask).count_ones()
    }

    /// `i^{#Y}`.
    pub(crate) fn y_phase(&self) -> Complex64 {
        match self.y_count() % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// Phase `φ` with `P|k⟩ = φ|k ⊕ x⟩`.
    #[inline]
    pub(crate) fn phase_on(&self, k: usize, y_phase: Complex64) -> Complex64 {
        if (k & self.z_mask).count_ones() % 2 == 1 {
            -y_phase
        } else {
            y_phase
        }
    }

    /// Dense `2^n × 2^n` matrix (row-major), built by Kronecker products.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let mut m = vec![Complex64::new(1.0, 0.0)];
        let mut dim = 1;
        for p in &self.letters {
            let small = p.matrix();
            let nd = dim * 2;
            let mut next = vec![Complex64::new(0.0, 0.0); nd * nd];
            for r in 0..dim {
                for c in 0..dim {
                    let v = m[r * dim + c];
                    for a in 0..2 {
                        for b in 0..2 {
                            next[(2 * r + a) * nd + 2 * c + b] = v * small[a][b];
                        }
                    }
                }
            }
            m = next;
            dim = nd;
        }
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.letters {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| Error::Observable(format!("invalid Pauli letter '{c}'"))))
            .collect::<Result<Vec<_>>>()?;
        if letters.is_empty() {
            return Err(Error::Observable("empty Pauli string".into()));
        }
        Ok(PauliString::new(letters))
    }
}

impl TryFrom<String> for PauliString {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PauliString> for String {
    fn from(p: PauliString) -> String {
        p.to_string()
    }
}

/// Complex linear combination of equal-length Pauli strings.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n: usize,
    terms: Vec<(Complex64, PauliString)>,
}

impl PauliSum {
    pub fn new(terms: Vec<(Complex64, PauliString)>) -> Result<Self> {
        let n = terms
            .first()
            .map(|(_, p)| p.len())
            .ok_or_else(|| Error::Observable("Pauli sum has no terms".into()))?;
        if let Some((_, p)) = terms.iter().find(|(_, p)| p.len() != n) {
            return Err(Error::Observable(format!(
                "Pauli string {p} has length {} but the sum acts on {n} qubits",
                p.len()
            )));
        }
        Ok(Self { n, terms })
    }

    /// Sum with real coefficients, written as `(coefficient, "XZI")` pairs.
    pub fn from_real(terms: &[(f64, &str)]) -> Result<Self> {
        let terms = terms
            .iter()
            .map(|(c, s)| Ok((Complex64::new(*c, 0.0), s.parse()?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(terms)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(Complex64, PauliString)] {
        &self.terms
    }

    /// Every Pauli string is Hermitian, so the sum is Hermitian when all
    /// coefficients are real.
    pub fn is_hermitian(&self) -> bool {
        self.terms.iter().all(|(c, _)| c.im.abs() <= 1e-12)
    }

    pub(crate) fn require_hermitian(&self) -> Result<()> {
        if self.is_hermitian() {
            Ok(())
        } else {
            Err(Error::Observable("observable has complex coefficients; not Hermitian".into()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn masks_follow_msb_convention() {
        let p: PauliString = "XIZY".parse().unwrap();
        assert_eq!(p.x_mask(), 0b1001);
        assert_eq!(p.z_mask(), 0b0011);
        assert_eq!(p.y_count(), 1);
        assert_eq!(PauliString::from_masks(4, 0b1001, 0b0011), p);
    }

    #[test]
    fn dense_matches_bitmask_action() {
        for s in ["XY", "ZX", "YY", "IZ", "XYZ"] {
            let p: PauliString = s.parse().unwrap();
            let dim = 1 << p.len();
            let m = p.to_dense();
            let yp = p.y_phase();
            for k in 0..dim {
                let phase = p.phase_on(k, yp);
                for r in 0..dim {
                    let expected = if r == k ^ p.x_mask() { phase } else { Complex64::new(0.0, 0.0) };
                    assert!((m[r * dim + k] - expected).norm() < 1e-15, "{s} column {k}");
                }
            }
        }
    }

    #[test]
    fn sums_require_equal_lengths() {
        assert!(PauliSum::from_real(&[(1.0, "ZZ"), (0.5, "XIX")]).is_err());
        assert!(PauliSum::from_real(&[]).is_err());
        assert!("XQ".parse::<PauliString>().is_err());
        let h = PauliSum::from_real(&[(1.0, "ZZ"), (0.5, "XI")]).unwrap();
        assert!(h.is_hermitian());
        let nh = PauliSum::new(vec![(Complex64::new(0.0, 1.0), "Z".parse().unwrap())]).unwrap();
        assert!(!nh.is_hermitian());
    }
}
