//! Random Clifford+T target circuits, ranked by magic.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::magic::m2_entropy;
use crate::circuit::{random_gate_of_kind, Circuit, GateKind};
use crate::error::{Error, Result};
use crate::qsim::apply_circuit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Hard,
}

impl Difficulty {
    pub fn as_str(self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Hard => "hard",
        }
    }
}

impl std::fmt::Display for Difficulty {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Difficulty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "easy" => Ok(Difficulty::Easy),
            "hard" => Ok(Difficulty::Hard),
            other => Err(Error::Config(format!("unknown difficulty '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub n: usize,
    pub g: usize,
    pub label: Difficulty,
    pub circuit: Circuit,
    pub m2: f64,
    /// Position of the circuit within its generation batch.
    pub index: usize,
}

impl DatasetEntry {
    /// File stem used when the entry is written to disk, e.g. `n4_g5_easy`.
    pub fn stem(&self) -> String {
        format!("n{}_g{}_{}", self.n, self.g, self.label)
    }
}

/// Grid of `(n, g)` cells and the batch size sampled in each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetAxes {
    pub qubits: Vec<usize>,
    pub gate_counts: Vec<usize>,
    pub per_cell: usize,
}

impl Default for DatasetAxes {
    fn default() -> Self {
        Self { qubits: vec![4, 6, 8], gate_counts: vec![5, 10, 15, 20, 30], per_cell: 10 }
    }
}

/// `g` gates, each kind uniform over `{H, S, CNOT, T}`, qubits uniform.
pub fn gen_random_clifford_t<R: Rng + ?Sized>(n: usize, g: usize, rng: &mut R) -> Result<Circuit> {
    if n < 2 || g == 0 {
        return Err(Error::Config(format!("Clifford+T sampling needs n >= 2 and g >= 1, got n = {n}, g = {g}")));
    }
    let gates = (0..g)
        .map(|_| {
            let kind = GateKind::CLIFFORD_T[rng.random_range(0..GateKind::CLIFFORD_T.len())];
            random_gate_of_kind(kind, n, rng)
        })
        .collect();
    Circuit::new(n, gates)
}

/// Default grid: 15 cells, 10 samples each, two entries kept per cell.
pub fn build_dataset<R: Rng + ?Sized>(rng: &mut R) -> Result<Vec<DatasetEntry>> {
    build_dataset_with(&DatasetAxes::default(), rng)
}

/// For every cell, keeps the lowest-M₂ sample as `easy` and the highest as
/// `hard`; on equal M₂ the earlier sample wins.
pub fn build_dataset_with<R: Rng + ?Sized>(axes: &DatasetAxes, rng: &mut R) -> Result<Vec<DatasetEntry>> {
    if axes.per_cell == 0 {
        return Err(Error::Config("per_cell must be positive".into()));
    }
    let mut out = Vec::with_capacity(axes.qubits.len() * axes.gate_counts.len() * 2);
    for &n in &axes.qubits {
        for &g in &axes.gate_counts {
            let mut batch = Vec::with_capacity(axes.per_cell);
            for index in 0..axes.per_cell {
                let circuit = gen_random_clifford_t(n, g, rng)?;
                let m2 = m2_entropy(&apply_circuit(&circuit))?;
                batch.push((index, circuit, m2));
            }
            let mut easy = 0;
            let mut hard = 0;
            for (i, (_, _, m2)) in batch.iter().enumerate() {
                if *m2 < batch[easy].2 {
                    easy = i;
                }
                if *m2 > batch[hard].2 {
                    hard = i;
                }
            }
            for (label, pick) in [(Difficulty::Easy, easy), (Difficulty::Hard, hard)] {
                let (index, circuit, m2) = batch[pick].clone();
                out.push(DatasetEntry { n, g, label, circuit, m2, index });
            }
        }
    }
    Ok(out)
}
