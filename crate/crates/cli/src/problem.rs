//! Problem instances as stored in result records, so every record can be
//! re-run without the files it was built from.

use std::path::Path;

use num_complex::Complex64;
use qas_core::circuit::{parse, serialize};
use qas_core::problems::{default_epsilon, parse_hamiltonian, Difficulty, OracleProblem, Problem, VqeProblem, VqlsProblem};
use qas_core::qsim::{PauliString, PauliSum};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, ProblemKind};
use crate::dataset::read_manifest;
use crate::error::{read_to_string, CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianTerm {
    pub coefficient: f64,
    pub pauli: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProblemSpec {
    Vqe {
        label: String,
        terms: Vec<HamiltonianTerm>,
    },
    Tfim {
        qubits: usize,
        field: f64,
    },
    Vqls,
    Oracle {
        label: String,
        n: usize,
        g: Option<usize>,
        difficulty: Option<Difficulty>,
        m2: Option<f64>,
        epsilon: f64,
        /// Target circuit in the line-oriented circuit text format.
        target: String,
    },
}

/// A constructed problem, keeping the concrete type where callers need it.
pub enum BuiltProblem {
    Vqe(VqeProblem),
    Vqls(VqlsProblem),
    Oracle(OracleProblem),
}

impl BuiltProblem {
    pub fn as_problem(&self) -> &dyn Problem {
        match self {
            BuiltProblem::Vqe(p) => p,
            BuiltProblem::Vqls(p) => p,
            BuiltProblem::Oracle(p) => p,
        }
    }
}

impl ProblemSpec {
    pub fn label(&self) -> String {
        match self {
            ProblemSpec::Vqe { label, .. } | ProblemSpec::Oracle { label, .. } => label.clone(),
            ProblemSpec::Tfim { qubits, field } => format!("tfim{qubits}_h{field}"),
            ProblemSpec::Vqls => "vqls4".into(),
        }
    }

    pub fn kind(&self) -> ProblemKind {
        match self {
            ProblemSpec::Vqe { .. } => ProblemKind::Vqe,
            ProblemSpec::Tfim { .. } => ProblemKind::Tfim,
            ProblemSpec::Vqls => ProblemKind::Vqls,
            ProblemSpec::Oracle { .. } => ProblemKind::Oracle,
        }
    }

    pub fn build(&self) -> Result<BuiltProblem> {
        Ok(match self {
            ProblemSpec::Vqe { label, terms } => {
                let terms = terms
                    .iter()
                    .map(|t| Ok((Complex64::new(t.coefficient, 0.0), t.pauli.parse::<PauliString>()?)))
                    .collect::<qas_core::Result<Vec<_>>>()?;
                BuiltProblem::Vqe(VqeProblem::new(PauliSum::new(terms)?)?.with_label(label.clone()))
            }
            ProblemSpec::Tfim { qubits, field } => {
                BuiltProblem::Vqe(VqeProblem::transverse_field_ising(*qubits, *field)?.with_label(self.label()))
            }
            ProblemSpec::Vqls => BuiltProblem::Vqls(VqlsProblem::four_qubit_benchmark()),
            ProblemSpec::Oracle { label, epsilon, target, .. } => {
                BuiltProblem::Oracle(OracleProblem::from_circuit(&parse(target)?, *epsilon)?.with_label(label.clone()))
            }
        })
    }

    /// Hamiltonian file contents as an embedded problem.
    pub fn vqe_from_file(path: &Path) -> Result<Self> {
        let h = parse_hamiltonian(&read_to_string(path)?).map_err(|e| CliError::format(path, e))?;
        let terms = h
            .terms()
            .iter()
            .map(|(c, s)| HamiltonianTerm { coefficient: c.re, pauli: s.to_string() })
            .collect();
        Ok(ProblemSpec::Vqe { label: file_stem(path), terms })
    }
}

fn file_stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "problem".into())
}

fn epsilon_for(cfg: &ExperimentConfig, n: usize) -> Result<f64> {
    cfg.epsilon
        .or_else(|| default_epsilon(n))
        .ok_or_else(|| CliError::Usage(format!("no default epsilon for {n} qubits; set `epsilon`")))
}

/// Every problem instance the configuration selects.
pub fn resolve_problems(cfg: &ExperimentConfig) -> Result<Vec<ProblemSpec>> {
    let kind = cfg.problem.ok_or_else(|| CliError::Usage("no problem selected".into()))?;
    match kind {
        ProblemKind::Vqe => {
            let path = cfg.hamiltonian.as_ref().ok_or_else(|| CliError::Usage("problem vqe needs `hamiltonian`".into()))?;
            Ok(vec![ProblemSpec::vqe_from_file(path)?])
        }
        ProblemKind::Tfim => Ok(vec![ProblemSpec::Tfim { qubits: cfg.qubits, field: cfg.field }]),
        ProblemKind::Vqls => Ok(vec![ProblemSpec::Vqls]),
        ProblemKind::Oracle => match (&cfg.target, &cfg.dataset) {
            (Some(path), None) => {
                let c = parse(&read_to_string(path)?).map_err(|e| CliError::format(path, e))?;
                Ok(vec![ProblemSpec::Oracle {
                    label: file_stem(path),
                    n: c.n_qubits(),
                    g: None,
                    difficulty: None,
                    m2: None,
                    epsilon: epsilon_for(cfg, c.n_qubits())?,
                    target: serialize(&c),
                }])
            }
            (None, Some(dir)) => {
                let rows = read_manifest(dir)?;
                let mut out = Vec::new();
                for row in &rows {
                    if !cfg.targets.is_empty() && !cfg.targets.contains(&row.stem()) {
                        continue;
                    }
                    let path = dir.join(&row.file);
                    let c = parse(&read_to_string(&path)?).map_err(|e| CliError::format(&path, e))?;
                    out.push(ProblemSpec::Oracle {
                        label: row.stem(),
                        n: row.n,
                        g: Some(row.g),
                        difficulty: Some(row.label),
                        m2: Some(row.m2),
                        epsilon: epsilon_for(cfg, row.n)?,
                        target: serialize(&c),
                    });
                }
                if let Some(missing) = cfg.targets.iter().find(|t| !rows.iter().any(|r| &r.stem() == *t)) {
                    return Err(CliError::Usage(format!("target '{missing}' is not in the dataset manifest")));
                }
                Ok(out)
            }
            _ => Err(CliError::Usage("problem oracle needs exactly one of `dataset` or `target`".into())),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        // rerunning from a stored record needs coefficients back bit for bit
        #[test]
        fn coefficients_survive_json(c in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let spec = ProblemSpec::Vqe {
                label: "p".into(),
                terms: vec![HamiltonianTerm { coefficient: c, pauli: "XZ".into() }],
            };
            let back: ProblemSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
            let ProblemSpec::Vqe { terms, .. } = back else { panic!("expected vqe") };
            prop_assert_eq!(terms[0].coefficient.to_bits(), c.to_bits());
        }
    }

    #[test]
    fn embedded_hamiltonian_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("zz.ham");
        std::fs::write(&path, "0.5 ZZ\n-1.0 XI\n").unwrap();
        let spec = ProblemSpec::vqe_from_file(&path).unwrap();
        assert_eq!(spec.label(), "zz");
        let json = serde_json::to_string(&spec).unwrap();
        let back: ProblemSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        let BuiltProblem::Vqe(p) = back.build().unwrap() else { panic!("expected vqe") };
        assert_eq!(p.hamiltonian().terms().len(), 2);
    }

    #[test]
    fn oracle_needs_a_source() {
        let cfg = ExperimentConfig { problem: Some(ProblemKind::Oracle), ..Default::default() };
        assert!(matches!(resolve_problems(&cfg), Err(CliError::Usage(_))));
    }

    #[test]
    fn missing_hamiltonian_file_is_runtime_error() {
        let cfg = ExperimentConfig {
            problem: Some(ProblemKind::Vqe),
            hamiltonian: Some("/nonexistent/h.ham".into()),
            ..Default::default()
        };
        let err = resolve_problems(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
