//! Circuit data model: gates, circuits, structural metrics and the text format.
//!
//! A [`Circuit`] is the state of the search: an ordered gate list on `n`
//! qubits. The variational parameter vector is the ordered list of rotation
//! angles, so a circuit with `L` gates has `l <= L` parameters.

mod actions;
mod text;

pub use actions::{
    apply_action, effective_distribution, sample_action, ActionDistribution, ActionKind,
    EditAction, MAX_RESAMPLES,
};
pub(crate) use actions::random_gate_of_kind;
pub use text::{parse, serialize};

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register the crate will build a circuit for.
pub const MAX_QUBITS: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    Cnot,
    Rx,
    Ry,
    Rz,
    H,
    S,
    T,
}

impl GateKind {
    /// The search gate pool: CNOT plus the three parameterized rotations.
    pub const SEARCH_POOL: [GateKind; 4] = [GateKind::Cnot, GateKind::Rx, GateKind::Ry, GateKind::Rz];

    /// Clifford generators plus T, used to build target circuits.
    pub const CLIFFORD_T: [GateKind; 4] = [GateKind::H, GateKind::S, GateKind::Cnot, GateKind::T];

    pub fn is_parameterized(self) -> bool {
        matches!(self, GateKind::Rx | GateKind::Ry | GateKind::Rz)
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            GateKind::Cnot => "cx",
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::H => "h",
            GateKind::S => "s",
            GateKind::T => "t",
        }
    }
}

/// A single gate. Rotations carry their angle in radians; `Cnot` is
/// `(control, target)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    H(usize),
    S(usize),
    T(usize),
    Cnot(usize, usize),
    Rx(usize, f64),
    Ry(usize, f64),
    Rz(usize, f64),
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::H(_) => GateKind::H,
            Gate::S(_) => GateKind::S,
            Gate::T(_) => GateKind::T,
            Gate::Cnot(..) => GateKind::Cnot,
            Gate::Rx(..) => GateKind::Rx,
            Gate::Ry(..) => GateKind::Ry,
            Gate::Rz(..) => GateKind::Rz,
        }
    }

    /// Target qubit (for CNOT, the target rather than the control).
    pub fn target(&self) -> usize {
        match *self {
            Gate::H(q) | Gate::S(q) | Gate::T(q) => q,
            Gate::Cnot(_, t) => t,
            Gate::Rx(q, _) | Gate::Ry(q, _) | Gate::Rz(q, _) => q,
        }
    }

    pub fn control(&self) -> Option<usize> {
        match *self {
            Gate::Cnot(c, _) => Some(c),
            _ => None,
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Rx(_, a) | Gate::Ry(_, a) | Gate::Rz(_, a) => Some(a),
            _ => None,
        }
    }

    pub fn is_parameterized(&self) -> bool {
        self.kind().is_parameterized()
    }

    /// Same gate with a new angle; `None` for gates without a parameter.
    pub fn with_angle(&self, angle: f64) -> Option<Gate> {
        match *self {
            Gate::Rx(q, _) => Some(Gate::Rx(q, angle)),
            Gate::Ry(q, _) => Some(Gate::Ry(q, angle)),
            Gate::Rz(q, _) => Some(Gate::Rz(q, angle)),
            _ => None,
        }
    }

    /// Qubits touched by the gate, control first for CNOT.
    pub fn qubits(&self) -> impl Iterator<Item = usize> {
        let (a, b) = match *self {
            Gate::Cnot(c, t) => (c, Some(t)),
            g => (g.target(), None),
        };
        std::iter::once(a).chain(b)
    }

    /// Checks the gate against an `n`-qubit register.
    pub fn validate(&self, n: usize) -> Result<()> {
        for q in self.qubits() {
            if q >= n {
                return Err(Error::InvalidCircuit(format!(
                    "qubit index {q} out of range for {n} qubits in {self}"
                )));
            }
        }
        if let Gate::Cnot(c, t) = *self {
            if c == t {
                return Err(Error::InvalidCircuit(format!(
                    "CNOT control and target are both {c}"
                )));
            }
        }
        if let Some(a) = self.angle() {
            if !a.is_finite() {
                return Err(Error::InvalidCircuit(format!("non-finite angle in {self}")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::Cnot(c, t) => write!(f, "cx {c} {t}"),
            Gate::Rx(q, a) | Gate::Ry(q, a) | Gate::Rz(q, a) => {
                write!(f, "{} {q} {a:.16e}", self.kind().mnemonic())
            }
            g => write!(f, "{} {}", g.kind().mnemonic(), g.target()),
        }
    }
}

/// Maps an angle into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    // rem_euclid rounds tiny negative inputs up to exactly TAU
    if w >= TAU {
        0.0
    } else {
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitMetrics {
    pub cnot_count: usize,
    pub param_count: usize,
    pub gate_count: usize,
}

/// An ordered gate sequence on `n` qubits, validated on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize, gates: Vec<Gate>) -> Result<Self> {
        check_qubit_count(n)?;
        for g in &gates {
            g.validate(n)?;
        }
        Ok(Self { n, gates })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, Vec::new())
    }

    /// The default search root: a Hadamard on every qubit, in qubit order.
    pub fn root(n: usize) -> Result<Self> {
        Self::new(n, (0..n).map(Gate::H).collect())
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Layered depth: longest chain of gates that share qubits.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.n];
        let mut depth = 0;
        for g in &self.gates {
            let next = g.qubits().map(|q| level[q]).max().unwrap_or(0) + 1;
            for q in g.qubits() {
                level[q] = next;
            }
            depth = depth.max(next);
        }
        depth
    }

    pub fn metrics(&self) -> CircuitMetrics {
        CircuitMetrics {
            cnot_count: self.cnot_count(),
            param_count: self.param_count(),
            gate_count: self.gates.len(),
        }
    }

    pub fn cnot_count(&self) -> usize {
        self.gates.iter().filter(|g| g.kind() == GateKind::Cnot).count()
    }

    pub fn param_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_parameterized()).count()
    }

    /// Gate positions holding a rotation angle, in circuit order.
    pub fn parameter_positions(&self) -> Vec<usize> {
        self.gates
            .iter()
            .enumerate()
            .filter(|(_, g)| g.is_parameterized())
            .map(|(i, _)| i)
            .collect()
    }

    /// The parameter vector θ.
    pub fn parameters(&self) -> Vec<f64> {
        self.gates.iter().filter_map(Gate::angle).collect()
    }

    /// Copy of the circuit with the parameter vector replaced. Angles are
    /// taken as given (no wrapping).
    pub fn with_parameters(&self, theta: &[f64]) -> Result<Circuit> {
        if theta.len() != self.param_count() {
            return Err(Error::InvalidCircuit(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                theta.len()
            )));
        }
        let mut values = theta.iter();
        let gates = self
            .gates
            .iter()
            .map(|g| match g.angle() {
                Some(_) => g.with_angle(*values.next().expect("length checked")).expect("parameterized"),
                None => *g,
            })
            .collect();
        Circuit::new(self.n, gates)
    }

    /// Same circuit with every angle mapped into `[0, 2π)`.
    pub fn wrapped(&self) -> Circuit {
        let gates = self
            .gates
            .iter()
            .map(|g| match g.angle() {
                Some(a) => g.with_angle(wrap_angle(a)).expect("parameterized"),
                None => *g,
            })
            .collect();
        Circuit { n: self.n, gates }
    }

    pub(crate) fn from_parts_unchecked(n: usize, gates: Vec<Gate>) -> Circuit {
        Circuit { n, gates }
    }
}

pub(crate) fn check_qubit_count(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::Config(format!(
            "qubit count {n} outside supported range 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}
