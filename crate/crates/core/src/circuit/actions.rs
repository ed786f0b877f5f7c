//! The four circuit edits (Add, Swap, Delete, Change) and their sampling.

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{wrap_angle, Circuit, Gate, GateKind};
use crate::config::SearchConfig;
use crate::error::{Error, Result};

/// Attempts made to draw a feasible action kind before giving up.
pub const MAX_RESAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActionKind {
    Add,
    Swap,
    Delete,
    Change,
}

impl ActionKind {
    pub const ALL: [ActionKind; 4] = [ActionKind::Add, ActionKind::Swap, ActionKind::Delete, ActionKind::Change];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EditAction {
    /// Append a gate at the end of the circuit.
    Add(Gate),
    /// Replace the gate at `position`.
    Swap { position: usize, gate: Gate },
    Delete { position: usize },
    /// Shift the angle of the rotation at `position` by `delta` radians.
    Change { position: usize, delta: f64 },
}

impl EditAction {
    pub fn kind(&self) -> ActionKind {
        match self {
            EditAction::Add(_) => ActionKind::Add,
            EditAction::Swap { .. } => ActionKind::Swap,
            EditAction::Delete { .. } => ActionKind::Delete,
            EditAction::Change { .. } => ActionKind::Change,
        }
    }
}

/// Probability mass over the four action kinds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionDistribution {
    pub add: f64,
    pub swap: f64,
    pub delete: f64,
    pub change: f64,
}

impl ActionDistribution {
    /// Build-up distribution used until the tree holds a circuit with `2n` gates.
    pub const ADD_ONLY: ActionDistribution = ActionDistribution { add: 1.0, swap: 0.0, delete: 0.0, change: 0.0 };

    pub fn new(add: f64, swap: f64, delete: f64, change: f64) -> Result<Self> {
        let d = Self { add, swap, delete, change };
        for p in d.as_array() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("action probability {p} outside [0, 1]")));
            }
        }
        if (d.sum() - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("action probabilities sum to {}, not 1", d.sum())));
        }
        Ok(d)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.add, self.swap, self.delete, self.change]
    }

    pub fn sum(&self) -> f64 {
        self.as_array().iter().sum()
    }

    pub fn probability(&self, kind: ActionKind) -> f64 {
        match kind {
            ActionKind::Add => self.add,
            ActionKind::Swap => self.swap,
            ActionKind::Delete => self.delete,
            ActionKind::Change => self.change,
        }
    }

    /// Same distribution with Add removed and the rest rescaled.
    /// `None` when nothing but Add carries mass.
    pub fn without_add(&self) -> Option<Self> {
        let rest = self.swap + self.delete + self.change;
        (rest > 0.0).then(|| Self {
            add: 0.0,
            swap: self.swap / rest,
            delete: self.delete / rest,
            change: self.change / rest,
        })
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> ActionKind {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for kind in ActionKind::ALL {
            acc += self.probability(kind);
            if u < acc {
                return kind;
            }
        }
        // rounding left u above the cumulative total
        *ActionKind::ALL
            .iter()
            .rev()
            .find(|k| self.probability(**k) > 0.0)
            .unwrap_or(&ActionKind::Add)
    }
}

/// Distribution in force for `c`: build-up mode until the tree has warmed,
/// then `base`; Add is switched off once the hardware cutoff is reached.
pub fn effective_distribution(
    c: &Circuit,
    base: &ActionDistribution,
    cfg: &SearchConfig,
    tree_has_warmed: bool,
) -> ActionDistribution {
    let start = if tree_has_warmed { *base } else { ActionDistribution::ADD_ONLY };
    let depth_hit = c.depth() >= cfg.max_depth;
    let cnot_hit = cfg.max_cnots.is_some_and(|m| c.cnot_count() >= m);
    if !(depth_hit || cnot_hit) {
        return start;
    }
    start
        .without_add()
        .or_else(|| base.without_add())
        .unwrap_or(ActionDistribution { add: 0.0, swap: 1.0 / 3.0, delete: 1.0 / 3.0, change: 1.0 / 3.0 })
}

fn random_gate<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Gate {
    // CNOT needs two distinct qubits
    let pool: &[GateKind] = if n >= 2 { &GateKind::SEARCH_POOL } else { &GateKind::SEARCH_POOL[1..] };
    let kind = pool[rng.random_range(0..pool.len())];
    random_gate_of_kind(kind, n, rng)
}

/// Uniform qubit(s) for `kind`; rotations get an angle uniform in `[0, 2π)`;
/// CNOT draws an ordered distinct pair.
pub(crate) fn random_gate_of_kind<R: Rng + ?Sized>(kind: GateKind, n: usize, rng: &mut R) -> Gate {
    match kind {
        GateKind::Cnot => {
            let control = rng.random_range(0..n);
            let mut target = rng.random_range(0..n - 1);
            if target >= control {
                target += 1;
            }
            Gate::Cnot(control, target)
        }
        GateKind::Rx => Gate::Rx(rng.random_range(0..n), rng.random_range(0.0..TAU)),
        GateKind::Ry => Gate::Ry(rng.random_range(0..n), rng.random_range(0.0..TAU)),
        GateKind::Rz => Gate::Rz(rng.random_range(0..n), rng.random_range(0.0..TAU)),
        GateKind::H => Gate::H(rng.random_range(0..n)),
        GateKind::S => Gate::S(rng.random_range(0..n)),
        GateKind::T => Gate::T(rng.random_range(0..n)),
    }
}

fn feasible(kind: ActionKind, c: &Circuit) -> bool {
    match kind {
        ActionKind::Add => true,
        ActionKind::Swap | ActionKind::Delete => !c.is_empty(),
        ActionKind::Change => c.gates().iter().any(Gate::is_parameterized),
    }
}

/// Draws one edit for `c`. Kinds that cannot act on `c` are rejected and
/// redrawn, at most [`MAX_RESAMPLES`] times.
pub fn sample_action<R: Rng + ?Sized>(
    c: &Circuit,
    dist: &ActionDistribution,
    rng: &mut R,
    angle_deviation: f64,
) -> Result<EditAction> {
    let mut kind = None;
    for _ in 0..MAX_RESAMPLES {
        let k = dist.draw(rng);
        if feasible(k, c) {
            kind = Some(k);
            break;
        }
    }
    let Some(kind) = kind else {
        return Err(Error::Sampling(format!(
            "no feasible action after {MAX_RESAMPLES} draws from {dist:?} on a {}-gate circuit",
            c.len()
        )));
    };
    let n = c.n_qubits();
    Ok(match kind {
        ActionKind::Add => EditAction::Add(random_gate(n, rng)),
        ActionKind::Swap => {
            let position = rng.random_range(0..c.len());
            EditAction::Swap { position, gate: random_gate(n, rng) }
        }
        ActionKind::Delete => EditAction::Delete { position: rng.random_range(0..c.len()) },
        ActionKind::Change => {
            let positions = c.parameter_positions();
            let position = positions[rng.random_range(0..positions.len())];
            let normal = Normal::new(0.0, angle_deviation)
                .map_err(|e| Error::Sampling(format!("angle deviation {angle_deviation}: {e}")))?;
            EditAction::Change { position, delta: normal.sample(rng) }
        }
    })
}

/// Returns the edited copy of `c`; `c` itself is untouched.
pub fn apply_action(c: &Circuit, a: &EditAction) -> Result<Circuit> {
    let stale = |pos: usize| {
        Error::ActionApplication(format!("position {pos} out of range for a {}-gate circuit", c.len()))
    };
    let mut gates = c.gates().to_vec();
    match *a {
        EditAction::Add(gate) => {
            gate.validate(c.n_qubits())?;
            gates.push(gate);
        }
        EditAction::Swap { position, gate } => {
            gate.validate(c.n_qubits())?;
            *gates.get_mut(position).ok_or_else(|| stale(position))? = gate;
        }
        EditAction::Delete { position } => {
            if position >= gates.len() {
                return Err(stale(position));
            }
            gates.remove(position);
        }
        EditAction::Change { position, delta } => {
            let g = gates.get_mut(position).ok_or_else(|| stale(position))?;
            let angle = g.angle().ok_or_else(|| {
                Error::ActionApplication(format!("gate '{g}' at position {position} has no parameter"))
            })?;
            *g = g.with_angle(wrap_angle(angle + delta)).expect("parameterized");
        }
    }
    Ok(Circuit::from_parts_unchecked(c.n_qubits(), gates))
}
