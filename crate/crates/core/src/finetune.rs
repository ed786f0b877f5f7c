//! Angle refinement of a fixed gate sequence: parameter-shift gradients fed
//! to Adam.
//!
//! Rotations are `exp(-iθσ/2)`, so the two-point shift by `±π/2` is exact for
//! any expectation value. A [`Measurement::LocalCost`] is a ratio of two
//! expectations; each part is differentiated with the shift rule and the
//! parts are combined with the quotient rule.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::problems::{Evaluator, Measurement};

/// Consecutive steps with `|Δcost| < PLATEAU_TOLERANCE` that end the run.
pub const PLATEAU_STEPS: usize = 10;
pub const PLATEAU_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { learning_rate: 0.01, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning_rate {} must be positive", self.learning_rate)));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::Config(format!("{name} = {b} outside [0, 1)")));
            }
        }
        if self.eps.is_nan() || self.eps <= 0.0 {
            return Err(Error::Config(format!("eps {} must be positive", self.eps)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub t: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub config: AdamConfig,
}

impl AdamState {
    pub fn new(len: usize, config: AdamConfig) -> Self {
        Self { t: 0, m: vec![0.0; len], v: vec![0.0; len], config }
    }
}

/// One bias-corrected Adam update. Returns the new parameters and state.
pub fn adam_step(theta: &[f64], grad: &[f64], state: &AdamState) -> Result<(Vec<f64>, AdamState)> {
    if theta.len() != grad.len() || theta.len() != state.m.len() || state.m.len() != state.v.len() {
        return Err(Error::Optimizer(format!(
            "length mismatch: θ {}, gradient {}, moments {}/{}",
            theta.len(),
            grad.len(),
            state.m.len(),
            state.v.len()
        )));
    }
    let AdamConfig { learning_rate, beta1, beta2, eps } = state.config;
    let mut next = state.clone();
    next.t += 1;
    let t = next.t as i32;
    let (c1, c2) = (1.0 - beta1.powi(t), 1.0 - beta2.powi(t));
    let mut out = theta.to_vec();
    for i in 0..theta.len() {
        next.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grad[i];
        next.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grad[i] * grad[i];
        let m_hat = next.m[i] / c1;
        let v_hat = next.v[i] / c2;
        out[i] -= learning_rate * m_hat / (v_hat.sqrt() + eps);
    }
    Ok((out, next))
}

/// Shifted copy of `c` with parameter `i` moved by `delta`.
fn shifted(c: &Circuit, theta: &[f64], i: usize, delta: f64) -> Result<Circuit> {
    let mut t = theta.to_vec();
    t[i] += delta;
    c.with_parameters(&t)
}

/// Gradient at `c` given the measurement already taken there. Returns the
/// gradient and the number of evaluations spent on shifted circuits.
fn gradient_with_center(c: &Circuit, ev: &Evaluator<'_>, center: &Measurement) -> Result<(Vec<f64>, u64)> {
    let theta = c.parameters();
    let mut grad = Vec::with_capacity(theta.len());
    let mut spent = 0;
    for i in 0..theta.len() {
        let plus = ev.probe(&shifted(c, &theta, i, FRAC_PI_2)?)?;
        let minus = ev.probe(&shifted(c, &theta, i, -FRAC_PI_2)?)?;
        spent += plus.expectation_count() + minus.expectation_count();
        grad.push(match (center, plus, minus) {
            (Measurement::Expectation(_), Measurement::Expectation(p), Measurement::Expectation(m)) => (p - m) / 2.0,
            (
                Measurement::LocalCost { numerator, denominator },
                Measurement::LocalCost { numerator: np, denominator: dp },
                Measurement::LocalCost { numerator: nm, denominator: dm },
            ) => {
                let dnum = (np - nm) / 2.0;
                let dden = (dp - dm) / 2.0;
                -(dnum * denominator - numerator * dden) / (denominator * denominator)
            }
            _ => return Err(Error::Optimizer("measurement kind changed between shifted circuits".into())),
        });
    }
    Ok((grad, spent))
}

/// Parameter-shift gradient of the evaluator's cost at `c`, one component
/// per rotation angle in circuit order.
///
/// Ratio-type costs need the unshifted numerator and denominator as well,
/// which costs one extra evaluation.
pub fn parameter_shift_gradient(c: &Circuit, ev: &Evaluator<'_>) -> Result<Vec<f64>> {
    if c.param_count() == 0 {
        return Ok(Vec::new());
    }
    let center = ev.measure(c)?;
    Ok(gradient_with_center(c, ev, &center)?.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FineTuneTrace {
    /// Cost before each step, plus the cost after the last one.
    pub costs: Vec<f64>,
    /// Best circuit seen, angles wrapped to `[0, 2π)`.
    pub circuit: Circuit,
    pub best_cost: f64,
    pub steps_used: u32,
    /// Evaluations spent on shifted circuits.
    pub gradient_evaluations: u64,
    /// Evaluations spent tracking the cost at each visited point.
    pub monitor_evaluations: u64,
}

impl FineTuneTrace {
    pub fn initial_cost(&self) -> f64 {
        self.costs[0]
    }

    pub fn total_evaluations(&self) -> u64 {
        self.gradient_evaluations + self.monitor_evaluations
    }
}

/// Runs up to `max_steps` Adam steps on the angles of `c`.
///
/// Stops early after [`PLATEAU_STEPS`] consecutive steps whose cost change is
/// below [`PLATEAU_TOLERANCE`]. The gate sequence never changes; the returned
/// circuit is the lowest-cost point visited.
pub fn finetune(c: &Circuit, ev: &Evaluator<'_>, max_steps: u32, adam: &AdamConfig) -> Result<FineTuneTrace> {
    adam.validate()?;
    let mut theta = c.parameters();
    let mut state = AdamState::new(theta.len(), *adam);
    let mut costs: Vec<f64> = Vec::new();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut steps_used = 0u32;
    let mut gradient_evaluations = 0;
    let mut monitor_evaluations = 0;
    let mut flat = 0usize;
    loop {
        let current = c.with_parameters(&theta)?;
        let m = ev.measure(&current)?;
        monitor_evaluations += 1;
        let cost = m.cost();
        if let Some(&prev) = costs.last() {
            flat = if (cost - prev).abs() < PLATEAU_TOLERANCE { flat + 1 } else { 0 };
        }
        costs.push(cost);
        if best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, theta.clone()));
        }
        if steps_used >= max_steps || theta.is_empty() || flat >= PLATEAU_STEPS {
            break;
        }
        let (grad, spent) = gradient_with_center(&current, ev, &m)?;
        gradient_evaluations += spent;
        (theta, state) = adam_step(&theta, &grad, &state)?;
        steps_used += 1;
    }
    let (best_cost, best_theta) = best.expect("at least one cost recorded");
    let circuit = if steps_used == 0 { c.clone() } else { c.with_parameters(&best_theta)?.wrapped() };
    Ok(FineTuneTrace { costs, circuit, best_cost, steps_used, gradient_evaluations, monitor_evaluations })
}
