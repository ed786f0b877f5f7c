//! Executes grid cells: search, fine-tune, and one [`RunRecord`] per run.

use std::path::{Path, PathBuf};
use std::time::Instant;

use qas_core::circuit::serialize;
use qas_core::finetune::finetune;
use qas_core::mcts::search_with;
use qas_core::problems::{is_epsilon_approx, Evaluator};
use qas_core::{Circuit, SearchConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Cell, ExperimentConfig};
use crate::error::{write, CliError, Result};
use crate::problem::{BuiltProblem, ProblemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitSummary {
    pub cnots: usize,
    pub parameters: usize,
    pub depth: usize,
    pub gates: usize,
}

impl CircuitSummary {
    pub fn of(c: &Circuit) -> Self {
        Self { cnots: c.cnot_count(), parameters: c.param_count(), depth: c.depth(), gates: c.len() }
    }
}

/// Circuit evaluations of one run, by phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub root: u64,
    pub expansion: u64,
    pub rollout: u64,
    /// Root, expansion and roll-out evaluations.
    pub search: u64,
    pub path_reevaluation: u64,
    pub finetune_gradient: u64,
    pub finetune_monitor: u64,
    pub total: u64,
    /// `I + 2·l·T` with `T` the Adam steps actually taken.
    pub idealized: u64,
    /// `I + 2·l·T` with `T` the step cap.
    pub idealized_at_cap: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleOutcome {
    /// Noiseless fidelity of the fine-tuned circuit with the target.
    pub fidelity: f64,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub cell: String,
    pub run: usize,
    pub seed: u64,
    pub problem: ProblemSpec,
    pub config: SearchConfig,
    pub best_path_costs: Vec<f64>,
    pub best_index: usize,
    pub commits: usize,
    pub cost_searched: f64,
    pub cost_finetuned: f64,
    pub exact_cost: Option<f64>,
    pub finetune_costs: Vec<f64>,
    pub finetune_steps: u32,
    pub circuit_searched: String,
    pub circuit_finetuned: String,
    pub metrics: CircuitSummary,
    pub evals: EvalRecord,
    pub oracle: Option<OracleOutcome>,
    pub tree_size: usize,
    pub root_children: usize,
    pub mean_branching: f64,
    pub failed_iterations: u64,
    pub warmed_at: Option<u64>,
    pub wall_seconds: f64,
}

impl RunRecord {
    /// File name inside `records/`.
    pub fn file_name(&self) -> String {
        format!("{}__run{:03}.json", self.cell, self.run)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("records serialize");
        s.push('\n');
        s
    }
}

/// Searches and fine-tunes `problem` under `cfg`.
pub fn execute(cell_id: &str, run: usize, spec: &ProblemSpec, cfg: &SearchConfig) -> Result<RunRecord> {
    cfg.validate()?;
    let start = Instant::now();
    let built = spec.build()?;
    let problem = built.as_problem();
    let search_ev = Evaluator::new(problem, cfg.noise)?;
    let result = search_with(&search_ev, cfg, Circuit::root(problem.qubit_count())?)?;
    let tune_ev = Evaluator::new(problem, cfg.noise)?;
    let trace = finetune(&result.best_circuit, &tune_ev, cfg.max_adam_steps, &cfg.adam)?;

    let l = result.best_circuit.param_count() as u64;
    let search = result.evals.root + result.evals.expansion + result.evals.rollout;
    let evals = EvalRecord {
        root: result.evals.root,
        expansion: result.evals.expansion,
        rollout: result.evals.rollout,
        search,
        path_reevaluation: result.evals.path_reevaluation,
        finetune_gradient: trace.gradient_evaluations,
        finetune_monitor: trace.monitor_evaluations,
        total: result.eval_count + trace.total_evaluations(),
        idealized: cfg.iterations + 2 * l * u64::from(trace.steps_used),
        idealized_at_cap: cfg.iterations + 2 * l * u64::from(cfg.max_adam_steps),
    };
    debug_assert_eq!(search_ev.evaluations(), result.eval_count);
    debug_assert_eq!(tune_ev.evaluations(), trace.total_evaluations());

    let oracle = match &built {
        BuiltProblem::Oracle(p) => {
            Some(OracleOutcome { fidelity: p.fidelity(&trace.circuit)?, success: is_epsilon_approx(&trace.circuit, p)? })
        }
        _ => None,
    };
    Ok(RunRecord {
        cell: cell_id.to_string(),
        run,
        seed: cfg.seed,
        problem: spec.clone(),
        config: cfg.clone(),
        best_path_costs: result.best_path.iter().map(|s| s.cost).collect(),
        best_index: result.best_index,
        commits: result.committed.len(),
        cost_searched: result.best_cost,
        cost_finetuned: trace.best_cost,
        exact_cost: problem.optimal_cost(),
        finetune_costs: trace.costs.clone(),
        finetune_steps: trace.steps_used,
        circuit_searched: serialize(&result.best_circuit),
        circuit_finetuned: serialize(&trace.circuit),
        metrics: CircuitSummary::of(&trace.circuit),
        evals,
        oracle,
        tree_size: result.tree_size,
        root_children: result.root_children,
        mean_branching: result.mean_branching,
        failed_iterations: result.failed_iterations,
        warmed_at: result.warmed_at,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Re-executes a record from its embedded problem and configuration.
pub fn rerun(record: &RunRecord) -> Result<RunRecord> {
    execute(&record.cell, record.run, &record.problem, &record.config)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub cell: String,
    pub run: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Default)]
pub struct GridOutcome {
    pub records: Vec<RunRecord>,
    pub failures: Vec<RunFailure>,
}

/// Runs every cell `cfg.runs` times with seeds `seed, seed + 1, …` on a
/// worker pool. Output order does not depend on scheduling.
pub fn run_grid(cfg: &ExperimentConfig, cells: &[Cell]) -> Result<GridOutcome> {
    let jobs: Vec<(&Cell, usize)> = cells.iter().flat_map(|c| (0..cfg.runs).map(move |r| (c, r))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let results: Vec<_> = pool.install(|| {
        jobs.par_iter()
            .map(|(cell, run)| {
                let sc = cfg.search_config(cell, *run);
                let id = cell.id();
                log::info!("{id} run {run} (seed {})", sc.seed);
                execute(&id, *run, &cell.problem, &sc).map_err(|e| RunFailure {
                    cell: id,
                    run: *run,
                    seed: sc.seed,
                    error: e.to_string(),
                })
            })
            .collect()
    });
    let mut out = GridOutcome::default();
    for r in results {
        match r {
            Ok(rec) => out.records.push(rec),
            Err(f) => {
                log::warn!("{} run {} failed: {}", f.cell, f.run, f.error);
                out.failures.push(f);
            }
        }
    }
    Ok(out)
}

pub fn records_dir(out: &Path) -> PathBuf {
    out.join("records")
}

/// Writes one JSON document per record, plus `failures.tsv` when any run failed.
pub fn write_outcome(out: &Path, outcome: &GridOutcome) -> Result<()> {
    let dir = records_dir(out);
    for rec in &outcome.records {
        write(&dir.join(rec.file_name()), rec.to_json())?;
    }
    if !outcome.failures.is_empty() {
        let path = out.join("failures.tsv");
        let mut w = csv::WriterBuilder::new().delimiter(b'\t').from_writer(Vec::new());
        for f in &outcome.failures {
            w.serialize(f).map_err(|e| CliError::format(&path, e))?;
        }
        write(&path, w.into_inner().map_err(|e| CliError::format(&path, e))?)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg(iterations: u64) -> SearchConfig {
        SearchConfig { iterations, max_adam_steps: 20, ..SearchConfig::default() }
    }

    #[test]
    fn record_accounting() {
        let spec = ProblemSpec::Tfim { qubits: 3, field: 0.5 };
        let cfg = small_cfg(200);
        let rec = execute("t", 0, &spec, &cfg).unwrap();
        let e = rec.evals;
        assert_eq!(e.search + e.path_reevaluation, 200 + 1 + rec.best_path_costs.len() as u64);
        assert_eq!(e.finetune_gradient, 2 * rec.metrics.parameters as u64 * u64::from(rec.finetune_steps));
        assert_eq!(e.finetune_monitor, u64::from(rec.finetune_steps) + 1);
        assert_eq!(e.total, e.search + e.path_reevaluation + e.finetune_gradient + e.finetune_monitor);
        assert_eq!(e.idealized, 200 + 2 * rec.metrics.parameters as u64 * u64::from(rec.finetune_steps));
        assert!(rec.cost_finetuned <= rec.cost_searched + 1e-12);
        assert!(rec.oracle.is_none());
        assert!(rec.exact_cost.is_some());
    }

    #[test]
    fn rerun_reproduces_record() {
        let spec = ProblemSpec::Vqls;
        let mut a = execute("v", 2, &spec, &small_cfg(100).with_seed(9)).unwrap();
        let json = a.to_json();
        let back: RunRecord = serde_json::from_str(&json).unwrap();
        let mut b = rerun(&back).unwrap();
        a.wall_seconds = 0.0;
        b.wall_seconds = 0.0;
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn grid_orders_and_isolates_failures() {
        let cfg = ExperimentConfig {
            problem: Some(crate::config::ProblemKind::Tfim),
            runs: 3,
            seed: 5,
            workers: 2,
            max_adam_steps: 5,
            iterations: crate::config::Axis::One(30),
            ..Default::default()
        };
        let good = cfg.cells(&[ProblemSpec::Tfim { qubits: 2, field: 1.0 }]);
        // a zero-qubit chain cannot be built
        let bad = Cell { problem: ProblemSpec::Tfim { qubits: 0, field: 1.0 }, ..good[0].clone() };
        let out = run_grid(&cfg, &[good[0].clone(), bad]).unwrap();
        assert_eq!(out.records.iter().map(|r| (r.run, r.seed)).collect::<Vec<_>>(), [(0, 5), (1, 6), (2, 7)]);
        assert_eq!(out.failures.len(), 3);
    }
}
