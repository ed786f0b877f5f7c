//! Tab-separated tables built from a directory of run records.

use std::cmp::Ordering;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::branching_label;
use crate::error::{read_to_string, write, CliError, Result};
use crate::problem::ProblemSpec;
use crate::runner::{records_dir, RunRecord};

pub const SUMMARY: &str = "summary.tsv";
pub const BEST_PATH: &str = "best_path.tsv";
pub const FINETUNE: &str = "finetune.tsv";
pub const SUCCESS_MATRIX: &str = "success_matrix.tsv";
pub const BRANCHING: &str = "branching.tsv";

/// Reads every `*.json` record under `dir/records`, or under `dir` itself
/// when it has no `records` subdirectory.
pub fn load_records(dir: &Path) -> Result<Vec<RunRecord>> {
    let sub = records_dir(dir);
    let dir = if sub.is_dir() { sub } else { dir.to_path_buf() };
    let entries = std::fs::read_dir(&dir).map_err(|e| CliError::io(&dir, e))?;
    let mut paths: Vec<PathBuf> = Vec::new();
    for entry in entries {
        let p = entry.map_err(|e| CliError::io(&dir, e))?.path();
        if p.extension().is_some_and(|x| x == "json") {
            paths.push(p);
        }
    }
    let mut records = Vec::with_capacity(paths.len());
    for p in paths {
        let rec: RunRecord = serde_json::from_str(&read_to_string(&p)?).map_err(|e| CliError::format(&p, e))?;
        records.push(rec);
    }
    if records.is_empty() {
        return Err(CliError::format(&dir, "no run records found"));
    }
    sort_records(&mut records);
    Ok(records)
}

fn noise_levels(r: &RunRecord) -> (f64, f64) {
    r.config.noise.map(|n| (n.bit_flip_p, n.depolarizing_p)).unwrap_or((0.0, 0.0))
}

/// Problem, then iterations, branching (widening last), noise levels and run.
pub fn sort_records(records: &mut [RunRecord]) {
    records.sort_by(|a, b| {
        let (abf, adp) = noise_levels(a);
        let (bbf, bdp) = noise_levels(b);
        a.problem
            .label()
            .cmp(&b.problem.label())
            .then(a.config.iterations.cmp(&b.config.iterations))
            .then(a.config.fixed_branching.unwrap_or(usize::MAX).cmp(&b.config.fixed_branching.unwrap_or(usize::MAX)))
            .then(abf.total_cmp(&bbf))
            .then(adp.total_cmp(&bdp))
            .then(a.cell.cmp(&b.cell))
            .then(a.run.cmp(&b.run))
    });
}

/// Consecutive runs of records sharing `key`.
fn groups<K: PartialEq>(records: &[RunRecord], key: impl Fn(&RunRecord) -> K) -> Vec<&[RunRecord]> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=records.len() {
        if i == records.len() || key(&records[i]) != key(&records[start]) {
            out.push(&records[start..i]);
            start = i;
        }
    }
    out
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn argmin(records: &[RunRecord]) -> &RunRecord {
    records
        .iter()
        .min_by(|a, b| a.cost_finetuned.partial_cmp(&b.cost_finetuned).unwrap_or(Ordering::Equal))
        .expect("non-empty group")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub cell: String,
    pub problem: String,
    pub iterations: u64,
    pub branching: String,
    pub bit_flip: f64,
    pub depolarizing: f64,
    pub runs: usize,
    pub min: f64,
    pub mean: f64,
    pub std: f64,
    pub min_searched: f64,
    pub exact: Option<f64>,
    pub best_run: usize,
    pub best_seed: u64,
    pub n_eval: u64,
    pub n_eval_idealized: u64,
    pub n_eval_idealized_at_cap: u64,
    pub adam_steps: u32,
    pub cnots: usize,
    pub parameters: usize,
    pub depth: usize,
}

pub fn summary_rows(records: &[RunRecord]) -> Vec<SummaryRow> {
    groups(records, |r| r.cell.clone())
        .into_iter()
        .map(|g| {
            let costs: Vec<f64> = g.iter().map(|r| r.cost_finetuned).collect();
            let (mean, std) = mean_std(&costs);
            let best = argmin(g);
            let (bit_flip, depolarizing) = noise_levels(best);
            SummaryRow {
                cell: best.cell.clone(),
                problem: best.problem.label(),
                iterations: best.config.iterations,
                branching: branching_label(best.config.fixed_branching),
                bit_flip,
                depolarizing,
                runs: g.len(),
                min: best.cost_finetuned,
                mean,
                std,
                min_searched: g.iter().map(|r| r.cost_searched).fold(f64::INFINITY, f64::min),
                exact: best.exact_cost,
                best_run: best.run,
                best_seed: best.seed,
                n_eval: best.evals.total,
                n_eval_idealized: best.evals.idealized,
                n_eval_idealized_at_cap: best.evals.idealized_at_cap,
                adam_steps: best.finetune_steps,
                cnots: best.metrics.cnots,
                parameters: best.metrics.parameters,
                depth: best.metrics.depth,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesRow {
    pub cell: String,
    pub run: usize,
    pub seed: u64,
    pub iterations: u64,
    pub step: usize,
    pub cost: f64,
}

fn series(records: &[RunRecord], values: impl Fn(&RunRecord) -> &[f64]) -> Vec<SeriesRow> {
    records
        .iter()
        .flat_map(|r| {
            values(r).iter().enumerate().map(move |(step, &cost)| SeriesRow {
                cell: r.cell.clone(),
                run: r.run,
                seed: r.seed,
                iterations: r.config.iterations,
                step,
                cost,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuccessRow {
    pub target: String,
    pub n: usize,
    pub g: Option<usize>,
    pub label: Option<String>,
    pub m2: Option<f64>,
    pub epsilon: f64,
    pub iterations: u64,
    pub branching: String,
    pub bit_flip: f64,
    pub depolarizing: f64,
    pub successes: usize,
    pub runs: usize,
}

pub fn success_rows(records: &[RunRecord]) -> Vec<SuccessRow> {
    groups(records, |r| r.cell.clone())
        .into_iter()
        .filter_map(|g| {
            let first = &g[0];
            let ProblemSpec::Oracle { label, n, g: gates, difficulty, m2, epsilon, .. } = &first.problem else {
                return None;
            };
            let (bit_flip, depolarizing) = noise_levels(first);
            Some(SuccessRow {
                target: label.clone(),
                n: *n,
                g: *gates,
                label: difficulty.map(|d| d.to_string()),
                m2: *m2,
                epsilon: *epsilon,
                iterations: first.config.iterations,
                branching: branching_label(first.config.fixed_branching),
                bit_flip,
                depolarizing,
                successes: g.iter().filter(|r| r.oracle.is_some_and(|o| o.success)).count(),
                runs: g.len(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchingRow {
    pub problem: String,
    pub iterations: u64,
    pub bit_flip: f64,
    pub depolarizing: f64,
    pub branching: String,
    pub runs: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub mean_branching: f64,
}

pub fn branching_rows(records: &[RunRecord]) -> Vec<BranchingRow> {
    summary_rows(records)
        .into_iter()
        .zip(groups(records, |r| r.cell.clone()))
        .map(|(s, g)| BranchingRow {
            problem: s.problem,
            iterations: s.iterations,
            bit_flip: s.bit_flip,
            depolarizing: s.depolarizing,
            branching: s.branching,
            runs: s.runs,
            mean: s.mean,
            std: s.std,
            min: s.min,
            mean_branching: g.iter().map(|r| r.mean_branching).sum::<f64>() / g.len() as f64,
        })
        .collect()
}

fn write_table<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(b'\t').from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::format(path, e))?;
    }
    write(path, w.into_inner().map_err(|e| CliError::format(path, e))?)
}

pub fn write_summary(out: &Path, records: &[RunRecord]) -> Result<()> {
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    write_table(&out.join(SUMMARY), &summary_rows(&sorted))
}

/// Writes every table for `records` into `out`; returns the files written.
pub fn write_report(out: &Path, records: &[RunRecord]) -> Result<Vec<PathBuf>> {
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let mut written = vec![out.join(SUMMARY), out.join(BEST_PATH), out.join(FINETUNE), out.join(BRANCHING)];
    write_table(&written[0], &summary_rows(&sorted))?;
    write_table(&written[1], &series(&sorted, |r| &r.best_path_costs))?;
    write_table(&written[2], &series(&sorted, |r| &r.finetune_costs))?;
    write_table(&written[3], &branching_rows(&sorted))?;
    let success = success_rows(&sorted);
    if !success.is_empty() {
        written.push(out.join(SUCCESS_MATRIX));
        write_table(&written[4], &success)?;
    }
    Ok(written)
}
