use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use qas_core::circuit::parse;
use qas_core::problems::{m2_entropy, parse_hamiltonian};
use qas_core::qsim::{apply_circuit, exact_ground_energy};

use crate::config::ExperimentConfig;
use crate::dataset::write_dataset;
use crate::error::{read_to_string, CliError, Result};
use crate::problem::resolve_problems;
use crate::report::{load_records, sort_records, summary_rows, write_report, write_summary};
use crate::runner::{run_grid, write_outcome, GridOutcome};

#[derive(Debug, Parser)]
#[command(name = "qas", version, about = "Circuit architecture search with progressive-widening MCTS")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a grid of seeded searches and fine-tunings.
    Run(RunArgs),
    /// Sample the Clifford+T target circuits and write them with a manifest.
    GenDataset {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build tables from a directory of run records.
    Report {
        dir: PathBuf,
        /// Where to write the tables; defaults to `dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the stabilizer Rényi entropy of a circuit's output state.
    Magic { circuit: PathBuf },
    /// Print the exact ground energy of a Hamiltonian file.
    Exact { hamiltonian: PathBuf },
}

#[derive(Debug, Default, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub runs: Option<usize>,
    /// One value or a comma-separated list.
    #[arg(long, value_delimiter = ',')]
    pub iterations: Vec<u64>,
    #[arg(long, value_delimiter = ',')]
    pub noise_bitflip: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub noise_depolarizing: Vec<f64>,
    /// Fixed branching factor; 0 selects progressive widening.
    #[arg(long, value_delimiter = ',')]
    pub fixed_branching: Vec<usize>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Any other configuration key, as `key=value` with a TOML value.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
}

fn int(v: u64, name: &str) -> Result<toml::Value> {
    i64::try_from(v).map(toml::Value::Integer).map_err(|_| CliError::Usage(format!("--{name} {v} is too large")))
}

fn axis<T: Copy>(values: &[T], f: impl Fn(T) -> Result<toml::Value>) -> Result<toml::Value> {
    let mut items = values.iter().map(|&v| f(v)).collect::<Result<Vec<_>>>()?;
    Ok(if items.len() == 1 { items.remove(0) } else { toml::Value::Array(items) })
}

impl RunArgs {
    /// Flag values as configuration keys.
    pub fn overrides(&self) -> Result<toml::Table> {
        let mut t = toml::Table::new();
        for kv in &self.set {
            let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got '{kv}'")))?;
            let value = format!("v = {v}")
                .parse::<toml::Table>()
                .ok()
                .and_then(|mut d| d.remove("v"))
                .unwrap_or_else(|| toml::Value::String(v.to_string()));
            t.insert(k.trim().to_string(), value);
        }
        if let Some(s) = self.seed {
            t.insert("seed".into(), int(s, "seed")?);
        }
        if let Some(r) = self.runs {
            t.insert("runs".into(), int(r as u64, "runs")?);
        }
        if let Some(w) = self.workers {
            t.insert("workers".into(), int(w as u64, "workers")?);
        }
        if !self.iterations.is_empty() {
            t.insert("iterations".into(), axis(&self.iterations, |v| int(v, "iterations"))?);
        }
        if !self.fixed_branching.is_empty() {
            t.insert("fixed_branching".into(), axis(&self.fixed_branching, |v| int(v as u64, "fixed-branching"))?);
        }
        if !self.noise_bitflip.is_empty() {
            t.insert("noise_bitflip".into(), axis(&self.noise_bitflip, |v| Ok(toml::Value::Float(v)))?);
        }
        if !self.noise_depolarizing.is_empty() {
            t.insert("noise_depolarizing".into(), axis(&self.noise_depolarizing, |v| Ok(toml::Value::Float(v)))?);
        }
        Ok(t)
    }
}

/// Loads the configuration, runs the grid and writes records and the summary.
/// Run failures are written out and reported after the grid completes.
pub fn run(args: &RunArgs) -> Result<GridOutcome> {
    let cfg = ExperimentConfig::load(args.config.as_deref(), &args.overrides()?)?;
    let problems = resolve_problems(&cfg)?;
    let cells = cfg.cells(&problems);
    let outcome = run_grid(&cfg, &cells)?;
    write_outcome(&args.out, &outcome)?;
    if !outcome.records.is_empty() {
        write_summary(&args.out, &outcome.records)?;
    }
    Ok(outcome)
}

pub fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let outcome = run(&args)?;
            let mut records = outcome.records.clone();
            sort_records(&mut records);
            for row in summary_rows(&records) {
                println!("{}\tmin {:.6e}\tmean {:.6e}\tstd {:.3e}\tN_eval {}", row.cell, row.min, row.mean, row.std, row.n_eval);
            }
            let total = outcome.records.len() + outcome.failures.len();
            if !outcome.failures.is_empty() {
                return Err(CliError::RunsFailed(outcome.failures.len(), total));
            }
            Ok(())
        }
        Command::GenDataset { seed, out } => {
            let rows = write_dataset(seed, &out)?;
            for r in &rows {
                println!("{}\t{:.6}", r.stem(), r.m2);
            }
            Ok(())
        }
        Command::Report { dir, out } => {
            let records = load_records(&dir)?;
            for path in write_report(out.as_deref().unwrap_or(&dir), &records)? {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Magic { circuit } => {
            let c = parse(&read_to_string(&circuit)?).map_err(|e| CliError::format(&circuit, e))?;
            println!("{}", m2_entropy(&apply_circuit(&c))?);
            Ok(())
        }
        Command::Exact { hamiltonian } => {
            let h = parse_hamiltonian(&read_to_string(&hamiltonian)?).map_err(|e| CliError::format(&hamiltonian, e))?;
            println!("{}", exact_ground_energy(&h)?);
            Ok(())
        }
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_become_overrides() {
        let cli = Cli::try_parse_from([
            "qas",
            "run",
            "--seed",
            "4",
            "--iterations",
            "100,200",
            "--fixed-branching",
            "5",
            "--noise-bitflip",
            "0.1",
            "--set",
            "problem=\"vqls\"",
            "--set",
            "exploration=0.7",
        ])
        .unwrap();
        let Command::Run(args) = cli.command else { panic!("expected run") };
        let cfg = ExperimentConfig::from_toml("", &args.overrides().unwrap()).unwrap();
        assert_eq!(cfg.seed, 4);
        assert_eq!(cfg.iterations.values(), [100, 200]);
        assert_eq!(cfg.fixed_branching.values(), [5]);
        assert_eq!(cfg.noise_bitflip.values(), [0.1]);
        assert_eq!(cfg.exploration, 0.7);
    }

    #[test]
    fn bare_set_value_is_a_string() {
        let args = RunArgs { set: vec!["problem=tfim".into()], ..Default::default() };
        let cfg = ExperimentConfig::from_toml("", &args.overrides().unwrap()).unwrap();
        assert_eq!(cfg.problem, Some(crate::config::ProblemKind::Tfim));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(main_with(["qas", "frobnicate"]), 1);
        assert_eq!(main_with(["qas", "run", "--runs", "many"]), 1);
        assert_eq!(main_with(["qas", "run", "--set", "problem=nothing"]), 1);
        assert_eq!(main_with(["qas", "magic", "/nonexistent/file.qc"]), 2);
        assert_eq!(main_with(["qas", "--help"]), 0);
    }
}
