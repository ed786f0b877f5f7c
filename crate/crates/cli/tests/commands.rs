use std::path::Path;
use std::process::{Command, Output};

use qas_cli::runner::RunRecord;

fn qas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qas")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn h2_path() -> String {
    format!("{}/../core/tests/data/h2_sto3g.ham", env!("CARGO_MANIFEST_DIR"))
}

fn records(dir: &Path) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = std::fs::read_dir(dir.join("records"))
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            let mut rec: RunRecord = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
            rec.wall_seconds = 0.0;
            (p.file_name().unwrap().to_string_lossy().into_owned(), rec.to_json())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn exact_and_magic() {
    let o = qas(&["exact", &h2_path()]);
    assert!(o.status.success());
    let e: f64 = stdout(&o).trim().parse().unwrap();
    assert!((e + 1.136189).abs() < 1e-5, "{e}");

    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("th.qc");
    std::fs::write(&c, "qubits 1\nh 0\nt 0\n").unwrap();
    let o = qas(&["magic", c.to_str().unwrap()]);
    let m: f64 = stdout(&o).trim().parse().unwrap();
    assert!((m - 0.415037).abs() < 1e-6);

    std::fs::write(&c, "qubits 1\nfoo 0\n").unwrap();
    assert_eq!(qas(&["magic", c.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(qas(&["run", "--iterations", "ten"]).status.code(), Some(1));
    assert_eq!(qas(&["bogus"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "problem = \"vqls\"\ncomit_fraction = 0.1\n").unwrap();
    let o = qas(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("comit_fraction"));
}

#[test]
fn missing_files_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = qas(&["run", "--set", "problem=\"vqe\"", "--set", "hamiltonian=\"/no/such.ham\"", "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(qas(&["report", out]).status.code(), Some(2));
}

#[test]
fn vqe_grid_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(h2_path(), dir.path().join("h2.ham")).unwrap();
    let cfg = dir.path().join("h2.toml");
    std::fs::write(
        &cfg,
        "problem = \"vqe\"\nhamiltonian = \"h2.ham\"\niterations = [60, 120]\nruns = 2\nseed = 3\nmax_adam_steps = 10\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = qas(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 2);
    let recs = records(&out);
    assert_eq!(recs.len(), 4);
    assert_eq!(recs[0].0, "h2_I120_pw__run000.json");

    let summary = std::fs::read_to_string(out.join("summary.tsv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("cell\tproblem\titerations"));
    assert!(lines[1].starts_with("h2_I60_pw\th2\t60\tpw"));

    let o = qas(&["report", out.to_str().unwrap()]);
    assert!(o.status.success());
    for f in ["summary.tsv", "best_path.tsv", "finetune.tsv", "branching.tsv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert!(!out.join("success_matrix.tsv").exists());
}

#[test]
fn oracle_grid_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let o = qas(&["gen-dataset", "--seed", "1", "--out", data.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 30);

    let run = |out: &Path| {
        let o = qas(&[
            "run",
            "--set",
            "problem=\"oracle\"",
            "--set",
            &format!("dataset={:?}", data.to_str().unwrap()),
            "--set",
            "targets=[\"n4_g5_easy\", \"n4_g5_hard\"]",
            "--iterations",
            "150",
            "--noise-bitflip",
            "0.0,0.05",
            "--runs",
            "2",
            "--seed",
            "10",
            "--set",
            "max_adam_steps=5",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run(&a);
    run(&b);
    let ra = records(&a);
    assert_eq!(ra.len(), 8);
    assert_eq!(ra, records(&b));

    assert!(qas(&["report", a.to_str().unwrap()]).status.success());
    let matrix = std::fs::read_to_string(a.join("success_matrix.tsv")).unwrap();
    assert_eq!(matrix.lines().count(), 5);
    assert!(matrix.lines().nth(1).unwrap().starts_with("n4_g5_easy\t4\t5\teasy"));
}

#[test]
fn fixed_branching_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = qas(&[
        "run",
        "--set",
        "problem=\"tfim\"",
        "--set",
        "qubits=3",
        "--fixed-branching",
        "0,3",
        "--iterations",
        "100",
        "--runs",
        "1",
        "--set",
        "max_adam_steps=0",
        "--out",
        out,
    ]);
    assert!(o.status.success());
    assert!(qas(&["report", out]).status.success());
    let table = std::fs::read_to_string(dir.path().join("branching.tsv")).unwrap();
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].contains("\tb3\t"));
    assert!(rows[1].contains("\tpw\t"));
}
