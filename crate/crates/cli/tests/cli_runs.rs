//! Integration tests of the command-line surface: reproducibility of the
//! emitted files, losslessness of the config echo, argument precedence,
//! and exit-code behavior of the installed binary.

use qcq_cli::config::{ExperimentKind, RunConfig};
use qcq_cli::experiments::tfim;
use qcq_cli::report::{report_paths, write_reports};
use std::path::Path;
use std::process::Command;

fn qcq() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qcq"))
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

#[test]
fn deterministic_reruns_emit_byte_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let status = qcq()
            .args(["chsh", "--d", "2", "--shots", "2000", "--seed", "9", "--deterministic"])
            .arg("--out-dir")
            .arg(out)
            .status()
            .expect("binary runs");
        assert!(status.success());
    }
    let csv_a = read(&out_a.join("chsh.csv"));
    let csv_b = read(&out_b.join("chsh.csv"));
    assert!(csv_a.starts_with("# schema: qcq-chsh-v1\n"));
    assert_eq!(csv_a, csv_b, "deterministic reruns must match byte for byte");
    assert!(
        csv_a.lines().nth(2).unwrap().ends_with(",0.0"),
        "deterministic mode zeroes the wall-time column"
    );
}

#[test]
fn summary_config_echo_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig { seed: 31, deterministic: true, ..RunConfig::default() };
    cfg.out_dir = Some(dir.path().to_path_buf());
    cfg.tfim.gammas = vec![0.4, 0.9];
    cfg.tfim.betas = vec![1.1, 0.6];
    cfg.tfim.grid = vec![200, 800];
    cfg.tfim.reps = 3;

    let report = tfim::run(&cfg).unwrap();
    write_reports(&cfg, ExperimentKind::Tfim, &tfim::table(&report), &report).unwrap();

    let summary: serde_json::Value =
        serde_json::from_str(&read(&report_paths(&cfg, ExperimentKind::Tfim).summary)).unwrap();
    assert_eq!(summary["schema"], "qcq-summary-v1");
    assert_eq!(summary["seed"], 31);

    // Round-trip the echoed config and rerun: identical results.
    let echoed: RunConfig = serde_json::from_value(summary["config"].clone()).unwrap();
    let again = tfim::run(&echoed).unwrap();
    assert_eq!(
        serde_json::to_string(&report).unwrap(),
        serde_json::to_string(&again).unwrap(),
        "rerunning from the config echo must reproduce the results"
    );
}

#[test]
fn flags_override_config_file_values() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        "experiment = \"chsh\"\nseed = 5\n[chsh]\nd = 3\nshots = 1500\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = qcq()
        .arg("--config")
        .arg(&config)
        .args(["chsh", "--shots", "700", "--deterministic"])
        .arg("--out-dir")
        .arg(&out)
        .status()
        .expect("binary runs");
    assert!(status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&read(&out.join("chsh.summary.json"))).unwrap();
    assert_eq!(summary["config"]["chsh"]["shots"], 700, "flag beats file");
    assert_eq!(summary["config"]["chsh"]["d"], 3, "file beats default");
    assert_eq!(summary["seed"], 5);
}

#[test]
fn out_dir_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let status = qcq()
        .args(["validate", "--label", "checks"])
        .env("QCQ_OUT_DIR", dir.path())
        .status()
        .expect("binary runs");
    assert!(status.success());
    assert!(dir.path().join("checks.csv").exists());
    assert!(dir.path().join("checks.summary.json").exists());
}

#[test]
fn validate_prints_every_check_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let output = qcq()
        .arg("validate")
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .expect("binary runs");
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    for name in ["frame-reconstruction", "sampling-invariant", "determinism"] {
        assert!(stdout.contains(name), "missing check line for {name}");
    }
    assert!(!stdout.contains("FAIL"), "no check may fail:\n{stdout}");
}

#[test]
fn invalid_configs_exit_nonzero_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();

    // Unknown key: parse-time rejection naming the offender.
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "sedd = 9\n").unwrap();
    let output = qcq().arg("--config").arg(&bad).arg("validate").output().unwrap();
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("sedd"));

    // Kind mismatch: a chsh config file cannot drive the tfim subcommand.
    let mismatched = dir.path().join("mismatch.toml");
    std::fs::write(&mismatched, "experiment = \"chsh\"\n").unwrap();
    let output = qcq().arg("--config").arg(&mismatched).arg("tfim").output().unwrap();
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("chsh"));

    // Missing angle source for a parameterized gate.
    let output = qcq().args(["negopt", "--gate", "rzz"]).output().unwrap();
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("angle"));
}

#[test]
fn shipped_example_configs_parse_and_validate() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    // Example configs name their data files relative to the repo root.
    let absolutize = |p: &mut Option<std::path::PathBuf>| {
        if let Some(q) = p.as_mut().filter(|q| q.is_relative()) {
            *q = root.join(&q);
        }
    };
    let mut seen = 0;
    for entry in std::fs::read_dir(root.join("configs")).expect("configs/ directory") {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "toml") {
            continue;
        }
        let mut cfg = RunConfig::from_file(&path)
            .unwrap_or_else(|e| panic!("{}: {e:#}", path.display()));
        absolutize(&mut cfg.tfim.params_file);
        absolutize(&mut cfg.tfim.duals_file);
        absolutize(&mut cfg.negopt.params_file);
        let kind = cfg.experiment.unwrap_or_else(|| panic!("{}: no experiment", path.display()));
        cfg.validate(kind).unwrap_or_else(|e| panic!("{}: {e:#}", path.display()));
        seen += 1;
    }
    assert!(seen >= 5, "expected the full example set, found {seen}");
}

#[test]
fn artifacts_chain_between_subcommands() {
    let dir = tempfile::tempdir().unwrap();

    // Optimize a tiny instance and archive the angles.
    let status = qcq()
        .args(["params", "--n", "3", "--layers", "1", "--label", "tiny"])
        .arg("--out-dir")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let params = dir.path().join("tiny.params");
    assert!(params.exists());

    // Anneal the ring gate at the archived layer-1 angle (short schedule).
    let status = qcq()
        .args(["negopt", "--gate", "rzz", "--layer", "1", "--max-steps", "300"])
        .args(["--chains", "2", "--seed", "3", "--label", "duals"])
        .arg("--params-file")
        .arg(&params)
        .arg("--out-dir")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let duals = dir.path().join("duals.duals.txt");
    assert!(duals.exists());

    // Feed both files into an energy estimation run.
    let output = qcq()
        .args(["tfim", "--n", "3", "--grid", "500", "--reps", "2", "--seed", "4"])
        .arg("--params-file")
        .arg(&params)
        .arg("--duals-file")
        .arg(&duals)
        .args(["--interfaced-layers", "1", "--label", "energy"])
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("energy.summary.json"))).unwrap();
    assert_eq!(summary["results"]["dual_provenance"], "annealed");
    let csv = read(&dir.path().join("energy.csv"));
    assert!(csv.starts_with("# schema: qcq-tfim-v1\n"));
    assert_eq!(csv.lines().count(), 4, "schema line, header, one row per estimate");
}
