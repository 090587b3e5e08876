//! `qcq` — hybrid circuit experiments from the command line.
//!
//! Subcommands run one experiment each; every run writes a schema-tagged
//! CSV table plus a JSON summary that echoes the fully resolved
//! configuration. Values layer as flags > config file > defaults.

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qcq_cli::config::{ExperimentKind, Overrides, RunConfig};
use qcq_cli::report::write_reports;
use qcq_cli::{experiments, validate};
use qcq_core::{LongRange, Readout};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "qcq",
    version,
    about = "Hybrid circuit simulator: virtualized gates by measure-and-reprepare sampling"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// TOML config file (flags still win on conflicts)
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Master seed for all random draws
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default: $QCQ_OUT_DIR, then ".")
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Stem for output files (default: the subcommand name)
    #[arg(long, global = true)]
    label: Option<String>,
    /// Worker threads (default: machine parallelism)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Single-threaded run with zeroed wall-time columns, so a rerun
    /// reproduces the CSV byte for byte
    #[arg(long, global = true)]
    deterministic: bool,
    /// Depolarizing strength after each physical two-qubit gate
    #[arg(long, global = true, value_name = "λ")]
    lambda_unit: Option<f64>,
    /// Depolarizing strength before each interface measurement
    #[arg(long, global = true, value_name = "λ")]
    lambda_meas: Option<f64>,
    /// Depolarizing strength after each repreparation
    #[arg(long, global = true, value_name = "λ")]
    lambda_reprep: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    /// Virtualize the long-range gate (measure and reprepare)
    Interface,
    /// Route it through a physical swap chain
    SwapChain,
}

impl From<ModeArg> for LongRange {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Interface => LongRange::Interface,
            ModeArg::SwapChain => LongRange::SwapChain,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ReadoutArg {
    /// Exact expectation per shot (quasi-probability noise only)
    Exact,
    /// One projective eigenvalue sample per shot
    Sampled,
}

impl From<ReadoutArg> for Readout {
    fn from(r: ReadoutArg) -> Self {
        match r {
            ReadoutArg::Exact => Readout::Exact,
            ReadoutArg::Sampled => Readout::Sampled,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the CHSH value of a Bell pair across a qubit chain
    Chsh {
        /// Chain length (the pair sits on the endpoints)
        #[arg(long)]
        d: Option<usize>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Measure-and-reprepare steps per estimate
        #[arg(long)]
        shots: Option<usize>,
        /// Independent estimates per distance
        #[arg(long)]
        reps: Option<usize>,
        /// Comma-separated distances to sweep (overrides --d)
        #[arg(long, value_delimiter = ',')]
        scan: Option<Vec<usize>>,
        #[arg(long, value_enum)]
        readout: Option<ReadoutArg>,
    },
    /// Estimate the ring Ising energy of the variational ansatz
    Tfim {
        /// Ring size (qubits)
        #[arg(long)]
        n: Option<usize>,
        /// Ansatz depth (ignored when --params-file is given)
        #[arg(long)]
        layers: Option<usize>,
        /// Angle file written by `qcq params`
        #[arg(long, value_name = "FILE")]
        params_file: Option<PathBuf>,
        /// Comma-separated 1-based layers whose ring bond is virtualized
        #[arg(long, value_delimiter = ',')]
        interfaced_layers: Option<Vec<usize>>,
        /// Comma-separated shot counts to sweep
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<usize>>,
        /// Independent estimates per grid point
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long, value_enum)]
        readout: Option<ReadoutArg>,
        /// Dual-factor file written by `qcq negopt`
        #[arg(long, value_name = "FILE")]
        duals_file: Option<PathBuf>,
    },
    /// Anneal dual frames to cut the sampling overhead of one gate
    Negopt {
        /// Gate to virtualize (cnot, swap, rzz)
        #[arg(long)]
        gate: Option<String>,
        /// Rotation angle for parameterized gates
        #[arg(long)]
        angle: Option<f64>,
        /// Angle file; its layer-γ stands in for --angle
        #[arg(long, value_name = "FILE")]
        params_file: Option<PathBuf>,
        /// 1-based layer whose γ is read from --params-file
        #[arg(long)]
        layer: Option<usize>,
        /// Independent annealing chains (best one wins)
        #[arg(long)]
        chains: Option<usize>,
        /// Step cap per chain
        #[arg(long)]
        max_steps: Option<usize>,
    },
    /// Run the library's invariant self-checks
    Validate {},
    /// Optimize variational angles and archive them
    Params {
        /// Ring size (qubits)
        #[arg(long)]
        n: Option<usize>,
        /// Ansatz depth
        #[arg(long)]
        layers: Option<usize>,
        /// Acceptable gap to the exact ground energy
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

impl Command {
    fn kind(&self) -> ExperimentKind {
        match self {
            Command::Chsh { .. } => ExperimentKind::Chsh,
            Command::Tfim { .. } => ExperimentKind::Tfim,
            Command::Negopt { .. } => ExperimentKind::Negopt,
            Command::Validate {} => ExperimentKind::Validate,
            Command::Params { .. } => ExperimentKind::Params,
        }
    }

    fn overrides(&self, g: &GlobalArgs) -> Overrides {
        let mut o = Overrides {
            seed: g.seed,
            out_dir: g.out_dir.clone(),
            label: g.label.clone(),
            threads: g.threads,
            deterministic: g.deterministic,
            lambda_unit: g.lambda_unit,
            lambda_meas: g.lambda_meas,
            lambda_reprep: g.lambda_reprep,
            ..Overrides::default()
        };
        match self {
            Command::Chsh { d, mode, shots, reps, scan, readout } => {
                o.d = *d;
                o.mode = mode.map(Into::into);
                o.shots = *shots;
                o.reps = *reps;
                o.scan = scan.clone();
                o.readout = readout.map(Into::into);
            }
            Command::Tfim {
                n,
                layers,
                params_file,
                interfaced_layers,
                grid,
                reps,
                readout,
                duals_file,
            } => {
                o.n = *n;
                o.layers = *layers;
                o.params_file = params_file.clone();
                o.interfaced_layers = interfaced_layers.clone();
                o.grid = grid.clone();
                o.reps = *reps;
                o.readout = readout.map(Into::into);
                o.duals_file = duals_file.clone();
            }
            Command::Negopt { gate, angle, params_file, layer, chains, max_steps } => {
                o.gate = gate.clone();
                o.angle = *angle;
                o.params_file = params_file.clone();
                o.layer = *layer;
                o.chains = *chains;
                o.max_steps = *max_steps;
            }
            Command::Validate {} => {}
            Command::Params { n, layers, tolerance } => {
                o.n = *n;
                o.layers = *layers;
                o.tolerance = *tolerance;
            }
        }
        o
    }
}

/// Configure the global worker pool before any parallel region runs.
fn init_threads(cfg: &RunConfig) -> Result<()> {
    let threads = if cfg.deterministic { Some(1) } else { cfg.threads };
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()
            .context("configuring the worker pool")?;
    }
    Ok(())
}

fn run() -> Result<ExitCode> {
    let cli = Cli::parse();
    let kind = cli.command.kind();
    let overrides = cli.command.overrides(&cli.global);
    let cfg = RunConfig::layered(cli.global.config.as_deref(), &overrides)?;
    init_threads(&cfg)?;

    match kind {
        ExperimentKind::Chsh => {
            let report = experiments::chsh::run(&cfg)?;
            let paths = write_reports(&cfg, kind, &experiments::chsh::table(&report), &report)?;
            println!("S = {:.5} ± {:.5}  (mode: {:?})", report.s, report.s_stderr, report.mode);
            if let Some(fit) = &report.fit {
                println!(
                    "slope over d: {:.5} (95% CI [{:.5}, {:.5}], R² = {:.3})",
                    fit.slope, fit.slope_ci_low, fit.slope_ci_high, fit.r_squared
                );
            }
            println!("wrote {} and {}", paths.csv.display(), paths.summary.display());
        }
        ExperimentKind::Tfim => {
            let report = experiments::tfim::run(&cfg)?;
            let paths = write_reports(&cfg, kind, &experiments::tfim::table(&report), &report)?;
            let target = report
                .e_interfaced_exact
                .map_or("n/a".to_string(), |e| format!("{e:.6}"));
            println!(
                "E = {:.6}  (exact target {target}, ground {:.6}, overhead n(→) = {:.3})",
                report.energy, report.e_ground, report.negativity
            );
            if let (Some(s), Some(r2)) = (report.sigma_bar, report.sigma_r_squared) {
                println!("spread fit: std(M) ≈ {s:.3}/√M (R² = {r2:.3})");
            }
            println!("wrote {} and {}", paths.csv.display(), paths.summary.display());
        }
        ExperimentKind::Negopt => {
            let outcome = experiments::negopt::run(&cfg)?;
            let report = &outcome.report;
            let paths = write_reports(&cfg, kind, &experiments::negopt::table(report), report)?;
            println!(
                "objective {:.4} → {:.4}  (ratio {:.3}, chain {})",
                report.canonical_objective, report.best_objective, report.best_ratio,
                report.best_chain
            );
            println!("duals archived at {}", report.duals_file.display());
            println!("wrote {} and {}", paths.csv.display(), paths.summary.display());
        }
        ExperimentKind::Validate => {
            let checks = validate::run_checks(cfg.seed);
            let paths = write_reports(&cfg, kind, &validate::table(&checks), &checks)?;
            let mut failed = 0usize;
            for c in &checks {
                let tag = if c.passed { "pass" } else { "FAIL" };
                println!("[{tag}] {:<22} {}", c.name, c.detail);
                failed += usize::from(!c.passed);
            }
            println!("wrote {} and {}", paths.csv.display(), paths.summary.display());
            if failed > 0 {
                eprintln!("{failed} of {} checks failed", checks.len());
                return Ok(ExitCode::FAILURE);
            }
        }
        ExperimentKind::Params => {
            let report = experiments::params::run(&cfg)?;
            let paths = write_reports(&cfg, kind, &experiments::params::table(&report), &report)?;
            println!(
                "E = {:.9} after optimization (ground {:.9}, gap {:.2e}, within tolerance: {})",
                report.energy, report.e_ground, report.gap, report.tolerance_met
            );
            println!("angles archived at {}", report.params_file.display());
            println!("wrote {} and {}", paths.csv.display(), paths.summary.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
