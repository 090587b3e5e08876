//! Bell-pair CHSH runs: estimate the Bell polynomial S on the endpoints of
//! a d-qubit chain, either through the measure-and-reprepare interface or
//! through an explicit swap-chain route.

use crate::config::{ExperimentKind, RunConfig};
use crate::experiments::{fit_with_ci, subseed, FitReport};
use crate::report::{cell, elapsed_secs, CsvTable};
use anyhow::{Context, Result};
use qcq_core::circuits::{bell_circuit, chsh_observable};
use qcq_core::{LongRange, QcqEngine};
use serde::Serialize;
use std::time::Instant;

pub const CSV_SCHEMA: &str = "qcq-chsh-v1";
const CSV_HEADER: &[&str] = &["d", "rep", "m", "s", "stderr", "negativity", "wall_secs"];

/// One table row: a Monte Carlo estimate (interfaced mode) or an exact
/// evaluation (swap-chain mode, `m = 0`, `stderr = 0`).
#[derive(Debug, Clone, Serialize)]
pub struct ChshPoint {
    pub d: usize,
    pub rep: usize,
    pub m: usize,
    pub s: f64,
    pub stderr: f64,
    pub negativity: f64,
    pub wall_secs: f64,
}

/// Reference value per distance: the exact expectation of the configured
/// procedure (interface semantics included) under the configured noise.
#[derive(Debug, Clone, Serialize)]
pub struct ChshReference {
    pub d: usize,
    pub s_exact: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChshReport {
    pub mode: LongRange,
    pub distances: Vec<usize>,
    pub points: Vec<ChshPoint>,
    pub reference: Vec<ChshReference>,
    /// Mean estimate per distance (across repetitions).
    pub per_d: Vec<(usize, f64)>,
    /// S versus d regression over all points (3+ distances).
    pub fit: Option<FitReport>,
    /// Headline: the estimate at the first configured distance.
    pub s: f64,
    pub s_stderr: f64,
}

/// Run the experiment described by `cfg.chsh` and `cfg.noise`.
pub fn run(cfg: &RunConfig) -> Result<ChshReport> {
    cfg.validate(ExperimentKind::Chsh)
        .context("invalid chsh configuration")?;
    let noise = cfg.noise_model()?;
    let section = &cfg.chsh;
    let distances: Vec<usize> = if section.scan.is_empty() {
        vec![section.d]
    } else {
        section.scan.clone()
    };

    let mut points = Vec::new();
    let mut reference = Vec::new();
    let mut per_d = Vec::new();
    for (di, &d) in distances.iter().enumerate() {
        let circuit = bell_circuit(d, section.mode)?;
        let observable = chsh_observable(d)?;
        match section.mode {
            LongRange::Interface => {
                let engine = QcqEngine::with_canonical_duals(
                    circuit,
                    noise,
                    observable,
                    section.readout,
                )?;
                reference.push(ChshReference { d, s_exact: engine.exact_expectation()? });
                let mut means = Vec::with_capacity(section.reps);
                for rep in 0..section.reps {
                    let started = Instant::now();
                    let seed = subseed(cfg.seed, (di * section.reps + rep) as u64);
                    let est = engine.estimate(section.shots, seed)?;
                    means.push(est.mean);
                    points.push(ChshPoint {
                        d,
                        rep,
                        m: section.shots,
                        s: est.mean,
                        stderr: est.stderr,
                        negativity: est.negativity,
                        wall_secs: elapsed_secs(cfg, started),
                    });
                }
                per_d.push((d, qcq_core::stats::mean(&means)));
            }
            LongRange::SwapChain => {
                let started = Instant::now();
                let s = circuit.run_exact(&noise)?.expectation(&observable)?;
                reference.push(ChshReference { d, s_exact: s });
                points.push(ChshPoint {
                    d,
                    rep: 0,
                    m: 0,
                    s,
                    stderr: 0.0,
                    negativity: 1.0,
                    wall_secs: elapsed_secs(cfg, started),
                });
                per_d.push((d, s));
            }
        }
    }

    let xs: Vec<f64> = points.iter().map(|p| p.d as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.s).collect();
    let fit = if distances.len() >= 3 { fit_with_ci(&xs, &ys, 0.95) } else { None };

    let head: Vec<&ChshPoint> = points.iter().filter(|p| p.d == distances[0]).collect();
    let s = qcq_core::stats::mean(&head.iter().map(|p| p.s).collect::<Vec<_>>());
    // Single-estimate headline inherits the estimator's stderr; repeated
    // estimates use the spread of their means.
    let s_stderr = if head.len() == 1 {
        head[0].stderr
    } else {
        let means: Vec<f64> = head.iter().map(|p| p.s).collect();
        qcq_core::stats::mean_and_stderr(&means).1
    };

    Ok(ChshReport { mode: section.mode, distances, points, reference, per_d, fit, s, s_stderr })
}

/// Render the per-point table.
pub fn table(report: &ChshReport) -> CsvTable {
    let mut t = CsvTable::new(CSV_SCHEMA, CSV_HEADER);
    for p in &report.points {
        t.push(vec![
            p.d.to_string(),
            p.rep.to_string(),
            p.m.to_string(),
            cell(p.s),
            cell(p.stderr),
            cell(p.negativity),
            cell(p.wall_secs),
        ]);
    }
    t
}
