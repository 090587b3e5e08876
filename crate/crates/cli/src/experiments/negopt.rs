//! Sampling-overhead annealing for one virtualized gate: run independent
//! chains, archive the winning dual factors, and trace every chain.

use crate::config::{ExperimentKind, RunConfig};
use crate::report::{cell, CsvTable};
use anyhow::{bail, Context, Result};
use qcq_core::circuits::{gate_matrix, gate_signature};
use qcq_core::frames::{channel_transfer, overlap_matrix_1q, pauli6, FactorableFrame, Provenance};
use qcq_core::negopt::{anneal_chains, AnnealResult};
use qcq_core::io;
use serde::Serialize;
use std::path::PathBuf;

pub const CSV_SCHEMA: &str = "qcq-negopt-v1";
const CSV_HEADER: &[&str] = &[
    "chain",
    "objective",
    "ratio",
    "steps",
    "accepted",
    "final_temperature",
    "final_sigma",
    "max_accepted_residual",
    "joint_residual",
];

/// Per-chain trace row (everything but the factor matrices).
#[derive(Debug, Clone, Serialize)]
pub struct ChainTrace {
    pub chain: usize,
    pub objective: f64,
    pub ratio: f64,
    pub steps: usize,
    pub accepted: usize,
    pub final_temperature: f64,
    pub final_sigma: f64,
    pub max_accepted_residual: f64,
    pub joint_residual: f64,
}

impl From<&AnnealResult> for ChainTrace {
    fn from(r: &AnnealResult) -> Self {
        Self {
            chain: r.chain,
            objective: r.objective,
            ratio: r.ratio,
            steps: r.steps,
            accepted: r.accepted,
            final_temperature: r.final_temperature,
            final_sigma: r.final_sigma,
            max_accepted_residual: r.max_accepted_residual,
            joint_residual: r.joint_residual,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NegoptReport {
    pub gate: String,
    pub angle: Option<f64>,
    pub arity: usize,
    pub chains: Vec<ChainTrace>,
    pub canonical_objective: f64,
    pub best_objective: f64,
    pub best_ratio: f64,
    pub best_chain: usize,
    /// Where the winning factors were written (relative to the out dir).
    pub duals_file: PathBuf,
}

/// The annealed factors of the best chain, for callers that keep going
/// (the report itself only carries scalars).
pub struct NegoptOutcome {
    pub report: NegoptReport,
    pub best: AnnealResult,
}

fn resolve_angle(cfg: &RunConfig, takes_param: bool) -> Result<Option<f64>> {
    if !takes_param {
        return Ok(None);
    }
    if let Some(angle) = cfg.negopt.angle {
        return Ok(Some(angle));
    }
    let path = cfg
        .negopt
        .params_file
        .as_ref()
        .expect("validate() guarantees an angle source");
    let params = io::load_hva_params(path)
        .with_context(|| format!("loading angles from {}", path.display()))?;
    let layer = cfg.negopt.layer;
    if layer == 0 || layer > params.layers() {
        bail!(
            "negopt.layer {layer} out of range 1..={} for {}",
            params.layers(),
            path.display()
        );
    }
    Ok(Some(params.gammas[layer - 1]))
}

/// Anneal the configured gate and write the winning dual factors next to
/// the other outputs.
pub fn run(cfg: &RunConfig) -> Result<NegoptOutcome> {
    cfg.validate(ExperimentKind::Negopt)
        .context("invalid negopt configuration")?;
    let section = &cfg.negopt;
    let (arity, takes_param) = gate_signature(&section.gate)?;
    let angle = resolve_angle(cfg, takes_param)?;
    let u = gate_matrix(&section.gate, angle)?;

    let frame = pauli6();
    let jframe = FactorableFrame::uniform(&frame, arity);
    let transfer = channel_transfer(&u, &jframe)?;
    let overlap = overlap_matrix_1q(&frame);

    let mut results =
        anneal_chains(&transfer, &overlap, arity, &section.schedule, cfg.seed, section.chains)?;
    let chains: Vec<ChainTrace> = results.iter().map(ChainTrace::from).collect();
    results.sort_by(|a, b| a.objective.total_cmp(&b.objective).then(a.chain.cmp(&b.chain)));
    let best = results.into_iter().next().expect("at least one chain");

    let label = cfg.resolved_label(ExperimentKind::Negopt);
    let out_dir = cfg.resolved_out_dir();
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    let duals_file = out_dir.join(format!("{label}.duals.txt"));
    io::save_dual_factors(&duals_file, &best.out_factors, &best.in_factors, Provenance::Annealed)
        .with_context(|| format!("writing {}", duals_file.display()))?;

    let report = NegoptReport {
        gate: section.gate.clone(),
        angle,
        arity,
        chains,
        canonical_objective: best.canonical_objective,
        best_objective: best.objective,
        best_ratio: best.ratio,
        best_chain: best.chain,
        duals_file,
    };
    Ok(NegoptOutcome { report, best })
}

/// Render the per-chain trace table.
pub fn table(report: &NegoptReport) -> CsvTable {
    let mut t = CsvTable::new(CSV_SCHEMA, CSV_HEADER);
    for c in &report.chains {
        t.push(vec![
            c.chain.to_string(),
            cell(c.objective),
            cell(c.ratio),
            c.steps.to_string(),
            c.accepted.to_string(),
            cell(c.final_temperature),
            cell(c.final_sigma),
            cell(c.max_accepted_residual),
            cell(c.joint_residual),
        ]);
    }
    t
}
