//! Ising-ansatz energy estimation: run the ring ansatz with virtualized
//! ring bonds over a grid of shot counts and summarize estimator bias and
//! spread against exact references.

use crate::config::{ExperimentKind, RunConfig};
use crate::experiments::subseed;
use crate::report::{cell, elapsed_secs, CsvTable};
use anyhow::{Context, Result};
use qcq_core::circuits::{tfim_hamiltonian, tfim_hva, HvaParams};
use qcq_core::frames::{pauli6, FactorableFrame, Provenance};
use qcq_core::qcq::InterfaceDuals;
use qcq_core::{io, stats, QcqEngine};
use serde::Serialize;
use std::time::Instant;

pub const CSV_SCHEMA: &str = "qcq-tfim-v1";
const CSV_HEADER: &[&str] = &["m", "rep", "energy", "stderr", "negativity", "wall_secs"];

/// One Monte Carlo energy estimate.
#[derive(Debug, Clone, Serialize)]
pub struct TfimPoint {
    pub m: usize,
    pub rep: usize,
    pub energy: f64,
    pub stderr: f64,
    pub negativity: f64,
    pub wall_secs: f64,
}

/// Across-repetition aggregate at one grid point.
#[derive(Debug, Clone, Serialize)]
pub struct GridAggregate {
    pub m: usize,
    pub mean: f64,
    /// Sample standard deviation of the repetition means.
    pub std: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TfimReport {
    pub n: usize,
    pub layers: usize,
    pub interfaced_layers: Vec<usize>,
    pub dual_provenance: String,
    /// Exact ground energy of the measured Hamiltonian.
    pub e_ground: f64,
    /// Noiseless energy of the ansatz at the configured angles.
    pub e_ansatz_noiseless: f64,
    /// Exact energy of the fully swap-routed circuit under the configured
    /// noise (the no-interface baseline).
    pub e_swap_noisy: f64,
    /// Exact expectation of the interfaced procedure under the configured
    /// noise (what the sampler converges to); absent when the interface
    /// count puts the exact evaluation over its enumeration cap.
    pub e_interfaced_exact: Option<f64>,
    pub negativity: f64,
    pub points: Vec<TfimPoint>,
    pub aggregates: Vec<GridAggregate>,
    /// σ̄ in the spread model std(M) ≈ σ̄/√M, fitted through the origin
    /// over the grid aggregates (needs ≥ 2 repetitions and ≥ 2 grid points).
    pub sigma_bar: Option<f64>,
    pub sigma_r_squared: Option<f64>,
    /// Mean estimate at the largest grid point (the headline energy).
    pub energy: f64,
}

fn resolve_angles(cfg: &RunConfig) -> Result<HvaParams> {
    match &cfg.tfim.params_file {
        Some(path) => io::load_hva_params(path)
            .with_context(|| format!("loading angles from {}", path.display())),
        None => Ok(HvaParams {
            gammas: cfg.tfim.gammas.clone(),
            betas: cfg.tfim.betas.clone(),
        }),
    }
}

/// Duals for every interface in `circuit_interfaces`: canonical, or loaded
/// from the configured factor file and applied to each interface.
fn resolve_duals(
    cfg: &RunConfig,
    n_interfaces: usize,
) -> Result<(Vec<InterfaceDuals>, Provenance)> {
    match &cfg.tfim.duals_file {
        Some(path) => {
            let (out_f, in_f, provenance) = io::load_dual_factors(path)
                .with_context(|| format!("loading duals from {}", path.display()))?;
            let duals = InterfaceDuals::from_factors(&out_f, &in_f, provenance);
            Ok((vec![duals; n_interfaces], provenance))
        }
        None => {
            let frame = FactorableFrame::uniform(&pauli6(), 2);
            Ok((
                vec![InterfaceDuals::canonical(&frame); n_interfaces],
                Provenance::Canonical,
            ))
        }
    }
}

/// Run the grid experiment described by `cfg.tfim` and `cfg.noise`.
pub fn run(cfg: &RunConfig) -> Result<TfimReport> {
    cfg.validate(ExperimentKind::Tfim)
        .context("invalid tfim configuration")?;
    let noise = cfg.noise_model()?;
    let section = &cfg.tfim;
    let angles = resolve_angles(cfg)?;
    let n = section.n;

    let ham = tfim_hamiltonian(n, section.j, section.g)?;
    let e_ground = ham
        .eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let e_ansatz_noiseless = qcq_core::circuits::hva_energy(n, &angles, &ham)?;
    let e_swap_noisy = tfim_hva(n, &angles, &[])?
        .run_exact(&noise)?
        .expectation(&ham)?;

    let circuit = tfim_hva(n, &angles, &section.interfaced_layers)?;
    let (duals, provenance) = resolve_duals(cfg, circuit.n_interfaces())?;
    let engine = QcqEngine::new(
        circuit,
        noise,
        ham,
        section.readout,
        &pauli6(),
        duals,
    )?;
    let e_interfaced_exact = match engine.exact_expectation() {
        Ok(e) => Some(e),
        Err(qcq_core::Error::EnumerationTooLarge { .. }) => None,
        Err(e) => return Err(e.into()),
    };

    let mut points = Vec::with_capacity(section.grid.len() * section.reps);
    let mut aggregates = Vec::with_capacity(section.grid.len());
    for (gi, &m) in section.grid.iter().enumerate() {
        let mut means = Vec::with_capacity(section.reps);
        for rep in 0..section.reps {
            let started = Instant::now();
            let seed = subseed(cfg.seed, (gi * section.reps + rep) as u64);
            let est = engine.estimate(m, seed)?;
            means.push(est.mean);
            points.push(TfimPoint {
                m,
                rep,
                energy: est.mean,
                stderr: est.stderr,
                negativity: est.negativity,
                wall_secs: elapsed_secs(cfg, started),
            });
        }
        let mean = stats::mean(&means);
        let std = if means.len() >= 2 { stats::sample_std(&means) } else { 0.0 };
        aggregates.push(GridAggregate { m, mean, std });
    }

    // Spread model: std across repetitions should scale as σ̄/√M.
    let (sigma_bar, sigma_r_squared) = if section.reps >= 2 && aggregates.len() >= 2 {
        let xs: Vec<f64> = aggregates.iter().map(|a| 1.0 / (a.m as f64).sqrt()).collect();
        let ys: Vec<f64> = aggregates.iter().map(|a| a.std).collect();
        match stats::fit_through_origin(&xs, &ys) {
            Ok((slope, r2)) => (Some(slope), Some(r2)),
            Err(_) => (None, None),
        }
    } else {
        (None, None)
    };

    let energy = aggregates.last().expect("nonempty grid").mean;
    Ok(TfimReport {
        n,
        layers: angles.layers(),
        interfaced_layers: section.interfaced_layers.clone(),
        dual_provenance: provenance.to_string(),
        e_ground,
        e_ansatz_noiseless,
        e_swap_noisy,
        e_interfaced_exact,
        negativity: engine.negativity(),
        points,
        aggregates,
        sigma_bar,
        sigma_r_squared,
        energy,
    })
}

/// Render the per-estimate table.
pub fn table(report: &TfimReport) -> CsvTable {
    let mut t = CsvTable::new(CSV_SCHEMA, CSV_HEADER);
    for p in &report.points {
        t.push(vec![
            p.m.to_string(),
            p.rep.to_string(),
            cell(p.energy),
            cell(p.stderr),
            cell(p.negativity),
            cell(p.wall_secs),
        ]);
    }
    t
}
