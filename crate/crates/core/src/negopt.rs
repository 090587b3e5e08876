//! Sampling-overhead minimization over dual frames.
//!
//! The Monte Carlo cost of a virtualized gate is governed by the ℓ1 norms
//! n(a) of the dual-channel columns; this module minimizes the averaged
//! squared norm (1/D)·Σ_a n(a)² by simulated annealing over the space of
//! generalized inverses of the single-qubit overlap matrix. Moves stay
//! inside that space by construction: for any generalized inverse B of T
//! and any matrix C, `B + C − B·T·C·T·B` is again a generalized inverse
//! (so T·B'·T = T holds at machine precision along the whole walk).

use crate::error::{Error, Result};
use crate::frames::canonical_dual;
use crate::linalg::{max_abs, RMat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Kronecker product of a factor list.
fn kron_all(factors: &[RMat]) -> RMat {
    let mut out = factors[0].clone();
    for f in &factors[1..] {
        out = out.kronecker(f);
    }
    out
}

/// Mean squared ℓ1 norm of the measured-outcome columns of a dual-channel
/// matrix (indexed [b, a]): (1/D)·Σ_a (Σ_b |D[b, a]|)².
pub fn dual_channel_objective(dual_channel: &RMat) -> f64 {
    let n = dual_channel.ncols();
    let total: f64 = (0..n)
        .map(|a| {
            (0..dual_channel.nrows())
                .map(|b| dual_channel[(b, a)].abs())
                .sum::<f64>()
                .powi(2)
        })
        .sum();
    total / n as f64
}

/// Objective for per-qubit dual factors applied to a transfer matrix:
/// the dual channel is (⊗ out) · T^(U) · (⊗ in)^⊤.
pub fn factors_objective(transfer: &RMat, out_factors: &[RMat], in_factors: &[RMat]) -> f64 {
    let d = kron_all(out_factors) * transfer * kron_all(in_factors).transpose();
    dual_channel_objective(&d)
}

/// One constrained move: maps a generalized inverse `current` of `t` and a
/// free perturbation `c` to another generalized inverse.
pub fn rao_step(t: &RMat, current: &RMat, c: &RMat) -> RMat {
    current + c - current * t * c * t * current
}

/// Metropolis acceptance for an energy change `delta` at `temperature`,
/// given a uniform variate `u`.
pub fn metropolis_accept(delta: f64, temperature: f64, u: f64) -> bool {
    delta <= 0.0 || u < (-delta / temperature).exp()
}

/// Annealing schedule. The defaults are the tuned values used throughout.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct AnnealConfig {
    /// Starting temperature.
    pub initial_temperature: f64,
    /// Multiplicative cooling applied every step.
    pub cooling_factor: f64,
    /// Initial proposal variance (per matrix entry).
    pub initial_variance: f64,
    /// Steps per acceptance-rate review.
    pub acceptance_window: usize,
    /// Halve the proposal width when the windowed rate drops below this.
    pub acceptance_target: f64,
    /// Lower bound for the proposal width.
    pub sigma_floor: f64,
    /// Stop when the best objective improves by less than this…
    pub improvement_tol: f64,
    /// …over this many accepted steps.
    pub improvement_window: usize,
    /// Hard step cap.
    pub max_steps: usize,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        Self {
            initial_temperature: 10.0,
            cooling_factor: 0.999,
            initial_variance: 0.1,
            acceptance_window: 100,
            acceptance_target: 0.23,
            sigma_floor: 1e-6,
            improvement_tol: 1e-2,
            improvement_window: 100,
            max_steps: 200_000,
        }
    }
}

/// Outcome of an annealing run (best state seen, not the final state).
#[derive(Debug, Clone)]
pub struct AnnealResult {
    /// Per-qubit dual factors for the repreparation side.
    pub out_factors: Vec<RMat>,
    /// Per-qubit dual factors for the input side.
    pub in_factors: Vec<RMat>,
    pub objective: f64,
    pub canonical_objective: f64,
    /// objective / canonical_objective.
    pub ratio: f64,
    pub steps: usize,
    pub accepted: usize,
    pub final_temperature: f64,
    pub final_sigma: f64,
    /// Max per-factor residual ‖T − T·B·T‖_max over all accepted states.
    pub max_accepted_residual: f64,
    /// Joint residual of the best dual pair against the k-qubit overlap.
    pub joint_residual: f64,
    /// Which chain produced this (0 for single-chain runs).
    pub chain: usize,
}

fn validate_anneal_inputs(transfer: &RMat, overlap_1q: &RMat, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParam("need at least one qubit".into()));
    }
    let n1 = overlap_1q.nrows();
    if overlap_1q.ncols() != n1 {
        return Err(Error::Dimension { expected: n1, got: overlap_1q.ncols() });
    }
    let nk = n1.pow(k as u32);
    if transfer.nrows() != nk || transfer.ncols() != nk {
        return Err(Error::Dimension { expected: nk, got: transfer.nrows() });
    }
    Ok(())
}

/// Simulated annealing over 2k per-qubit dual factors (k repreparation-
/// side, k input-side) for a k-qubit gate transfer matrix. Every factor
/// starts at the canonical pseudo-inverse of `overlap_1q`, and every
/// proposal perturbs all 2k factors jointly through [`rao_step`].
pub fn anneal<R: Rng + ?Sized>(
    transfer: &RMat,
    overlap_1q: &RMat,
    k: usize,
    cfg: &AnnealConfig,
    rng: &mut R,
) -> Result<AnnealResult> {
    validate_anneal_inputs(transfer, overlap_1q, k)?;
    let n1 = overlap_1q.nrows();
    let pinv = canonical_dual(overlap_1q).mat;
    let canonical_objective = {
        let factors: Vec<RMat> = vec![pinv.clone(); k];
        factors_objective(transfer, &factors, &factors)
    };

    let mut factors: Vec<RMat> = vec![pinv; 2 * k];
    let mut current = canonical_objective;
    let mut best = current;
    let mut best_factors = factors.clone();

    let mut temperature = cfg.initial_temperature;
    let mut sigma = cfg.initial_variance.sqrt();
    let mut steps = 0usize;
    let mut accepted = 0usize;
    let mut window_steps = 0usize;
    let mut window_accepted = 0usize;
    let mut accepted_since_checkpoint = 0usize;
    let mut best_at_checkpoint = best;
    let mut max_accepted_residual = 0.0f64;

    while steps < cfg.max_steps {
        steps += 1;
        let candidate: Vec<RMat> = factors
            .iter()
            .map(|f| {
                let c = RMat::from_fn(n1, n1, |_, _| {
                    sigma * rng.sample::<f64, _>(StandardNormal)
                });
                rao_step(overlap_1q, f, &c)
            })
            .collect();
        let cand_obj = factors_objective(transfer, &candidate[..k], &candidate[k..]);
        let delta = cand_obj - current;
        let take = metropolis_accept(delta, temperature, rng.random::<f64>());
        window_steps += 1;
        if take {
            for f in &candidate {
                let resid = max_abs(&(overlap_1q - overlap_1q * f * overlap_1q));
                max_accepted_residual = max_accepted_residual.max(resid);
            }
            factors = candidate;
            current = cand_obj;
            accepted += 1;
            window_accepted += 1;
            if current < best {
                best = current;
                best_factors = factors.clone();
            }
            accepted_since_checkpoint += 1;
            if accepted_since_checkpoint == cfg.improvement_window {
                if best_at_checkpoint - best < cfg.improvement_tol {
                    break;
                }
                best_at_checkpoint = best;
                accepted_since_checkpoint = 0;
            }
        }
        if window_steps == cfg.acceptance_window {
            let rate = window_accepted as f64 / window_steps as f64;
            if rate < cfg.acceptance_target {
                sigma = (sigma * 0.5).max(cfg.sigma_floor);
            }
            window_steps = 0;
            window_accepted = 0;
        }
        temperature *= cfg.cooling_factor;
    }

    let out_factors = best_factors[..k].to_vec();
    let in_factors = best_factors[k..].to_vec();
    let joint_t = kron_all(&vec![overlap_1q.clone(); k]);
    let joint_residual = [&out_factors, &in_factors]
        .iter()
        .map(|side| {
            let joint = kron_all(side);
            max_abs(&(&joint_t - &joint_t * joint * &joint_t))
        })
        .fold(0.0f64, f64::max);
    Ok(AnnealResult {
        out_factors,
        in_factors,
        objective: best,
        canonical_objective,
        ratio: best / canonical_objective,
        steps,
        accepted,
        final_temperature: temperature,
        final_sigma: sigma,
        max_accepted_residual,
        joint_residual,
        chain: 0,
    })
}

/// All `chains` independent annealing runs, in chain order: chain c runs
/// on its own generator (`master_seed`, stream 1 + c). Deterministic for a
/// given (`master_seed`, `chains`) regardless of thread count.
pub fn anneal_chains(
    transfer: &RMat,
    overlap_1q: &RMat,
    k: usize,
    cfg: &AnnealConfig,
    master_seed: u64,
    chains: usize,
) -> Result<Vec<AnnealResult>> {
    if chains == 0 {
        return Err(Error::InvalidParam("need at least one chain".into()));
    }
    (0..chains)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
            rng.set_stream(1 + c as u64);
            let mut res = anneal(transfer, overlap_1q, k, cfg, &mut rng)?;
            res.chain = c;
            Ok(res)
        })
        .collect()
}

/// Best-of-`chains` annealing: the chain with the lowest best objective
/// wins (lowest chain index on ties).
pub fn anneal_multi(
    transfer: &RMat,
    overlap_1q: &RMat,
    k: usize,
    cfg: &AnnealConfig,
    master_seed: u64,
    chains: usize,
) -> Result<AnnealResult> {
    let mut results = anneal_chains(transfer, overlap_1q, k, cfg, master_seed, chains)?;
    results.sort_by(|a, b| a.objective.total_cmp(&b.objective).then(a.chain.cmp(&b.chain)));
    Ok(results.into_iter().next().expect("at least one chain"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{channel_transfer, overlap_matrix_1q, pauli6, FactorableFrame};
    use crate::gates;

    fn t1() -> RMat {
        overlap_matrix_1q(&pauli6())
    }

    #[test]
    fn rao_step_stays_a_generalized_inverse_over_chained_moves() {
        let t = t1();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut b = canonical_dual(&t).mat;
        for _ in 0..50 {
            let c = RMat::from_fn(6, 6, |_, _| {
                0.3 * rng.sample::<f64, _>(StandardNormal)
            });
            b = rao_step(&t, &b, &c);
            let resid = max_abs(&(&t - &t * &b * &t));
            assert!(resid < 1e-10, "residual {resid}");
        }
        // The walk actually moves.
        assert!(max_abs(&(&b - &canonical_dual(&t).mat)) > 1e-3);
    }

    #[test]
    fn rao_step_with_zero_perturbation_is_identity() {
        let t = t1();
        let b = canonical_dual(&t).mat;
        let c = RMat::zeros(6, 6);
        assert!(max_abs(&(rao_step(&t, &b, &c) - &b)) < 1e-14);
    }

    #[test]
    fn metropolis_rules() {
        assert!(metropolis_accept(-0.5, 1.0, 0.999));
        assert!(metropolis_accept(0.0, 1e-9, 0.999));
        // exp(−1) ≈ 0.3679 boundary.
        assert!(metropolis_accept(1.0, 1.0, 0.36));
        assert!(!metropolis_accept(1.0, 1.0, 0.37));
        assert!(!metropolis_accept(1.0, 1e-6, 0.0001));
    }

    #[test]
    fn canonical_identity_objective_is_121() {
        let t = t1();
        let pinv = canonical_dual(&t).mat;
        let obj = factors_objective(&t, &[pinv.clone()], &[pinv]);
        assert!((obj - 121.0).abs() < 1e-9, "got {obj}");
    }

    #[test]
    fn objective_is_quadratic_under_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = RMat::from_fn(6, 6, |_, _| rng.random::<f64>() - 0.5);
        let s = 2.7;
        let scaled = &d * s;
        assert!(
            (dual_channel_objective(&scaled) - s * s * dual_channel_objective(&d)).abs()
                < 1e-10
        );
        // ℓ1 ≥ |plain sum| columnwise gives a cheap lower bound.
        let lower: f64 = (0..6)
            .map(|a| d.column(a).iter().sum::<f64>().powi(2))
            .sum::<f64>()
            / 6.0;
        assert!(dual_channel_objective(&d) >= lower - 1e-12);
    }

    #[test]
    fn short_anneal_improves_and_is_deterministic() {
        let frame = FactorableFrame::uniform(&pauli6(), 2);
        let tu = channel_transfer(&gates::rzz(std::f64::consts::FRAC_PI_4), &frame).unwrap();
        let cfg = AnnealConfig { max_steps: 600, ..AnnealConfig::default() };
        let run = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            anneal(&tu, &t1(), 2, &cfg, &mut rng).unwrap()
        };
        let a = run(5);
        let b = run(5);
        assert_eq!(a.objective, b.objective, "same seed, same result");
        assert_eq!(a.steps, b.steps);
        assert!(a.objective <= a.canonical_objective);
        assert!(a.ratio <= 1.0);
        assert!(a.max_accepted_residual < 1e-10);
        assert!(a.joint_residual < 1e-8);
        assert!(a.accepted > 0);
    }

    #[test]
    fn multi_chain_returns_the_best_chain() {
        let frame = FactorableFrame::uniform(&pauli6(), 2);
        let tu = channel_transfer(&gates::cnot(), &frame).unwrap();
        let cfg = AnnealConfig { max_steps: 300, ..AnnealConfig::default() };
        let best = anneal_multi(&tu, &t1(), 2, &cfg, 99, 3).unwrap();
        for c in 0..3 {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            rng.set_stream(1 + c as u64);
            let single = anneal(&tu, &t1(), 2, &cfg, &mut rng).unwrap();
            assert!(best.objective <= single.objective);
            if c == best.chain {
                assert_eq!(best.objective, single.objective);
            }
        }
    }
}
