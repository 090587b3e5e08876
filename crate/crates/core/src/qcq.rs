//! The measure-and-reprepare engine: turns interface-marked circuits into
//! unbiased Monte Carlo estimators.
//!
//! At each interface the gate qubits are measured with an informationally
//! complete POVM (outcome a), a repreparation outcome b is drawn from the
//! normalized magnitudes of the dual-channel column for a, the product
//! state σ_b is installed, and the shot weight picks up
//! `v = n(a)·t_b·sign`, where n(a) is the column's ℓ1 norm. Averaging
//! (readout × weight) over shots reproduces the virtualized circuit's
//! expectation value exactly; the price is a variance set by the
//! negativity n(U) = max_a n(a) · max_b t_b.

use crate::circuits::{Circuit, Op};
use crate::densim::{DensityMatrix, Observable};
use crate::error::{Error, Result};
use crate::frames::{
    canonical_dual, channel_transfer, dual_channel_matrix, overlap_matrix, overlap_matrix_1q,
    DualCoefficients, FactorableFrame, SingleQubitFrame,
};
use crate::linalg::{CMat, C64, RMat};
use crate::noise::NoiseModel;
use crate::stats::{mean_and_stderr, sample_index};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Hard cap on Π(outcomes²) across interfaces for exact enumeration.
pub const ENUMERATION_CAP: f64 = 1e6;

/// How the final observable is read out per shot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Readout {
    /// Exact expectation of the post-circuit state (zero readout variance).
    Exact,
    /// One projective eigenvalue sample (bounded shots, Hoeffding-friendly).
    Sampled,
}

/// The dual coefficient matrices used on the two sides of one interface.
#[derive(Debug, Clone)]
pub struct InterfaceDuals {
    /// Applied to the measured-side frame (the repreparation table rows).
    pub dual_out: DualCoefficients,
    /// Applied to the input-side frame.
    pub dual_in: DualCoefficients,
}

impl InterfaceDuals {
    /// Canonical (pseudo-inverse) duals on both sides, composed per qubit.
    pub fn canonical(frame: &FactorableFrame) -> Self {
        let factors: Vec<RMat> = (0..frame.n_factors())
            .map(|j| canonical_dual(&overlap_matrix_1q(frame.factor(j))).mat)
            .collect();
        let dual = DualCoefficients::from_factors(&factors, crate::frames::Provenance::Canonical);
        Self { dual_out: dual.clone(), dual_in: dual }
    }

    /// Joint duals from per-qubit factor matrices (e.g. annealed factors).
    pub fn from_factors(
        out_factors: &[RMat],
        in_factors: &[RMat],
        provenance: crate::frames::Provenance,
    ) -> Self {
        Self {
            dual_out: DualCoefficients::from_factors(out_factors, provenance),
            dual_in: DualCoefficients::from_factors(in_factors, provenance),
        }
    }
}

/// Quasi-probability sampling table for one virtualized gate.
#[derive(Debug, Clone)]
pub struct InterfaceTable {
    /// T^(U)[b, a] = Tr[M_b U M_a U†].
    pub transfer: RMat,
    /// T̃^(U) = Tau_out · T^(U) · Tau_in^⊤, indexed [b, a].
    pub dual_channel: RMat,
    /// P[a][b]: repreparation distribution given measured outcome a.
    pub probs: Vec<Vec<f64>>,
    /// v[a][b]: shot weight for the (a, b) pair.
    pub weights: Vec<Vec<f64>>,
    /// n(a) = Σ_b |T̃[b, a]|.
    pub row_norms: Vec<f64>,
    /// t_b = Tr[M_b].
    pub traces: Vec<f64>,
    /// Negativity n(U) = max_a n(a) · max_b t_b.
    pub negativity: f64,
}

/// Split a dual-channel matrix (indexed [b, a]) into the per-measured-
/// outcome sampling distributions, weights, and ℓ1 norms. Zero-norm
/// columns get a degenerate distribution with all-zero weights.
pub(crate) fn sampling_tables(
    dual_channel: &RMat,
    traces: &[f64],
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>) {
    let n = dual_channel.ncols();
    let nb = dual_channel.nrows();
    let mut probs = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut norms = Vec::with_capacity(n);
    for a in 0..n {
        let norm: f64 = (0..nb).map(|b| dual_channel[(b, a)].abs()).sum();
        if norm <= 1e-14 {
            let mut p = vec![0.0; nb];
            p[0] = 1.0;
            probs.push(p);
            weights.push(vec![0.0; nb]);
            norms.push(0.0);
            continue;
        }
        let p: Vec<f64> = (0..nb).map(|b| dual_channel[(b, a)].abs() / norm).collect();
        let v: Vec<f64> = (0..nb)
            .map(|b| {
                let c = dual_channel[(b, a)];
                if c == 0.0 {
                    0.0
                } else {
                    norm * traces[b] * c.signum()
                }
            })
            .collect();
        probs.push(p);
        weights.push(v);
        norms.push(norm);
    }
    (probs, weights, norms)
}

/// Build the sampling table for a gate virtualized through the given frame
/// and duals, verifying the construction invariants.
pub fn build_interface_table(
    gate: &CMat,
    frame: &FactorableFrame,
    duals: &InterfaceDuals,
) -> Result<InterfaceTable> {
    let t = overlap_matrix(frame);
    let transfer = channel_transfer(gate, frame)?;
    let dual_channel = dual_channel_matrix(&duals.dual_out, &transfer, &duals.dual_in, &t)?;
    let n = frame.n_outcomes();
    let traces: Vec<f64> = (0..n).map(|a| frame.trace(a)).collect();
    let (probs, weights, row_norms) = sampling_tables(&dual_channel, &traces);
    // Invariants: each distribution sums to one, and P·v recovers the
    // trace-weighted table entries.
    for a in 0..n {
        let psum: f64 = probs[a].iter().sum();
        if (psum - 1.0).abs() > 1e-12 {
            return Err(Error::Probability(psum));
        }
        for b in 0..n {
            let lhs = probs[a][b] * weights[a][b];
            let rhs = if row_norms[a] == 0.0 {
                0.0
            } else {
                dual_channel[(b, a)] * traces[b]
            };
            if (lhs - rhs).abs() > 1e-12 {
                return Err(Error::InvalidParam(format!(
                    "sampling table inconsistent at ({a}, {b}): {lhs} vs {rhs}"
                )));
            }
        }
    }
    let max_norm = row_norms.iter().fold(0.0f64, |m, &x| m.max(x));
    let max_trace = traces.iter().fold(0.0f64, |m, &x| m.max(x));
    let negativity = max_norm * max_trace;
    Ok(InterfaceTable { transfer, dual_channel, probs, weights, row_norms, traces, negativity })
}

/// Everything cached for one interface op.
#[derive(Debug, Clone)]
struct InterfacePlan {
    qubits: Vec<usize>,
    frame: FactorableFrame,
    table: InterfaceTable,
    /// σ_b with repreparation noise folded in (per factor, then composed).
    states_noised: Vec<CMat>,
    /// Clean σ_b for the contract-shaped repreparation path.
    states: Vec<CMat>,
}

/// One Monte Carlo shot: readout value, quasi-probability weight, and the
/// (measured, reprepared) outcome pair per interface.
#[derive(Debug, Clone)]
pub struct ShotOutcome {
    pub value: f64,
    pub weight: f64,
    pub records: Vec<(usize, usize)>,
}

/// Result of a Monte Carlo estimate.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub mean: f64,
    /// Sample standard deviation of (value × weight) over √shots.
    pub stderr: f64,
    pub shots: usize,
    /// Total sampling overhead n(→) = Π n(U) over interfaces.
    pub negativity: f64,
    pub seed: u64,
}

/// Hoeffding-style shot budget: ceil(n² · 2‖O‖² · ln(2/δ) / ε²), at least 1.
pub fn required_samples(negativity: f64, obs_norm: f64, epsilon: f64, delta: f64) -> Result<usize> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParam(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParam(format!("delta must be in (0, 1), got {delta}")));
    }
    if !(negativity >= 0.0) || !(obs_norm >= 0.0) {
        return Err(Error::InvalidParam("negativity and norm must be nonnegative".into()));
    }
    let m = (negativity * obs_norm / epsilon).powi(2) * 2.0 * (2.0 / delta).ln();
    Ok((m.ceil() as usize).max(1))
}

/// A circuit bound to its noise model, observable, readout mode, and one
/// sampling table per interface.
pub struct QcqEngine {
    circuit: Circuit,
    noise: NoiseModel,
    observable: Observable,
    readout: Readout,
    plans: Vec<InterfacePlan>,
    negativity: f64,
}

/// Deterministic prefix shared by every shot: the state just before the
/// first interface's measurement (measurement noise already applied) and
/// the normalized rest states for each measurable outcome.
struct PrefixCache {
    /// Index of the first op after the first interface.
    suffix_start: usize,
    /// Final state when the circuit has no interfaces.
    plain: Option<DensityMatrix>,
    probs: Vec<f64>,
    rests: Vec<Option<CMat>>,
}

impl QcqEngine {
    /// Bind a circuit. `duals` assigns coefficient matrices per interface
    /// op, in circuit order.
    pub fn new(
        circuit: Circuit,
        noise: NoiseModel,
        observable: Observable,
        readout: Readout,
        frame: &SingleQubitFrame,
        duals: Vec<InterfaceDuals>,
    ) -> Result<Self> {
        let marks: Vec<usize> = circuit
            .ops
            .iter()
            .enumerate()
            .filter_map(|(i, op)| op.is_interface().then_some(i))
            .collect();
        if marks.len() != duals.len() {
            return Err(Error::Dimension { expected: marks.len(), got: duals.len() });
        }
        for &q in &observable.qubits {
            if q >= circuit.n {
                return Err(Error::QubitIndex { index: q, n: circuit.n });
            }
        }
        let mut plans = Vec::with_capacity(marks.len());
        let mut negativity = 1.0;
        for (&op_idx, dual) in marks.iter().zip(&duals) {
            let gate = circuit.ops[op_idx].gate();
            let k = gate.qubits.len();
            let jframe = FactorableFrame::uniform(frame, k);
            let table = build_interface_table(&gate.matrix, &jframe, dual)?;
            negativity *= table.negativity;
            let n_out = jframe.n_outcomes();
            let states: Vec<CMat> = (0..n_out).map(|b| jframe.state(b)).collect();
            let states_noised: Vec<CMat> = (0..n_out)
                .map(|b| {
                    let digits = jframe.digits(b);
                    let lam = noise.lambda_reprep;
                    let noised = |j: usize| -> CMat {
                        let s = jframe.factor(j).state(digits[j]);
                        s * C64::from(1.0 - lam)
                            + CMat::identity(2, 2) * C64::from(lam / 2.0)
                    };
                    let mut m = noised(0);
                    for j in 1..k {
                        m = m.kronecker(&noised(j));
                    }
                    m
                })
                .collect();
            plans.push(InterfacePlan {
                qubits: gate.qubits.clone(),
                frame: jframe,
                table,
                states_noised,
                states,
            });
        }
        Ok(Self { circuit, noise, observable, readout, plans, negativity })
    }

    /// Canonical-dual engine over the Pauli-6 frame.
    pub fn with_canonical_duals(
        circuit: Circuit,
        noise: NoiseModel,
        observable: Observable,
        readout: Readout,
    ) -> Result<Self> {
        let frame = crate::frames::pauli6();
        let duals: Vec<InterfaceDuals> = circuit
            .ops
            .iter()
            .filter(|op| op.is_interface())
            .map(|op| {
                let k = op.gate().qubits.len();
                InterfaceDuals::canonical(&FactorableFrame::uniform(&frame, k))
            })
            .collect();
        Self::new(circuit, noise, observable, readout, &frame, duals)
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn observable(&self) -> &Observable {
        &self.observable
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    /// Total sampling overhead n(→) = Π over interfaces of n(U).
    pub fn negativity(&self) -> f64 {
        self.negativity
    }

    pub fn interface_tables(&self) -> Vec<&InterfaceTable> {
        self.plans.iter().map(|p| &p.table).collect()
    }

    /// Shots needed for |estimate − truth| ≤ ε with probability 1 − δ
    /// under sampled readout.
    pub fn required_samples(&self, epsilon: f64, delta: f64) -> Result<usize> {
        required_samples(self.negativity, self.observable.norm(), epsilon, delta)
    }

    fn readout_value<R: Rng + ?Sized>(&self, rho: &DensityMatrix, rng: &mut R) -> Result<f64> {
        match self.readout {
            Readout::Exact => rho.expectation(&self.observable),
            Readout::Sampled => rho.sample_eigenvalue(&self.observable, rng),
        }
    }

    /// Run the ops in `ops` (starting at interface counter `iface_idx`),
    /// consuming randomness only at interfaces.
    fn run_ops<R: Rng + ?Sized>(
        &self,
        rho: &mut DensityMatrix,
        ops: &[Op],
        mut iface_idx: usize,
        weight: &mut f64,
        records: &mut Vec<(usize, usize)>,
        rng: &mut R,
    ) -> Result<()> {
        for op in ops {
            match op {
                Op::Gate(g) => {
                    rho.apply_gate(&g.matrix, &g.qubits)?;
                    if g.qubits.len() == 2 && self.noise.lambda_unit > 0.0 {
                        rho.apply_depolarizing(self.noise.lambda_unit, &g.qubits)?;
                    }
                }
                Op::Interface(_) => {
                    let plan = &self.plans[iface_idx];
                    let a = rho.povm_measure(
                        &plan.frame,
                        &plan.qubits,
                        self.noise.lambda_meas,
                        rng,
                    )?;
                    let b = sample_index(&plan.table.probs[a], rng.random::<f64>());
                    *weight *= plan.table.weights[a][b];
                    rho.reprepare(&plan.qubits, &plan.states[b], self.noise.lambda_reprep)?;
                    records.push((a, b));
                    iface_idx += 1;
                }
            }
        }
        Ok(())
    }

    /// One full-fidelity Monte Carlo shot from the all-zeros state.
    pub fn run_shot<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ShotOutcome> {
        let mut rho = DensityMatrix::zero_state(self.circuit.n)?;
        let mut weight = 1.0;
        let mut records = Vec::with_capacity(self.plans.len());
        self.run_ops(&mut rho, &self.circuit.ops, 0, &mut weight, &mut records, rng)?;
        let value = self.readout_value(&rho, rng)?;
        Ok(ShotOutcome { value, weight, records })
    }

    /// Precompute everything deterministic up to (and including) the first
    /// interface's measurement distribution.
    fn build_prefix(&self) -> Result<PrefixCache> {
        let first = self.circuit.ops.iter().position(|op| op.is_interface());
        let mut rho = DensityMatrix::zero_state(self.circuit.n)?;
        let prefix_end = first.unwrap_or(self.circuit.ops.len());
        for op in &self.circuit.ops[..prefix_end] {
            let g = op.gate();
            rho.apply_gate(&g.matrix, &g.qubits)?;
            if g.qubits.len() == 2 && self.noise.lambda_unit > 0.0 {
                rho.apply_depolarizing(self.noise.lambda_unit, &g.qubits)?;
            }
        }
        let Some(first_idx) = first else {
            return Ok(PrefixCache {
                suffix_start: prefix_end,
                plain: Some(rho),
                probs: Vec::new(),
                rests: Vec::new(),
            });
        };
        let plan = &self.plans[0];
        if self.noise.lambda_meas > 0.0 {
            rho.apply_depolarizing(self.noise.lambda_meas, &plan.qubits)?;
        }
        let probs = rho.povm_probabilities(&plan.frame, &plan.qubits)?;
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Probability(total));
        }
        let (bases, offs) = rho.scatter_tables(&plan.qubits);
        let rests: Vec<Option<CMat>> = (0..plan.frame.n_outcomes())
            .map(|a| {
                if probs[a] <= 0.0 {
                    return Ok(None);
                }
                let mut branch = rho.clone();
                branch.conjugate_local(&plan.frame.sqrt_element(a), &bases, &offs);
                let tr = branch.trace_re();
                let rest = branch.partial_trace(&plan.qubits)? / C64::from(tr);
                Ok(Some(rest))
            })
            .collect::<Result<_>>()?;
        Ok(PrefixCache { suffix_start: first_idx + 1, plain: None, probs, rests })
    }

    /// Run one shot on top of the prefix cache. Draw-for-draw identical to
    /// [`QcqEngine::run_shot`] with the same generator state.
    fn run_shot_cached<R: Rng + ?Sized>(
        &self,
        cache: &PrefixCache,
        rng: &mut R,
    ) -> Result<ShotOutcome> {
        let Some(ref plain) = cache.plain else {
            let plan = &self.plans[0];
            let a = sample_index(&cache.probs, rng.random::<f64>());
            let b = sample_index(&plan.table.probs[a], rng.random::<f64>());
            let mut weight = plan.table.weights[a][b];
            let rest = cache.rests[a].as_ref().expect("sampled outcome has support");
            let mut rho = DensityMatrix::from_product(
                self.circuit.n,
                &plan.qubits,
                &plan.states_noised[b],
                rest,
            )?;
            let mut records = vec![(a, b)];
            self.run_ops(
                &mut rho,
                &self.circuit.ops[cache.suffix_start..],
                1,
                &mut weight,
                &mut records,
                rng,
            )?;
            let value = self.readout_value(&rho, rng)?;
            return Ok(ShotOutcome { value, weight, records });
        };
        let value = self.readout_value(plain, rng)?;
        Ok(ShotOutcome { value, weight: 1.0, records: Vec::new() })
    }

    /// Monte Carlo estimate over `shots` shots. Shot i uses an independent
    /// generator (`seed`, stream 1 + i), so results are independent of
    /// thread count and identical to sequential [`QcqEngine::run_shot`]
    /// runs on those generators.
    pub fn estimate(&self, shots: usize, seed: u64) -> Result<Estimate> {
        self.estimate_with_samples(shots, seed).map(|(e, _)| e)
    }

    /// [`QcqEngine::estimate`], also returning the per-shot outcomes.
    pub fn estimate_with_samples(
        &self,
        shots: usize,
        seed: u64,
    ) -> Result<(Estimate, Vec<ShotOutcome>)> {
        if shots == 0 {
            return Err(Error::InvalidParam("need at least one shot".into()));
        }
        let cache = self.build_prefix()?;
        let outcomes: Vec<ShotOutcome> = (0..shots)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(1 + i as u64);
                self.run_shot_cached(&cache, &mut rng)
            })
            .collect::<Result<_>>()?;
        let xs: Vec<f64> = outcomes.iter().map(|o| o.value * o.weight).collect();
        let (mean, stderr) = mean_and_stderr(&xs);
        Ok((
            Estimate { mean, stderr, shots, negativity: self.negativity, seed },
            outcomes,
        ))
    }

    /// Exact expectation of the full hybrid procedure (noise included) by
    /// propagating the quasi-probability channel itself — no sampling.
    ///
    /// Errors with [`Error::EnumerationTooLarge`] when Π(outcomes²) over
    /// interfaces exceeds [`ENUMERATION_CAP`].
    pub fn exact_expectation(&self) -> Result<f64> {
        let mut cap = 1.0f64;
        for plan in &self.plans {
            cap *= (plan.frame.n_outcomes() as f64).powi(2);
            if cap > ENUMERATION_CAP {
                return Err(Error::EnumerationTooLarge { size: cap, cap: ENUMERATION_CAP });
            }
        }
        let mut rho = DensityMatrix::zero_state(self.circuit.n)?;
        let mut iface_idx = 0usize;
        for op in &self.circuit.ops {
            match op {
                Op::Gate(g) => {
                    rho.apply_gate(&g.matrix, &g.qubits)?;
                    if g.qubits.len() == 2 && self.noise.lambda_unit > 0.0 {
                        rho.apply_depolarizing(self.noise.lambda_unit, &g.qubits)?;
                    }
                }
                Op::Interface(_) => {
                    let plan = &self.plans[iface_idx];
                    if self.noise.lambda_meas > 0.0 {
                        rho.apply_depolarizing(self.noise.lambda_meas, &plan.qubits)?;
                    }
                    let n_out = plan.frame.n_outcomes();
                    let (bases, offs) = rho.scatter_tables(&plan.qubits);
                    // Unnormalized conditional rest states R_a.
                    let rests: Vec<CMat> = (0..n_out)
                        .map(|a| {
                            let mut branch = rho.clone();
                            branch.conjugate_local(
                                &plan.frame.sqrt_element(a),
                                &bases,
                                &offs,
                            );
                            branch.partial_trace(&plan.qubits)
                        })
                        .collect::<Result<_>>()?;
                    let rest_dim = rests[0].nrows();
                    let mut acc =
                        CMat::zeros(rho.matrix().nrows(), rho.matrix().ncols());
                    for b in 0..n_out {
                        let mut s_b = CMat::zeros(rest_dim, rest_dim);
                        for (a, rest) in rests.iter().enumerate() {
                            let c = plan.table.dual_channel[(b, a)];
                            if c != 0.0 {
                                s_b += rest * C64::from(c);
                            }
                        }
                        let part = DensityMatrix::from_product(
                            self.circuit.n,
                            &plan.qubits,
                            &plan.states_noised[b],
                            &s_b,
                        )?;
                        acc += part.matrix() * C64::from(plan.table.traces[b]);
                    }
                    rho = DensityMatrix::from_matrix(self.circuit.n, acc)?;
                    iface_idx += 1;
                }
            }
        }
        rho.expectation(&self.observable)
    }
}
