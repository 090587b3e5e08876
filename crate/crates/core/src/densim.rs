//! Dense density-matrix simulation for 1..=12 qubits.
//!
//! Qubit 0 is the most significant bit of basis-state indices, and the
//! first entry of a gate's qubit list is the most significant bit of the
//! gate's own index space (so `cnot()` on `[c, t]` has control `c`).
//!
//! Depolarizing noise uses the algebraic form
//! `ρ ↦ (1−λ)ρ + (λ/2)·I_q ⊗ Tr_q[ρ]`, which equals the four-operator
//! Kraus channel exactly but costs a fraction of a gate application.

use crate::error::{Error, Result};
use crate::frames::FactorableFrame;
use crate::linalg::{self, hermiticity_deviation, unitarity_deviation, CMat, CVec, C64, ZERO};
use crate::stats::sample_index;
use rand::Rng;

/// Largest supported register (dense storage grows as 4^N).
pub const MAX_QUBITS: usize = 12;

fn check_targets(n: usize, qubits: &[usize]) -> Result<()> {
    for (i, &q) in qubits.iter().enumerate() {
        if q >= n {
            return Err(Error::QubitIndex { index: q, n });
        }
        if qubits[..i].contains(&q) {
            return Err(Error::DuplicateTarget(q));
        }
    }
    Ok(())
}

/// Index scatter tables for a qubit subset of an `n`-qubit register:
/// `bases` enumerates the complement subsystem (bits at `qubits` positions
/// zero), `offs[g]` scatters a local index `g` onto the `qubits` positions
/// with `qubits[0]` as the most significant local bit.
fn scatter_tables(n: usize, qubits: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let k = qubits.len();
    let dim = 1usize << n;
    let masks: Vec<usize> = qubits.iter().map(|&q| 1usize << (n - 1 - q)).collect();
    let all: usize = masks.iter().fold(0, |acc, m| acc | m);
    let offs: Vec<usize> = (0..1usize << k)
        .map(|g| {
            let mut o = 0;
            for (j, m) in masks.iter().enumerate() {
                if (g >> (k - 1 - j)) & 1 == 1 {
                    o |= m;
                }
            }
            o
        })
        .collect();
    let bases: Vec<usize> = (0..dim).filter(|x| x & all == 0).collect();
    (bases, offs)
}

/// A named Hermitian observable on an ordered subset of qubits.
#[derive(Debug, Clone)]
pub struct Observable {
    pub name: String,
    pub qubits: Vec<usize>,
    matrix: CMat,
    norm: f64,
    eigvals: Vec<f64>,
    eigvecs: CMat,
}

impl Observable {
    /// Validates Hermiticity (≤ 1e-10) and caches the eigendecomposition
    /// used for spectral norm and eigenvalue-sampled readout.
    pub fn new(name: impl Into<String>, qubits: Vec<usize>, matrix: CMat) -> Result<Self> {
        let dim = 1usize << qubits.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Dimension { expected: dim, got: matrix.nrows() });
        }
        for (i, &q) in qubits.iter().enumerate() {
            if qubits[..i].contains(&q) {
                return Err(Error::DuplicateTarget(q));
            }
        }
        let herm = hermiticity_deviation(&matrix);
        if herm > 1e-10 {
            return Err(Error::NonHermitian(herm));
        }
        let (eigvals, eigvecs) = linalg::hermitian_eigen(&matrix);
        let norm = eigvals.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        Ok(Self { name: name.into(), qubits, matrix, norm, eigvals, eigvecs })
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// Spectral norm ‖O‖ (largest eigenvalue magnitude).
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigvals
    }
}

/// Dense density matrix on `n` qubits.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    n: usize,
    mat: CMat,
}

impl DensityMatrix {
    /// The all-zeros computational basis state |0…0⟩⟨0…0|.
    pub fn zero_state(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::QubitCount(n));
        }
        let dim = 1usize << n;
        let mut mat = CMat::zeros(dim, dim);
        mat[(0, 0)] = C64::from(1.0);
        Ok(Self { n, mat })
    }

    /// Wraps an existing matrix after a shape check (content checks are the
    /// caller's business; see [`DensityMatrix::check_physical`]).
    pub fn from_matrix(n: usize, mat: CMat) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::QubitCount(n));
        }
        let dim = 1usize << n;
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::Dimension { expected: dim, got: mat.nrows() });
        }
        Ok(Self { n, mat })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1usize << self.n
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn trace_re(&self) -> f64 {
        self.mat.trace().re
    }

    fn validate_targets(&self, qubits: &[usize]) -> Result<()> {
        check_targets(self.n, qubits)
    }

    /// See [`scatter_tables`].
    pub(crate) fn scatter_tables(&self, qubits: &[usize]) -> (Vec<usize>, Vec<usize>) {
        scatter_tables(self.n, qubits)
    }

    /// ρ ← (A ⊗ I) ρ (A ⊗ I)† for an arbitrary local operator A.
    pub(crate) fn conjugate_local(&mut self, op: &CMat, bases: &[usize], offs: &[usize]) {
        let dim = self.dim();
        let dk = offs.len();
        let mut tmp = vec![ZERO; dk];
        // Row side: ρ ← (A ⊗ I) ρ.
        for c in 0..dim {
            for &base in bases {
                for (g, o) in offs.iter().enumerate() {
                    tmp[g] = self.mat[(base | o, c)];
                }
                for (g, o) in offs.iter().enumerate() {
                    let mut acc = ZERO;
                    for (gp, t) in tmp.iter().enumerate() {
                        acc += op[(g, gp)] * t;
                    }
                    self.mat[(base | o, c)] = acc;
                }
            }
        }
        // Column side: ρ ← ρ (A ⊗ I)†.
        for r in 0..dim {
            for &base in bases {
                for (g, o) in offs.iter().enumerate() {
                    tmp[g] = self.mat[(r, base | o)];
                }
                for (g, o) in offs.iter().enumerate() {
                    let mut acc = ZERO;
                    for (gp, t) in tmp.iter().enumerate() {
                        acc += t * op[(g, gp)].conj();
                    }
                    self.mat[(r, base | o)] = acc;
                }
            }
        }
    }

    /// Apply a unitary gate to the listed qubits (first qubit = most
    /// significant bit of the gate matrix).
    pub fn apply_gate(&mut self, u: &CMat, qubits: &[usize]) -> Result<()> {
        self.validate_targets(qubits)?;
        let dk = 1usize << qubits.len();
        if u.nrows() != dk || u.ncols() != dk {
            return Err(Error::Dimension { expected: dk, got: u.nrows() });
        }
        let udev = unitarity_deviation(u);
        if udev > 1e-10 {
            return Err(Error::NonUnitary(udev));
        }
        let (bases, offs) = self.scatter_tables(qubits);
        self.conjugate_local(u, &bases, &offs);
        Ok(())
    }

    /// ρ ← (A ⊗ I) ρ (A ⊗ I)† for an arbitrary (not necessarily unitary)
    /// operator on the listed qubits. No completeness check — this is a
    /// single instrument branch; the caller owns normalization.
    pub fn apply_local_operator(&mut self, op: &CMat, qubits: &[usize]) -> Result<()> {
        self.validate_targets(qubits)?;
        let dk = 1usize << qubits.len();
        if op.nrows() != dk || op.ncols() != dk {
            return Err(Error::Dimension { expected: dk, got: op.nrows() });
        }
        let (bases, offs) = self.scatter_tables(qubits);
        self.conjugate_local(op, &bases, &offs);
        Ok(())
    }

    /// Apply a Kraus channel ρ ← Σ_i K_i ρ K_i† to the listed qubits.
    /// The operators must satisfy Σ K†K = I to 1e-10.
    pub fn apply_kraus(&mut self, ops: &[CMat], qubits: &[usize]) -> Result<()> {
        self.validate_targets(qubits)?;
        let dk = 1usize << qubits.len();
        let mut complete = CMat::zeros(dk, dk);
        for k in ops {
            if k.nrows() != dk || k.ncols() != dk {
                return Err(Error::Dimension { expected: dk, got: k.nrows() });
            }
            complete += k.adjoint() * k;
        }
        let dev = linalg::max_abs_c(&(complete - CMat::identity(dk, dk)));
        if dev > 1e-10 {
            return Err(Error::InvalidParam(format!(
                "Kraus completeness violated by {dev:.3e}"
            )));
        }
        let (bases, offs) = self.scatter_tables(qubits);
        let mut out = Self { n: self.n, mat: CMat::zeros(self.dim(), self.dim()) };
        for k in ops {
            let mut branch = self.clone();
            branch.conjugate_local(k, &bases, &offs);
            out.mat += branch.mat;
        }
        *self = out;
        Ok(())
    }

    /// Single-qubit depolarizing of strength λ on each listed qubit.
    pub fn apply_depolarizing(&mut self, lambda: f64, qubits: &[usize]) -> Result<()> {
        self.validate_targets(qubits)?;
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Probability(lambda));
        }
        if lambda == 0.0 {
            return Ok(());
        }
        let dim = self.dim();
        let keep = C64::from(1.0 - lambda);
        let stay = C64::from(1.0 - lambda / 2.0);
        let mix = C64::from(lambda / 2.0);
        for &q in qubits {
            let m = 1usize << (self.n - 1 - q);
            for r0 in (0..dim).filter(|x| x & m == 0) {
                for c0 in (0..dim).filter(|x| x & m == 0) {
                    let (r1, c1) = (r0 | m, c0 | m);
                    let a = self.mat[(r0, c0)];
                    let b = self.mat[(r1, c1)];
                    self.mat[(r0, c0)] = stay * a + mix * b;
                    self.mat[(r1, c1)] = mix * a + stay * b;
                    self.mat[(r0, c1)] *= keep;
                    self.mat[(r1, c0)] *= keep;
                }
            }
        }
        Ok(())
    }

    /// Reduced state on the listed qubits, in the given order.
    pub fn reduced_state(&self, qubits: &[usize]) -> Result<CMat> {
        self.validate_targets(qubits)?;
        let dk = 1usize << qubits.len();
        let (bases, offs) = self.scatter_tables(qubits);
        let mut out = CMat::zeros(dk, dk);
        for g in 0..dk {
            for gp in 0..dk {
                let mut acc = ZERO;
                for &base in &bases {
                    acc += self.mat[(base | offs[g], base | offs[gp])];
                }
                out[(g, gp)] = acc;
            }
        }
        Ok(out)
    }

    /// Partial trace over the listed qubits; the remaining qubits keep
    /// their relative order.
    pub fn partial_trace(&self, traced: &[usize]) -> Result<CMat> {
        self.validate_targets(traced)?;
        let kept: Vec<usize> = (0..self.n).filter(|q| !traced.contains(q)).collect();
        self.reduced_state(&kept)
    }

    /// Outcome probabilities p_a = Tr[(M_a ⊗ I) ρ] of a POVM on the listed
    /// qubits (frame factor j acts on `qubits[j]`).
    pub fn povm_probabilities(
        &self,
        frame: &FactorableFrame,
        qubits: &[usize],
    ) -> Result<Vec<f64>> {
        if frame.n_factors() != qubits.len() {
            return Err(Error::Dimension { expected: frame.n_factors(), got: qubits.len() });
        }
        let red = self.reduced_state(qubits)?;
        Ok((0..frame.n_outcomes())
            .map(|a| linalg::hs_inner(&frame.element(a), &red).re)
            .collect())
    }

    /// Sample a POVM outcome and apply the generalized Lüders update
    /// ρ ← K_a ρ K_a† / p_a with K_a = √M_a.
    ///
    /// If `lambda_meas` > 0, depolarizing noise hits the measured qubits
    /// first. Errors if the outcome probabilities stray from unit sum by
    /// more than 1e-9. Returns the sampled joint outcome index.
    pub fn povm_measure<R: Rng + ?Sized>(
        &mut self,
        frame: &FactorableFrame,
        qubits: &[usize],
        lambda_meas: f64,
        rng: &mut R,
    ) -> Result<usize> {
        if lambda_meas > 0.0 {
            self.apply_depolarizing(lambda_meas, qubits)?;
        }
        let probs = self.povm_probabilities(frame, qubits)?;
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Probability(total));
        }
        let a = sample_index(&probs, rng.random::<f64>());
        let (bases, offs) = self.scatter_tables(qubits);
        self.conjugate_local(&frame.sqrt_element(a), &bases, &offs);
        let tr = self.trace_re();
        self.mat /= C64::from(tr);
        Ok(a)
    }

    /// Replace the state of the listed qubits with the product state
    /// `sigma` (dimension 2^k, `qubits[0]` most significant), leaving the
    /// rest marginal untouched. If `lambda_reprep` > 0, depolarizing noise
    /// hits the reprepared qubits afterwards.
    pub fn reprepare(&mut self, qubits: &[usize], sigma: &CMat, lambda_reprep: f64) -> Result<()> {
        self.validate_targets(qubits)?;
        let dk = 1usize << qubits.len();
        if sigma.nrows() != dk || sigma.ncols() != dk {
            return Err(Error::Dimension { expected: dk, got: sigma.nrows() });
        }
        let rest = self.partial_trace(qubits)?;
        let (bases, offs) = self.scatter_tables(qubits);
        for (hr, &br) in bases.iter().enumerate() {
            for (hc, &bc) in bases.iter().enumerate() {
                let r = rest[(hr, hc)];
                for (gr, &or) in offs.iter().enumerate() {
                    for (gc, &oc) in offs.iter().enumerate() {
                        self.mat[(br | or, bc | oc)] = sigma[(gr, gc)] * r;
                    }
                }
            }
        }
        if lambda_reprep > 0.0 {
            self.apply_depolarizing(lambda_reprep, qubits)?;
        }
        Ok(())
    }

    /// Build the product arrangement `sub` (on the listed qubits, first
    /// qubit most significant) ⊗ `rest` (on the remaining qubits in
    /// increasing order) as a full register matrix.
    pub fn from_product(n: usize, qubits: &[usize], sub: &CMat, rest: &CMat) -> Result<Self> {
        let mut out = Self::zero_state(n)?;
        out.validate_targets(qubits)?;
        let dk = 1usize << qubits.len();
        let dr = 1usize << (n - qubits.len());
        if sub.nrows() != dk || sub.ncols() != dk {
            return Err(Error::Dimension { expected: dk, got: sub.nrows() });
        }
        if rest.nrows() != dr || rest.ncols() != dr {
            return Err(Error::Dimension { expected: dr, got: rest.nrows() });
        }
        let (bases, offs) = out.scatter_tables(qubits);
        for (hr, &br) in bases.iter().enumerate() {
            for (hc, &bc) in bases.iter().enumerate() {
                let r = rest[(hr, hc)];
                for (gr, &or) in offs.iter().enumerate() {
                    for (gc, &oc) in offs.iter().enumerate() {
                        out.mat[(br | or, bc | oc)] = sub[(gr, gc)] * r;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Exact expectation value Tr[(O ⊗ I) ρ].
    pub fn expectation(&self, obs: &Observable) -> Result<f64> {
        let red = self.reduced_state(&obs.qubits)?;
        Ok(linalg::hs_inner(obs.matrix(), &red).re)
    }

    /// Projectively sample one eigenvalue of the observable: outcome i has
    /// probability ⟨v_i|ρ|v_i⟩ on the observable's qubits.
    pub fn sample_eigenvalue<R: Rng + ?Sized>(
        &self,
        obs: &Observable,
        rng: &mut R,
    ) -> Result<f64> {
        let red = self.reduced_state(&obs.qubits)?;
        let probs: Vec<f64> = (0..obs.eigvals.len())
            .map(|i| {
                let v = obs.eigvecs.column(i);
                let mut acc = ZERO;
                for r in 0..red.nrows() {
                    for c in 0..red.ncols() {
                        acc += v[r].conj() * red[(r, c)] * v[c];
                    }
                }
                acc.re.max(0.0)
            })
            .collect();
        let i = sample_index(&probs, rng.random::<f64>());
        Ok(obs.eigvals[i])
    }

    /// Test-oriented physicality check: Hermitian to 1e-10, unit trace to
    /// 1e-10, eigenvalues ≥ −1e-8.
    pub fn check_physical(&self) -> Result<()> {
        let herm = hermiticity_deviation(&self.mat);
        if herm > 1e-10 {
            return Err(Error::NonHermitian(herm));
        }
        let tr = self.mat.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::Probability(tr.re));
        }
        let min = linalg::min_eigenvalue(&self.mat);
        if min < -1e-8 {
            return Err(Error::InvalidParam(format!(
                "density matrix has eigenvalue {min:.3e}"
            )));
        }
        Ok(())
    }
}

/// Pure-state simulator for the noiseless, interface-free paths (parameter
/// optimization, reference energies). Shares the density simulator's index
/// conventions; storage and gate cost scale as 2^N instead of 4^N.
#[derive(Debug, Clone)]
pub struct StateVector {
    n: usize,
    amps: CVec,
}

impl StateVector {
    /// |0…0⟩ on `n` qubits.
    pub fn zero_state(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::QubitCount(n));
        }
        let mut amps = CVec::zeros(1 << n);
        amps[0] = C64::from(1.0);
        Ok(Self { n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    fn apply_local(&mut self, op: &CMat, qubits: &[usize]) {
        let (bases, offs) = scatter_tables(self.n, qubits);
        let mut tmp = vec![ZERO; offs.len()];
        for &base in &bases {
            for (g, o) in offs.iter().enumerate() {
                tmp[g] = self.amps[base | o];
            }
            for (g, o) in offs.iter().enumerate() {
                let mut acc = ZERO;
                for (gp, t) in tmp.iter().enumerate() {
                    acc += op[(g, gp)] * t;
                }
                self.amps[base | o] = acc;
            }
        }
    }

    /// Apply a unitary gate to the listed qubits (first qubit = most
    /// significant bit of the gate matrix).
    pub fn apply_gate(&mut self, u: &CMat, qubits: &[usize]) -> Result<()> {
        check_targets(self.n, qubits)?;
        let dk = 1usize << qubits.len();
        if u.nrows() != dk || u.ncols() != dk {
            return Err(Error::Dimension { expected: dk, got: u.nrows() });
        }
        let udev = unitarity_deviation(u);
        if udev > 1e-10 {
            return Err(Error::NonUnitary(udev));
        }
        self.apply_local(u, qubits);
        Ok(())
    }

    /// ⟨ψ|(O ⊗ I)|ψ⟩.
    pub fn expectation(&self, obs: &Observable) -> Result<f64> {
        check_targets(self.n, &obs.qubits)?;
        let mut applied = self.clone();
        applied.apply_local(obs.matrix(), &obs.qubits);
        Ok(self.amps.dotc(&applied.amps).re)
    }

    /// The rank-one density matrix |ψ⟩⟨ψ|.
    pub fn density(&self) -> Result<DensityMatrix> {
        let mat = CMat::from_fn(self.dim(), self.dim(), |r, c| {
            self.amps[r] * self.amps[c].conj()
        });
        DensityMatrix::from_matrix(self.n, mat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{pauli6, FactorableFrame};
    use crate::gates;
    use crate::noise::depolarizing_kraus;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Embed a k-qubit operator into the full register the slow, obvious
    /// way: full[r, c] = op[g_r, g_c] · δ(rest bits equal).
    fn embed(op: &CMat, qubits: &[usize], n: usize) -> CMat {
        let dim = 1usize << n;
        let k = qubits.len();
        let gate_index = |x: usize| -> usize {
            let mut g = 0;
            for (j, &q) in qubits.iter().enumerate() {
                g |= ((x >> (n - 1 - q)) & 1) << (k - 1 - j);
            }
            g
        };
        let rest_mask: usize =
            qubits.iter().fold(!0usize, |acc, &q| acc & !(1usize << (n - 1 - q)));
        CMat::from_fn(dim, dim, |r, c| {
            if r & rest_mask == c & rest_mask {
                op[(gate_index(r), gate_index(c))]
            } else {
                ZERO
            }
        })
    }

    fn random_state(n: usize, seed: u64) -> DensityMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DensityMatrix::from_matrix(n, linalg::random_density(n, &mut rng)).unwrap()
    }

    #[test]
    fn gate_application_matches_embedded_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for qubits in [vec![1], vec![0, 2], vec![2, 0]] {
            let mut rho = random_state(3, 40 + qubits.len() as u64);
            let u = if qubits.len() == 1 {
                linalg::random_unitary_2x2(&mut rng)
            } else {
                gates::cnot()
            };
            let full = embed(&u, &qubits, 3);
            let expect = &full * rho.matrix() * full.adjoint();
            rho.apply_gate(&u, &qubits).unwrap();
            assert!(linalg::max_abs_c(&(rho.matrix() - expect)) < 1e-12);
        }
    }

    #[test]
    fn control_order_matters_for_cnot() {
        // |10⟩: qubit 0 set. CNOT with control 0 flips qubit 1; with
        // control 1 it does nothing.
        let mut rho = DensityMatrix::zero_state(2).unwrap();
        rho.apply_gate(&gates::x(), &[0]).unwrap();
        let mut forward = rho.clone();
        forward.apply_gate(&gates::cnot(), &[0, 1]).unwrap();
        assert!((forward.matrix()[(3, 3)].re - 1.0).abs() < 1e-14);
        let mut reverse = rho.clone();
        reverse.apply_gate(&gates::cnot(), &[1, 0]).unwrap();
        assert!((reverse.matrix()[(2, 2)].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn depolarizing_matches_kraus_channel() {
        for lambda in [0.0, 0.013, 0.35, 1.0] {
            let mut analytic = random_state(3, 99);
            let mut kraus = analytic.clone();
            analytic.apply_depolarizing(lambda, &[0, 2]).unwrap();
            let ops = depolarizing_kraus(lambda).unwrap();
            kraus.apply_kraus(&ops, &[0]).unwrap();
            kraus.apply_kraus(&ops, &[2]).unwrap();
            assert!(
                linalg::max_abs_c(&(analytic.matrix() - kraus.matrix())) < 1e-14,
                "lambda = {lambda}"
            );
        }
    }

    #[test]
    fn full_depolarizing_yields_maximally_mixed_qubit() {
        let mut rho = random_state(2, 3);
        rho.apply_depolarizing(1.0, &[1]).unwrap();
        let red = rho.reduced_state(&[1]).unwrap();
        assert!(linalg::max_abs_c(&(red - CMat::identity(2, 2) * C64::from(0.5))) < 1e-12);
    }

    #[test]
    fn bell_state_reduces_to_maximally_mixed() {
        let mut rho = DensityMatrix::zero_state(2).unwrap();
        rho.apply_gate(&gates::h(), &[0]).unwrap();
        rho.apply_gate(&gates::cnot(), &[0, 1]).unwrap();
        for q in [0usize, 1] {
            let red = rho.reduced_state(&[q]).unwrap();
            assert!(linalg::max_abs_c(&(red - CMat::identity(2, 2) * C64::from(0.5))) < 1e-14);
        }
        rho.check_physical().unwrap();
    }

    #[test]
    fn povm_probabilities_on_zero_state() {
        let rho = DensityMatrix::zero_state(1).unwrap();
        let f = FactorableFrame::new(vec![pauli6()]);
        let p = rho.povm_probabilities(&f, &[0]).unwrap();
        let expect = [1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0, 0.0];
        for (got, want) in p.iter().zip(expect) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn povm_measure_updates_state_and_preserves_trace() {
        let f = FactorableFrame::uniform(&pauli6(), 2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut rho = random_state(3, 21);
        let a = rho.povm_measure(&f, &[0, 2], 0.0, &mut rng).unwrap();
        assert!(a < 36);
        assert!((rho.trace_re() - 1.0).abs() < 1e-12);
        rho.check_physical().unwrap();
    }

    #[test]
    fn reprepare_installs_product_state() {
        let f = pauli6();
        let mut rho = random_state(3, 77);
        let before_rest = rho.partial_trace(&[1]).unwrap();
        rho.reprepare(&[1], f.state(2), 0.0).unwrap();
        // Rest marginal unchanged, target marginal = σ.
        let after_rest = rho.partial_trace(&[1]).unwrap();
        assert!(linalg::max_abs_c(&(before_rest - after_rest)) < 1e-12);
        let target = rho.reduced_state(&[1]).unwrap();
        assert!(linalg::max_abs_c(&(target - f.state(2))) < 1e-12);
        rho.check_physical().unwrap();
    }

    #[test]
    fn from_product_agrees_with_reprepare() {
        let f = pauli6();
        let mut rho = random_state(3, 55);
        let rest = rho.partial_trace(&[0, 2]).unwrap();
        let sigma = f.state(1).kronecker(f.state(4));
        rho.reprepare(&[0, 2], &sigma, 0.0).unwrap();
        let built = DensityMatrix::from_product(3, &[0, 2], &sigma, &rest).unwrap();
        assert!(linalg::max_abs_c(&(rho.matrix() - built.matrix())) < 1e-13);
    }

    #[test]
    fn expectation_golden_values() {
        let mut rho = DensityMatrix::zero_state(2).unwrap();
        rho.apply_gate(&gates::h(), &[0]).unwrap();
        rho.apply_gate(&gates::cnot(), &[0, 1]).unwrap();
        let zz = Observable::new("ZZ", vec![0, 1], gates::z().kronecker(&gates::z())).unwrap();
        let xx = Observable::new("XX", vec![0, 1], gates::x().kronecker(&gates::x())).unwrap();
        let z0 = Observable::new("Z0", vec![0], gates::z()).unwrap();
        assert!((rho.expectation(&zz).unwrap() - 1.0).abs() < 1e-13);
        assert!((rho.expectation(&xx).unwrap() - 1.0).abs() < 1e-13);
        assert!(rho.expectation(&z0).unwrap().abs() < 1e-13);
        assert!((zz.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampled_eigenvalues_average_to_expectation() {
        let rho = random_state(2, 13);
        let obs = Observable::new("ZZ", vec![0, 1], gates::z().kronecker(&gates::z())).unwrap();
        let exact = rho.expectation(&obs).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let m = 40_000;
        let mean: f64 =
            (0..m).map(|_| rho.sample_eigenvalue(&obs, &mut rng).unwrap()).sum::<f64>()
                / m as f64;
        // Bernoulli-style stderr bound: 5σ with σ ≤ 1/√M.
        assert!((mean - exact).abs() < 5.0 / (m as f64).sqrt());
    }

    #[test]
    fn qubit_count_limits_enforced() {
        assert!(matches!(DensityMatrix::zero_state(0), Err(Error::QubitCount(0))));
        assert!(matches!(DensityMatrix::zero_state(13), Err(Error::QubitCount(13))));
        let mut rho = DensityMatrix::zero_state(2).unwrap();
        assert!(rho.apply_gate(&gates::x(), &[2]).is_err());
        assert!(rho.apply_gate(&gates::cnot(), &[1, 1]).is_err());
    }

    #[test]
    fn statevector_tracks_density_evolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        let mut psi = StateVector::zero_state(3).unwrap();
        let mut rho = DensityMatrix::zero_state(3).unwrap();
        for step in 0..20 {
            let (u, qubits): (CMat, Vec<usize>) = if step % 3 == 0 {
                (gates::cnot(), vec![step % 2, 2])
            } else {
                (linalg::random_unitary_2x2(&mut rng), vec![step % 3])
            };
            psi.apply_gate(&u, &qubits).unwrap();
            rho.apply_gate(&u, &qubits).unwrap();
        }
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        let outer = psi.density().unwrap();
        assert!(linalg::max_abs_c(&(outer.matrix() - rho.matrix())) < 1e-12);
        let obs = Observable::new("ZZ", vec![0, 2], gates::z().kronecker(&gates::z())).unwrap();
        let dv = rho.expectation(&obs).unwrap();
        let pv = psi.expectation(&obs).unwrap();
        assert!((dv - pv).abs() < 1e-12);
    }

    #[test]
    fn statevector_rejects_bad_gates_and_targets() {
        let mut psi = StateVector::zero_state(2).unwrap();
        assert!(psi.apply_gate(&gates::x(), &[2]).is_err());
        assert!(psi.apply_gate(&gates::cnot(), &[0, 0]).is_err());
        let skew = gates::h() * C64::from(2.0);
        assert!(matches!(psi.apply_gate(&skew, &[0]), Err(Error::NonUnitary(_))));
        assert!(matches!(StateVector::zero_state(13), Err(Error::QubitCount(13))));
    }
}
