//! POVM frames, overlap matrices, dual frames, and channel transfer matrices.
//!
//! A frame here is an informationally complete POVM: positive operators
//! `M_a` summing to the identity whose span is the full operator space. A
//! dual frame is parametrized by a real coefficient matrix `Tau` via
//! `M̃_a = Σ_a' Tau[a, a'] M_a'`; `Tau` defines a dual exactly when
//! `T = T·Tau·T` for the overlap matrix `T[a, a'] = Tr[M_a M_a']`. The
//! canonical dual uses the Moore-Penrose pseudo-inverse of `T`.

use crate::error::{Error, Result};
use crate::linalg::{self, max_abs, sqrt_psd_2x2, unitarity_deviation, CMat, RMat, C64};

/// Residual threshold below which a coefficient matrix counts as a valid dual.
pub const DUAL_RESIDUAL_TOL: f64 = 1e-8;

/// Relative singular-value cutoff for the pseudo-inverse (the Pauli-6 overlap
/// matrix is rank 4 of 6, so a cutoff is required).
pub const PINV_REL_CUTOFF: f64 = 1e-10;

/// An ordered single-qubit POVM with per-element caches.
#[derive(Debug, Clone)]
pub struct SingleQubitFrame {
    elements: Vec<CMat>,
    labels: Vec<String>,
    traces: Vec<f64>,
    states: Vec<CMat>,
    sqrts: Vec<CMat>,
}

impl SingleQubitFrame {
    /// Validates POVM-ness and informational completeness, then caches
    /// traces t_a, unit-trace states σ_a = M_a / t_a, and √M_a.
    pub fn new(elements: Vec<CMat>, labels: Vec<String>) -> Result<Self> {
        if elements.len() != labels.len() {
            return Err(Error::Dimension { expected: elements.len(), got: labels.len() });
        }
        let mut sum = CMat::zeros(2, 2);
        for m in &elements {
            if m.nrows() != 2 || m.ncols() != 2 {
                return Err(Error::Dimension { expected: 2, got: m.nrows() });
            }
            let herm = linalg::hermiticity_deviation(m);
            if herm > 1e-12 {
                return Err(Error::NonHermitian(herm));
            }
            let min_eig = linalg::min_eigenvalue(m);
            if min_eig < -1e-12 {
                return Err(Error::InvalidParam(format!(
                    "POVM element has negative eigenvalue {min_eig:.3e}"
                )));
            }
            sum += m;
        }
        let dev = linalg::max_abs_c(&(sum - CMat::identity(2, 2)));
        if dev > 1e-12 {
            return Err(Error::InvalidParam(format!(
                "POVM elements sum to identity only within {dev:.3e}"
            )));
        }
        // Informational completeness: the Gram (overlap) matrix must have
        // rank 4, the dimension of the single-qubit operator space.
        let n = elements.len();
        let gram = RMat::from_fn(n, n, |r, c| {
            linalg::hs_inner(&elements[r], &elements[c]).re
        });
        let svd = gram.svd(false, false);
        let smax = svd.singular_values.iter().fold(0.0f64, |a, &s| a.max(s));
        let rank = svd
            .singular_values
            .iter()
            .filter(|&&s| s > 1e-10 * smax)
            .count();
        if rank != 4 {
            return Err(Error::InvalidParam(format!(
                "frame spans a rank-{rank} operator subspace, need 4"
            )));
        }
        let traces: Vec<f64> = elements.iter().map(|m| m.trace().re).collect();
        let states = elements
            .iter()
            .zip(&traces)
            .map(|(m, &t)| m / C64::from(t))
            .collect();
        let sqrts = elements.iter().map(sqrt_psd_2x2).collect();
        Ok(Self { elements, labels, traces, states, sqrts })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, a: usize) -> &CMat {
        &self.elements[a]
    }

    pub fn label(&self, a: usize) -> &str {
        &self.labels[a]
    }

    /// Trace t_a = Tr[M_a].
    pub fn trace(&self, a: usize) -> f64 {
        self.traces[a]
    }

    /// Unit-trace repreparation state σ_a = M_a / t_a.
    pub fn state(&self, a: usize) -> &CMat {
        &self.states[a]
    }

    /// Measurement instrument operator K_a = √M_a.
    pub fn sqrt_element(&self, a: usize) -> &CMat {
        &self.sqrts[a]
    }
}

/// The six Pauli-axis eigenprojectors scaled by 1/3, ordered
/// (x+, x−, y+, y−, z+, z−).
pub fn pauli6() -> SingleQubitFrame {
    let third = 1.0 / 3.0;
    let sixth = 1.0 / 6.0;
    let elems = vec![
        linalg::cmat(2, 2, &[(sixth, 0.0), (sixth, 0.0), (sixth, 0.0), (sixth, 0.0)]),
        linalg::cmat(2, 2, &[(sixth, 0.0), (-sixth, 0.0), (-sixth, 0.0), (sixth, 0.0)]),
        linalg::cmat(2, 2, &[(sixth, 0.0), (0.0, -sixth), (0.0, sixth), (sixth, 0.0)]),
        linalg::cmat(2, 2, &[(sixth, 0.0), (0.0, sixth), (0.0, -sixth), (sixth, 0.0)]),
        linalg::cmat(2, 2, &[(third, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)]),
        linalg::cmat(2, 2, &[(0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (third, 0.0)]),
    ];
    let labels = ["x+", "x-", "y+", "y-", "z+", "z-"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    SingleQubitFrame::new(elems, labels).expect("Pauli-6 is a valid IC-POVM")
}

/// A tensor-product frame on an ordered set of qubits.
///
/// Joint outcome indices are base-`len` numbers with the *first* factor as
/// the most significant digit, matching the bit ordering of gate matrices.
#[derive(Debug, Clone)]
pub struct FactorableFrame {
    factors: Vec<SingleQubitFrame>,
}

impl FactorableFrame {
    pub fn new(factors: Vec<SingleQubitFrame>) -> Self {
        assert!(!factors.is_empty());
        Self { factors }
    }

    /// The same single-qubit frame on each of `k` qubits.
    pub fn uniform(frame: &SingleQubitFrame, k: usize) -> Self {
        Self::new(vec![frame.clone(); k])
    }

    pub fn n_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn factor(&self, j: usize) -> &SingleQubitFrame {
        &self.factors[j]
    }

    /// Number of joint outcome strings.
    pub fn n_outcomes(&self) -> usize {
        self.factors.iter().map(|f| f.len()).product()
    }

    /// Hilbert-space dimension of the supported subsystem.
    pub fn dim(&self) -> usize {
        1usize << self.factors.len()
    }

    /// Per-factor digits of a joint outcome index.
    pub fn digits(&self, a: usize) -> Vec<usize> {
        let mut rem = a;
        let mut out = vec![0; self.factors.len()];
        for j in (0..self.factors.len()).rev() {
            let base = self.factors[j].len();
            out[j] = rem % base;
            rem /= base;
        }
        out
    }

    /// Joint POVM element M_a (Kronecker product of the per-qubit elements).
    pub fn element(&self, a: usize) -> CMat {
        let digits = self.digits(a);
        let mut m = self.factors[0].element(digits[0]).clone();
        for j in 1..self.factors.len() {
            m = m.kronecker(self.factors[j].element(digits[j]));
        }
        m
    }

    /// Joint trace t_a = ∏_j t_{a_j}.
    pub fn trace(&self, a: usize) -> f64 {
        self.digits(a)
            .iter()
            .enumerate()
            .map(|(j, &d)| self.factors[j].trace(d))
            .product()
    }

    /// Joint unit-trace repreparation state σ_a.
    pub fn state(&self, a: usize) -> CMat {
        let digits = self.digits(a);
        let mut m = self.factors[0].state(digits[0]).clone();
        for j in 1..self.factors.len() {
            m = m.kronecker(self.factors[j].state(digits[j]));
        }
        m
    }

    /// Joint instrument operator K_a = √M_a (factorizes over qubits).
    pub fn sqrt_element(&self, a: usize) -> CMat {
        let digits = self.digits(a);
        let mut m = self.factors[0].sqrt_element(digits[0]).clone();
        for j in 1..self.factors.len() {
            m = m.kronecker(self.factors[j].sqrt_element(digits[j]));
        }
        m
    }

    /// Human-readable joint outcome label, e.g. "x+,z-".
    pub fn label(&self, a: usize) -> String {
        self.digits(a)
            .iter()
            .enumerate()
            .map(|(j, &d)| self.factors[j].label(d))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Ordering tag for serialized tables (per-qubit outcome order).
    pub fn ordering_tag(&self) -> String {
        let per_qubit: Vec<String> = self
            .factors
            .iter()
            .map(|f| (0..f.len()).map(|a| f.label(a).to_string()).collect::<Vec<_>>().join(","))
            .collect();
        per_qubit.join(" x ")
    }
}

/// Overlap matrix T[a, a'] = Tr[M_a M_a'].
pub fn overlap_matrix(frame: &FactorableFrame) -> RMat {
    // Build per-qubit overlaps and Kronecker them: cheaper than the joint
    // computation and exact for factorable frames.
    let per_qubit: Vec<RMat> = frame
        .factors
        .iter()
        .map(|f| {
            RMat::from_fn(f.len(), f.len(), |r, c| {
                linalg::hs_inner(f.element(r), f.element(c)).re
            })
        })
        .collect();
    let mut t = per_qubit[0].clone();
    for m in &per_qubit[1..] {
        t = t.kronecker(m);
    }
    t
}

/// Overlap matrix of a single-qubit frame.
pub fn overlap_matrix_1q(frame: &SingleQubitFrame) -> RMat {
    overlap_matrix(&FactorableFrame::new(vec![frame.clone()]))
}

/// Provenance of a dual coefficient matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Canonical,
    Annealed,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Provenance::Canonical => write!(f, "canonical"),
            Provenance::Annealed => write!(f, "annealed"),
        }
    }
}

impl std::str::FromStr for Provenance {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "canonical" => Ok(Provenance::Canonical),
            "annealed" => Ok(Provenance::Annealed),
            other => Err(format!("unknown provenance '{other}'")),
        }
    }
}

/// Real coefficient matrix `Tau` defining a dual frame via
/// `M̃_a = Σ_a' Tau[a, a'] M_a'`.
#[derive(Debug, Clone)]
pub struct DualCoefficients {
    pub mat: RMat,
    pub provenance: Provenance,
}

impl DualCoefficients {
    pub fn new(mat: RMat, provenance: Provenance) -> Self {
        Self { mat, provenance }
    }

    /// Kronecker-compose per-qubit coefficient factors into a joint dual.
    pub fn from_factors(factors: &[RMat], provenance: Provenance) -> Self {
        assert!(!factors.is_empty());
        let mut mat = factors[0].clone();
        for f in &factors[1..] {
            mat = mat.kronecker(f);
        }
        Self { mat, provenance }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Dual overlap matrix T̃ = Tau·T·Tau.
    pub fn dual_overlap(&self, t: &RMat) -> RMat {
        &self.mat * t * &self.mat
    }

    /// Max deviation of the column sums from 1 (the main-text affine
    /// normalization Σ_a Tau[a, a'] = 1). Informational only: the canonical
    /// Pauli-6 dual has column sums 3, yet reconstructs exactly.
    pub fn affine_normalization_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for c in 0..self.mat.ncols() {
            let s: f64 = self.mat.column(c).iter().sum();
            worst = worst.max((s - 1.0).abs());
        }
        worst
    }
}

/// Canonical dual: the Moore-Penrose pseudo-inverse of the overlap matrix,
/// with singular values below `1e-10 * σ_max` treated as zero.
pub fn canonical_dual(t: &RMat) -> DualCoefficients {
    DualCoefficients::new(linalg::pseudo_inverse(t, PINV_REL_CUTOFF), Provenance::Canonical)
}

/// Max-abs residual of the dual condition, `‖T − T·Tau·T‖_max`.
/// Callers treat values ≤ 1e-8 as valid.
pub fn validate_dual(t: &RMat, dual: &DualCoefficients) -> Result<f64> {
    if dual.mat.nrows() != t.nrows() || dual.mat.ncols() != t.ncols() {
        return Err(Error::Dimension { expected: t.nrows(), got: dual.mat.nrows() });
    }
    Ok(max_abs(&(t - t * &dual.mat * t)))
}

/// Dual frame elements M̃_a = Σ_a' Tau[a, a'] M_a'.
pub fn dual_elements(frame: &FactorableFrame, dual: &DualCoefficients) -> Vec<CMat> {
    let n = frame.n_outcomes();
    let d = frame.dim();
    let elements: Vec<CMat> = (0..n).map(|a| frame.element(a)).collect();
    (0..n)
        .map(|a| {
            let mut m = CMat::zeros(d, d);
            for ap in 0..n {
                let w = dual.mat[(a, ap)];
                if w != 0.0 {
                    m += &elements[ap] * C64::from(w);
                }
            }
            m
        })
        .collect()
}

/// Reconstruct ρ from its frame coefficients: Σ_a Tr[M_a ρ]·M̃_a.
pub fn reconstruct(frame: &FactorableFrame, dual: &DualCoefficients, rho: &CMat) -> CMat {
    let n = frame.n_outcomes();
    let d = frame.dim();
    let duals = dual_elements(frame, dual);
    let mut out = CMat::zeros(d, d);
    for a in 0..n {
        let p = linalg::hs_inner(&frame.element(a), rho);
        out += &duals[a] * p;
    }
    out
}

/// Channel transfer matrix T^(U)[b, a] = Tr[M_b · U M_a U†].
///
/// Entries are checked real to 1e-12 before the imaginary parts are dropped.
pub fn channel_transfer(u: &CMat, frame: &FactorableFrame) -> Result<RMat> {
    let d = frame.dim();
    if u.nrows() != d || u.ncols() != d {
        return Err(Error::Dimension { expected: d, got: u.nrows() });
    }
    let udev = unitarity_deviation(u);
    if udev > 1e-12 {
        return Err(Error::NonUnitary(udev));
    }
    let n = frame.n_outcomes();
    let elements: Vec<CMat> = (0..n).map(|a| frame.element(a)).collect();
    let conjugated: Vec<CMat> = elements.iter().map(|m| u * m * u.adjoint()).collect();
    let mut out = RMat::zeros(n, n);
    for b in 0..n {
        for a in 0..n {
            let z = linalg::hs_inner(&elements[b], &conjugated[a]);
            if z.im.abs() > 1e-12 {
                return Err(Error::NonHermitian(z.im.abs()));
            }
            out[(b, a)] = z.re;
        }
    }
    Ok(out)
}

/// Dual-side channel matrix T̃^(U) = Tau_out · T^(U) · Tau_in^⊤, indexed
/// [b, a] like the transfer matrix (b: repreparation, a: measurement).
///
/// Both duals must satisfy the dual condition against `t` to 1e-8.
pub fn dual_channel_matrix(
    dual_out: &DualCoefficients,
    transfer: &RMat,
    dual_in: &DualCoefficients,
    t: &RMat,
) -> Result<RMat> {
    for dual in [dual_out, dual_in] {
        let resid = validate_dual(t, dual)?;
        if resid > DUAL_RESIDUAL_TOL {
            return Err(Error::InvalidDual(resid));
        }
    }
    if transfer.nrows() != t.nrows() {
        return Err(Error::Dimension { expected: t.nrows(), got: transfer.nrows() });
    }
    Ok(&dual_out.mat * transfer * dual_in.mat.transpose())
}
