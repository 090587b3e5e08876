//! Small dense linear-algebra helpers shared across the crate.
//!
//! Matrices are `nalgebra` dynamic matrices over `Complex<f64>` (operators)
//! or `f64` (overlap/dual coefficient tables). Qubit 0 is the most
//! significant bit of a basis index throughout the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

pub type C64 = Complex<f64>;
/// Dense complex matrix (operators, states).
pub type CMat = DMatrix<C64>;

/// Complex column vector (statevector amplitudes).
pub type CVec = DVector<C64>;
/// Dense real matrix (overlap matrices, dual coefficients, transfer tables).
pub type RMat = DMatrix<f64>;

pub const ZERO: C64 = Complex::new(0.0, 0.0);
pub const ONE: C64 = Complex::new(1.0, 0.0);

/// `i` as a complex constant.
pub const IM: C64 = Complex::new(0.0, 1.0);

/// Complex matrix from a row-major slice of (re, im) pairs.
pub fn cmat(rows: usize, cols: usize, entries: &[(f64, f64)]) -> CMat {
    assert_eq!(entries.len(), rows * cols);
    CMat::from_fn(rows, cols, |r, c| {
        let (re, im) = entries[r * cols + c];
        Complex::new(re, im)
    })
}

/// Largest absolute entry of a real matrix.
pub fn max_abs(m: &RMat) -> f64 {
    m.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// Largest absolute entry of a complex matrix.
pub fn max_abs_c(m: &CMat) -> f64 {
    m.iter().fold(0.0f64, |acc, x| acc.max(x.norm()))
}

/// Deviation of `m` from Hermitian symmetry.
pub fn hermiticity_deviation(m: &CMat) -> f64 {
    max_abs_c(&(m - m.adjoint()))
}

/// Deviation of `u` from unitarity, as the max-abs entry of `U†U − I`.
pub fn unitarity_deviation(u: &CMat) -> f64 {
    let n = u.nrows();
    max_abs_c(&(u.adjoint() * u - CMat::identity(n, n)))
}

/// Largest imaginary component found anywhere in `m`.
pub fn max_imag(m: &CMat) -> f64 {
    m.iter().fold(0.0f64, |acc, x| acc.max(x.im.abs()))
}

/// Real part of the trace.
pub fn trace_re(m: &CMat) -> f64 {
    m.trace().re
}

/// Hilbert-Schmidt inner product Tr[A† B].
pub fn hs_inner(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Square root of a 2x2 positive semidefinite Hermitian matrix.
///
/// Uses the closed form √A = (A + √det(A)·I) / √(tr A + 2√det A), which
/// covers the rank-1 case (det = 0) without branching; the all-zero matrix
/// maps to itself.
pub fn sqrt_psd_2x2(a: &CMat) -> CMat {
    assert_eq!((a.nrows(), a.ncols()), (2, 2));
    let tr = a.trace().re;
    let det = (a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)]).re;
    let s = det.max(0.0).sqrt();
    let denom = (tr + 2.0 * s).max(0.0).sqrt();
    if denom <= f64::EPSILON {
        return CMat::zeros(2, 2);
    }
    let mut out = a.clone();
    out[(0, 0)] += C64::from(s);
    out[(1, 1)] += C64::from(s);
    out / C64::from(denom)
}

/// Moore-Penrose pseudo-inverse of a real matrix via SVD.
///
/// Singular values below `rel_cutoff * σ_max` are treated as zero.
pub fn pseudo_inverse(m: &RMat, rel_cutoff: f64) -> RMat {
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &s| a.max(s));
    let eps = rel_cutoff * smax;
    svd.pseudo_inverse(eps)
        .expect("SVD computed with both factors")
}

/// Eigenvalues of a complex Hermitian matrix, ascending.
///
/// Embeds H = X + iY as the real symmetric [[X, −Y], [Y, X]], whose spectrum
/// is that of H with every eigenvalue doubled in multiplicity.
pub fn hermitian_eigenvalues(h: &CMat) -> Vec<f64> {
    let n = h.nrows();
    assert_eq!(h.ncols(), n);
    let mut real = RMat::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            let z = h[(r, c)];
            real[(r, c)] = z.re;
            real[(r + n, c + n)] = z.re;
            real[(r, c + n)] = -z.im;
            real[(r + n, c)] = z.im;
        }
    }
    let mut eig: Vec<f64> = real.symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Keep one copy of each doubled eigenvalue.
    eig.into_iter().step_by(2).collect()
}

/// Smallest eigenvalue of a complex Hermitian matrix.
pub fn min_eigenvalue(h: &CMat) -> f64 {
    hermitian_eigenvalues(h)[0]
}

/// Spectral norm (largest |eigenvalue|) of a Hermitian matrix.
pub fn spectral_norm_hermitian(h: &CMat) -> f64 {
    hermitian_eigenvalues(h)
        .iter()
        .fold(0.0f64, |a, &x| a.max(x.abs()))
}

/// Eigendecomposition of a complex Hermitian matrix: (eigenvalues ascending,
/// eigenvectors as matrix columns).
///
/// Same real embedding as [`hermitian_eigenvalues`]; from each doubled
/// eigenspace one real vector (u; w) is mapped back to the complex
/// eigenvector u + i·w.
pub fn hermitian_eigen(h: &CMat) -> (Vec<f64>, CMat) {
    let n = h.nrows();
    let mut real = RMat::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..n {
            let z = h[(r, c)];
            real[(r, c)] = z.re;
            real[(r + n, c + n)] = z.re;
            real[(r, c + n)] = -z.im;
            real[(r + n, c)] = z.im;
        }
    }
    let se = real.symmetric_eigen();
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());

    let mut vals = Vec::with_capacity(n);
    let mut vecs = CMat::zeros(n, n);
    let mut col = 0;
    let mut idx = 0;
    while col < n && idx < 2 * n {
        let k = order[idx];
        let lambda = se.eigenvalues[k];
        let v = se.eigenvectors.column(k);
        let mut cand = DVector::<C64>::from_fn(n, |r, _| Complex::new(v[r], v[r + n]));
        // The doubled spectrum yields pairs (u; w) and (−w; u) for the same
        // eigenvalue; the i·cand partner of an already-taken vector has zero
        // norm after projection, so skip near-duplicates.
        for taken in 0..col {
            let overlap: C64 = (0..n).map(|r| vecs[(r, taken)].conj() * cand[r]).sum();
            for r in 0..n {
                let sub = overlap * vecs[(r, taken)];
                cand[r] -= sub;
            }
        }
        let norm = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for r in 0..n {
                vecs[(r, col)] = cand[r] / C64::from(norm);
            }
            vals.push(lambda);
            col += 1;
        }
        idx += 1;
    }
    assert_eq!(col, n, "failed to extract a full eigenbasis");
    (vals, vecs)
}

/// Random density matrix on `n_qubits` drawn from the Ginibre ensemble
/// (G G† normalized to unit trace). Intended for tests and validation.
pub fn random_density(n_qubits: usize, rng: &mut impl rand::Rng) -> CMat {
    use rand_distr::{Distribution, StandardNormal};
    let d = 1usize << n_qubits;
    let g = CMat::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex::new(re, im)
    });
    let rho = &g * g.adjoint();
    let tr = rho.trace().re;
    rho / C64::from(tr)
}

/// Random Hermitian matrix with standard-normal entries, for tests.
pub fn random_hermitian(dim: usize, rng: &mut impl rand::Rng) -> CMat {
    use rand_distr::{Distribution, StandardNormal};
    let g = CMat::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex::new(re, im)
    });
    (&g + g.adjoint()) / C64::from(2.0)
}

/// Random single-qubit unitary (Haar via QR of a Ginibre matrix), for tests.
pub fn random_unitary_2x2(rng: &mut impl rand::Rng) -> CMat {
    use rand_distr::{Distribution, StandardNormal};
    let g = CMat::from_fn(2, 2, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex::new(re, im)
    });
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    // Fix phases so the factorization is unique (diag(R) made positive).
    let mut u = q;
    for c in 0..2 {
        let d = r[(c, c)];
        if d.norm() > 0.0 {
            let phase = d / C64::from(d.norm());
            for rr in 0..2 {
                u[(rr, c)] *= phase;
            }
        }
    }
    u
}
