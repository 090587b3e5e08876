//! Standard gate matrices.
//!
//! Conventions: in a multi-qubit gate matrix the first listed target qubit is
//! the most significant bit of the gate's basis index (so `cnot()` has the
//! control as its first target). Rotation angles follow
//! RX(θ) = exp(−iθX/2), RZ(θ) = exp(−iθZ/2), RZZ(θ) = exp(−iθ(Z⊗Z)/2).

use crate::linalg::{cmat, CMat, C64, IM, ONE, ZERO};

/// Pauli X.
pub fn x() -> CMat {
    cmat(2, 2, &[(0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (0.0, 0.0)])
}

/// Pauli Y.
pub fn y() -> CMat {
    cmat(2, 2, &[(0.0, 0.0), (0.0, -1.0), (0.0, 1.0), (0.0, 0.0)])
}

/// Pauli Z.
pub fn z() -> CMat {
    cmat(2, 2, &[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (-1.0, 0.0)])
}

/// 2x2 identity.
pub fn id2() -> CMat {
    CMat::identity(2, 2)
}

/// Hadamard.
pub fn h() -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    cmat(2, 2, &[(s, 0.0), (s, 0.0), (s, 0.0), (-s, 0.0)])
}

/// X rotation exp(−iθX/2).
pub fn rx(theta: f64) -> CMat {
    let c = C64::from((theta / 2.0).cos());
    let s = -IM * (theta / 2.0).sin();
    CMat::from_row_slice(2, 2, &[c, s, s, c])
}

/// Z rotation exp(−iθZ/2).
pub fn rz(theta: f64) -> CMat {
    let e_neg = (-IM * (theta / 2.0)).exp();
    let e_pos = (IM * (theta / 2.0)).exp();
    CMat::from_row_slice(2, 2, &[e_neg, ZERO, ZERO, e_pos])
}

/// CNOT with the first target as control.
pub fn cnot() -> CMat {
    let mut m = CMat::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 1)] = ONE;
    m[(2, 3)] = ONE;
    m[(3, 2)] = ONE;
    m
}

/// SWAP of the two targets.
pub fn swap() -> CMat {
    let mut m = CMat::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 2)] = ONE;
    m[(2, 1)] = ONE;
    m[(3, 3)] = ONE;
    m
}

/// ZZ rotation exp(−iθ(Z⊗Z)/2), diagonal in the computational basis.
pub fn rzz(theta: f64) -> CMat {
    let e_neg = (-IM * (theta / 2.0)).exp();
    let e_pos = (IM * (theta / 2.0)).exp();
    let mut m = CMat::zeros(4, 4);
    m[(0, 0)] = e_neg;
    m[(1, 1)] = e_pos;
    m[(2, 2)] = e_pos;
    m[(3, 3)] = e_neg;
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_c, unitarity_deviation};

    #[test]
    fn all_gates_unitary() {
        for g in [x(), y(), z(), h(), rx(0.7), rz(-1.3), cnot(), swap(), rzz(2.1)] {
            assert!(unitarity_deviation(&g) < 1e-14);
        }
    }

    #[test]
    fn rzz_equals_cnot_rz_cnot() {
        // The synthesis used for hardware circuits: CNOT, RZ on the second
        // qubit, CNOT.
        let theta = 0.9371;
        let rz_on_second = id2().kronecker(&rz(theta));
        let synth = cnot() * rz_on_second * cnot();
        assert!(max_abs_c(&(synth - rzz(theta))) < 1e-14);
    }

    #[test]
    fn swap_equals_three_cnots() {
        let flipped = {
            // CNOT with control on the second qubit = (H⊗H) CNOT (H⊗H).
            let hh = h().kronecker(&h());
            &hh * cnot() * &hh
        };
        let synth = cnot() * &flipped * cnot();
        assert!(max_abs_c(&(synth - swap())) < 1e-13);
    }

    #[test]
    fn rotations_compose_additively() {
        let a = rx(0.4) * rx(0.8);
        assert!(max_abs_c(&(a - rx(1.2))) < 1e-14);
        let b = rzz(0.5) * rzz(0.25);
        assert!(max_abs_c(&(b - rzz(0.75))) < 1e-14);
    }
}
