//! Statistical and structural properties of the dense simulator: channel
//! physicality under random circuits, measurement statistics, and the
//! generalized measurement instrument.

use qcq_core::densim::DensityMatrix;
use qcq_core::frames::{pauli6, FactorableFrame};
use qcq_core::gates;
use qcq_core::linalg;
use qcq_core::noise::depolarizing_kraus;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn random_circuits_preserve_physicality() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 4;
    for trial in 0..5 {
        let mut rho = DensityMatrix::zero_state(n).unwrap();
        for step in 0..40 {
            match rng.random_range(0..6) {
                0 => {
                    let q = rng.random_range(0..n);
                    rho.apply_gate(&linalg::random_unitary_2x2(&mut rng), &[q]).unwrap();
                }
                1 => {
                    let q = rng.random_range(0..n);
                    rho.apply_gate(&gates::rx(rng.random::<f64>() * 3.0), &[q]).unwrap();
                }
                2 | 3 => {
                    let a = rng.random_range(0..n);
                    let b = (a + 1 + rng.random_range(0..n - 1)) % n;
                    let two = if step % 2 == 0 {
                        gates::cnot()
                    } else {
                        gates::rzz(rng.random::<f64>())
                    };
                    rho.apply_gate(&two, &[a, b]).unwrap();
                }
                4 => {
                    let q = rng.random_range(0..n);
                    rho.apply_depolarizing(rng.random::<f64>() * 0.3, &[q]).unwrap();
                }
                _ => {
                    let q = rng.random_range(0..n);
                    let ops = depolarizing_kraus(0.1).unwrap();
                    rho.apply_kraus(&ops, &[q]).unwrap();
                }
            }
            if step % 10 == 9 {
                rho.check_physical()
                    .unwrap_or_else(|e| panic!("trial {trial} step {step}: {e}"));
            }
        }
        rho.check_physical().unwrap();
    }
}

#[test]
fn povm_outcome_frequencies_match_probabilities() {
    let mut rng = ChaCha8Rng::seed_from_u64(314);
    let rho = DensityMatrix::from_matrix(2, linalg::random_density(2, &mut rng)).unwrap();
    let frame = FactorableFrame::uniform(&pauli6(), 2);
    let probs = rho.povm_probabilities(&frame, &[0, 1]).unwrap();
    assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);

    let m = 100_000usize;
    let mut counts = vec![0usize; 36];
    for _ in 0..m {
        let mut copy = rho.clone();
        let a = copy.povm_measure(&frame, &[0, 1], 0.0, &mut rng).unwrap();
        counts[a] += 1;
    }
    for a in 0..36 {
        let p = probs[a];
        let freq = counts[a] as f64 / m as f64;
        let sigma = (p * (1.0 - p) / m as f64).sqrt();
        assert!(
            (freq - p).abs() <= 5.0 * sigma + 1e-9,
            "outcome {a}: freq {freq} vs p {p}"
        );
    }
}

/// The measurement instrument branches K_a ρ K_a† are each physical after
/// normalization and their traces are exactly the POVM probabilities.
#[test]
fn instrument_branches_are_physical_and_trace_correct() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let rho = DensityMatrix::from_matrix(3, linalg::random_density(3, &mut rng)).unwrap();
    let frame = FactorableFrame::uniform(&pauli6(), 2);
    let probs = rho.povm_probabilities(&frame, &[0, 2]).unwrap();
    let mut total = 0.0;
    for a in 0..36 {
        let mut branch = rho.clone();
        branch.apply_local_operator(&frame.sqrt_element(a), &[0, 2]).unwrap();
        let tr = branch.trace_re();
        assert!((tr - probs[a]).abs() < 1e-12, "outcome {a}");
        total += tr;
        if probs[a] > 1e-12 {
            let normalized =
                DensityMatrix::from_matrix(3, branch.matrix() / linalg::C64::from(tr)).unwrap();
            normalized.check_physical().unwrap();
        }
    }
    assert!((total - 1.0).abs() < 1e-12);
}

/// Measuring and repreparing with the identity-gate channel leaves every
/// observable's expectation unchanged in the exact (averaged) limit.
#[test]
fn identity_interface_channel_is_transparent_on_average() {
    use qcq_core::frames::{canonical_dual, dual_channel_matrix, overlap_matrix};
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let frame = FactorableFrame::uniform(&pauli6(), 2);
    let t = overlap_matrix(&frame);
    let dual = canonical_dual(&t);
    let tu = qcq_core::frames::channel_transfer(&linalg::CMat::identity(4, 4), &frame).unwrap();
    let d = dual_channel_matrix(&dual, &tu, &dual, &t).unwrap();
    let rho = linalg::random_density(2, &mut rng);
    let probs: Vec<f64> = (0..36)
        .map(|a| linalg::hs_inner(&frame.element(a), &rho).re)
        .collect();
    let mut rebuilt = linalg::CMat::zeros(4, 4);
    for b in 0..36 {
        let coeff: f64 = (0..36).map(|a| d[(b, a)] * probs[a]).sum();
        rebuilt += frame.state(b) * linalg::C64::from(coeff * frame.trace(b));
    }
    assert!(linalg::max_abs_c(&(rebuilt - rho)) < 1e-8);
}
