//! Behavior of annealed dual frames when plugged into the sampling engine:
//! any valid generalized-inverse dual leaves expectations unchanged — only
//! the sampling overhead moves.

use qcq_core::circuits::{bell_circuit, gate_matrix, Circuit, LongRange};
use qcq_core::densim::Observable;
use qcq_core::frames::{
    channel_transfer, overlap_matrix_1q, pauli6, validate_dual, DualCoefficients,
    FactorableFrame, Provenance,
};
use qcq_core::gates;
use qcq_core::negopt::{anneal, anneal_multi, AnnealConfig};
use qcq_core::noise::NoiseModel;
use qcq_core::qcq::{InterfaceDuals, QcqEngine, Readout};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn short_schedule(max_steps: usize) -> AnnealConfig {
    AnnealConfig { max_steps, ..AnnealConfig::default() }
}

fn zz(q0: usize, q1: usize) -> Observable {
    Observable::new("ZZ", vec![q0, q1], gates::z().kronecker(&gates::z())).unwrap()
}

fn anneal_gate_duals(name: &str, param: Option<f64>, steps: usize, seed: u64) -> InterfaceDuals {
    let frame = FactorableFrame::uniform(&pauli6(), 2);
    let transfer = channel_transfer(&gate_matrix(name, param).unwrap(), &frame).unwrap();
    let overlap = overlap_matrix_1q(&pauli6());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let result = anneal(&transfer, &overlap, 2, &short_schedule(steps), &mut rng).unwrap();
    InterfaceDuals::from_factors(&result.out_factors, &result.in_factors, Provenance::Annealed)
}

/// Exact expectations are invariant under the choice of valid dual: swap
/// canonical duals for annealed ones and nothing moves but the overhead.
#[test]
fn annealed_duals_leave_exact_expectations_unchanged() {
    let angles = [0.0, 0.4, std::f64::consts::FRAC_PI_4, 1.3, 2.6];
    for (i, &theta) in angles.iter().enumerate() {
        let mut circuit = Circuit::new(2);
        circuit.add_gate("h", &[0], None).unwrap();
        circuit.add_gate("rx", &[1], Some(0.7)).unwrap();
        circuit.add_interface("rzz", &[0, 1], Some(theta)).unwrap();
        let obs = zz(0, 1);
        let reference = circuit
            .run_exact(&NoiseModel::noiseless())
            .unwrap()
            .expectation(&obs)
            .unwrap();

        let duals = anneal_gate_duals("rzz", Some(theta), 400, 7 + i as u64);
        let annealed = QcqEngine::new(
            circuit.clone(),
            NoiseModel::noiseless(),
            obs.clone(),
            Readout::Exact,
            &pauli6(),
            vec![duals],
        )
        .unwrap();
        let canonical =
            QcqEngine::with_canonical_duals(circuit, NoiseModel::noiseless(), obs, Readout::Exact)
                .unwrap();
        let ea = annealed.exact_expectation().unwrap();
        let ec = canonical.exact_expectation().unwrap();
        assert!((ec - reference).abs() < 1e-9, "theta {theta}: canonical {ec} vs {reference}");
        assert!((ea - reference).abs() < 1e-8, "theta {theta}: annealed {ea} vs {reference}");
    }
}

/// The walk never leaves the generalized-inverse manifold, and the best
/// objective can only improve on the canonical starting point.
#[test]
fn anneal_outputs_are_valid_duals_with_bounded_objective() {
    let frame = FactorableFrame::uniform(&pauli6(), 2);
    let transfer = channel_transfer(&gate_matrix("cnot", None).unwrap(), &frame).unwrap();
    let overlap = overlap_matrix_1q(&pauli6());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let result = anneal(&transfer, &overlap, 2, &short_schedule(800), &mut rng).unwrap();

    assert!(result.objective <= result.canonical_objective + 1e-12);
    assert!(result.max_accepted_residual < 1e-8, "residual {}", result.max_accepted_residual);
    assert!(result.joint_residual < 1e-8, "joint residual {}", result.joint_residual);
    for factor in result.out_factors.iter().chain(result.in_factors.iter()) {
        let dual = DualCoefficients::new(factor.clone(), Provenance::Annealed);
        let residual = validate_dual(&overlap, &dual).unwrap();
        assert!(residual < 1e-9, "factor residual {residual}");
    }
}

/// A modest multi-chain budget already beats the canonical overhead for a
/// weakly entangling gate.
#[test]
fn short_multi_chain_anneal_improves_on_canonical() {
    let frame = FactorableFrame::uniform(&pauli6(), 2);
    let theta = std::f64::consts::FRAC_PI_8;
    let transfer = channel_transfer(&gate_matrix("rzz", Some(theta)).unwrap(), &frame).unwrap();
    let overlap = overlap_matrix_1q(&pauli6());
    let result = anneal_multi(&transfer, &overlap, 2, &short_schedule(3000), 17, 4).unwrap();
    assert!(
        result.ratio < 0.95,
        "expected an improved overhead ratio, got {}",
        result.ratio
    );
    assert!(result.objective < result.canonical_objective);
}

/// Monte Carlo sampling through annealed duals stays unbiased under noise.
#[test]
fn sampling_with_annealed_duals_is_unbiased() {
    let noise = NoiseModel::chsh_default();
    let circuit = bell_circuit(2, LongRange::Interface).unwrap();
    let obs = zz(0, 1);
    let duals = anneal_gate_duals("cnot", None, 600, 21);
    let engine = QcqEngine::new(
        circuit.clone(),
        noise,
        obs.clone(),
        Readout::Exact,
        &pauli6(),
        vec![duals],
    )
    .unwrap();
    let exact = engine.exact_expectation().unwrap();

    // The exact value is dual-independent even with noise in the loop.
    let canonical =
        QcqEngine::with_canonical_duals(circuit, noise, obs, Readout::Exact).unwrap();
    assert!((exact - canonical.exact_expectation().unwrap()).abs() < 1e-8);

    let est = engine.estimate(4000, 42).unwrap();
    assert!(
        (est.mean - exact).abs() < 5.0 * est.stderr,
        "mean {} vs exact {exact} (stderr {})",
        est.mean,
        est.stderr
    );
}
