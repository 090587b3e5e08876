//! Hot-path timings: density-matrix evolution, interface-table
//! construction, per-shot sampling, and the annealing primitives.

use criterion::{criterion_group, criterion_main, Criterion};
use qcq_core::circuits::{bell_circuit, gate_matrix, tfim_hamiltonian, tfim_hva};
use qcq_core::frames::{channel_transfer, overlap_matrix, pauli6, FactorableFrame};
use qcq_core::linalg::pseudo_inverse;
use qcq_core::negopt::{factors_objective, rao_step};
use qcq_core::qcq::build_interface_table;
use qcq_core::{
    gates, DensityMatrix, HvaParams, InterfaceDuals, LongRange, NoiseModel, Observable, QcqEngine,
    Readout,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn density_evolution(c: &mut Criterion) {
    let cnot = gate_matrix("cnot", None).unwrap();
    let mut rho = DensityMatrix::zero_state(8).unwrap();
    c.bench_function("density/cnot n=8", |b| {
        b.iter(|| rho.apply_gate(black_box(&cnot), &[3, 4]).unwrap());
    });
    c.bench_function("density/depolarizing n=8", |b| {
        b.iter(|| rho.apply_depolarizing(black_box(0.005), &[3]).unwrap());
    });
}

fn interface_tables(c: &mut Criterion) {
    let u = gate_matrix("rzz", Some(0.7)).unwrap();
    let frame = FactorableFrame::uniform(&pauli6(), 2);
    let duals = InterfaceDuals::canonical(&frame);
    c.bench_function("frames/channel transfer rzz", |b| {
        b.iter(|| channel_transfer(black_box(&u), &frame).unwrap());
    });
    c.bench_function("frames/interface table rzz", |b| {
        b.iter(|| build_interface_table(black_box(&u), &frame, &duals).unwrap());
    });
}

fn shot_sampling(c: &mut Criterion) {
    let circuit = bell_circuit(3, LongRange::Interface).unwrap();
    let obs = Observable::new("ZZ", vec![0, 2], gates::z().kronecker(&gates::z())).unwrap();
    let engine =
        QcqEngine::with_canonical_duals(circuit, NoiseModel::default(), obs, Readout::Exact)
            .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    c.bench_function("engine/shot bell d=3", |b| {
        b.iter(|| engine.run_shot(&mut rng).unwrap());
    });
    c.bench_function("engine/estimate 1k bell d=3", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            engine.estimate(1_000, seed).unwrap()
        });
    });

    let params = HvaParams { gammas: vec![0.49, 0.76], betas: vec![1.23, 0.71] };
    let tfim = tfim_hva(4, &params, &[2]).unwrap();
    let ham = tfim_hamiltonian(4, 1.0, 1.0).unwrap();
    let engine =
        QcqEngine::with_canonical_duals(tfim, NoiseModel::default(), ham, Readout::Exact).unwrap();
    c.bench_function("engine/shot tfim n=4", |b| {
        b.iter(|| engine.run_shot(&mut rng).unwrap());
    });
}

fn annealing_moves(c: &mut Criterion) {
    let u = gate_matrix("rzz", Some(0.7)).unwrap();
    let frame = FactorableFrame::uniform(&pauli6(), 2);
    let transfer = channel_transfer(&u, &frame).unwrap();
    let dual = pseudo_inverse(&transfer, 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let noise = dual.map(|_| 0.01 * rng.random::<f64>());
    c.bench_function("negopt/rao step 36x36", |b| {
        b.iter(|| rao_step(black_box(&transfer), &dual, &noise));
    });

    let t1 = overlap_matrix(&FactorableFrame::uniform(&pauli6(), 1));
    let b1 = pseudo_inverse(&t1, 1e-12);
    let out = vec![b1.clone(), b1.clone()];
    let inn = vec![b1.clone(), b1];
    c.bench_function("negopt/objective from factors", |b| {
        b.iter(|| factors_objective(black_box(&transfer), &out, &inn));
    });
}

criterion_group!(
    benches,
    density_evolution,
    interface_tables,
    shot_sampling,
    annealing_moves
);
criterion_main!(benches);
