//! Circuit representation and the two experiment families: long-range Bell
//! pairs (CHSH) and the transverse-field Ising variational ansatz.
//!
//! Hardware-shaped builders emit only single-qubit gates and CNOTs (RZZ and
//! SWAP are decomposed), so the noise model's per-CNOT depolarizing applies
//! uniformly. Long-range gates either get routed through nearest-neighbor
//! swap chains or become measure-and-reprepare interfaces.

use crate::densim::{DensityMatrix, Observable, StateVector};
use crate::error::{Error, Result};
use crate::gates;
use crate::linalg::{CMat, C64};
use crate::noise::NoiseModel;
use serde::{Deserialize, Serialize};

/// A named gate instance. `param` keeps rotation angles so circuits can be
/// serialized and rebuilt losslessly.
#[derive(Debug, Clone)]
pub struct Gate {
    pub name: String,
    pub qubits: Vec<usize>,
    pub param: Option<f64>,
    pub matrix: CMat,
}

/// One circuit operation: a physical gate, or a virtualized gate realized
/// as a measure-and-reprepare interface.
#[derive(Debug, Clone)]
pub enum Op {
    Gate(Gate),
    Interface(Gate),
}

impl Op {
    pub fn gate(&self) -> &Gate {
        match self {
            Op::Gate(g) | Op::Interface(g) => g,
        }
    }

    pub fn is_interface(&self) -> bool {
        matches!(self, Op::Interface(_))
    }
}

/// Build the matrix for a named gate. The registry covers every gate the
/// builders and the circuit file format use.
pub fn gate_matrix(name: &str, param: Option<f64>) -> Result<CMat> {
    match (name, param) {
        ("h", None) => Ok(gates::h()),
        ("x", None) => Ok(gates::x()),
        ("y", None) => Ok(gates::y()),
        ("z", None) => Ok(gates::z()),
        ("rx", Some(t)) => Ok(gates::rx(t)),
        ("rz", Some(t)) => Ok(gates::rz(t)),
        ("cnot", None) => Ok(gates::cnot()),
        ("swap", None) => Ok(gates::swap()),
        ("rzz", Some(t)) => Ok(gates::rzz(t)),
        ("h" | "x" | "y" | "z" | "cnot" | "swap", Some(_)) => {
            Err(Error::InvalidParam(format!("gate '{name}' takes no parameter")))
        }
        ("rx" | "rz" | "rzz", None) => {
            Err(Error::InvalidParam(format!("gate '{name}' requires a parameter")))
        }
        _ => Err(Error::InvalidParam(format!("unknown gate '{name}'"))),
    }
}

/// (qubit count, takes a parameter) for a registry gate name.
pub fn gate_signature(name: &str) -> Result<(usize, bool)> {
    match name {
        "h" | "x" | "y" | "z" => Ok((1, false)),
        "rx" | "rz" => Ok((1, true)),
        "cnot" | "swap" => Ok((2, false)),
        "rzz" => Ok((2, true)),
        _ => Err(Error::InvalidParam(format!("unknown gate '{name}'"))),
    }
}

/// An ordered list of operations on `n` qubits.
#[derive(Debug, Clone)]
pub struct Circuit {
    pub n: usize,
    pub ops: Vec<Op>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Self { n, ops: Vec::new() }
    }

    fn build_gate(&self, name: &str, qubits: &[usize], param: Option<f64>) -> Result<Gate> {
        let matrix = gate_matrix(name, param)?;
        if matrix.nrows() != 1 << qubits.len() {
            return Err(Error::Dimension { expected: matrix.nrows(), got: 1 << qubits.len() });
        }
        for (i, &q) in qubits.iter().enumerate() {
            if q >= self.n {
                return Err(Error::QubitIndex { index: q, n: self.n });
            }
            if qubits[..i].contains(&q) {
                return Err(Error::DuplicateTarget(q));
            }
        }
        Ok(Gate { name: name.into(), qubits: qubits.to_vec(), param, matrix })
    }

    pub fn add_gate(&mut self, name: &str, qubits: &[usize], param: Option<f64>) -> Result<()> {
        let g = self.build_gate(name, qubits, param)?;
        self.ops.push(Op::Gate(g));
        Ok(())
    }

    pub fn add_interface(
        &mut self,
        name: &str,
        qubits: &[usize],
        param: Option<f64>,
    ) -> Result<()> {
        let g = self.build_gate(name, qubits, param)?;
        self.ops.push(Op::Interface(g));
        Ok(())
    }

    pub fn n_interfaces(&self) -> usize {
        self.ops.iter().filter(|op| op.is_interface()).count()
    }

    /// Number of physical two-qubit gates (interfaces excluded).
    pub fn two_qubit_gate_count(&self) -> usize {
        self.ops
            .iter()
            .filter(|op| !op.is_interface() && op.gate().qubits.len() == 2)
            .count()
    }

    /// Exact density-matrix evaluation. Physical two-qubit gates are
    /// followed by `lambda_unit` depolarizing on both qubits; interfaces
    /// are applied as their ideal unitaries with no noise attached (the
    /// noisy interface semantics live in the sampling engine).
    pub fn run_exact(&self, noise: &NoiseModel) -> Result<DensityMatrix> {
        let mut rho = DensityMatrix::zero_state(self.n)?;
        for op in &self.ops {
            let g = op.gate();
            rho.apply_gate(&g.matrix, &g.qubits)?;
            if !op.is_interface() && g.qubits.len() == 2 && noise.lambda_unit > 0.0 {
                rho.apply_depolarizing(noise.lambda_unit, &g.qubits)?;
            }
        }
        Ok(rho)
    }

    /// Noiseless pure-state evaluation (interfaces applied as their ideal
    /// unitaries). Much cheaper than [`Circuit::run_exact`]; used for
    /// reference energies and parameter optimization.
    pub fn run_pure(&self) -> Result<StateVector> {
        let mut psi = StateVector::zero_state(self.n)?;
        for op in &self.ops {
            let g = op.gate();
            psi.apply_gate(&g.matrix, &g.qubits)?;
        }
        Ok(psi)
    }
}

/// How a long-range two-qubit gate is realized on nearest-neighbor
/// hardware.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LongRange {
    /// Measure-and-reprepare interface (distance independent).
    Interface,
    /// Route via explicit swap chains (3 CNOTs per swap).
    SwapChain,
}

fn push_swap_as_cnots(c: &mut Circuit, a: usize, b: usize) -> Result<()> {
    c.add_gate("cnot", &[a, b], None)?;
    c.add_gate("cnot", &[b, a], None)?;
    c.add_gate("cnot", &[a, b], None)
}

/// Bell pair between the endpoints of a `d`-qubit chain: H on qubit 0,
/// then CNOT(0, d−1). The swap-chain variant routes qubit 0 next to the
/// far end and back, costing 6(d−2)+1 CNOTs; the interface variant marks
/// the long-range CNOT for measure-and-reprepare.
pub fn bell_circuit(d: usize, long_range: LongRange) -> Result<Circuit> {
    if d < 2 {
        return Err(Error::InvalidParam(format!("need at least 2 qubits, got {d}")));
    }
    let mut c = Circuit::new(d);
    c.add_gate("h", &[0], None)?;
    match long_range {
        LongRange::Interface => c.add_interface("cnot", &[0, d - 1], None)?,
        LongRange::SwapChain => {
            for j in 0..d.saturating_sub(2) {
                push_swap_as_cnots(&mut c, j, j + 1)?;
            }
            c.add_gate("cnot", &[d - 2, d - 1], None)?;
            for j in (0..d.saturating_sub(2)).rev() {
                push_swap_as_cnots(&mut c, j, j + 1)?;
            }
        }
    }
    Ok(c)
}

/// CNOT count of the swap-chain route under fused swap/CNOT compilation,
/// reported for context alongside the literal count.
pub fn nominal_long_range_cnots(d: usize) -> usize {
    4 * (d - 2) + 1
}

/// The four CHSH correlator observables on the chain endpoints, using the
/// measurement axes that maximize |S| for |Φ+⟩: A₀ = Z, A₁ = X on qubit 0
/// and B₀ = (Z+X)/√2, B₁ = (Z−X)/√2 on qubit d−1.
pub fn chsh_correlators(d: usize) -> Result<[Observable; 4]> {
    if d < 2 {
        return Err(Error::InvalidParam(format!("need at least 2 qubits, got {d}")));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let a = [gates::z(), gates::x()];
    let b = [
        (gates::z() + gates::x()) * C64::from(s),
        (gates::z() - gates::x()) * C64::from(s),
    ];
    let qubits = vec![0, d - 1];
    let mk = |i: usize, j: usize| -> Result<Observable> {
        Observable::new(format!("C{i}{j}"), qubits.clone(), a[i].kronecker(&b[j]))
    };
    Ok([mk(0, 0)?, mk(0, 1)?, mk(1, 0)?, mk(1, 1)?])
}

/// CHSH combination S = C₀₀ + C₀₁ + C₁₀ − C₁₁.
pub fn chsh_s(correlators: &[f64; 4]) -> f64 {
    correlators[0] + correlators[1] + correlators[2] - correlators[3]
}

/// The CHSH combination as a single observable on the chain endpoints, so
/// S can be estimated shot-by-shot instead of one correlator at a time.
/// Spectral norm 2√2.
pub fn chsh_observable(d: usize) -> Result<Observable> {
    let [c00, c01, c10, c11] = chsh_correlators(d)?;
    let mat = c00.matrix() + c01.matrix() + c10.matrix() - c11.matrix();
    Observable::new("CHSH", vec![0, d - 1], mat)
}

/// Variational angles for the Ising ansatz: one (γ, β) pair per layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HvaParams {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl HvaParams {
    pub fn zeros(p: usize) -> Self {
        Self { gammas: vec![0.0; p], betas: vec![0.0; p] }
    }

    pub fn layers(&self) -> usize {
        self.gammas.len()
    }

    fn validate(&self) -> Result<()> {
        if self.gammas.len() != self.betas.len() || self.gammas.is_empty() {
            return Err(Error::InvalidParam(format!(
                "need equal nonzero angle counts, got {} gammas and {} betas",
                self.gammas.len(),
                self.betas.len()
            )));
        }
        Ok(())
    }
}

fn validate_interfaced_layers(layers: &[usize], p: usize) -> Result<()> {
    for (i, &l) in layers.iter().enumerate() {
        if l == 0 || l > p {
            return Err(Error::InvalidParam(format!(
                "interfaced layer {l} out of range 1..={p}"
            )));
        }
        if layers[..i].contains(&l) {
            return Err(Error::InvalidParam(format!("interfaced layer {l} listed twice")));
        }
    }
    Ok(())
}

/// Hardware-shaped Ising ansatz on a ring of `n` qubits: an initial H
/// layer, then per layer i: nearest-neighbor ZZ rotations (CNOT·RZ·CNOT),
/// the ring-closing ZZ bond (0, n−1), and RX on every qubit.
///
/// The ring bond is routed through swap chains (6(n−2)+2 CNOTs), except in
/// layers listed in `interfaced_layers` (1-based), where it becomes a
/// measure-and-reprepare interface on qubits (0, n−1).
pub fn tfim_hva(n: usize, params: &HvaParams, interfaced_layers: &[usize]) -> Result<Circuit> {
    if n < 3 {
        return Err(Error::InvalidParam(format!("ring ansatz needs n ≥ 3, got {n}")));
    }
    params.validate()?;
    let p = params.layers();
    validate_interfaced_layers(interfaced_layers, p)?;
    let mut c = Circuit::new(n);
    for q in 0..n {
        c.add_gate("h", &[q], None)?;
    }
    for layer in 1..=p {
        let gamma = params.gammas[layer - 1];
        let beta = params.betas[layer - 1];
        for j in 0..n - 1 {
            c.add_gate("cnot", &[j, j + 1], None)?;
            c.add_gate("rz", &[j + 1], Some(gamma))?;
            c.add_gate("cnot", &[j, j + 1], None)?;
        }
        if interfaced_layers.contains(&layer) {
            c.add_interface("rzz", &[0, n - 1], Some(gamma))?;
        } else {
            for j in 0..n - 2 {
                push_swap_as_cnots(&mut c, j, j + 1)?;
            }
            c.add_gate("cnot", &[n - 2, n - 1], None)?;
            c.add_gate("rz", &[n - 1], Some(gamma))?;
            c.add_gate("cnot", &[n - 2, n - 1], None)?;
            for j in (0..n - 2).rev() {
                push_swap_as_cnots(&mut c, j, j + 1)?;
            }
        }
        for q in 0..n {
            c.add_gate("rx", &[q], Some(beta))?;
        }
    }
    Ok(c)
}

/// Logical (undecomposed) form of the same ansatz: direct RZZ gates on all
/// ring bonds, no routing. Unitarily identical to the hardware circuit;
/// used for fast noiseless evaluation during angle optimization.
pub fn tfim_hva_logical(n: usize, params: &HvaParams) -> Result<Circuit> {
    if n < 3 {
        return Err(Error::InvalidParam(format!("ring ansatz needs n ≥ 3, got {n}")));
    }
    params.validate()?;
    let mut c = Circuit::new(n);
    for q in 0..n {
        c.add_gate("h", &[q], None)?;
    }
    for layer in 0..params.layers() {
        for j in 0..n - 1 {
            c.add_gate("rzz", &[j, j + 1], Some(params.gammas[layer]))?;
        }
        c.add_gate("rzz", &[0, n - 1], Some(params.gammas[layer]))?;
        for q in 0..n {
            c.add_gate("rx", &[q], Some(params.betas[layer]))?;
        }
    }
    Ok(c)
}

/// Ring Ising Hamiltonian H = −J Σ Z_j Z_{j+1} − g Σ X_j (bond (n−1, 0)
/// included), as a full-register observable.
pub fn tfim_hamiltonian(n: usize, j_coupling: f64, g_field: f64) -> Result<Observable> {
    if n < 3 || n > 12 {
        return Err(Error::QubitCount(n));
    }
    let dim = 1usize << n;
    let mut h = CMat::zeros(dim, dim);
    // Diagonal ZZ part: ⟨x|Z_a Z_b|x⟩ = ±1 from the parity of bits a, b.
    for x in 0..dim {
        let mut diag = 0.0;
        for q in 0..n {
            let b1 = (x >> (n - 1 - q)) & 1;
            let b2 = (x >> (n - 1 - (q + 1) % n)) & 1;
            diag += if b1 == b2 { -j_coupling } else { j_coupling };
        }
        h[(x, x)] = C64::from(diag);
    }
    // Off-diagonal X part: −g connects states differing in one bit.
    for x in 0..dim {
        for q in 0..n {
            let y = x ^ (1 << (n - 1 - q));
            h[(x, y)] += C64::from(-g_field);
        }
    }
    Observable::new(format!("tfim(n={n})"), (0..n).collect(), h)
}

/// Noiseless energy of the logical ansatz at the given angles, evaluated
/// on the pure-state simulator.
pub fn hva_energy(n: usize, params: &HvaParams, ham: &Observable) -> Result<f64> {
    let circuit = tfim_hva_logical(n, params)?;
    circuit.run_pure()?.expectation(ham)
}

/// Minimize the ansatz energy over the 2p angles with Nelder-Mead from a
/// few fixed starting points. Deterministic. Returns the best angles and
/// their energy.
pub fn optimize_hva(
    n: usize,
    p: usize,
    j_coupling: f64,
    g_field: f64,
) -> Result<(HvaParams, f64)> {
    if p == 0 {
        return Err(Error::InvalidParam("need at least one layer".into()));
    }
    let ham = tfim_hamiltonian(n, j_coupling, g_field)?;
    let unpack = |x: &[f64]| HvaParams {
        gammas: x[..p].to_vec(),
        betas: x[p..].to_vec(),
    };
    let energy = |x: &[f64]| -> f64 {
        hva_energy(n, &unpack(x), &ham).expect("angle evaluation cannot fail")
    };
    let dim = 2 * p;
    let mut starts: Vec<Vec<f64>> = vec![
        vec![0.1; dim],
        vec![0.5; dim],
        (0..dim).map(|i| if i < p { 0.8 } else { 0.35 }).collect(),
    ];
    // A sign-mixed start helps when the symmetric ones share a basin.
    starts.push((0..dim).map(|i| if i % 2 == 0 { 0.6 } else { -0.3 }).collect());
    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in starts {
        let (x, f) = nelder_mead(&energy, &start, 0.25, 400 * dim, 1e-10);
        if best.as_ref().map_or(true, |(_, bf)| f < *bf) {
            best = Some((x, f));
        }
    }
    let (x, f) = best.expect("at least one start");
    Ok((unpack(&x), f))
}

/// Standard Nelder-Mead (reflection 1, expansion 2, contraction ½,
/// shrink ½) minimizing `f` from `x0` with initial simplex step `step`.
fn nelder_mead(
    f: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    max_iter: usize,
    f_tol: f64,
) -> (Vec<f64>, f64) {
    let dim = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += step;
        let fx = f(&x);
        simplex.push((x, fx));
    }
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (f_best, f_worst) = (simplex[0].1, simplex[dim].1);
        if (f_worst - f_best).abs() < f_tol {
            break;
        }
        // Centroid of all but the worst point.
        let mut centroid = vec![0.0; dim];
        for (x, _) in &simplex[..dim] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / dim as f64;
            }
        }
        let blend = |a: f64, b: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[dim].0)
                .map(|(c, w)| a * c + b * w)
                .collect()
        };
        let reflected = blend(2.0, -1.0);
        let f_refl = f(&reflected);
        if f_refl < simplex[0].1 {
            let expanded = blend(3.0, -2.0);
            let f_exp = f(&expanded);
            simplex[dim] = if f_exp < f_refl {
                (expanded, f_exp)
            } else {
                (reflected, f_refl)
            };
        } else if f_refl < simplex[dim - 1].1 {
            simplex[dim] = (reflected, f_refl);
        } else {
            let contracted = blend(0.5, 0.5);
            let f_con = f(&contracted);
            if f_con < simplex[dim].1 {
                simplex[dim] = (contracted, f_con);
            } else {
                // Shrink toward the best vertex.
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    for (xi, bi) in entry.0.iter_mut().zip(&best) {
                        *xi = 0.5 * (*xi + bi);
                    }
                    entry.1 = f(&entry.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex[0].clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    fn bell_correlator_check(rho: &DensityMatrix, d: usize) {
        let zz = Observable::new(
            "ZZ",
            vec![0, d - 1],
            gates::z().kronecker(&gates::z()),
        )
        .unwrap();
        let xx = Observable::new(
            "XX",
            vec![0, d - 1],
            gates::x().kronecker(&gates::x()),
        )
        .unwrap();
        assert!((rho.expectation(&zz).unwrap() - 1.0).abs() < 1e-10);
        assert!((rho.expectation(&xx).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn swap_chain_bell_matches_direct_preparation() {
        for d in [2usize, 3, 5, 6] {
            let c = bell_circuit(d, LongRange::SwapChain).unwrap();
            let rho = c.run_exact(&NoiseModel::noiseless()).unwrap();
            bell_correlator_check(&rho, d);
            assert_eq!(c.two_qubit_gate_count(), 6 * (d - 2) + 1);
            assert_eq!(c.n_interfaces(), 0);
        }
    }

    #[test]
    fn interfaced_bell_run_as_unitary_matches() {
        let c = bell_circuit(4, LongRange::Interface).unwrap();
        assert_eq!(c.n_interfaces(), 1);
        assert_eq!(c.two_qubit_gate_count(), 0);
        let rho = c.run_exact(&NoiseModel::noiseless()).unwrap();
        bell_correlator_check(&rho, 4);
    }

    #[test]
    fn chsh_reaches_tsirelson_on_bell_pair() {
        let c = bell_circuit(2, LongRange::SwapChain).unwrap();
        let rho = c.run_exact(&NoiseModel::noiseless()).unwrap();
        let obs = chsh_correlators(2).unwrap();
        let vals: Vec<f64> = obs.iter().map(|o| rho.expectation(o).unwrap()).collect();
        let s = chsh_s(&[vals[0], vals[1], vals[2], vals[3]]);
        assert!((s - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn chsh_on_product_state_stays_classical() {
        let rho = DensityMatrix::zero_state(2).unwrap();
        let obs = chsh_correlators(2).unwrap();
        let vals: Vec<f64> = obs.iter().map(|o| rho.expectation(o).unwrap()).collect();
        let s = chsh_s(&[vals[0], vals[1], vals[2], vals[3]]);
        assert!((s - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!(s.abs() <= 2.0);
    }

    #[test]
    fn hva_gate_counts_and_interface_marks() {
        let params = HvaParams { gammas: vec![0.3, 0.7], betas: vec![0.2, 0.4] };
        let plain = tfim_hva(4, &params, &[]).unwrap();
        // Per layer: 3 NN bonds × 2 CNOTs + ring bond 6·2+2 = 20 CNOTs.
        assert_eq!(plain.two_qubit_gate_count(), 40);
        assert_eq!(plain.n_interfaces(), 0);

        let marked = tfim_hva(4, &params, &[2]).unwrap();
        assert_eq!(marked.n_interfaces(), 1);
        assert_eq!(marked.two_qubit_gate_count(), 40 - 14);
        let interface = marked.ops.iter().find(|op| op.is_interface()).unwrap();
        assert_eq!(interface.gate().qubits, vec![0, 3]);
        assert_eq!(interface.gate().name, "rzz");
        assert!((interface.gate().param.unwrap() - 0.7).abs() < 1e-15);

        assert!(tfim_hva(4, &params, &[3]).is_err(), "layer out of range");
        assert!(tfim_hva(4, &params, &[1, 1]).is_err(), "duplicate layer");
    }

    #[test]
    fn hardware_and_logical_ansatz_agree() {
        let params = HvaParams { gammas: vec![0.45, -0.2], betas: vec![0.31, 0.6] };
        let ham = tfim_hamiltonian(4, 1.0, 1.0).unwrap();
        let hw = tfim_hva(4, &params, &[])
            .unwrap()
            .run_exact(&NoiseModel::noiseless())
            .unwrap();
        let lg = tfim_hva_logical(4, &params)
            .unwrap()
            .run_exact(&NoiseModel::noiseless())
            .unwrap();
        assert!(linalg::max_abs_c(&(hw.matrix() - lg.matrix())) < 1e-10);
        let e_hw = hw.expectation(&ham).unwrap();
        let e_lg = lg.expectation(&ham).unwrap();
        assert!((e_hw - e_lg).abs() < 1e-10);
    }

    #[test]
    fn hamiltonian_ground_energies() {
        // g = 0: classical ferromagnet, all bonds satisfied.
        let classical = tfim_hamiltonian(3, 1.0, 0.0).unwrap();
        assert!((classical.eigenvalues()[0] + 3.0).abs() < 1e-12);
        // Critical ring values, fixed by exact diagonalization.
        let n4 = tfim_hamiltonian(4, 1.0, 1.0).unwrap();
        assert!((n4.eigenvalues()[0] + 5.226_251_859_505_506).abs() < 1e-9);
        let n8 = tfim_hamiltonian(8, 1.0, 1.0).unwrap();
        assert!((n8.eigenvalues()[0] + 10.251_661_790_966_2).abs() < 1e-8);
    }

    #[test]
    fn zero_angles_give_transverse_energy() {
        let params = HvaParams::zeros(2);
        let ham = tfim_hamiltonian(4, 1.0, 1.0).unwrap();
        let e = hva_energy(4, &params, &ham).unwrap();
        assert!((e + 4.0).abs() < 1e-12, "|+⟩^N has energy −N·g, got {e}");
    }

    #[test]
    fn optimizer_approaches_ground_state_at_full_depth() {
        let (params, e) = optimize_hva(4, 2, 1.0, 1.0).unwrap();
        let ham = tfim_hamiltonian(4, 1.0, 1.0).unwrap();
        let e_gs = ham.eigenvalues()[0];
        assert!((hva_energy(4, &params, &ham).unwrap() - e).abs() < 1e-9);
        assert!(
            e - e_gs < 1e-3,
            "optimized energy {e} vs ground state {e_gs}"
        );
        // And it beats the trivial angles by a wide margin.
        assert!(e < -4.5);
    }

    #[test]
    fn gate_registry_rejects_bad_parameters() {
        assert!(gate_matrix("h", Some(0.1)).is_err());
        assert!(gate_matrix("rx", None).is_err());
        assert!(gate_matrix("qft", None).is_err());
        let m = gate_matrix("rzz", Some(0.7)).unwrap();
        assert!(linalg::max_abs_c(&(m - gates::rzz(0.7))) < 1e-15);
    }

    #[test]
    fn pure_run_matches_density_run() {
        let params = HvaParams { gammas: vec![0.45, -0.2], betas: vec![0.31, 0.6] };
        let circuit = tfim_hva_logical(4, &params).unwrap();
        let rho = circuit.run_exact(&NoiseModel::noiseless()).unwrap();
        let psi = circuit.run_pure().unwrap();
        assert!(
            linalg::max_abs_c(&(psi.density().unwrap().matrix() - rho.matrix())) < 1e-10
        );
        let ham = tfim_hamiltonian(4, 1.0, 1.0).unwrap();
        let dv = rho.expectation(&ham).unwrap();
        let pv = psi.expectation(&ham).unwrap();
        assert!((dv - pv).abs() < 1e-12);
    }

    #[test]
    fn combined_chsh_observable_matches_correlator_sum() {
        let d = 3;
        let rho = bell_circuit(d, LongRange::SwapChain)
            .unwrap()
            .run_exact(&NoiseModel::new(0.01, 0.0, 0.0).unwrap())
            .unwrap();
        let parts = chsh_correlators(d).unwrap();
        let vals: Vec<f64> = parts.iter().map(|o| rho.expectation(o).unwrap()).collect();
        let s_sum = chsh_s(&[vals[0], vals[1], vals[2], vals[3]]);
        let combined = chsh_observable(d).unwrap();
        let s_one = rho.expectation(&combined).unwrap();
        assert!((s_sum - s_one).abs() < 1e-12);
        assert!((combined.norm() - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-12);
        // The ideal Bell state sits at the quantum ceiling.
        let ideal = bell_circuit(2, LongRange::SwapChain)
            .unwrap()
            .run_exact(&NoiseModel::noiseless())
            .unwrap();
        let obs2 = chsh_observable(2).unwrap();
        let s = ideal.expectation(&obs2).unwrap();
        assert!((s - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-10);
    }
}
