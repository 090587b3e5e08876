//! Depolarizing noise model and placement rules.

use crate::error::{Error, Result};
use crate::gates;
use crate::linalg::{CMat, C64};
use serde::{Deserialize, Serialize};

/// Depolarizing strengths and where they apply.
///
/// Placement: `lambda_unit` hits both target qubits of every CNOT (and thus
/// every gate synthesized from CNOTs); `lambda_meas` is applied to the
/// interface qubits right before the POVM measurement; `lambda_reprep` right
/// after the repreparation. Single-qubit hardware gates are noiseless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub lambda_unit: f64,
    pub lambda_meas: f64,
    pub lambda_reprep: f64,
}

impl NoiseModel {
    pub fn new(lambda_unit: f64, lambda_meas: f64, lambda_reprep: f64) -> Result<Self> {
        for (name, l) in [
            ("lambda_unit", lambda_unit),
            ("lambda_meas", lambda_meas),
            ("lambda_reprep", lambda_reprep),
        ] {
            if !(0.0..=1.0).contains(&l) || !l.is_finite() {
                return Err(Error::InvalidParam(format!("{name} = {l} not in [0, 1]")));
            }
        }
        Ok(Self { lambda_unit, lambda_meas, lambda_reprep })
    }

    /// All strengths zero.
    pub fn noiseless() -> Self {
        Self { lambda_unit: 0.0, lambda_meas: 0.0, lambda_reprep: 0.0 }
    }

    /// Default strengths for the CHSH-versus-distance experiment.
    pub fn chsh_default() -> Self {
        Self { lambda_unit: 0.005, lambda_meas: 0.01, lambda_reprep: 0.005 }
    }

    /// Default strengths for the Ising-chain experiments: CNOT noise only.
    pub fn tfim_default() -> Self {
        Self { lambda_unit: 0.005, lambda_meas: 0.0, lambda_reprep: 0.0 }
    }

    pub fn is_noiseless(&self) -> bool {
        self.lambda_unit == 0.0 && self.lambda_meas == 0.0 && self.lambda_reprep == 0.0
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::noiseless()
    }
}

/// Kraus operators of the single-qubit depolarizing channel:
/// K₁ = √((4−3λ)/4)·I and K_{2,3,4} = √(λ/4)·{X, Y, Z}.
pub fn depolarizing_kraus(lambda: f64) -> Result<Vec<CMat>> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParam(format!("lambda = {lambda} not in [0, 1]")));
    }
    let k1 = C64::from(((4.0 - 3.0 * lambda) / 4.0).sqrt());
    let kp = C64::from((lambda / 4.0).sqrt());
    Ok(vec![
        gates::id2() * k1,
        gates::x() * kp,
        gates::y() * kp,
        gates::z() * kp,
    ])
}
