use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::pauli::{number_op_1norm, q_1norm};
use super::{FactorMethod, FactorizedModel, HamiltonianModel, ModelHeader, TensorId};
use crate::decomp::Factors;
use crate::error::{Error, Result};

/// How λ is accumulated.
///
/// `Coefficient` sums bare tensor coefficients; `Encoding` sums the LCU
/// coefficients actually loaded by the unary-encoded block encoding.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMode {
    #[default]
    Coefficient,
    Encoding,
}

impl fmt::Display for NormMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormMode::Coefficient => "coefficient",
            NormMode::Encoding => "encoding",
        })
    }
}

impl FromStr for NormMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coefficient" => Ok(NormMode::Coefficient),
            "encoding" => Ok(NormMode::Encoding),
            _ => Err(Error::InvalidArgument(format!("unknown norm mode {s:?}"))),
        }
    }
}

/// Weight of the electronic operator attached to a vibronic tensor on the
/// orbital pair `(i, j)`, summed over both spins.
///
/// In coefficient mode an off-diagonal pair counts its hermitian partner
/// separately. In encoding mode `c†_i c_j + c†_j c_i` is one LCU of two
/// Pauli strings with coefficient ½ each, and `n_i = (I − Z_i)/2`, so every
/// pair contributes 1 per spin.
pub fn electronic_weight(id: TensorId, mode: NormMode) -> f64 {
    match (id.orbitals(), mode) {
        (None, _) => 1.0,
        (Some((i, j)), NormMode::Coefficient) => {
            if i < j {
                4.0
            } else {
                2.0
            }
        }
        (Some(_), NormMode::Encoding) => 2.0,
    }
}

fn harmonic_1norm(h: &ModelHeader, mode: NormMode) -> f64 {
    let per_mode = match mode {
        NormMode::Coefficient => 1.0,
        NormMode::Encoding => number_op_1norm(h.cutoff_d),
    };
    h.omega.iter().map(|w| w.abs()).sum::<f64>() * per_mode
}

fn counts(id: TensorId, h: &ModelHeader) -> bool {
    id.orbitals().is_none() || h.orbitals > 0
}

pub fn one_norm_unfactorized(h: &HamiltonianModel, mode: NormMode) -> f64 {
    let qn = q_1norm(h.cutoff());
    let mut total = harmonic_1norm(&h.header, mode);
    for (id, t) in h.tensors().filter(|(id, _)| counts(*id, &h.header)) {
        let enc = match mode {
            NormMode::Coefficient => 1.0,
            NormMode::Encoding => qn.powi(id.order() as i32),
        };
        total += t.coefficient_1norm() * enc * electronic_weight(id, mode);
    }
    total
}

/// `‖s‖₁ = ‖Q‖₁ · ‖q‖₁` in encoding mode, 1 otherwise.
fn s_weight(q: &[f64], qn: f64, mode: NormMode) -> f64 {
    match mode {
        NormMode::Coefficient => 1.0,
        NormMode::Encoding => q.iter().map(|x| x.abs()).sum::<f64>() * qn,
    }
}

fn factorized_part(f: &FactorizedModel, mode: NormMode) -> f64 {
    let qn = q_1norm(f.header.cutoff_d);
    let mut total = 0.0;
    for t in f.tensors.iter().filter(|t| counts(t.id, &f.header)) {
        let elec = electronic_weight(t.id, mode);
        let part: f64 = match &t.factors {
            Factors::Cp(cp) => cp
                .weights
                .iter()
                .zip(&cp.factors)
                .map(|(w, q)| w.abs() * s_weight(q, qn, mode).powi(cp.order as i32))
                .sum(),
            Factors::Tucker(tk) => {
                let sw: Vec<f64> = tk.factors.iter().map(|q| s_weight(q, qn, mode)).collect();
                let mut sum = 0.0;
                crate::symtensor::for_each_index(tk.order, tk.modes, |pos, idx| {
                    let c = tk.core[pos];
                    if c != 0.0 {
                        sum += c.abs() * idx.iter().map(|&b| sw[b]).product::<f64>();
                    }
                });
                sum
            }
        };
        total += part * elec;
    }
    total
}

pub fn one_norm_cp(f: &FactorizedModel, mode: NormMode) -> Result<f64> {
    if f.method != FactorMethod::Cp {
        return Err(Error::InvalidArgument(
            "one_norm_cp needs a CP model".into(),
        ));
    }
    Ok(harmonic_1norm(&f.header, mode) + factorized_part(f, mode))
}

pub fn one_norm_tucker(f: &FactorizedModel, mode: NormMode) -> Result<f64> {
    if f.method != FactorMethod::Tucker {
        return Err(Error::InvalidArgument(
            "one_norm_tucker needs a Tucker model".into(),
        ));
    }
    Ok(harmonic_1norm(&f.header, mode) + factorized_part(f, mode))
}

/// Dispatches on the model's method.
pub fn one_norm_factorized(f: &FactorizedModel, mode: NormMode) -> f64 {
    harmonic_1norm(&f.header, mode) + factorized_part(f, mode)
}
