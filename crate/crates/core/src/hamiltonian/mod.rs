//! Vibrational and vibronic Hamiltonian models, their factorized forms and
//! 1-norms.
//!
//! A model holds harmonic frequencies `ω_α`, vibrational force-constant
//! tensors `E_{α₁…α_k}` for `3 ≤ k ≤ L_v`, and vibronic tensors
//! `E_{α₁…α_k ij}` for `1 ≤ k ≤ L_vc` and `i ≤ j < N`, shared by both
//! spin projections. The operator it describes is
//!
//! ```text
//! H = Σ_α ω_α n_α + Σ_k Σ_α E_α q_α₁…q_α_k
//!   + Σ_k Σ_{i≤j} Σ_σ Σ_α E_αij q_α₁…q_α_k (c†_iσ c_jσ + h.c. if i<j)
//! ```

mod factorize;
mod io;
mod norms;
mod pauli;
mod synth;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::decomp::Factors;
use crate::error::{Error, Result};
use crate::symtensor::SymTensor;

pub use factorize::{factorize, factorize_fixed_rank};
pub use io::{ModelFile, TensorSource, VibEntry, VibcEntry};
pub use norms::{
    electronic_weight, one_norm_cp, one_norm_factorized, one_norm_tucker, one_norm_unfactorized,
    NormMode,
};
pub use pauli::{
    number_op_1norm, number_op_pauli_terms, pauli_1norm, q_1norm, q_pauli_terms, Pauli, PauliTerm,
};
pub use synth::synth_vibronic;

/// Identifies one coefficient tensor of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TensorId {
    Vib { order: usize },
    Vibc { order: usize, i: usize, j: usize },
}

impl TensorId {
    pub fn order(&self) -> usize {
        match *self {
            TensorId::Vib { order } | TensorId::Vibc { order, .. } => order,
        }
    }

    /// `(i, j)` for vibronic tensors.
    pub fn orbitals(&self) -> Option<(usize, usize)> {
        match *self {
            TensorId::Vib { .. } => None,
            TensorId::Vibc { i, j, .. } => Some((i, j)),
        }
    }
}

impl fmt::Display for TensorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TensorId::Vib { order } => write!(f, "vib{order}"),
            TensorId::Vibc { order, i, j } => write!(f, "vibc{order}_{i}_{j}"),
        }
    }
}

/// Sizes and frequencies shared by raw and factorized models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelHeader {
    pub modes: usize,
    pub orbitals: usize,
    pub cutoff_d: usize,
    pub omega: Vec<f64>,
    pub lv: usize,
    pub lvc: usize,
}

impl ModelHeader {
    /// System register: `d+1` qubits per mode and one per spin-orbital.
    pub fn system_qubits(&self) -> usize {
        self.modes * (self.cutoff_d + 1) + 2 * self.orbitals
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidModel(m));
        if self.modes == 0 {
            return bad("modes must be >= 1".into());
        }
        if self.cutoff_d == 0 {
            return bad("cutoff_d must be >= 1".into());
        }
        if self.omega.len() != self.modes {
            return bad(format!(
                "{} frequencies for {} modes",
                self.omega.len(),
                self.modes
            ));
        }
        if let Some(w) = self.omega.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return bad(format!("frequency {w} is not positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianModel {
    pub header: ModelHeader,
    vib: BTreeMap<usize, SymTensor>,
    vibc: BTreeMap<(usize, usize, usize), SymTensor>,
}

impl HamiltonianModel {
    pub fn new(header: ModelHeader) -> Result<Self> {
        header.validate()?;
        Ok(HamiltonianModel {
            header,
            vib: BTreeMap::new(),
            vibc: BTreeMap::new(),
        })
    }

    /// Harmonic-only model with `L_v = L_vc = 0` and no orbitals.
    pub fn harmonic(omega: Vec<f64>, cutoff_d: usize) -> Result<Self> {
        Self::new(ModelHeader {
            modes: omega.len(),
            orbitals: 0,
            cutoff_d,
            omega,
            lv: 0,
            lvc: 0,
        })
    }

    pub fn modes(&self) -> usize {
        self.header.modes
    }

    pub fn orbitals(&self) -> usize {
        self.header.orbitals
    }

    pub fn cutoff(&self) -> usize {
        self.header.cutoff_d
    }

    pub fn omega(&self) -> &[f64] {
        &self.header.omega
    }

    /// Adds the order-`t.order()` vibrational tensor, raising `L_v` if needed.
    pub fn insert_vib(&mut self, t: SymTensor) -> Result<()> {
        let k = t.order();
        if k < 3 {
            return Err(Error::InvalidModel(format!("vibrational order {k} < 3")));
        }
        self.check_modes(&t)?;
        if self.vib.contains_key(&k) {
            return Err(Error::InvalidModel(format!(
                "duplicate vibrational order {k}"
            )));
        }
        self.header.lv = self.header.lv.max(k);
        if !t.is_zero() {
            self.vib.insert(k, t);
        }
        Ok(())
    }

    /// Adds a vibronic tensor for the orbital pair `(i, j)`; the pair is
    /// stored as `(min, max)`. Raises `L_vc` if needed.
    pub fn insert_vibc(&mut self, i: usize, j: usize, t: SymTensor) -> Result<()> {
        let k = t.order();
        let (i, j) = (i.min(j), i.max(j));
        if j >= self.header.orbitals {
            return Err(Error::InvalidModel(format!(
                "orbital pair ({i}, {j}) out of range for {} orbitals",
                self.header.orbitals
            )));
        }
        self.check_modes(&t)?;
        if self.vibc.contains_key(&(k, i, j)) {
            return Err(Error::InvalidModel(format!(
                "duplicate vibronic tensor order {k} pair ({i}, {j})"
            )));
        }
        self.header.lvc = self.header.lvc.max(k);
        if !t.is_zero() {
            self.vibc.insert((k, i, j), t);
        }
        Ok(())
    }

    fn check_modes(&self, t: &SymTensor) -> Result<()> {
        if t.modes() != self.header.modes {
            return Err(Error::InvalidModel(format!(
                "tensor over {} modes in a {}-mode model",
                t.modes(),
                self.header.modes
            )));
        }
        Ok(())
    }

    pub fn vib(&self, order: usize) -> Option<&SymTensor> {
        self.vib.get(&order)
    }

    pub fn vibc(&self, order: usize, i: usize, j: usize) -> Option<&SymTensor> {
        self.vibc.get(&(order, i.min(j), i.max(j)))
    }

    /// Every stored tensor: vibrational by order, then vibronic by
    /// `(order, i, j)`.
    pub fn tensors(&self) -> impl Iterator<Item = (TensorId, &SymTensor)> + '_ {
        let vib = self
            .vib
            .iter()
            .map(|(&order, t)| (TensorId::Vib { order }, t));
        let vibc = self
            .vibc
            .iter()
            .map(|(&(order, i, j), t)| (TensorId::Vibc { order, i, j }, t));
        vib.chain(vibc)
    }

    pub fn tensor(&self, id: TensorId) -> Option<&SymTensor> {
        match id {
            TensorId::Vib { order } => self.vib(order),
            TensorId::Vibc { order, i, j } => self.vibc(order, i, j),
        }
    }

    pub fn has_anharmonic(&self) -> bool {
        !self.vib.is_empty() || !self.vibc.is_empty()
    }

    /// Copy with every anharmonic tensor multiplied by `c`.
    pub fn scaled_anharmonic(&self, c: f64) -> Self {
        HamiltonianModel {
            header: self.header.clone(),
            vib: self.vib.iter().map(|(k, t)| (*k, t.scaled(c))).collect(),
            vibc: self.vibc.iter().map(|(k, t)| (*k, t.scaled(c))).collect(),
        }
    }

    /// Copy with modes renamed `α → perm[α]` (frequencies follow their mode).
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let mut omega = vec![0.0; self.modes()];
        if perm.len() != omega.len() {
            return Err(Error::Shape(format!(
                "permutation of length {}",
                perm.len()
            )));
        }
        for (a, &p) in perm.iter().enumerate() {
            omega[p] = self.header.omega[a];
        }
        let mut out = HamiltonianModel::new(ModelHeader {
            omega,
            ..self.header.clone()
        })?;
        for (k, t) in &self.vib {
            out.vib.insert(*k, t.relabel(perm)?);
        }
        for (k, t) in &self.vibc {
            out.vibc.insert(*k, t.relabel(perm)?);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorMethod {
    Cp,
    Tucker,
}

impl fmt::Display for FactorMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FactorMethod::Cp => "cp",
            FactorMethod::Tucker => "tucker",
        })
    }
}

/// One decomposed tensor and the relative Frobenius error it achieved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizedTensor {
    pub id: TensorId,
    pub factors: Factors,
    pub eps_f: f64,
}

impl FactorizedTensor {
    /// CP rank, or the number of modes for Tucker.
    pub fn rank(&self) -> usize {
        match &self.factors {
            Factors::Cp(f) => f.rank(),
            Factors::Tucker(f) => f.modes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizedModel {
    pub header: ModelHeader,
    pub method: FactorMethod,
    pub tensors: Vec<FactorizedTensor>,
}

impl FactorizedModel {
    /// Harmonic-only factorized model (no anharmonic terms).
    pub fn empty(header: ModelHeader, method: FactorMethod) -> Self {
        FactorizedModel {
            header,
            method,
            tensors: Vec::new(),
        }
    }

    pub fn max_rank(&self) -> usize {
        self.tensors.iter().map(|t| t.rank()).max().unwrap_or(0)
    }

    pub fn max_eps_f(&self) -> f64 {
        self.tensors.iter().map(|t| t.eps_f).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("factorized model serialization is infallible")
    }

    pub fn from_json_str(text: &str, location: &str) -> Result<Self> {
        let f: FactorizedModel =
            serde_json::from_str(text).map_err(|e| Error::parse(location, e))?;
        f.header.validate()?;
        for t in &f.tensors {
            if t.factors.order() != t.id.order() || t.factors.modes() != f.header.modes {
                return Err(Error::parse(
                    location,
                    format!("factors of {} have wrong shape", t.id),
                ));
            }
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic(modes: usize, entries: &[(&[usize], f64)]) -> SymTensor {
        let mut t = SymTensor::zeros(3, modes).unwrap();
        for (i, v) in entries {
            t.set(i, *v).unwrap();
        }
        t
    }

    #[test]
    fn header_validation() {
        assert!(HamiltonianModel::harmonic(vec![1.0, 2.0], 1).is_ok());
        assert!(HamiltonianModel::harmonic(vec![1.0, -2.0], 1).is_err());
        assert!(HamiltonianModel::harmonic(vec![1.0], 0).is_err());
        assert!(HamiltonianModel::harmonic(vec![], 2).is_err());
    }

    #[test]
    fn tensors_iterate_in_fixed_order() {
        let mut h = HamiltonianModel::new(ModelHeader {
            modes: 2,
            orbitals: 2,
            cutoff_d: 1,
            omega: vec![1.0, 2.0],
            lv: 3,
            lvc: 1,
        })
        .unwrap();
        h.insert_vibc(1, 0, cubic(2, &[(&[0, 1, 1], 0.1)])).unwrap();
        h.insert_vib(cubic(2, &[(&[0, 0, 0], 0.5)])).unwrap();
        let ids: Vec<String> = h.tensors().map(|(id, _)| id.to_string()).collect();
        assert_eq!(ids, vec!["vib3", "vibc3_0_1"]);
        assert_eq!(h.header.lvc, 3);
        assert!(h.vibc(3, 1, 0).is_some());
        assert!(h.insert_vibc(0, 2, cubic(2, &[])).is_err());
        assert!(h.insert_vib(cubic(2, &[])).is_err());
        assert!(h.insert_vib(cubic(3, &[])).is_err());
    }

    #[test]
    fn factorized_model_round_trip() {
        let mut h = HamiltonianModel::harmonic(vec![1.0, 2.0], 1).unwrap();
        h.insert_vib(cubic(2, &[(&[0, 0, 1], 0.3)])).unwrap();
        let f = factorize(&h, FactorMethod::Tucker, 1e-3, 0, &Default::default()).unwrap();
        let back = FactorizedModel::from_json_str(&f.to_json(), "mem").unwrap();
        assert_eq!(back, f);
    }
}
