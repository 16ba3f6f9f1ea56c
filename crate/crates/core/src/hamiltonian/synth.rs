use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};

use super::{HamiltonianModel, ModelHeader};
use crate::error::{Error, Result};
use crate::symtensor::SymTensor;

/// Half-width of the noise added to each vibrational coefficient.
const NOISE: f64 = 1.0 / 40.0;

/// Synthetic vibronic couplings derived from the vibrational tensors:
/// `E_{α…ij} = (E_α… + η) · 2^{−k} / max(1, |i−j|)` with `η ~ U[−1/40, 1/40]`.
///
/// One tensor per vibrational order and orbital pair `i ≤ j < orbitals`,
/// shared by both spins. Only nonzero vibrational entries get a coupling.
/// Existing vibronic tensors are replaced.
pub fn synth_vibronic(
    h: &HamiltonianModel,
    orbitals: usize,
    seed: u64,
) -> Result<HamiltonianModel> {
    if orbitals == 0 {
        return Err(Error::InvalidArgument("need at least one orbital".into()));
    }
    if h.vib.is_empty() {
        return Err(Error::InvalidModel(
            "no vibrational tensors to derive couplings from".into(),
        ));
    }
    let mut out = HamiltonianModel::new(ModelHeader {
        orbitals,
        lvc: 0,
        ..h.header.clone()
    })?;
    for t in h.vib.values() {
        out.insert_vib(t.clone())?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eta = Uniform::new_inclusive(-NOISE, NOISE).expect("valid noise range");
    for (&k, t) in &h.vib {
        let damp = 0.5f64.powi(k as i32);
        for i in 0..orbitals {
            for j in i..orbitals {
                let scale = damp / ((j - i).max(1) as f64);
                let mut c = SymTensor::zeros(k, h.modes())?;
                for (idx, v) in t.iter() {
                    c.set(idx, (v + eta.sample(&mut rng)) * scale)?;
                }
                out.insert_vibc(i, j, c)?;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_cubic() -> HamiltonianModel {
        let mut h = HamiltonianModel::harmonic(vec![1.0, 2.0], 2).unwrap();
        let mut t = SymTensor::zeros(3, 2).unwrap();
        t.set(&[0, 0, 0], 0.5).unwrap();
        h.insert_vib(t).unwrap();
        h
    }

    #[test]
    fn envelope_and_count() {
        let out = synth_vibronic(&single_cubic(), 3, 9).unwrap();
        assert_eq!(out.vibc.len(), 6);
        assert_eq!(out.header.lvc, 3);
        let v = out.vibc(3, 0, 0).unwrap().get(&[0, 0, 0]).unwrap();
        assert!((0.059375..=0.065625).contains(&v), "{v}");
        let v = out.vibc(3, 0, 2).unwrap().get(&[0, 0, 0]).unwrap();
        assert!((0.0296875..=0.0328125).contains(&v), "{v}");
        let two = synth_vibronic(&single_cubic(), 2, 0).unwrap();
        assert_eq!(two.vibc.len(), 3);
        assert_eq!(two.vibc(3, 0, 0).unwrap().nnz(), 1);
    }

    #[test]
    fn deterministic_per_seed() {
        let a = synth_vibronic(&single_cubic(), 2, 5).unwrap();
        let b = synth_vibronic(&single_cubic(), 2, 5).unwrap();
        let c = synth_vibronic(&single_cubic(), 2, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn needs_vibrational_tensors() {
        let h = HamiltonianModel::harmonic(vec![1.0], 1).unwrap();
        assert!(synth_vibronic(&h, 2, 0).is_err());
        assert!(synth_vibronic(&single_cubic(), 0, 0).is_err());
    }
}
