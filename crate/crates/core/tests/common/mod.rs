#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vibefactor::decomp::{CpFactors, Factors};
use vibefactor::hamiltonian::{FactorizedModel, HamiltonianModel, ModelHeader};
use vibefactor::symtensor::{canonical_indices, SymTensor};

pub fn random_sym(order: usize, modes: usize, rng: &mut ChaCha8Rng) -> SymTensor {
    let mut t = SymTensor::zeros(order, modes).unwrap();
    for idx in canonical_indices(order, modes) {
        t.set(&idx, rng.random_range(-1.0..1.0)).unwrap();
    }
    t
}

/// Random model with vib orders `3..=lv` and, if `orbitals > 0`, vibronic
/// orders `1..=2` on every pair. Anharmonic entries are scaled by `scale`.
pub fn random_model(
    seed: u64,
    modes: usize,
    d: usize,
    lv: usize,
    orbitals: usize,
    scale: f64,
) -> HamiltonianModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = (0..modes).map(|_| rng.random_range(0.5..2.0)).collect();
    let lvc = if orbitals > 0 { 2 } else { 0 };
    let mut h = HamiltonianModel::new(ModelHeader {
        modes,
        orbitals,
        cutoff_d: d,
        omega,
        lv,
        lvc,
    })
    .unwrap();
    for k in 3..=lv {
        h.insert_vib(random_sym(k, modes, &mut rng).scaled(scale))
            .unwrap();
    }
    for i in 0..orbitals {
        for j in i..orbitals {
            for k in 1..=lvc {
                h.insert_vibc(i, j, random_sym(k, modes, &mut rng).scaled(scale))
                    .unwrap();
            }
        }
    }
    h
}

/// Applies the mode relabeling `α → perm[α]` to a factorized model.
pub fn relabel_factorized(f: &FactorizedModel, perm: &[usize]) -> FactorizedModel {
    let mut out = f.clone();
    for (a, &p) in perm.iter().enumerate() {
        out.header.omega[p] = f.header.omega[a];
    }
    let move_vec = |q: &Vec<f64>| {
        let mut v = vec![0.0; q.len()];
        for (a, &p) in perm.iter().enumerate() {
            v[p] = q[a];
        }
        v
    };
    for t in out.tensors.iter_mut() {
        match &mut t.factors {
            Factors::Cp(cp) => cp.factors = cp.factors.iter().map(move_vec).collect(),
            Factors::Tucker(tk) => tk.factors = tk.factors.iter().map(move_vec).collect(),
        }
    }
    out
}

pub fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

pub fn cp(order: usize, weights: &[f64], vecs: &[&[f64]]) -> CpFactors {
    CpFactors {
        order,
        modes: vecs[0].len(),
        weights: weights.to_vec(),
        factors: vecs.iter().map(|v| unit(v)).collect(),
    }
}
