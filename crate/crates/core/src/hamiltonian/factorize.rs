use rayon::prelude::*;

use super::{FactorMethod, FactorizedModel, FactorizedTensor, HamiltonianModel, TensorId};
use crate::decomp::{
    cp_decompose, cp_reconstruct, rank_for_error, tucker_decompose, tucker_reconstruct, CpOptions,
    Factors,
};
use crate::error::{Error, Result};
use crate::symtensor::SymTensor;

/// Seed offset between consecutive tensors; larger than any restart count.
const TENSOR_SEED_STRIDE: u64 = 1000;

fn tensor_seed(seed: u64, pos: usize) -> u64 {
    seed.wrapping_add(TENSOR_SEED_STRIDE.wrapping_mul(pos as u64))
}

fn run_all<F>(h: &HamiltonianModel, method: FactorMethod, job: F) -> Result<FactorizedModel>
where
    F: Fn(usize, TensorId, &SymTensor) -> Result<(Factors, f64)> + Sync,
{
    let work: Vec<(TensorId, &SymTensor)> = h.tensors().collect();
    let tensors = work
        .par_iter()
        .enumerate()
        .map(|(pos, &(id, t))| {
            let (factors, eps_f) = job(pos, id, t)?;
            Ok(FactorizedTensor { id, factors, eps_f })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FactorizedModel {
        header: h.header.clone(),
        method,
        tensors,
    })
}

/// Replaces every tensor of `h` by its factors.
///
/// CP picks, per tensor, the smallest rank whose relative error is at most
/// `eps_per_tensor`; Tucker is exact and ignores it. Tensor `n` (in
/// [`HamiltonianModel::tensors`] order) uses seed `seed + 1000 n`.
pub fn factorize(
    h: &HamiltonianModel,
    method: FactorMethod,
    eps_per_tensor: f64,
    seed: u64,
    opts: &CpOptions,
) -> Result<FactorizedModel> {
    run_all(h, method, |pos, id, t| match method {
        FactorMethod::Cp => {
            let (f, eps) = rank_for_error(t, eps_per_tensor, tensor_seed(seed, pos), opts)
                .map_err(|e| match e {
                    Error::RankSearchExhausted {
                        rank_cap,
                        target,
                        achieved,
                        best,
                        ..
                    } => Error::RankSearchExhausted {
                        tensor: Some(id.to_string()),
                        rank_cap,
                        target,
                        achieved,
                        best,
                    },
                    other => other,
                })?;
            Ok((Factors::Cp(f), eps))
        }
        FactorMethod::Tucker => {
            let f = tucker_decompose(t)?;
            let eps = t.relative_error(&tucker_reconstruct(&f)?)?;
            Ok((Factors::Tucker(f), eps))
        }
    })
}

/// CP at the same fixed rank for every tensor (no error target).
pub fn factorize_fixed_rank(
    h: &HamiltonianModel,
    rank: usize,
    seed: u64,
    opts: &CpOptions,
) -> Result<FactorizedModel> {
    run_all(h, FactorMethod::Cp, |pos, _, t| {
        let fit = cp_decompose(t, rank, tensor_seed(seed, pos), opts)?;
        let eps = t.relative_error(&cp_reconstruct(&fit.factors)?)?;
        Ok((Factors::Cp(fit.factors), eps))
    })
}
