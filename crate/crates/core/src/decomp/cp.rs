use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{argmax_abs, dot, norm2, outer_power, pinv_solve, pinv_solve_many};
use crate::symtensor::SymTensor;

/// Symmetric CP factors: `E ≈ Σ_l weights[l] · factors[l]^{⊗order}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpFactors {
    pub order: usize,
    pub modes: usize,
    pub weights: Vec<f64>,
    pub factors: Vec<Vec<f64>>,
}

impl CpFactors {
    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    /// `Σ_l |Λ_l|`.
    pub fn weight_1norm(&self) -> f64 {
        self.weights.iter().map(|w| w.abs()).sum()
    }

    pub fn max_norm_deviation(&self) -> f64 {
        self.factors
            .iter()
            .map(|q| (norm2(q) - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpOptions {
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop when the relative change of ε_F falls below this.
    pub tol: f64,
    /// Rank cap for [`rank_for_error`]; `None` means `modes · order · 10`.
    pub rank_cap: Option<usize>,
}

impl Default for CpOptions {
    fn default() -> Self {
        Self {
            restarts: 5,
            max_iters: 500,
            tol: 1e-10,
            rank_cap: None,
        }
    }
}

/// Best iterate of a CP run.
#[derive(Debug, Clone)]
pub struct CpFit {
    pub factors: CpFactors,
    pub relative_error: f64,
    pub converged: bool,
    pub iterations: usize,
}

struct Target {
    order: usize,
    modes: usize,
    norm: f64,
    /// Mode-1 unfolding, `modes × modes^(order-1)`.
    unf: DMatrix<f64>,
}

/// Quantities shared by the ALS update, the weight solve and the error at
/// one set of factors.
struct Eval {
    /// `(q_l · q_m)` for all term pairs.
    overlap: DMatrix<f64>,
    /// Column `l` is the tensor contracted with `q_l` on all modes but one.
    mttkrp: DMatrix<f64>,
    /// Row `l` is `q_l^{⊗(order-1)}`.
    powers: DMatrix<f64>,
}

impl Target {
    fn new(order: usize, modes: usize, flat: &[f64], norm: f64) -> Self {
        let cols = flat.len() / modes;
        Target {
            order,
            modes,
            norm,
            unf: DMatrix::from_row_slice(modes, cols, flat),
        }
    }

    fn eval(&self, factors: &[Vec<f64>]) -> Eval {
        let r = factors.len();
        let cols = self.unf.ncols();
        let mut powers = DMatrix::zeros(r, cols);
        for (l, q) in factors.iter().enumerate() {
            for (j, x) in outer_power(q, self.order - 1).into_iter().enumerate() {
                powers[(l, j)] = x;
            }
        }
        let q = DMatrix::from_fn(r, self.modes, |l, a| factors[l][a]);
        Eval {
            overlap: &q * q.transpose(),
            mttkrp: &self.unf * powers.transpose(),
            powers,
        }
    }

    fn error_with(&self, weights: &[f64], factors: &[Vec<f64>], e: &Eval) -> f64 {
        let scaled = DMatrix::from_fn(self.modes, factors.len(), |a, l| weights[l] * factors[l][a]);
        let resid = &self.unf - scaled * &e.powers;
        resid.norm() / self.norm
    }

    fn error_of(&self, weights: &[f64], factors: &[Vec<f64>]) -> f64 {
        self.error_with(weights, factors, &self.eval(factors))
    }

    /// Least-squares weights for fixed unit factors.
    fn solve_weights(&self, factors: &[Vec<f64>], e: &Eval) -> Vec<f64> {
        let r = factors.len();
        let k = self.order as i32;
        let gram = e.overlap.map(|x| x.powi(k));
        let rhs = DVector::from_fn(r, |l, _| dot(&factors[l], e.mttkrp.column(l).as_slice()));
        pinv_solve(&gram, &rhs).iter().copied().collect()
    }
}

fn random_unit(rng: &mut ChaCha8Rng, modes: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..modes).map(|_| StandardNormal.sample(rng)).collect();
        let n = norm2(&v);
        if n > 1e-8 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Flips each factor so its largest-magnitude component is positive.
fn fix_signs(order: usize, weights: &mut [f64], factors: &mut [Vec<f64>]) {
    for (w, q) in weights.iter_mut().zip(factors.iter_mut()) {
        if q[argmax_abs(q)] < 0.0 {
            q.iter_mut().for_each(|x| *x = -*x);
            if order % 2 == 1 {
                *w = -*w;
            }
        }
    }
}

/// Orders terms by decreasing |Λ| so equal inputs give identical files.
fn sort_terms(weights: &mut Vec<f64>, factors: &mut Vec<Vec<f64>>) {
    let mut terms: Vec<(f64, Vec<f64>)> = weights.drain(..).zip(factors.drain(..)).collect();
    terms.sort_by(|a, b| b.0.abs().total_cmp(&a.0.abs()));
    for (w, q) in terms {
        weights.push(w);
        factors.push(q);
    }
}

/// One alternating-least-squares run from the given unit-norm start.
fn als_run(
    target: &Target,
    mut factors: Vec<Vec<f64>>,
    start_weights: Option<Vec<f64>>,
    opts: &CpOptions,
) -> CpFit {
    let (k, m) = (target.order, target.modes);
    let r = factors.len();
    let mut e = target.eval(&factors);
    let mut weights = start_weights.unwrap_or_else(|| target.solve_weights(&factors, &e));
    let mut err = target.error_with(&weights, &factors, &e);
    let mut best = (err, weights.clone(), factors.clone());
    let mut converged = err == 0.0;
    let mut iterations = 0;

    while !converged && iterations < opts.max_iters {
        iterations += 1;
        // untied mode-1 update against the tied remaining modes
        let gamma = e.overlap.map(|x| x.powi(k as i32 - 1));
        let updated = pinv_solve_many(&gamma, &e.mttkrp.transpose());
        // re-tie: midpoint of the old factor and the sign-aligned unit
        // update; direct assignment can cycle with period two
        for (l, q) in factors.iter_mut().enumerate() {
            let u: Vec<f64> = updated.row(l).iter().copied().collect();
            let n = norm2(&u);
            if !(n > 1e-300 && n.is_finite()) {
                continue;
            }
            let s = if dot(&u, q) < 0.0 { -1.0 / n } else { 1.0 / n };
            let mid: Vec<f64> = u.iter().zip(q.iter()).map(|(a, b)| s * a + b).collect();
            let nm = norm2(&mid);
            *q = mid.into_iter().map(|x| x / nm).collect();
        }
        e = target.eval(&factors);
        weights = target.solve_weights(&factors, &e);
        let next = target.error_with(&weights, &factors, &e);
        if next < best.0 {
            best = (next, weights.clone(), factors.clone());
        }
        let change = (err - next).abs() / err.max(f64::MIN_POSITIVE);
        converged = change < opts.tol || next < 1e-15;
        err = next;
    }
    debug_assert_eq!(r, factors.len());

    let (_, mut weights, mut factors) = best;
    fix_signs(k, &mut weights, &mut factors);
    sort_terms(&mut weights, &mut factors);
    let relative_error = target.error_of(&weights, &factors);
    CpFit {
        factors: CpFactors {
            order: k,
            modes: m,
            weights,
            factors,
        },
        relative_error,
        converged,
        iterations,
    }
}

/// Order-1 tensors are vectors: one exact term, padded with zero weights.
fn vector_fit(t: &SymTensor, flat: &[f64], rank: usize, seed: u64) -> CpFit {
    let n = norm2(flat);
    let mut factors = vec![flat.iter().map(|x| x / n).collect::<Vec<_>>()];
    let mut weights = vec![n];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 1..rank {
        factors.push(random_unit(&mut rng, t.modes()));
        weights.push(0.0);
    }
    fix_signs(1, &mut weights, &mut factors);
    let target = Target::new(1, t.modes(), flat, n);
    let relative_error = target.error_of(&weights, &factors);
    CpFit {
        factors: CpFactors {
            order: 1,
            modes: t.modes(),
            weights,
            factors,
        },
        relative_error,
        converged: true,
        iterations: 0,
    }
}

/// Best-of-restarts symmetric CP-ALS at a fixed rank.
///
/// Restart `i` starts from seeded Gaussian columns with seed `seed + i`.
pub fn cp_decompose(t: &SymTensor, rank: usize, seed: u64, opts: &CpOptions) -> Result<CpFit> {
    cp_decompose_warm(t, rank, seed, opts, None)
}

/// [`cp_decompose`] with an extra candidate run that starts from `warm`
/// (typically the best fit at a lower rank) padded with random columns.
///
/// The padded start is itself a candidate, so the result is never worse
/// than `warm`.
pub fn cp_decompose_warm(
    t: &SymTensor,
    rank: usize,
    seed: u64,
    opts: &CpOptions,
    warm: Option<&CpFactors>,
) -> Result<CpFit> {
    if rank == 0 {
        return Err(Error::InvalidArgument("CP rank must be >= 1".into()));
    }
    let norm = t.frobenius();
    if norm == 0.0 {
        return Err(Error::DivisionByZero("CP decomposition of a zero tensor"));
    }
    let flat = t.to_flat()?;
    if t.order() == 1 {
        return Ok(vector_fit(t, &flat, rank, seed));
    }
    let target = Target::new(t.order(), t.modes(), &flat, norm);

    let mut best: Option<CpFit> = None;
    let mut consider = |fit: CpFit| {
        if best
            .as_ref()
            .is_none_or(|b| fit.relative_error < b.relative_error)
        {
            best = Some(fit);
        }
    };

    for restart in 0..opts.restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(restart as u64));
        let init = (0..rank)
            .map(|_| random_unit(&mut rng, t.modes()))
            .collect();
        consider(als_run(&target, init, None, opts));
    }

    if let Some(w) =
        warm.filter(|w| w.order == t.order() && w.modes == t.modes() && w.rank() <= rank)
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(opts.restarts as u64));
        let mut factors = w.factors.clone();
        let mut weights = w.weights.clone();
        while factors.len() < rank {
            factors.push(random_unit(&mut rng, t.modes()));
            weights.push(0.0);
        }
        let fit = als_run(&target, factors, Some(weights), opts);
        consider(fit);
    }

    Ok(best.expect("at least one restart runs"))
}

/// Keeps the chain non-increasing: if `fit` is worse than `prev`, returns
/// `prev` padded with zero-weight terms up to `fit`'s rank.
fn no_worse_than(prev: Option<&CpFit>, fit: CpFit) -> CpFit {
    match prev {
        Some(p) if p.relative_error <= fit.relative_error => {
            let mut padded = p.clone();
            let extra = fit.factors.rank().saturating_sub(p.factors.rank());
            for q in fit.factors.factors.iter().rev().take(extra) {
                padded.factors.factors.push(q.clone());
                padded.factors.weights.push(0.0);
            }
            padded
        }
        _ => fit,
    }
}

/// Dense sum of the rank-one terms, returned in canonical storage.
pub fn cp_reconstruct(f: &CpFactors) -> Result<SymTensor> {
    let mut out = SymTensor::zeros(f.order, f.modes)?;
    let indices = crate::symtensor::canonical_indices(f.order, f.modes);
    for idx in indices {
        let v: f64 = f
            .weights
            .iter()
            .zip(&f.factors)
            .map(|(w, q)| w * idx.iter().map(|&a| q[a]).product::<f64>())
            .sum();
        out.set(&idx, v)?;
    }
    Ok(out)
}

/// Smallest rank `r = 1, 2, …` whose best-of-restarts fit meets `eps_target`.
///
/// Each rank is warm-started from the previous rank's best fit.
pub fn rank_for_error(
    t: &SymTensor,
    eps_target: f64,
    seed: u64,
    opts: &CpOptions,
) -> Result<(CpFactors, f64)> {
    if !(eps_target > 0.0 && eps_target <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "eps target {eps_target} outside (0, 1]"
        )));
    }
    let cap = opts.rank_cap.unwrap_or(t.modes() * t.order() * 10).max(1);
    let mut prev: Option<CpFit> = None;
    for rank in 1..=cap {
        let fit = cp_decompose_warm(t, rank, seed, opts, prev.as_ref().map(|p| &p.factors))?;
        let fit = no_worse_than(prev.as_ref(), fit);
        if fit.relative_error <= eps_target {
            return Ok((fit.factors, fit.relative_error));
        }
        prev = Some(fit);
    }
    let best = prev.expect("cap >= 1");
    Err(Error::RankSearchExhausted {
        tensor: None,
        rank_cap: cap,
        target: eps_target,
        achieved: best.relative_error,
        best: Box::new(best.factors),
    })
}

/// Best-of-restarts ε_F for every rank in `1..=max_rank`, warm-chained so
/// the returned errors are non-increasing.
pub fn rank_sweep(
    t: &SymTensor,
    max_rank: usize,
    seed: u64,
    opts: &CpOptions,
) -> Result<Vec<CpFit>> {
    let mut out: Vec<CpFit> = Vec::with_capacity(max_rank);
    for rank in 1..=max_rank {
        let fit = cp_decompose_warm(t, rank, seed, opts, out.last().map(|p| &p.factors))?;
        out.push(no_worse_than(out.last(), fit));
    }
    Ok(out)
}
