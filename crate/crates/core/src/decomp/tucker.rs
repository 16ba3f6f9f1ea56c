use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{argmax_abs, multilinear, sym_eigen_desc};
use crate::symtensor::{check_dense_guard, SymTensor};

/// Full-rank symmetric Tucker factors.
///
/// `factors[β]` is column β of the orthogonal matrix `Q` (so
/// `factors[β][α] = Q[α, β]`), and `core` is the row-major dense core:
/// `E[α…] = Σ_β core[β…] ∏_m Q[α_m, β_m]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuckerFactors {
    pub order: usize,
    pub modes: usize,
    pub core: Vec<f64>,
    pub factors: Vec<Vec<f64>>,
}

impl TuckerFactors {
    /// `Q` as a row-major `modes × modes` buffer.
    fn q_row_major(&self) -> Vec<f64> {
        let m = self.modes;
        let mut out = vec![0.0; m * m];
        for (beta, col) in self.factors.iter().enumerate() {
            for (alpha, &x) in col.iter().enumerate() {
                out[alpha * m + beta] = x;
            }
        }
        out
    }

    pub fn core_frobenius(&self) -> f64 {
        self.core.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Max-entry deviation of `QᵀQ` from the identity.
    pub fn orthogonality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, qa) in self.factors.iter().enumerate() {
            for (b, qb) in self.factors.iter().enumerate() {
                let d: f64 = qa.iter().zip(qb).map(|(x, y)| x * y).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((d - expect).abs());
            }
        }
        worst
    }

    /// Core entries whose magnitude exceeds `rel_tol · max|core|`, as
    /// `(multi-index, value)` pairs in row-major order.
    pub fn significant_core(&self, rel_tol: f64) -> Vec<(Vec<usize>, f64)> {
        let max = self.core.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let cut = max * rel_tol;
        let mut out = Vec::new();
        crate::symtensor::for_each_index(self.order, self.modes, |pos, idx| {
            let v = self.core[pos];
            if v != 0.0 && v.abs() > cut {
                out.push((idx.to_vec(), v));
            }
        });
        out
    }
}

/// Full-rank HOSVD with one factor shared by every mode.
///
/// All mode unfoldings of a symmetric tensor coincide, so `Q` is taken
/// from the eigenvectors of the mode-1 Gram matrix `U Uᵀ` (the left
/// singular vectors of the unfolding `U`), sorted by decreasing singular
/// value with each column's largest component made positive.
pub fn tucker_decompose(t: &SymTensor) -> Result<TuckerFactors> {
    if t.frobenius() == 0.0 {
        return Err(Error::DivisionByZero(
            "Tucker decomposition of a zero tensor",
        ));
    }
    let (k, m) = (t.order(), t.modes());
    check_dense_guard(k, m)?;
    let flat = t.to_flat()?;
    let cols = flat.len() / m;
    let gram = DMatrix::from_fn(m, m, |a, b| {
        let ra = &flat[a * cols..(a + 1) * cols];
        let rb = &flat[b * cols..(b + 1) * cols];
        ra.iter().zip(rb).map(|(x, y)| x * y).sum()
    });
    let (_, vecs) = sym_eigen_desc(gram);
    let mut factors: Vec<Vec<f64>> = (0..m)
        .map(|beta| (0..m).map(|alpha| vecs[(alpha, beta)]).collect())
        .collect();
    for q in factors.iter_mut() {
        if q[argmax_abs(q)] < 0.0 {
            q.iter_mut().for_each(|x| *x = -*x);
        }
    }
    let mut f = TuckerFactors {
        order: k,
        modes: m,
        core: Vec::new(),
        factors,
    };
    // core = E ×_m Qᵀ; row β of Qᵀ is factors[β]
    let qt: Vec<f64> = f.factors.iter().flatten().copied().collect();
    f.core = multilinear(&flat, k, m, &qt);
    Ok(f)
}

/// Applies `Q` on every mode of the core and symmetrizes the result.
pub fn tucker_reconstruct(f: &TuckerFactors) -> Result<SymTensor> {
    check_dense_guard(f.order, f.modes)?;
    let dense = multilinear(&f.core, f.order, f.modes, &f.q_row_major());
    SymTensor::symmetrize_flat(f.order, f.modes, &dense)
}

/// `Σ_β |Λ_β|` over the full dense core.
pub fn core_coefficient_1norm(f: &TuckerFactors) -> f64 {
    f.core.iter().map(|x| x.abs()).sum()
}
