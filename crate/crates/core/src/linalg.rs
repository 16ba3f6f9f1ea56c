//! Small dense helpers shared by the decompositions and the oracle.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Row-major `v ⊗ v ⊗ … ⊗ v` (`order` factors).
pub(crate) fn outer_power(v: &[f64], order: usize) -> Vec<f64> {
    let mut cur = vec![1.0];
    for _ in 0..order {
        let mut next = Vec::with_capacity(cur.len() * v.len());
        for &c in &cur {
            next.extend(v.iter().map(|&x| c * x));
        }
        cur = next;
    }
    cur
}

/// Applies `mat` (row-major `modes × modes`) along every mode of a symmetric
/// buffer: `out[β…] = Σ_α ∏_m mat[β_m][α_m] · flat[α…]`.
pub(crate) fn multilinear(flat: &[f64], order: usize, modes: usize, mat: &[f64]) -> Vec<f64> {
    let mut cur = flat.to_vec();
    let mut next = vec![0.0; cur.len()];
    for mode in 0..order {
        // stride of `mode` in row-major layout
        let inner = modes.pow((order - mode - 1) as u32);
        let outer = cur.len() / (inner * modes);
        next.iter_mut().for_each(|x| *x = 0.0);
        for o in 0..outer {
            for b in 0..modes {
                let mrow = &mat[b * modes..(b + 1) * modes];
                let dst = (o * modes + b) * inner;
                for (a, &m) in mrow.iter().enumerate() {
                    if m == 0.0 {
                        continue;
                    }
                    let src = (o * modes + a) * inner;
                    for i in 0..inner {
                        next[dst + i] += m * cur[src + i];
                    }
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

/// Minimum-norm solution of `a x = b` for symmetric `a`, dropping
/// eigenvalues below a relative cutoff.
pub(crate) fn pinv_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let x = pinv_solve_many(a, &DMatrix::from_column_slice(b.len(), 1, b.as_slice()));
    DVector::from_column_slice(x.as_slice())
}

/// [`pinv_solve`] for every column of `b` with a single decomposition.
pub(crate) fn pinv_solve_many(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    // well-conditioned positive definite systems: Cholesky gives the same answer
    if let Some(ch) = a.clone().cholesky() {
        let l = ch.l_dirty();
        let diag = l.diagonal();
        let (lo, hi) = (diag.min(), diag.max());
        if lo > 0.0 && (hi / lo).powi(2) < 1e12 {
            return ch.solve(b);
        }
    }
    let eig = SymmetricEigen::new(a.clone());
    let lmax = eig.eigenvalues.amax();
    let tol = lmax * 1e-13 * a.nrows() as f64;
    let v = &eig.eigenvectors;
    let mut proj = v.transpose() * b;
    for (i, mut row) in proj.row_iter_mut().enumerate() {
        let l = eig.eigenvalues[i];
        if l.abs() > tol && lmax > 0.0 {
            row /= l;
        } else {
            row.fill(0.0);
        }
    }
    v * proj
}

/// Eigenpairs of a symmetric matrix, sorted by descending eigenvalue.
pub(crate) fn sym_eigen_desc(a: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Index of the largest-magnitude component (first on ties).
pub(crate) fn argmax_abs(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    best
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outer_power_layout() {
        assert_eq!(outer_power(&[2.0, 3.0], 2), vec![4.0, 6.0, 6.0, 9.0]);
        assert_eq!(outer_power(&[2.0, 3.0], 0), vec![1.0]);
    }

    #[test]
    fn batched_solve_matches_single() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 2.0, 1.0]);
        let x = pinv_solve_many(&a, &b);
        for c in 0..2 {
            let single = pinv_solve(&a, &DVector::from_column_slice(b.column(c).as_slice()));
            assert!((x.column(c) - single).amax() < 1e-14);
        }
        // singular: minimum-norm answer
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let y = pinv_solve(&s, &DVector::from_column_slice(&[2.0, 2.0]));
        assert!((y[0] - 1.0).abs() < 1e-12 && (y[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn multilinear_identity_is_noop() {
        let t: Vec<f64> = (0..27).map(|i| i as f64).collect();
        let eye = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        assert_eq!(multilinear(&t, 3, 3, &eye), t);
    }

    #[test]
    fn eigen_sorted_descending() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 3.0]);
        let (vals, vecs) = sym_eigen_desc(a);
        assert_eq!(vals, vec![3.0, 1.0]);
        assert!((vecs[(1, 0)].abs() - 1.0).abs() < 1e-15);
    }
}
