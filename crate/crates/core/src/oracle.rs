//! Dense-matrix ground truth for small models.
//!
//! Basis ordering: vibrational Fock states lexicographic with mode 0
//! slowest, then `2N` spin-orbitals `p = 2i + σ` under Jordan–Wigner with
//! `p = 0` as the most significant bit. The full index is
//! `vib · 4^N + elec`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::decomp::Factors;
use crate::error::{Error, Result};
use crate::hamiltonian::{
    FactorizedModel, HamiltonianModel, ModelHeader, Pauli, PauliTerm, TensorId,
};
use crate::symtensor::orbit_size;

/// Largest dense dimension the oracle will build.
pub const ORACLE_GUARD: usize = 4096;
/// Largest orbital count the oracle supports.
pub const ORACLE_MAX_ORBITALS: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    pub matrix: DMatrix<f64>,
}

impl DenseOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn frobenius(&self) -> f64 {
        self.matrix.norm()
    }

    /// Largest entrywise asymmetry `|A_ij − A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let m = &self.matrix;
        (m - m.transpose()).amax()
    }

    /// `max |eigenvalue|` of the symmetric part.
    pub fn spectral_norm(&self) -> f64 {
        let sym = (&self.matrix + self.matrix.transpose()) * 0.5;
        SymmetricEigen::new(sym).eigenvalues.amax()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let sym = (&self.matrix + self.matrix.transpose()) * 0.5;
        let mut v: Vec<f64> = SymmetricEigen::new(sym)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// `‖self − reference‖_F / ‖reference‖_F`.
    pub fn relative_difference(&self, reference: &DenseOperator) -> Result<f64> {
        if self.dim() != reference.dim() {
            return Err(Error::Shape(format!(
                "dimensions {} and {}",
                self.dim(),
                reference.dim()
            )));
        }
        let n = reference.frobenius();
        if n == 0.0 {
            return Err(Error::DivisionByZero(
                "relative difference to a zero operator",
            ));
        }
        Ok((&self.matrix - &reference.matrix).norm() / n)
    }

    /// Row-major CSV with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for r in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|c| format!("{:.16e}", self.matrix[(r, c)]))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Truncated position operator on levels `0..=d`.
pub fn dense_q(d: usize) -> Result<DenseOperator> {
    if d == 0 {
        return Err(Error::EmptyOperator);
    }
    let mut m = DMatrix::zeros(d + 1, d + 1);
    for i in 0..d {
        let v = ((i + 1) as f64 / 2.0).sqrt();
        m[(i, i + 1)] = v;
        m[(i + 1, i)] = v;
    }
    Ok(DenseOperator { matrix: m })
}

/// Truncated number operator on levels `0..=d`.
pub fn dense_number(d: usize) -> DenseOperator {
    DenseOperator {
        matrix: DMatrix::from_fn(d + 1, d + 1, |r, c| if r == c { r as f64 } else { 0.0 }),
    }
}

/// Real matrix of a sum of Pauli strings on `n_qubits`, qubit 0 most
/// significant. Fails if any string has an imaginary matrix element.
pub fn pauli_sum_matrix(terms: &[PauliTerm], n_qubits: usize) -> Result<DMatrix<f64>> {
    let dim = 1usize << n_qubits;
    let mut m = DMatrix::zeros(dim, dim);
    for term in terms {
        if let Some((&q, _)) = term.string.iter().find(|(q, _)| **q >= n_qubits) {
            return Err(Error::InvalidArgument(format!(
                "qubit {q} outside {n_qubits}-qubit register"
            )));
        }
        for col in 0..dim {
            let mut row = col;
            // phase as a power of i
            let mut phase = 0u32;
            for (&q, p) in &term.string {
                let bit = 1usize << (n_qubits - 1 - q);
                let set = col & bit != 0;
                match p {
                    Pauli::X => row ^= bit,
                    Pauli::Y => {
                        row ^= bit;
                        phase += if set { 3 } else { 1 };
                    }
                    Pauli::Z => {
                        if set {
                            phase += 2;
                        }
                    }
                }
            }
            let sign = match phase % 4 {
                0 => 1.0,
                2 => -1.0,
                _ => return Err(Error::InvalidArgument("Pauli sum is not real".into())),
            };
            m[(row, col)] += sign * term.coefficient;
        }
    }
    Ok(m)
}

/// Restriction of a `(d+1)`-qubit operator to the one-hot states, where
/// level `i` sets qubit `i`.
pub fn project_unary(full: &DMatrix<f64>, d: usize) -> DMatrix<f64> {
    let n = d + 1;
    let state = |i: usize| 1usize << (n - 1 - i);
    DMatrix::from_fn(n, n, |r, c| full[(state(r), state(c))])
}

fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// Vibrational-space operators for one model.
struct VibSpace {
    dim: usize,
    q: Vec<DMatrix<f64>>,
    n: Vec<DMatrix<f64>>,
}

impl VibSpace {
    fn new(modes: usize, d: usize) -> Result<Self> {
        let levels = d + 1;
        let dim = levels.pow(modes as u32);
        let q1 = dense_q(d)?.matrix;
        let n1 = dense_number(d).matrix;
        let embed = |op: &DMatrix<f64>, a: usize| {
            let pre = DMatrix::identity(levels.pow(a as u32), levels.pow(a as u32));
            let post_dim = levels.pow((modes - a - 1) as u32);
            let post = DMatrix::identity(post_dim, post_dim);
            kron(&kron(&pre, op), &post)
        };
        Ok(VibSpace {
            dim,
            q: (0..modes).map(|a| embed(&q1, a)).collect(),
            n: (0..modes).map(|a| embed(&n1, a)).collect(),
        })
    }

    fn identity(&self) -> DMatrix<f64> {
        DMatrix::identity(self.dim, self.dim)
    }

    fn harmonic(&self, omega: &[f64]) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.dim, self.dim);
        for (w, n) in omega.iter().zip(&self.n) {
            h += n * *w;
        }
        h
    }

    /// `Σ_α E_α q_α₁⋯q_α_k` over the full dense tensor.
    fn monomials(&self, t: &crate::symtensor::SymTensor) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for (idx, v) in t.iter() {
            let mut p = self.identity();
            for &a in idx {
                p = &p * &self.q[a];
            }
            // the q_α commute, so every ordering of idx gives the same product
            out += p * (v * orbit_size(idx) as f64);
        }
        out
    }

    /// `s = Σ_α Q_α q_α`.
    fn s(&self, weights: &[f64]) -> DMatrix<f64> {
        let mut s = DMatrix::zeros(self.dim, self.dim);
        for (w, q) in weights.iter().zip(&self.q) {
            if *w != 0.0 {
                s += q * *w;
            }
        }
        s
    }

    fn factors_matrix(&self, f: &Factors) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        match f {
            Factors::Cp(cp) => {
                for (w, q) in cp.weights.iter().zip(&cp.factors) {
                    if *w == 0.0 {
                        continue;
                    }
                    let s = self.s(q);
                    let mut p = self.identity();
                    for _ in 0..cp.order {
                        p = &p * &s;
                    }
                    out += p * *w;
                }
            }
            Factors::Tucker(tk) => {
                let s: Vec<DMatrix<f64>> = tk.factors.iter().map(|q| self.s(q)).collect();
                crate::symtensor::for_each_index(tk.order, tk.modes, |pos, idx| {
                    let c = tk.core[pos];
                    if c == 0.0 {
                        return;
                    }
                    let mut p = self.identity();
                    for &b in idx {
                        p = &p * &s[b];
                    }
                    out += p * c;
                });
            }
        }
        out
    }
}

/// Jordan–Wigner annihilator for spin-orbital `p` among `n_so`.
fn annihilator(p: usize, n_so: usize) -> DMatrix<f64> {
    let z = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
    let i2 = DMatrix::<f64>::identity(2, 2);
    let mut out = DMatrix::identity(1, 1);
    for q in 0..n_so {
        let f = match q.cmp(&p) {
            std::cmp::Ordering::Less => &z,
            std::cmp::Ordering::Equal => &a,
            std::cmp::Ordering::Greater => &i2,
        };
        out = kron(&out, f);
    }
    out
}

/// `Σ_σ (c†_iσ c_jσ + c†_jσ c_iσ)` for `i < j`, `Σ_σ n_iσ` for `i = j`.
fn electronic(i: usize, j: usize, orbitals: usize) -> DMatrix<f64> {
    let n_so = 2 * orbitals;
    let dim = 1usize << n_so;
    let mut out = DMatrix::zeros(dim, dim);
    for sigma in 0..2 {
        let ci = annihilator(2 * i + sigma, n_so);
        let cj = annihilator(2 * j + sigma, n_so);
        let hop = ci.transpose() * &cj;
        if i == j {
            out += hop;
        } else {
            out += &hop + hop.transpose();
        }
    }
    out
}

fn check_guard(h: &ModelHeader) -> Result<usize> {
    if h.orbitals > ORACLE_MAX_ORBITALS {
        return Err(Error::SizeGuardExceeded {
            size: h.orbitals as u128,
            limit: ORACLE_MAX_ORBITALS as u128,
        });
    }
    let dim = ((h.cutoff_d + 1) as u128)
        .checked_pow(h.modes as u32)
        .and_then(|v| v.checked_mul(1u128 << (2 * h.orbitals)))
        .unwrap_or(u128::MAX);
    if dim > ORACLE_GUARD as u128 {
        return Err(Error::SizeGuardExceeded {
            size: dim,
            limit: ORACLE_GUARD as u128,
        });
    }
    Ok(dim as usize)
}

/// Dimension of the dense operator of a model, if within the guards.
pub fn oracle_dim(h: &ModelHeader) -> Result<usize> {
    check_guard(h)
}

fn assemble<'a, I>(h: &ModelHeader, parts: I, vs: &VibSpace) -> DenseOperator
where
    I: Iterator<Item = (TensorId, DMatrix<f64>)> + 'a,
{
    let e_dim = 1usize << (2 * h.orbitals);
    let ie = DMatrix::identity(e_dim, e_dim);
    let mut vib = vs.harmonic(&h.omega);
    let mut total = DMatrix::zeros(vs.dim * e_dim, vs.dim * e_dim);
    for (id, m) in parts {
        match id.orbitals() {
            None => vib += m,
            Some((i, j)) => total += kron(&m, &electronic(i, j, h.orbitals)),
        }
    }
    total += kron(&vib, &ie);
    DenseOperator { matrix: total }
}

pub fn dense_hamiltonian(h: &HamiltonianModel) -> Result<DenseOperator> {
    check_guard(&h.header)?;
    let vs = VibSpace::new(h.modes(), h.cutoff())?;
    let parts: Vec<(TensorId, DMatrix<f64>)> =
        h.tensors().map(|(id, t)| (id, vs.monomials(t))).collect();
    Ok(assemble(&h.header, parts.into_iter(), &vs))
}

pub fn dense_from_factorized(f: &FactorizedModel) -> Result<DenseOperator> {
    check_guard(&f.header)?;
    let vs = VibSpace::new(f.header.modes, f.header.cutoff_d)?;
    let parts: Vec<(TensorId, DMatrix<f64>)> = f
        .tensors
        .iter()
        .map(|t| (t.id, vs.factors_matrix(&t.factors)))
        .collect();
    Ok(assemble(&f.header, parts.into_iter(), &vs))
}

/// `‖H‖₂ / λ`; at most 1 whenever λ is a valid LCU sub-normalization.
pub fn block_norm_check(h: &HamiltonianModel, lambda: f64) -> Result<f64> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    Ok(dense_hamiltonian(h)?.spectral_norm() / lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{number_op_pauli_terms, q_pauli_terms};
    use crate::symtensor::SymTensor;

    #[test]
    fn q_matrices() {
        let q = dense_q(1).unwrap().matrix;
        assert!((q[(0, 1)] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(q[(0, 0)], 0.0);
        let q = dense_q(2).unwrap().matrix;
        assert!((q[(1, 2)] - 1.0).abs() < 1e-15);
        assert!(dense_q(0).is_err());
    }

    #[test]
    fn unary_expansions_match() {
        for d in 1..=4 {
            let full = pauli_sum_matrix(&q_pauli_terms(d, 0).unwrap(), d + 1).unwrap();
            let diff = (project_unary(&full, d) - dense_q(d).unwrap().matrix).amax();
            assert!(diff < 1e-12, "d={d}: {diff}");
            let full = pauli_sum_matrix(&number_op_pauli_terms(d, 0).unwrap(), d + 1).unwrap();
            let diff = (project_unary(&full, d) - dense_number(d).matrix).amax();
            assert!(diff < 1e-12);
        }
    }

    #[test]
    fn imaginary_strings_rejected() {
        let xy = PauliTerm::new(1.0, &[(0, Pauli::X), (1, Pauli::Y)]);
        assert!(pauli_sum_matrix(&[xy], 2).is_err());
    }

    #[test]
    fn harmonic_reference_matrices() {
        let h = HamiltonianModel::harmonic(vec![1.0], 1).unwrap();
        let m = dense_hamiltonian(&h).unwrap().matrix;
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]));
        let h = HamiltonianModel::harmonic(vec![1.0, 2.0], 1).unwrap();
        let m = dense_hamiltonian(&h).unwrap().matrix;
        assert_eq!(
            m,
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.0, 2.0, 1.0, 3.0]))
        );
    }

    #[test]
    fn cubic_single_mode() {
        let mut h = HamiltonianModel::harmonic(vec![1.0], 2).unwrap();
        let mut t = SymTensor::zeros(3, 1).unwrap();
        t.set(&[0, 0, 0], 0.3).unwrap();
        h.insert_vib(t).unwrap();
        let q = dense_q(2).unwrap().matrix;
        let expect = dense_number(2).matrix + &q * &q * &q * 0.3;
        let got = dense_hamiltonian(&h).unwrap().matrix;
        assert!((got - expect).amax() < 1e-15);
    }

    #[test]
    fn electronic_operators() {
        // one orbital: n_up + n_down has eigenvalues 0, 1, 1, 2
        let e = electronic(0, 0, 1);
        let mut diag: Vec<f64> = (0..4).map(|i| e[(i, i)]).collect();
        diag.sort_by(f64::total_cmp);
        assert_eq!(diag, vec![0.0, 1.0, 1.0, 2.0]);
        let hop = electronic(0, 1, 2);
        assert_eq!(hop, hop.transpose());
        assert!(DenseOperator { matrix: hop }.spectral_norm() <= 2.0 + 1e-12);
    }

    #[test]
    fn guards() {
        let h = HamiltonianModel::harmonic(vec![1.0; 7], 3).unwrap();
        assert!(dense_hamiltonian(&h).unwrap_err().is_guard());
        let mut header = h.header.clone();
        header.modes = 1;
        header.omega = vec![1.0];
        header.orbitals = 3;
        assert!(oracle_dim(&header).unwrap_err().is_guard());
    }

    #[test]
    fn csv_has_17_digits() {
        let csv = dense_q(1).unwrap().to_csv();
        let first = csv.lines().next().unwrap();
        assert_eq!(first, "0.0000000000000000e0,7.0710678118654757e-1");
    }
}
