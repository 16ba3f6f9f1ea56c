//! Sparse storage for totally symmetric tensors.
//!
//! A [`SymTensor`] of order `k` over `M` modes keeps one value per sorted
//! index tuple `α₁ ≤ … ≤ α_k`. The logical dense tensor is the unique
//! permutation-invariant tensor agreeing with those values, so every norm
//! below weights a canonical entry by its orbit size `k!/∏ mⱼ!`.

use std::collections::BTreeMap;
use std::path::Path;

use ndarray::{ArrayD, Dimension, IxDyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest dense size (`M^k`) any routine will materialize.
pub const DENSE_GUARD: u128 = 1_000_000;

/// Symmetrized entries below this magnitude are dropped.
pub const DROP_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor {
    order: usize,
    modes: usize,
    entries: BTreeMap<Vec<usize>, f64>,
}

/// Sorted copy of `idx`, after checking every component against `modes`.
pub fn canonical_index(idx: &[usize], modes: usize) -> Result<Vec<usize>> {
    if idx.iter().any(|&a| a >= modes) {
        return Err(Error::InvalidIndex {
            index: idx.to_vec(),
            modes,
        });
    }
    let mut sorted = idx.to_vec();
    sorted.sort_unstable();
    Ok(sorted)
}

/// Number of distinct permutations of a sorted index tuple.
pub fn orbit_size(sorted: &[usize]) -> u64 {
    // multinomial k! / ∏ m_j!, built incrementally to stay in integers
    let mut size: u64 = 1;
    let mut placed: u64 = 0;
    let mut run: u64 = 0;
    for (pos, &a) in sorted.iter().enumerate() {
        run = if pos > 0 && sorted[pos - 1] == a {
            run + 1
        } else {
            1
        };
        placed += 1;
        size = size * placed / run;
    }
    size
}

/// `modes^order` with overflow-safe arithmetic.
pub fn dense_len(order: usize, modes: usize) -> u128 {
    (modes as u128).saturating_pow(order as u32)
}

pub(crate) fn check_dense_guard(order: usize, modes: usize) -> Result<usize> {
    let size = dense_len(order, modes);
    if size > DENSE_GUARD {
        return Err(Error::SizeGuardExceeded {
            size,
            limit: DENSE_GUARD,
        });
    }
    Ok(size as usize)
}

/// Row-major multi-index odometer over `modes^order` positions.
pub(crate) fn for_each_index(order: usize, modes: usize, mut f: impl FnMut(usize, &[usize])) {
    let mut idx = vec![0usize; order];
    let total = dense_len(order, modes) as usize;
    for flat in 0..total {
        f(flat, &idx);
        for pos in (0..order).rev() {
            idx[pos] += 1;
            if idx[pos] < modes {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Sorted index tuples `α₁ ≤ … ≤ α_k` in lexicographic order.
pub fn canonical_indices(order: usize, modes: usize) -> Vec<Vec<usize>> {
    fn rec(
        start: usize,
        left: usize,
        modes: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for a in start..modes {
            cur.push(a);
            rec(a, left - 1, modes, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, order, modes, &mut Vec::with_capacity(order), &mut out);
    out
}

/// Number of canonical entries, `C(M+k−1, k)`.
pub fn canonical_count(order: usize, modes: usize) -> usize {
    let (n, k) = (modes + order - 1, order);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    c as usize
}

impl SymTensor {
    pub fn zeros(order: usize, modes: usize) -> Result<Self> {
        if order == 0 || modes == 0 {
            return Err(Error::Shape(format!(
                "order and modes must be >= 1 (got order {order}, modes {modes})"
            )));
        }
        Ok(Self {
            order,
            modes,
            entries: BTreeMap::new(),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn canonical_index(&self, idx: &[usize]) -> Result<Vec<usize>> {
        if idx.len() != self.order {
            return Err(Error::Shape(format!(
                "index of length {} for order-{} tensor",
                idx.len(),
                self.order
            )));
        }
        canonical_index(idx, self.modes)
    }

    pub fn get(&self, idx: &[usize]) -> Result<f64> {
        let key = self.canonical_index(idx)?;
        Ok(self.entries.get(&key).copied().unwrap_or(0.0))
    }

    /// Sets the entry for the orbit of `idx`. Exact zeros are removed.
    pub fn set(&mut self, idx: &[usize], value: f64) -> Result<()> {
        let key = self.canonical_index(idx)?;
        if value == 0.0 {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, value);
        }
        Ok(())
    }

    /// Canonical `(index, value)` pairs in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&[usize], f64)> + '_ {
        self.entries.iter().map(|(k, v)| (k.as_slice(), *v))
    }

    /// Number of stored canonical entries.
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Number of nonzero entries of the full dense tensor.
    pub fn dense_nnz(&self) -> u64 {
        self.entries.keys().map(|k| orbit_size(k)).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Averages `dense` over all index permutations.
    pub fn symmetrize(dense: &ArrayD<f64>) -> Result<Self> {
        let shape = dense.shape();
        let order = shape.len();
        if order == 0 {
            return Err(Error::Shape("zero-dimensional array".into()));
        }
        let modes = shape[0];
        if shape.iter().any(|&s| s != modes) {
            return Err(Error::Shape(format!(
                "array shape {shape:?} is not hypercubic"
            )));
        }
        check_dense_guard(order, modes)?;
        let mut out = Self::zeros(order, modes)?;
        let mut sums: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (idx, &v) in dense.indexed_iter() {
            let mut key = idx.slice().to_vec();
            key.sort_unstable();
            *sums.entry(key).or_insert(0.0) += v;
        }
        for (key, sum) in sums {
            let avg = sum / orbit_size(&key) as f64;
            if avg.abs() >= DROP_TOLERANCE {
                out.entries.insert(key, avg);
            }
        }
        Ok(out)
    }

    /// Symmetrizes a row-major flat buffer of length `modes^order`.
    pub(crate) fn symmetrize_flat(order: usize, modes: usize, data: &[f64]) -> Result<Self> {
        let len = check_dense_guard(order, modes)?;
        if data.len() != len {
            return Err(Error::Shape(format!(
                "flat buffer of length {} != {len}",
                data.len()
            )));
        }
        let array = ArrayD::from_shape_vec(IxDyn(&vec![modes; order]), data.to_vec())
            .map_err(|e| Error::Shape(e.to_string()))?;
        Self::symmetrize(&array)
    }

    pub fn to_dense(&self) -> Result<ArrayD<f64>> {
        let flat = self.to_flat()?;
        ArrayD::from_shape_vec(IxDyn(&vec![self.modes; self.order]), flat)
            .map_err(|e| Error::Shape(e.to_string()))
    }

    /// Row-major dense values, guarded by [`DENSE_GUARD`].
    pub(crate) fn to_flat(&self) -> Result<Vec<f64>> {
        let len = check_dense_guard(self.order, self.modes)?;
        let mut flat = vec![0.0; len];
        let mut scratch = Vec::with_capacity(self.order);
        for_each_index(self.order, self.modes, |pos, idx| {
            scratch.clear();
            scratch.extend_from_slice(idx);
            scratch.sort_unstable();
            if let Some(v) = self.entries.get(&scratch) {
                flat[pos] = *v;
            }
        });
        Ok(flat)
    }

    pub fn frobenius(&self) -> f64 {
        self.entries
            .iter()
            .fold(0.0, |acc, (k, v)| acc + orbit_size(k) as f64 * v * v)
            .sqrt()
    }

    /// Sum of absolute values over the full dense tensor.
    pub fn coefficient_1norm(&self) -> f64 {
        self.entries
            .iter()
            .fold(0.0, |acc, (k, v)| acc + orbit_size(k) as f64 * v.abs())
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.order != other.order || self.modes != other.modes {
            return Err(Error::Shape(format!(
                "order/modes mismatch: ({}, {}) vs ({}, {})",
                self.order, self.modes, other.order, other.modes
            )));
        }
        Ok(())
    }

    /// `‖self − approx‖₂ / ‖self‖₂` over the dense tensors.
    pub fn relative_error(&self, approx: &Self) -> Result<f64> {
        self.check_same_shape(approx)?;
        let reference = self.frobenius();
        if reference == 0.0 {
            return Err(Error::DivisionByZero(
                "relative error against a zero tensor",
            ));
        }
        Ok(self.sub(approx)?.frobenius() / reference)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (k, v) in &other.entries {
            let e = out.entries.entry(k.clone()).or_insert(0.0);
            *e -= v;
        }
        out.entries.retain(|_, v| *v != 0.0);
        Ok(out)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.entries.values_mut().for_each(|v| *v *= c);
        out.entries.retain(|_, v| *v != 0.0);
        out
    }

    /// Relabels modes: entry at `α` moves to `perm[α]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.modes {
            return Err(Error::Shape("permutation length differs from modes".into()));
        }
        let mut seen = vec![false; self.modes];
        for &p in perm {
            if p >= self.modes || std::mem::replace(&mut seen[p], true) {
                return Err(Error::Shape(format!("{perm:?} is not a permutation")));
            }
        }
        let mut out = Self::zeros(self.order, self.modes)?;
        for (k, v) in &self.entries {
            let mut key: Vec<usize> = k.iter().map(|&a| perm[a]).collect();
            key.sort_unstable();
            out.entries.insert(key, *v);
        }
        Ok(out)
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text, &path.display().to_string())
    }

    pub fn from_json_str(text: &str, location: &str) -> Result<Self> {
        let file: TensorFile = serde_json::from_str(text).map_err(|e| Error::parse(location, e))?;
        Self::from_file(file, location)
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_file())
            .map_err(|e| Error::parse("tensor serialization", e))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn to_file(&self) -> TensorFile {
        TensorFile {
            order: self.order,
            modes: self.modes,
            entries: self
                .entries
                .iter()
                .map(|(k, v)| TensorEntry {
                    idx: k.clone(),
                    val: *v,
                })
                .collect(),
        }
    }

    pub fn from_file(file: TensorFile, location: &str) -> Result<Self> {
        let mut out = Self::zeros(file.order, file.modes).map_err(|e| Error::parse(location, e))?;
        for (n, entry) in file.entries.into_iter().enumerate() {
            let key = out
                .canonical_index(&entry.idx)
                .map_err(|e| Error::parse(format!("{location}: entries[{n}]"), e))?;
            if out.entries.contains_key(&key) {
                return Err(Error::parse(
                    format!("{location}: entries[{n}]"),
                    format!("duplicate canonical index {key:?}"),
                ));
            }
            if entry.val != 0.0 {
                out.entries.insert(key, entry.val);
            }
        }
        Ok(out)
    }
}

/// On-disk tensor layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorFile {
    pub order: usize,
    pub modes: usize,
    pub entries: Vec<TensorEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorEntry {
    pub idx: Vec<usize>,
    pub val: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;
    use proptest::prelude::*;

    fn tensor(order: usize, modes: usize, entries: &[(&[usize], f64)]) -> SymTensor {
        let mut t = SymTensor::zeros(order, modes).unwrap();
        for (idx, v) in entries {
            t.set(idx, *v).unwrap();
        }
        t
    }

    #[test]
    fn canonical_index_sorts() {
        assert_eq!(canonical_index(&[2, 0, 1], 3).unwrap(), vec![0, 1, 2]);
        assert_eq!(canonical_index(&[0, 0, 0], 1).unwrap(), vec![0, 0, 0]);
        assert_eq!(canonical_index(&[3, 3, 1, 0], 4).unwrap(), vec![0, 1, 3, 3]);
    }

    #[test]
    fn canonical_index_rejects_out_of_range() {
        assert!(matches!(
            canonical_index(&[0, 3], 3),
            Err(Error::InvalidIndex { .. })
        ));
    }

    #[test]
    fn unsorted_queries_hit_canonical_entry() {
        let t = tensor(3, 3, &[(&[2, 0, 1], 1.5)]);
        for idx in [[0, 1, 2], [1, 2, 0], [2, 1, 0]] {
            assert_eq!(t.get(&idx).unwrap(), 1.5);
        }
    }

    #[test]
    fn orbit_sizes() {
        assert_eq!(orbit_size(&[0, 0, 0]), 1);
        assert_eq!(orbit_size(&[0, 0, 1]), 3);
        assert_eq!(orbit_size(&[0, 1, 2]), 6);
        assert_eq!(orbit_size(&[0, 0, 1, 1]), 6);
        assert_eq!(orbit_size(&[0, 1, 2, 3, 4, 5, 6, 7]), 40320);
    }

    #[test]
    fn canonical_count_matches_enumeration() {
        for order in 1..5 {
            for modes in 1..5 {
                assert_eq!(
                    canonical_count(order, modes),
                    canonical_indices(order, modes).len()
                );
            }
        }
        assert_eq!(canonical_count(3, 3), 10);
        assert_eq!(canonical_count(4, 3), 15);
    }

    #[test]
    fn symmetrize_examples() {
        let d = array![[0.0, 1.0], [3.0, 0.0]].into_dyn();
        let t = SymTensor::symmetrize(&d).unwrap();
        assert_eq!(t.nnz(), 1);
        assert_eq!(t.get(&[0, 1]).unwrap(), 2.0);

        let sym = array![[1.0, 2.0], [2.0, 5.0]].into_dyn();
        let t = SymTensor::symmetrize(&sym).unwrap();
        assert_eq!(t.to_dense().unwrap(), sym);

        let mut cube = ArrayD::<f64>::zeros(IxDyn(&[2, 2, 2]));
        cube[[1, 0, 0]] = 3.0;
        let t = SymTensor::symmetrize(&cube).unwrap();
        assert_eq!(t.nnz(), 1);
        assert_eq!(t.get(&[0, 0, 1]).unwrap(), 1.0);
    }

    #[test]
    fn symmetrize_rejects_non_hypercubic() {
        let d = ArrayD::<f64>::zeros(IxDyn(&[2, 3]));
        assert!(matches!(SymTensor::symmetrize(&d), Err(Error::Shape(_))));
    }

    #[test]
    fn symmetrize_drops_noise() {
        let d = array![[1e-15, 0.0], [0.0, 1.0]].into_dyn();
        let t = SymTensor::symmetrize(&d).unwrap();
        assert_eq!(t.nnz(), 1);
    }

    #[test]
    fn frobenius_examples() {
        assert_relative_eq!(tensor(2, 2, &[(&[0, 1], 2.0)]).frobenius(), 8f64.sqrt());
        assert_eq!(SymTensor::zeros(3, 2).unwrap().frobenius(), 0.0);
        assert_eq!(tensor(3, 2, &[(&[0, 0, 0], 1.0)]).frobenius(), 1.0);
    }

    #[test]
    fn coefficient_1norm_examples() {
        assert_eq!(tensor(2, 2, &[(&[0, 1], 2.0)]).coefficient_1norm(), 4.0);
        assert_eq!(tensor(3, 2, &[(&[0, 0, 0], 0.5)]).coefficient_1norm(), 0.5);
        assert_eq!(tensor(3, 2, &[(&[0, 0, 1], 1.0)]).coefficient_1norm(), 3.0);
    }

    #[test]
    fn relative_error_examples() {
        let t = tensor(3, 3, &[(&[0, 1, 2], 1.0), (&[1, 1, 1], -2.0)]);
        assert_eq!(t.relative_error(&t).unwrap(), 0.0);
        let zero = SymTensor::zeros(3, 3).unwrap();
        assert_relative_eq!(t.relative_error(&zero).unwrap(), 1.0);
        assert_relative_eq!(t.relative_error(&t.scaled(2.0)).unwrap(), 1.0);
        assert!(matches!(
            zero.relative_error(&t),
            Err(Error::DivisionByZero(_))
        ));
    }

    #[test]
    fn dense_guard_applies() {
        let t = SymTensor::zeros(7, 8).unwrap();
        assert!(t.to_dense().unwrap_err().is_guard());
    }

    #[test]
    fn json_loader_canonicalizes_and_rejects_duplicates() {
        let ok = r#"{"order":3,"modes":3,"entries":[{"idx":[2,1,0],"val":0.5}]}"#;
        let t = SymTensor::from_json_str(ok, "inline").unwrap();
        assert_eq!(t.get(&[0, 1, 2]).unwrap(), 0.5);

        let dup =
            r#"{"order":2,"modes":2,"entries":[{"idx":[0,1],"val":1},{"idx":[1,0],"val":2}]}"#;
        assert!(SymTensor::from_json_str(dup, "inline")
            .unwrap_err()
            .is_parse());

        let range = r#"{"order":2,"modes":2,"entries":[{"idx":[0,2],"val":1}]}"#;
        assert!(SymTensor::from_json_str(range, "inline")
            .unwrap_err()
            .is_parse());
    }

    fn arb_dense(order: usize, modes: usize) -> impl Strategy<Value = ArrayD<f64>> {
        proptest::collection::vec(-2.0f64..2.0, modes.pow(order as u32))
            .prop_map(move |v| ArrayD::from_shape_vec(IxDyn(&vec![modes; order]), v).unwrap())
    }

    fn arb_perm(modes: usize) -> impl Strategy<Value = Vec<usize>> {
        Just((0..modes).collect::<Vec<_>>()).prop_shuffle()
    }

    proptest! {
        #[test]
        fn symmetrized_dense_is_permutation_invariant(d in arb_dense(3, 3)) {
            let t = SymTensor::symmetrize(&d).unwrap();
            let dense = t.to_dense().unwrap();
            for (idx, &v) in dense.indexed_iter() {
                let i = idx.slice();
                for p in [[i[1], i[0], i[2]], [i[2], i[1], i[0]], [i[0], i[2], i[1]]] {
                    prop_assert_eq!(dense[IxDyn(&p)], v);
                }
            }
            let again = SymTensor::symmetrize(&dense).unwrap();
            for (k, v) in t.iter() {
                prop_assert!((again.get(k).unwrap() - v).abs() <= 1e-15 * v.abs().max(1.0));
            }
            prop_assert_eq!(again.nnz(), t.nnz());
        }

        #[test]
        fn norms_invariant_under_relabeling((d, perm) in (arb_dense(4, 3), arb_perm(3))) {
            let t = SymTensor::symmetrize(&d).unwrap();
            let r = t.relabel(&perm).unwrap();
            prop_assert!((t.frobenius() - r.frobenius()).abs() < 1e-12);
            prop_assert!((t.coefficient_1norm() - r.coefficient_1norm()).abs() < 1e-12);
            prop_assert!(t.coefficient_1norm() + 1e-12 >= t.frobenius());
        }

        #[test]
        fn sparse_norms_match_dense_sums(d in arb_dense(3, 4)) {
            let t = SymTensor::symmetrize(&d).unwrap();
            let dense = t.to_dense().unwrap();
            let fro = dense.iter().map(|x| x * x).sum::<f64>().sqrt();
            let l1 = dense.iter().map(|x| x.abs()).sum::<f64>();
            prop_assert!((t.frobenius() - fro).abs() < 1e-12);
            prop_assert!((t.coefficient_1norm() - l1).abs() < 1e-12);
        }
    }
}
