//! Unary (one-hot) qubit encoding of truncated bosonic operators.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// `coefficient · ⊗_q string[q]`; qubits not in `string` carry the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub string: BTreeMap<usize, Pauli>,
}

impl PauliTerm {
    pub fn new(coefficient: f64, ops: &[(usize, Pauli)]) -> Self {
        PauliTerm {
            coefficient,
            string: ops.iter().copied().collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.string.is_empty()
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+.6}", self.coefficient)?;
        if self.string.is_empty() {
            return write!(f, " I");
        }
        for (q, p) in &self.string {
            write!(f, " {p:?}{q}")?;
        }
        Ok(())
    }
}

/// Sum of `|coefficient|` over a term list.
pub fn pauli_1norm(terms: &[PauliTerm]) -> f64 {
    terms.iter().map(|t| t.coefficient.abs()).sum()
}

/// Position operator `q = (a + a†)/√2` on levels `0..=d`, occupying qubits
/// `offset..=offset+d`: pairs `X_i X_{i+1}` and `Y_i Y_{i+1}` with
/// coefficient `√(i+1)/(2√2)`.
pub fn q_pauli_terms(d: usize, offset: usize) -> Result<Vec<PauliTerm>> {
    if d == 0 {
        return Err(Error::EmptyOperator);
    }
    let mut out = Vec::with_capacity(2 * d);
    for i in 0..d {
        let c = ((i + 1) as f64).sqrt() / (2.0 * std::f64::consts::SQRT_2);
        let (a, b) = (offset + i, offset + i + 1);
        out.push(PauliTerm::new(c, &[(a, Pauli::X), (b, Pauli::X)]));
        out.push(PauliTerm::new(c, &[(a, Pauli::Y), (b, Pauli::Y)]));
    }
    Ok(out)
}

/// Number operator `Σ_{i=1}^{d} i (I − Z_i)/2`. The identity parts are merged
/// into the first returned term.
pub fn number_op_pauli_terms(d: usize, offset: usize) -> Result<Vec<PauliTerm>> {
    if d == 0 {
        return Err(Error::EmptyOperator);
    }
    let identity = (d * (d + 1)) as f64 / 4.0;
    let mut out = vec![PauliTerm::new(identity, &[])];
    for i in 1..=d {
        out.push(PauliTerm::new(-(i as f64) / 2.0, &[(offset + i, Pauli::Z)]));
    }
    Ok(out)
}

/// `‖q‖₁ = (1/√2) Σ_{i<d} √(i+1)` for cutoff `d`.
pub fn q_1norm(d: usize) -> f64 {
    (0..d).map(|i| ((i + 1) as f64).sqrt()).sum::<f64>() / std::f64::consts::SQRT_2
}

/// Pauli 1-norm of the number operator, `d(d+1)/2`.
pub fn number_op_1norm(d: usize) -> f64 {
    (d * (d + 1)) as f64 / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn q_terms_for_small_cutoffs() {
        let t = q_pauli_terms(1, 0).unwrap();
        assert_eq!(t.len(), 2);
        assert_relative_eq!(t[0].coefficient, 0.3535533905932738, epsilon = 1e-15);
        assert_eq!(
            t[0].string,
            [(0, Pauli::X), (1, Pauli::X)].into_iter().collect()
        );
        assert_eq!(
            t[1].string,
            [(0, Pauli::Y), (1, Pauli::Y)].into_iter().collect()
        );

        let t = q_pauli_terms(2, 5).unwrap();
        assert_eq!(t.len(), 4);
        assert_relative_eq!(t[2].coefficient, 0.5, epsilon = 1e-15);
        assert!(t[3].string.contains_key(&7));

        assert_relative_eq!(
            pauli_1norm(&q_pauli_terms(3, 0).unwrap()),
            2.9318516525781364,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            q_1norm(3),
            pauli_1norm(&q_pauli_terms(3, 0).unwrap()),
            epsilon = 1e-15
        );
        assert!(matches!(q_pauli_terms(0, 0), Err(Error::EmptyOperator)));
    }

    #[test]
    fn number_operator_terms() {
        let t = number_op_pauli_terms(1, 0).unwrap();
        assert_eq!(
            t,
            vec![
                PauliTerm::new(0.5, &[]),
                PauliTerm::new(-0.5, &[(1, Pauli::Z)])
            ]
        );
        let t = number_op_pauli_terms(2, 0).unwrap();
        assert_eq!(t[0].coefficient, 1.5);
        assert_eq!(t[1], PauliTerm::new(-0.5, &[(1, Pauli::Z)]));
        assert_eq!(t[2], PauliTerm::new(-1.0, &[(2, Pauli::Z)]));
        for d in 1..6 {
            assert_eq!(
                pauli_1norm(&number_op_pauli_terms(d, 0).unwrap()),
                number_op_1norm(d)
            );
        }
    }
}
