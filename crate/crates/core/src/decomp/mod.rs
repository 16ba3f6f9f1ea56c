//! Symmetric CP and Tucker (HOSVD) decompositions of [`SymTensor`]s.
//!
//! CP writes a tensor as `Σ_l Λ_l Q_l ⊗ … ⊗ Q_l` with unit vectors `Q_l`;
//! Tucker writes it as a dense core contracted with one orthogonal matrix on
//! every mode. Both are exposed through plain functions and serialize to the
//! same tagged factor-file format.
//!
//! [`SymTensor`]: crate::symtensor::SymTensor

mod cp;
mod tucker;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cp::{
    cp_decompose, cp_decompose_warm, cp_reconstruct, rank_for_error, rank_sweep, CpFactors, CpFit,
    CpOptions,
};
pub use tucker::{core_coefficient_1norm, tucker_decompose, tucker_reconstruct, TuckerFactors};

/// Either factorization, as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Factors {
    Cp(CpFactors),
    Tucker(TuckerFactors),
}

impl Factors {
    pub fn order(&self) -> usize {
        match self {
            Factors::Cp(f) => f.order,
            Factors::Tucker(f) => f.order,
        }
    }

    pub fn modes(&self) -> usize {
        match self {
            Factors::Cp(f) => f.modes,
            Factors::Tucker(f) => f.modes,
        }
    }

    pub fn reconstruct(&self) -> Result<crate::symtensor::SymTensor> {
        match self {
            Factors::Cp(f) => cp_reconstruct(f),
            Factors::Tucker(f) => tucker_reconstruct(f),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("factor serialization is infallible")
    }

    pub fn from_json_str(text: &str, location: &str) -> Result<Self> {
        let f: Factors = serde_json::from_str(text).map_err(|e| Error::parse(location, e))?;
        f.validate().map_err(|e| Error::parse(location, e))?;
        Ok(f)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json_str(&std::fs::read_to_string(path)?, &path.display().to_string())
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Shape(m));
        match self {
            Factors::Cp(f) => {
                if f.weights.len() != f.factors.len() {
                    return bad(format!(
                        "{} weights for {} factors",
                        f.weights.len(),
                        f.factors.len()
                    ));
                }
                if f.factors.iter().any(|q| q.len() != f.modes) {
                    return bad("factor vector length differs from modes".into());
                }
            }
            Factors::Tucker(f) => {
                let len = crate::symtensor::dense_len(f.order, f.modes);
                if f.core.len() as u128 != len {
                    return bad(format!("core has {} entries, expected {len}", f.core.len()));
                }
                if f.factors.len() != f.modes || f.factors.iter().any(|q| q.len() != f.modes) {
                    return bad("Tucker factor must be modes x modes".into());
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_files_round_trip_bit_exactly() {
        let cp = Factors::Cp(CpFactors {
            order: 3,
            modes: 2,
            weights: vec![0.1 + 0.2, -1.0 / 3.0],
            factors: vec![vec![std::f64::consts::FRAC_1_SQRT_2; 2], vec![1.0, 0.0]],
        });
        let back = Factors::from_json_str(&cp.to_json(), "cp").unwrap();
        assert_eq!(back, cp);

        let tucker = Factors::Tucker(TuckerFactors {
            order: 2,
            modes: 2,
            core: vec![1e-300, 2.5, 2.5, -7.0 / 9.0],
            factors: vec![vec![0.6, 0.8], vec![-0.8, 0.6]],
        });
        let text = tucker.to_json();
        assert!(text.contains("\"kind\": \"tucker\""));
        assert_eq!(Factors::from_json_str(&text, "tucker").unwrap(), tucker);
    }

    #[test]
    fn malformed_factor_files_are_rejected() {
        let text = r#"{"kind":"cp","order":3,"modes":2,"weights":[1.0],"factors":[]}"#;
        assert!(Factors::from_json_str(text, "x").unwrap_err().is_parse());
        let text = r#"{"kind":"tucker","order":2,"modes":2,"core":[1.0],"factors":[[1,0],[0,1]]}"#;
        assert!(Factors::from_json_str(text, "x").unwrap_err().is_parse());
    }
}
