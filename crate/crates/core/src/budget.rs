//! Phase-estimation error budget: precision bits and the three-way split of
//! the remaining error between state preparation, factorization and the QFT.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};

/// Default target accuracy in Hartree (1.6 mHa).
pub const DEFAULT_DELTA_E: f64 = 1.6e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub delta_e: f64,
    pub lambda: f64,
    /// Phase register width.
    pub m: u32,
    pub eps_prep: f64,
    pub eps_f: f64,
    pub eps_qft: f64,
}

impl ErrorBudget {
    /// Number of walk steps, `⌈√2 π λ / ΔE⌉`.
    pub fn iterations(&self) -> u64 {
        walk_iterations(self.lambda, self.delta_e)
    }

    /// `√((π/2^{m+1})² + (3 ε_prep)²)`, the combined phase error.
    pub fn rms_phase_error(&self) -> f64 {
        let phase = PI / 2f64.powi(self.m as i32 + 1);
        (phase * phase + 9.0 * self.eps_prep * self.eps_prep).sqrt()
    }
}

pub(crate) fn walk_iterations(lambda: f64, delta_e: f64) -> u64 {
    (SQRT_2 * PI * lambda / delta_e).ceil() as u64
}

pub fn make_budget(lambda: f64, delta_e: f64) -> Result<ErrorBudget> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidBudget(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if delta_e.is_nan() || delta_e <= 0.0 {
        return Err(Error::InvalidBudget(format!(
            "delta E must be positive, got {delta_e}"
        )));
    }
    if delta_e >= lambda {
        return Err(Error::InvalidBudget(format!(
            "delta E {delta_e} must be smaller than lambda {lambda}"
        )));
    }
    let ratio = SQRT_2 * PI * lambda / (2.0 * delta_e);
    // smallest m with 2^m >= ratio; log2 alone can be off by one at powers of two
    let mut m = ratio.log2().ceil().max(0.0) as u32;
    while m > 0 && 2f64.powi(m as i32 - 1) >= ratio {
        m -= 1;
    }
    while 2f64.powi(m as i32) < ratio {
        m += 1;
    }
    let eps = delta_e / (3.0 * SQRT_2 * lambda);
    Ok(ErrorBudget {
        delta_e,
        lambda,
        m,
        eps_prep: eps,
        eps_f: eps,
        eps_qft: eps,
    })
}

/// Per-Prepare precision for a CP pipeline of maximal rank `r`.
pub fn eps_prime_cp(b: &ErrorBudget, r: usize, lv: usize, lvc: usize) -> f64 {
    let denom = r.max(1) as f64 * (lv * lv + lvc * lvc) as f64;
    b.eps_prep / denom.max(1.0)
}

/// Per-Prepare precision for a Tucker pipeline over `modes` modes.
pub fn eps_prime_tucker(b: &ErrorBudget, modes: usize, lv: usize, lvc: usize) -> f64 {
    let m = modes as f64;
    let denom = lv as f64 * m.powi(lv as i32) + lvc as f64 * m.powi(lvc as i32);
    b.eps_prep / denom.max(1.0)
}

/// Relative Frobenius error allowed for each decomposed tensor.
///
/// The vibrational and vibronic tensor counts are clamped at zero, so a
/// model without vibronic terms is not penalised by `L_vc = 0`.
pub fn per_tensor_eps_f(b: &ErrorBudget, lv: usize, lvc: usize, orbitals: usize) -> Result<f64> {
    let vib = lv.saturating_sub(2) as f64;
    let vibc = (orbitals * orbitals) as f64 * lvc.saturating_sub(1) as f64;
    let count = vib + vibc;
    if count <= 0.0 {
        return Err(Error::NoTensorsToDecompose);
    }
    Ok(b.delta_e / b.lambda / (3.0 * SQRT_2 * count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn reference_budgets() {
        let b = make_budget(55.0, 0.55).unwrap();
        assert_eq!(b.m, 8);
        assert_relative_eq!(b.eps_prep, 0.002357022603955158, max_relative = 1e-12);
        assert_eq!(b.eps_prep, b.eps_f);
        assert_eq!(b.eps_f, b.eps_qft);
        assert_eq!(make_budget(1.0, 0.5).unwrap().m, 3);
    }

    #[test]
    fn invalid_budgets() {
        assert!(matches!(
            make_budget(1.0, 1.0),
            Err(Error::InvalidBudget(_))
        ));
        assert!(make_budget(1.0, 2.0).is_err());
        assert!(make_budget(0.0, 0.1).is_err());
        assert!(make_budget(1.0, 0.0).is_err());
    }

    #[test]
    fn prepare_precisions() {
        let mut b = make_budget(1.0, 0.5).unwrap();
        b.eps_prep = 0.01;
        assert_relative_eq!(eps_prime_cp(&b, 2, 4, 2), 2.5e-4, max_relative = 1e-14);
        assert_relative_eq!(eps_prime_cp(&b, 1, 3, 0), 0.01 / 9.0, max_relative = 1e-14);
        assert_relative_eq!(
            eps_prime_tucker(&b, 3, 3, 0),
            0.01 / 81.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            eps_prime_tucker(&b, 1, 3, 2),
            0.01 / 5.0,
            max_relative = 1e-14
        );
        let half = ErrorBudget {
            eps_prep: 0.005,
            ..b
        };
        assert_relative_eq!(eps_prime_cp(&half, 2, 4, 2), 1.25e-4, max_relative = 1e-14);
    }

    #[test]
    fn tensor_precisions() {
        let b = make_budget(1.0, 0.01).unwrap();
        let v = per_tensor_eps_f(&b, 4, 2, 2).unwrap();
        assert_relative_eq!(v, 0.01 / (3.0 * SQRT_2 * 6.0), max_relative = 1e-14);
        assert_relative_eq!(v, 3.928371006591931e-4, max_relative = 1e-9);
        let v = per_tensor_eps_f(&b, 3, 0, 0).unwrap();
        assert_relative_eq!(v, 2.357022603955158e-3, max_relative = 1e-12);
        assert!(matches!(
            per_tensor_eps_f(&b, 2, 1, 3),
            Err(Error::NoTensorsToDecompose)
        ));
        assert!(matches!(
            per_tensor_eps_f(&b, 0, 4, 0),
            Err(Error::NoTensorsToDecompose)
        ));
    }

    proptest! {
        #[test]
        fn phase_bits_are_minimal_and_sufficient(lambda in 1e-3f64..1e4, rel in 1e-6f64..0.99) {
            let b = make_budget(lambda, rel * lambda).unwrap();
            let bound = b.delta_e / b.lambda / SQRT_2;
            prop_assert!(PI / 2f64.powi(b.m as i32 + 1) <= bound * (1.0 + 1e-12));
            if b.m > 0 {
                prop_assert!(PI / 2f64.powi(b.m as i32) > bound * (1.0 - 1e-12));
            }
            prop_assert!(b.rms_phase_error() <= b.delta_e / b.lambda * (1.0 + 1e-9));
        }

        #[test]
        fn precisions_shrink_with_lambda(lambda in 1.0f64..100.0, grow in 1.01f64..10.0) {
            let a = make_budget(lambda, 0.1).unwrap();
            let b = make_budget(lambda * grow, 0.1).unwrap();
            prop_assert!(b.eps_prep < a.eps_prep);
            prop_assert!(eps_prime_cp(&b, 3, 4, 2) < eps_prime_cp(&a, 3, 4, 2));
            prop_assert!(eps_prime_tucker(&b, 3, 4, 2) < eps_prime_tucker(&a, 3, 4, 2));
            prop_assert!(per_tensor_eps_f(&b, 4, 2, 1).unwrap() < per_tensor_eps_f(&a, 4, 2, 1).unwrap());
            prop_assert!(eps_prime_cp(&b, 3, 4, 2) > 0.0);
        }
    }
}
