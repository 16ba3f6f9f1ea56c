//! T-count and qubit accounting for LCU block encodings of raw, CP and
//! Tucker Hamiltonians, and the resulting phase-estimation cost.
//!
//! All Select costs over every nesting level are summed into `S` and all
//! Prepare costs into `P`; the total is `⌈√2 π λ / ΔE⌉ (S + 2P)`.

mod estimate;
mod primitives;

use serde::{Deserialize, Serialize};

use crate::budget::ErrorBudget;
use crate::error::{Error, Result};
use crate::hamiltonian::NormMode;

pub use estimate::{
    estimate_cp, estimate_tucker, estimate_unfactorized, EstimateOptions, TERM_GUARD,
};
pub use primitives::{
    linear_combo_encoding_cost, multicontrolled_x_cost, product_encoding_cost, qrom_prepare_cost,
    select_cost, QromCost,
};

/// Cost of one (possibly nested) block encoding.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Encoding {
    pub select_t: u64,
    pub prepare_t: u64,
    /// Register that must return to `|0⟩` for the block to be selected.
    pub ancilla: u64,
    /// Scratch returned clean by construction (QROM output and swap
    /// registers); reusable across nesting levels.
    pub work: u64,
}

impl Encoding {
    /// A bare Pauli string or other Clifford unitary.
    pub const UNITARY: Encoding = Encoding {
        select_t: 0,
        prepare_t: 0,
        ancilla: 0,
        work: 0,
    };

    /// LCU over `n` unitaries whose own cost is negligible.
    pub fn lcu(n: u64, eps_prime: f64) -> Result<Encoding> {
        let q = qrom_prepare_cost(n, eps_prime)?;
        let (select_t, index) = select_cost(n);
        Ok(Encoding {
            select_t,
            prepare_t: q.t,
            ancilla: index,
            work: q.ancilla - primitives::ceil_log2(n),
        })
    }

    /// Product of block encodings: each factor adds a flag qubit and a
    /// multi-controlled X on its ancilla register.
    pub fn product(factors: &[Encoding]) -> Encoding {
        let mut out = Encoding::default();
        for f in factors {
            out.select_t += f.select_t + multicontrolled_x_cost(f.ancilla);
            out.prepare_t += f.prepare_t;
            out.ancilla = out.ancilla.max(f.ancilla);
            out.work = out.work.max(f.work);
        }
        out.ancilla += factors.len() as u64;
        out
    }

    /// LCU whose unitaries are themselves block encodings.
    pub fn sum(children: &[Encoding], eps_prime: f64) -> Result<Encoding> {
        let counted: Vec<(Encoding, u64)> = children.iter().map(|c| (*c, 1)).collect();
        Encoding::sum_counted(&counted, eps_prime)
    }

    /// [`Encoding::sum`] with each child repeated `count` times.
    pub fn sum_counted(children: &[(Encoding, u64)], eps_prime: f64) -> Result<Encoding> {
        let n: u64 = children.iter().map(|(_, c)| c).sum();
        if n == 0 {
            return Err(Error::InvalidArgument(
                "sum over zero block encodings".into(),
            ));
        }
        let mut out = Encoding::lcu(n, eps_prime)?;
        let mut inner_ancilla = 0;
        for (c, count) in children.iter().filter(|(_, count)| *count > 0) {
            out.select_t += c.select_t * count;
            out.prepare_t += c.prepare_t * count;
            inner_ancilla = inner_ancilla.max(c.ancilla);
            out.work = out.work.max(c.work);
        }
        out.ancilla += inner_ancilla;
        Ok(out)
    }
}

/// One labelled part of a report. Component costs add up to the report's
/// `select_t` and `prepare_t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostComponent {
    pub label: String,
    pub select_t: u64,
    pub prepare_t: u64,
    pub terms: u64,
}

/// Rank and achieved error of one decomposed tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorRank {
    pub tensor: String,
    pub rank: usize,
    pub eps_f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub method: String,
    pub norm_mode: NormMode,
    pub lambda: f64,
    pub delta_e: f64,
    /// `⌈√2 π λ / ΔE⌉`.
    pub iterations: u64,
    pub select_t: u64,
    pub prepare_t: u64,
    pub total_t: u64,
    pub qubits: u64,
    pub system_qubits: u64,
    pub ancilla_qubits: u64,
    pub work_qubits: u64,
    /// Unitaries in the outermost LCU.
    pub outer_terms: u64,
    pub eps_prime: f64,
    pub budget: ErrorBudget,
    pub ranks: Vec<TensorRank>,
    pub breakdown: Vec<CostComponent>,
}

impl CostReport {
    /// Recomputes `total_t` from the other fields.
    pub fn expected_total(&self) -> Option<u64> {
        let iters = crate::budget::walk_iterations(self.lambda, self.delta_e);
        self.select_t
            .checked_add(self.prepare_t.checked_mul(2)?)?
            .checked_mul(iters)
    }

    /// Every internal identity of the report holds exactly.
    pub fn is_consistent(&self) -> bool {
        let s: u64 = self.breakdown.iter().map(|c| c.select_t).sum();
        let p: u64 = self.breakdown.iter().map(|c| c.prepare_t).sum();
        self.expected_total() == Some(self.total_t)
            && self.iterations == crate::budget::walk_iterations(self.lambda, self.delta_e)
            && s == self.select_t
            && p == self.prepare_t
            && self.qubits == self.system_qubits + self.ancilla_qubits + self.work_qubits
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}
