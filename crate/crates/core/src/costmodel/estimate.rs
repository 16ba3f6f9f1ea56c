use super::{CostComponent, CostReport, Encoding, TensorRank};
use crate::budget::{eps_prime_cp, eps_prime_tucker, make_budget, ErrorBudget};
use crate::decomp::Factors;
use crate::error::{Error, Result};
use crate::hamiltonian::{
    one_norm_factorized, one_norm_unfactorized, FactorMethod, FactorizedModel, HamiltonianModel,
    ModelHeader, NormMode,
};

/// Largest LCU the unfactorized estimate will enumerate.
pub const TERM_GUARD: u64 = 100_000_000;

/// Unitaries in the electronic factor of a vibronic term: two Pauli strings
/// per hermitian pair (or `I`, `Z` for a diagonal pair) for each spin.
const ELECTRONIC_UNITARIES: u64 = 4;

/// Core entries below this fraction of the largest are not encoded.
const CORE_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EstimateOptions {
    pub norm_mode: NormMode,
    /// Overrides the per-Prepare precision derived from the budget.
    pub eps_prime: Option<f64>,
}

fn harmonic_terms(h: &ModelHeader) -> u64 {
    (h.modes * (h.cutoff_d + 1)) as u64
}

#[allow(clippy::too_many_arguments)]
fn finish(
    method: &str,
    header: &ModelHeader,
    opts: &EstimateOptions,
    budget: ErrorBudget,
    eps_prime: f64,
    enc: Encoding,
    outer_terms: u64,
    ranks: Vec<TensorRank>,
    breakdown: Vec<CostComponent>,
) -> Result<CostReport> {
    let iterations = budget.iterations();
    let overflow = || Error::SizeGuardExceeded {
        size: u128::MAX,
        limit: u64::MAX as u128,
    };
    let total_t = enc
        .prepare_t
        .checked_mul(2)
        .and_then(|p| p.checked_add(enc.select_t))
        .and_then(|c| c.checked_mul(iterations))
        .ok_or_else(overflow)?;
    let system = header.modes as u64 * (header.cutoff_d as u64 + 1) + 2 * header.orbitals as u64;
    Ok(CostReport {
        method: method.to_string(),
        norm_mode: opts.norm_mode,
        lambda: budget.lambda,
        delta_e: budget.delta_e,
        iterations,
        select_t: enc.select_t,
        prepare_t: enc.prepare_t,
        total_t,
        qubits: system + enc.ancilla + enc.work,
        system_qubits: system,
        ancilla_qubits: enc.ancilla,
        work_qubits: enc.work,
        outer_terms,
        eps_prime,
        budget,
        ranks,
        breakdown,
    })
}

/// One LCU over every Pauli string of every term: `M(d+1)` harmonic strings,
/// `(2d)^k` per nonzero dense monomial of order `k`, times the electronic
/// unitaries for vibronic monomials.
pub fn estimate_unfactorized(
    h: &HamiltonianModel,
    delta_e: f64,
    opts: &EstimateOptions,
) -> Result<CostReport> {
    let lambda = one_norm_unfactorized(h, opts.norm_mode);
    let budget = make_budget(lambda, delta_e)?;
    let eps_prime = opts.eps_prime.unwrap_or(budget.eps_prep);
    let two_d = 2 * h.cutoff() as u128;

    let mut breakdown = vec![CostComponent {
        label: "harmonic".into(),
        select_t: 0,
        prepare_t: 0,
        terms: harmonic_terms(&h.header),
    }];
    let mut n: u128 = harmonic_terms(&h.header) as u128;
    for (id, t) in h.tensors() {
        let elec = if id.orbitals().is_some() {
            ELECTRONIC_UNITARIES as u128
        } else {
            1
        };
        let terms = (t.dense_nnz() as u128)
            .saturating_mul(two_d.saturating_pow(id.order() as u32))
            .saturating_mul(elec);
        n = n.saturating_add(terms);
        if n > TERM_GUARD as u128 {
            return Err(Error::SizeGuardExceeded {
                size: n,
                limit: TERM_GUARD as u128,
            });
        }
        breakdown.push(CostComponent {
            label: id.to_string(),
            select_t: 0,
            prepare_t: 0,
            terms: terms as u64,
        });
    }
    let n = n as u64;
    let enc = Encoding::lcu(n, eps_prime)?;
    breakdown.push(CostComponent {
        label: "outer".into(),
        select_t: enc.select_t,
        prepare_t: enc.prepare_t,
        terms: n,
    });
    finish(
        "unfactorized",
        &h.header,
        opts,
        budget,
        eps_prime,
        enc,
        n,
        Vec::new(),
        breakdown,
    )
}

fn effective_lvc(h: &ModelHeader) -> usize {
    if h.orbitals == 0 {
        0
    } else {
        h.lvc
    }
}

/// Terms that get their own product encoding.
fn encoded_terms(factors: &Factors) -> u64 {
    match factors {
        Factors::Cp(f) => f.weights.iter().filter(|w| **w != 0.0).count() as u64,
        Factors::Tucker(f) => f.significant_core(CORE_CUTOFF).len() as u64,
    }
}

fn estimate_factorized(
    f: &FactorizedModel,
    delta_e: f64,
    opts: &EstimateOptions,
    expect: FactorMethod,
) -> Result<CostReport> {
    if f.method != expect {
        return Err(Error::InvalidArgument(format!(
            "expected a {expect} model, got {}",
            f.method
        )));
    }
    let h = &f.header;
    let lambda = one_norm_factorized(f, opts.norm_mode);
    let budget = make_budget(lambda, delta_e)?;
    let ranks: Vec<TensorRank> = f
        .tensors
        .iter()
        .map(|t| TensorRank {
            tensor: t.id.to_string(),
            rank: match &t.factors {
                Factors::Cp(_) => encoded_terms(&t.factors) as usize,
                Factors::Tucker(tk) => tk.modes,
            },
            eps_f: t.eps_f,
        })
        .collect();
    let eps_prime = opts.eps_prime.unwrap_or_else(|| match expect {
        FactorMethod::Cp => {
            let r = ranks.iter().map(|r| r.rank).max().unwrap_or(1);
            eps_prime_cp(&budget, r, h.lv, effective_lvc(h))
        }
        FactorMethod::Tucker => eps_prime_tucker(&budget, h.modes, h.lv, effective_lvc(h)),
    });

    // s = Σ_α Q_α q_α: M modes, 2d Pauli strings each
    let s_enc = Encoding::lcu((2 * h.modes * h.cutoff_d) as u64, eps_prime)?;
    let elec_enc = Encoding::lcu(ELECTRONIC_UNITARIES, eps_prime)?;

    let mut children = vec![(Encoding::UNITARY, harmonic_terms(h))];
    let mut breakdown = vec![CostComponent {
        label: "harmonic".into(),
        select_t: 0,
        prepare_t: 0,
        terms: harmonic_terms(h),
    }];
    for t in &f.tensors {
        let vibronic = t.id.orbitals().is_some();
        if vibronic && h.orbitals == 0 {
            continue;
        }
        let mut parts = vec![s_enc; t.id.order()];
        if vibronic {
            parts.push(elec_enc);
        }
        let product = Encoding::product(&parts);
        let count = encoded_terms(&t.factors);
        children.push((product, count));
        breakdown.push(CostComponent {
            label: t.id.to_string(),
            select_t: product.select_t * count,
            prepare_t: product.prepare_t * count,
            terms: count,
        });
    }
    let n: u64 = children.iter().map(|(_, c)| c).sum();
    let enc = Encoding::sum_counted(&children, eps_prime)?;
    let outer = Encoding::lcu(n, eps_prime)?;
    breakdown.push(CostComponent {
        label: "outer".into(),
        select_t: outer.select_t,
        prepare_t: outer.prepare_t,
        terms: n,
    });
    finish(
        &expect.to_string(),
        h,
        opts,
        budget,
        eps_prime,
        enc,
        n,
        ranks,
        breakdown,
    )
}

/// Outer LCU over the harmonic strings and one product `s^k` (times the
/// electronic factor for vibronic terms) per nonzero CP weight.
pub fn estimate_cp(
    f: &FactorizedModel,
    delta_e: f64,
    opts: &EstimateOptions,
) -> Result<CostReport> {
    estimate_factorized(f, delta_e, opts, FactorMethod::Cp)
}

/// Outer LCU over the harmonic strings and one product `s_β₁ ⋯ s_β_k` per
/// significant core entry.
pub fn estimate_tucker(
    f: &FactorizedModel,
    delta_e: f64,
    opts: &EstimateOptions,
) -> Result<CostReport> {
    estimate_factorized(f, delta_e, opts, FactorMethod::Tucker)
}
