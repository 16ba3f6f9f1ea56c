//! Estimation pipelines behind a common trait, looked up by name.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::budget::{make_budget, per_tensor_eps_f};
use crate::costmodel::{
    estimate_cp, estimate_tucker, estimate_unfactorized, CostReport, EstimateOptions,
};
use crate::decomp::CpOptions;
use crate::error::{Error, Result};
use crate::hamiltonian::{
    factorize, factorize_fixed_rank, one_norm_unfactorized, FactorMethod, FactorizedModel,
    HamiltonianModel, NormMode,
};

/// Inputs shared by every method in one run.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub delta_e: f64,
    pub norm_mode: NormMode,
    pub seed: u64,
    pub cp: CpOptions,
    /// Fixed CP rank for every tensor instead of a rank search.
    pub cp_rank: Option<usize>,
    /// Overrides the budget-derived CP error target per tensor.
    pub eps_per_tensor: Option<f64>,
}

impl RunContext {
    pub fn new(delta_e: f64) -> Self {
        RunContext {
            delta_e,
            norm_mode: NormMode::default(),
            seed: 0,
            cp: CpOptions::default(),
            cp_rank: None,
            eps_per_tensor: None,
        }
    }

    fn estimate_options(&self) -> EstimateOptions {
        EstimateOptions {
            norm_mode: self.norm_mode,
            eps_prime: None,
        }
    }

    /// CP error target per tensor, from the unfactorized budget.
    pub fn cp_target(&self, h: &HamiltonianModel) -> Result<f64> {
        if let Some(eps) = self.eps_per_tensor {
            return Ok(eps);
        }
        let lambda = one_norm_unfactorized(h, self.norm_mode);
        let b = make_budget(lambda, self.delta_e)?;
        let lvc = if h.orbitals() == 0 { 0 } else { h.header.lvc };
        match per_tensor_eps_f(&b, h.header.lv, lvc, h.orbitals()) {
            Ok(eps) => Ok(eps.min(1.0)),
            // only order-1 tensors (or none): those factorize exactly
            Err(Error::NoTensorsToDecompose) => Ok(b.eps_f.min(1.0)),
            Err(e) => Err(e),
        }
    }
}

/// Inputs that identify a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDigest {
    pub model_sha256: String,
    pub method: String,
    pub norm_mode: NormMode,
    pub delta_e: f64,
    pub eps_prep: f64,
    pub eps_f: f64,
    pub eps_qft: f64,
    pub eps_prime: f64,
    pub eps_f_target: Option<f64>,
    pub ranks: Vec<(String, usize)>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub digest: ReportDigest,
    pub report: CostReport,
    #[serde(skip)]
    pub factorized: Option<FactorizedModel>,
}

impl MethodOutcome {
    fn new(
        h: &HamiltonianModel,
        ctx: &RunContext,
        report: CostReport,
        target: Option<f64>,
    ) -> Self {
        MethodOutcome {
            digest: ReportDigest {
                model_sha256: h.digest(),
                method: report.method.clone(),
                norm_mode: report.norm_mode,
                delta_e: report.delta_e,
                eps_prep: report.budget.eps_prep,
                eps_f: report.budget.eps_f,
                eps_qft: report.budget.eps_qft,
                eps_prime: report.eps_prime,
                eps_f_target: target,
                ranks: report
                    .ranks
                    .iter()
                    .map(|r| (r.tensor.clone(), r.rank))
                    .collect(),
                seed: ctx.seed,
            },
            report,
            factorized: None,
        }
    }
}

pub trait EstimationMethod: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, model: &HamiltonianModel, ctx: &RunContext) -> Result<MethodOutcome>;
}

pub struct Unfactorized;

impl EstimationMethod for Unfactorized {
    fn name(&self) -> &'static str {
        "unfactorized"
    }

    fn run(&self, model: &HamiltonianModel, ctx: &RunContext) -> Result<MethodOutcome> {
        let report = estimate_unfactorized(model, ctx.delta_e, &ctx.estimate_options())?;
        Ok(MethodOutcome::new(model, ctx, report, None))
    }
}

pub struct Cp;

impl EstimationMethod for Cp {
    fn name(&self) -> &'static str {
        "cp"
    }

    fn run(&self, model: &HamiltonianModel, ctx: &RunContext) -> Result<MethodOutcome> {
        let (f, target) = match ctx.cp_rank {
            Some(rank) => (factorize_fixed_rank(model, rank, ctx.seed, &ctx.cp)?, None),
            None => {
                let eps = ctx.cp_target(model)?;
                (
                    factorize(model, FactorMethod::Cp, eps, ctx.seed, &ctx.cp)?,
                    Some(eps),
                )
            }
        };
        let report = estimate_cp(&f, ctx.delta_e, &ctx.estimate_options())?;
        let mut out = MethodOutcome::new(model, ctx, report, target);
        out.factorized = Some(f);
        Ok(out)
    }
}

pub struct Tucker;

impl EstimationMethod for Tucker {
    fn name(&self) -> &'static str {
        "tucker"
    }

    fn run(&self, model: &HamiltonianModel, ctx: &RunContext) -> Result<MethodOutcome> {
        let f = factorize(model, FactorMethod::Tucker, 0.0, ctx.seed, &ctx.cp)?;
        let report = estimate_tucker(&f, ctx.delta_e, &ctx.estimate_options())?;
        let mut out = MethodOutcome::new(model, ctx, report, None);
        out.factorized = Some(f);
        Ok(out)
    }
}

/// Methods by name.
#[derive(Clone)]
pub struct MethodRegistry {
    methods: BTreeMap<&'static str, Arc<dyn EstimationMethod>>,
    order: Vec<&'static str>,
}

impl MethodRegistry {
    pub fn empty() -> Self {
        MethodRegistry {
            methods: BTreeMap::new(),
            order: Vec::new(),
        }
    }

    /// `unfactorized`, `cp` and `tucker`.
    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(Unfactorized));
        r.register(Arc::new(Cp));
        r.register(Arc::new(Tucker));
        r
    }

    /// Adds or replaces a method; names keep their first registration slot.
    pub fn register(&mut self, m: Arc<dyn EstimationMethod>) {
        let name = m.name();
        if self.methods.insert(name, m).is_none() {
            self.order.push(name);
        }
    }

    pub fn get(&self, name: &str) -> Option<Arc<dyn EstimationMethod>> {
        self.methods.get(name).cloned()
    }

    /// Registered names in registration order.
    pub fn names(&self) -> &[&'static str] {
        &self.order
    }

    /// Looks up each name; unknown or repeated names are errors.
    pub fn select<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<Arc<dyn EstimationMethod>>> {
        if names.is_empty() {
            return Err(Error::InvalidArgument("no methods selected".into()));
        }
        let mut out: Vec<Arc<dyn EstimationMethod>> = Vec::new();
        for n in names {
            let n = n.as_ref().trim();
            let m = self.get(n).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown method {n:?} (known: {})",
                    self.order.join(", ")
                ))
            })?;
            if out.iter().any(|o| o.name() == m.name()) {
                return Err(Error::InvalidArgument(format!("method {n:?} listed twice")));
            }
            out.push(m);
        }
        Ok(out)
    }
}

impl Default for MethodRegistry {
    fn default() -> Self {
        Self::with_defaults()
    }
}
