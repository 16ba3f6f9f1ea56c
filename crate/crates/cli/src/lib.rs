//! Commands behind the `vibefactor` binary.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use vibefactor::budget::{make_budget, DEFAULT_DELTA_E};
use vibefactor::costmodel::CostReport;
use vibefactor::decomp::{rank_sweep, CpOptions};
use vibefactor::hamiltonian::{
    number_op_pauli_terms, one_norm_factorized, one_norm_unfactorized, q_pauli_terms,
    synth_vibronic, HamiltonianModel, NormMode,
};
use vibefactor::methods::{MethodOutcome, MethodRegistry, RunContext};
use vibefactor::oracle::{
    dense_from_factorized, dense_hamiltonian, dense_number, dense_q, pauli_sum_matrix,
    project_unary,
};
use vibefactor::symtensor::canonical_count;
use vibefactor::Error;

/// Exit status for malformed inputs.
pub const EXIT_PARSE: i32 = 2;
/// Exit status when a size guard stops a computation.
pub const EXIT_GUARD: i32 = 3;

/// CP target used by `validate`, tight enough for the operator check.
pub const VALIDATE_EPS: f64 = 1e-9;
/// Operator-level tolerance of the factorized-vs-raw check.
pub const EQUIVALENCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaE {
    Absolute(f64),
    /// Fraction of the unfactorized λ.
    Relative(f64),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: PathBuf,
    pub methods: Vec<String>,
    pub delta_e: DeltaE,
    pub norm_mode: NormMode,
    pub seed: u64,
    pub restarts: usize,
    pub rank_cap: Option<usize>,
    pub cp_rank: Option<usize>,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn new(model: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        RunConfig {
            model: model.into(),
            methods: vec!["unfactorized".into(), "cp".into(), "tucker".into()],
            delta_e: DeltaE::Absolute(DEFAULT_DELTA_E),
            norm_mode: NormMode::Coefficient,
            seed: 0,
            restarts: CpOptions::default().restarts,
            rank_cap: None,
            cp_rank: None,
            out: out.into(),
        }
    }

    fn cp_options(&self) -> CpOptions {
        CpOptions {
            restarts: self.restarts,
            rank_cap: self.rank_cap,
            ..CpOptions::default()
        }
    }

    /// Absolute ΔE for `h`; a relative value is taken against the
    /// unfactorized λ so every method is held to the same accuracy.
    pub fn resolve_delta_e(&self, h: &HamiltonianModel) -> Result<f64> {
        let de = match self.delta_e {
            DeltaE::Absolute(x) => x,
            DeltaE::Relative(r) => r * one_norm_unfactorized(h, self.norm_mode),
        };
        if !(de > 0.0 && de.is_finite()) {
            return Err(
                Error::InvalidArgument(format!("delta E must be positive, got {de}")).into(),
            );
        }
        Ok(de)
    }

    fn context(&self, h: &HamiltonianModel) -> Result<RunContext> {
        Ok(RunContext {
            delta_e: self.resolve_delta_e(h)?,
            norm_mode: self.norm_mode,
            seed: self.seed,
            cp: self.cp_options(),
            cp_rank: self.cp_rank,
            eps_per_tensor: None,
        })
    }
}

/// Maps an error chain to the documented exit status.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            if e.is_parse() {
                return EXIT_PARSE;
            }
            if e.is_guard() {
                return EXIT_GUARD;
            }
        }
    }
    1
}

pub fn load_model(path: &Path) -> Result<HamiltonianModel> {
    Ok(HamiltonianModel::load(path)?)
}

/// One row of `comparison.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct ComparisonRow {
    pub method: String,
    pub lambda: f64,
    pub qubits: u64,
    #[serde(rename = "S")]
    pub select_t: u64,
    #[serde(rename = "P")]
    pub prepare_t: u64,
    #[serde(rename = "total_T")]
    pub total_t: u64,
    /// Empty when the unfactorized baseline is unavailable.
    pub relative_cost: Option<f64>,
}

#[derive(Debug)]
pub struct EstimateOutput {
    pub outcomes: Vec<MethodOutcome>,
    pub rows: Vec<ComparisonRow>,
    pub csv_path: PathBuf,
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn run_methods(
    cfg: &RunConfig,
    h: &HamiltonianModel,
    ctx: &RunContext,
) -> Result<Vec<MethodOutcome>> {
    let registry = MethodRegistry::with_defaults();
    let mut out = Vec::new();
    for m in registry.select(&cfg.methods)? {
        out.push(
            m.run(h, ctx)
                .with_context(|| format!("method {}", m.name()))?,
        );
    }
    Ok(out)
}

/// Reports for every selected method plus `comparison.csv`.
pub fn cmd_estimate(cfg: &RunConfig) -> Result<EstimateOutput> {
    let h = load_model(&cfg.model)?;
    let ctx = cfg.context(&h)?;
    let outcomes = run_methods(cfg, &h, &ctx)?;
    fs::create_dir_all(&cfg.out)?;

    let baseline = match outcomes.iter().find(|o| o.report.method == "unfactorized") {
        Some(o) => Some(o.report.total_t),
        None => MethodRegistry::with_defaults()
            .get("unfactorized")
            .expect("default method")
            .run(&h, &ctx)
            .ok()
            .map(|o| o.report.total_t),
    };
    let mut rows = Vec::new();
    for o in &outcomes {
        let name = &o.report.method;
        fs::write(
            cfg.out.join(format!("report_{name}.json")),
            serde_json::to_string_pretty(o)?,
        )?;
        if let Some(f) = &o.factorized {
            fs::write(cfg.out.join(format!("factors_{name}.json")), f.to_json())?;
        }
        rows.push(ComparisonRow {
            method: name.clone(),
            lambda: o.report.lambda,
            qubits: o.report.qubits,
            select_t: o.report.select_t,
            prepare_t: o.report.prepare_t,
            total_t: o.report.total_t,
            relative_cost: baseline.map(|b| o.report.total_t as f64 / b as f64),
        });
    }
    let csv_path = cfg.out.join("comparison.csv");
    write_csv(&csv_path, &rows)?;
    Ok(EstimateOutput {
        outcomes,
        rows,
        csv_path,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct SweepRow {
    pub tensor_id: String,
    pub order: usize,
    pub rank: usize,
    #[serde(rename = "eps_F")]
    pub eps_f: f64,
}

/// ε_F of the best CP fit at every rank `1..=max_rank` for every tensor.
///
/// Without `max_rank` each tensor is swept up to its number of canonical
/// entries (or `--rank-cap` if smaller).
pub fn cmd_sweep_rank(
    cfg: &RunConfig,
    max_rank: Option<usize>,
) -> Result<(Vec<SweepRow>, PathBuf)> {
    if !cfg.methods.iter().any(|m| m == "cp") {
        return Err(Error::InvalidArgument("sweep-rank needs the cp method".into()).into());
    }
    let h = load_model(&cfg.model)?;
    let opts = cfg.cp_options();
    let tensors: Vec<_> = h.tensors().collect();
    let per_tensor = tensors
        .par_iter()
        .enumerate()
        .map(|(pos, (id, t))| {
            let full = canonical_count(t.order(), t.modes());
            let top = max_rank.or(cfg.rank_cap).unwrap_or(full).max(1);
            let seed = cfg.seed.wrapping_add(1000 * pos as u64);
            let fits = rank_sweep(t, top, seed, &opts)?;
            Ok(fits
                .iter()
                .enumerate()
                .map(|(r, fit)| SweepRow {
                    tensor_id: id.to_string(),
                    order: id.order(),
                    rank: r + 1,
                    eps_f: fit.relative_error,
                })
                .collect::<Vec<_>>())
        })
        .collect::<vibefactor::Result<Vec<_>>>()?;
    let rows: Vec<SweepRow> = per_tensor.into_iter().flatten().collect();
    fs::create_dir_all(&cfg.out)?;
    let path = cfg.out.join("sweep.csv");
    write_csv(&path, &rows)?;
    Ok((rows, path))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
    Vacuous,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skipped => "SKIPPED",
            CheckStatus::Vacuous => "VACUOUS",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationSummary {
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl ValidationSummary {
    pub fn status(&self, name: &str) -> Option<CheckStatus> {
        self.checks
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.status)
    }
}

fn check(name: impl Into<String>, ok: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        status: if ok {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        detail,
    }
}

fn guarded(name: String, err: vibefactor::Error) -> Check {
    Check {
        name,
        status: if err.is_guard() {
            CheckStatus::Skipped
        } else {
            CheckStatus::Fail
        },
        detail: err.to_string(),
    }
}

fn encoding_checks(d: usize) -> Result<Vec<Check>> {
    let q = pauli_sum_matrix(&q_pauli_terms(d, 0)?, d + 1)?;
    let dq = (project_unary(&q, d) - dense_q(d)?.matrix).amax();
    let n = pauli_sum_matrix(&number_op_pauli_terms(d, 0)?, d + 1)?;
    let dn = (project_unary(&n, d) - dense_number(d).matrix).amax();
    Ok(vec![
        check(
            "q_encoding",
            dq <= 1e-12,
            format!("max deviation {dq:.3e} at d={d}"),
        ),
        check(
            "number_encoding",
            dn <= 1e-12,
            format!("max deviation {dn:.3e} at d={d}"),
        ),
    ])
}

fn report_checks(report: &CostReport) -> Check {
    let b = &report.budget;
    let rms = b.rms_phase_error() <= b.delta_e / b.lambda * (1.0 + 1e-9);
    let same = make_budget(b.lambda, b.delta_e)
        .map(|x| x == *b)
        .unwrap_or(false);
    check(
        format!("budget_identities[{}]", report.method),
        report.is_consistent() && rms && same,
        format!(
            "total_T={} m={} eps_prep={:.3e} consistent={} rms_ok={rms}",
            report.total_t,
            b.m,
            b.eps_prep,
            report.is_consistent()
        ),
    )
}

/// Dense-oracle and identity checks for the selected methods. CP runs at a
/// tight error target unless `--cp-rank` fixes the rank.
pub fn cmd_validate(cfg: &RunConfig) -> Result<ValidationSummary> {
    let h = load_model(&cfg.model)?;
    let mut ctx = cfg.context(&h)?;
    ctx.eps_per_tensor = Some(VALIDATE_EPS);
    let mut checks = encoding_checks(h.cutoff().min(8))?;

    let raw = dense_hamiltonian(&h);
    match &raw {
        Ok(op) => {
            let lambda = one_norm_unfactorized(&h, NormMode::Encoding);
            let ratio = op.spectral_norm() / lambda;
            checks.push(check(
                "block_norm[unfactorized]",
                ratio <= 1.0 + 1e-10,
                format!("||H||/lambda = {ratio:.6}"),
            ));
            let asym = op.asymmetry();
            checks.push(check(
                "hermitian",
                asym <= 1e-12,
                format!("max asymmetry {asym:.3e}"),
            ));
        }
        Err(e) => {
            let e = clone_guard(e);
            checks.push(guarded("block_norm[unfactorized]".into(), e));
        }
    }

    let registry = MethodRegistry::with_defaults();
    for m in registry.select(&cfg.methods)? {
        let name = m.name();
        let outcome = match m.run(&h, &ctx) {
            Ok(o) => o,
            Err(e) => {
                checks.push(guarded(format!("estimate[{name}]"), e));
                continue;
            }
        };
        checks.push(report_checks(&outcome.report));
        let Some(f) = &outcome.factorized else {
            continue;
        };
        let eq_name = format!("oracle_equivalence[{name}]");
        if !h.has_anharmonic() {
            checks.push(Check {
                name: eq_name,
                status: CheckStatus::Vacuous,
                detail: "no anharmonic tensors".into(),
            });
            continue;
        }
        let Ok(raw_op) = &raw else {
            checks.push(Check {
                name: eq_name,
                status: CheckStatus::Skipped,
                detail: "dense size guard".into(),
            });
            continue;
        };
        match dense_from_factorized(f) {
            Ok(op) => {
                let diff = op.relative_difference(raw_op)?;
                checks.push(check(
                    eq_name,
                    diff < EQUIVALENCE_TOL,
                    format!(
                        "relative Frobenius difference {diff:.3e}, max eps_F {:.3e}",
                        f.max_eps_f()
                    ),
                ));
                let lambda = one_norm_factorized(f, NormMode::Encoding);
                let ratio = op.spectral_norm() / lambda;
                checks.push(check(
                    format!("block_norm[{name}]"),
                    ratio <= 1.0 + 1e-10,
                    format!("||H_F||/lambda = {ratio:.6}"),
                ));
            }
            Err(e) => checks.push(guarded(eq_name, e)),
        }
    }
    let passed = checks.iter().all(|c| c.status != CheckStatus::Fail);
    let summary = ValidationSummary { passed, checks };
    fs::create_dir_all(&cfg.out)?;
    fs::write(
        cfg.out.join("validation.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    Ok(summary)
}

fn clone_guard(e: &Error) -> Error {
    match e {
        Error::SizeGuardExceeded { size, limit } => Error::SizeGuardExceeded {
            size: *size,
            limit: *limit,
        },
        other => Error::InvalidArgument(other.to_string()),
    }
}

/// Writes `<stem>_vibronic.json` with synthetic couplings for `orbitals`
/// orbitals.
pub fn cmd_gen_vibronic(model: &Path, orbitals: usize, seed: u64, out: &Path) -> Result<PathBuf> {
    let h = load_model(model)?;
    let g = synth_vibronic(&h, orbitals, seed)?;
    fs::create_dir_all(out)?;
    let stem = model
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("model");
    let path = out.join(format!("{stem}_vibronic.json"));
    g.save(&path)?;
    Ok(path)
}

/// Directory holding the bundled example models.
pub fn bundled_models() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("models")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_kind() {
        let parse = anyhow::Error::from(Error::Parse {
            location: "m.json".into(),
            message: "bad".into(),
        });
        assert_eq!(exit_code(&parse.context("loading")), EXIT_PARSE);
        let guard = anyhow::Error::from(Error::SizeGuardExceeded { size: 10, limit: 1 });
        assert_eq!(exit_code(&guard), EXIT_GUARD);
        assert_eq!(exit_code(&anyhow::anyhow!("other")), 1);
    }

    #[test]
    fn relative_delta_e_uses_unfactorized_lambda() {
        let h = HamiltonianModel::harmonic(vec![1.0, 2.0], 1).unwrap();
        let mut cfg = RunConfig::new("m.json", "out");
        cfg.delta_e = DeltaE::Relative(0.01);
        assert_eq!(cfg.resolve_delta_e(&h).unwrap(), 0.03);
        cfg.delta_e = DeltaE::Absolute(-1.0);
        assert!(cfg.resolve_delta_e(&h).is_err());
    }
}
