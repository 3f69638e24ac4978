//! Randomized verification of each step of the correspondence, run in the
//! order the steps depend on each other, with a machine-readable report.

pub mod checks;
pub mod rng;

use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::subspace::Tolerances;

pub use checks::CHECK_NAMES;

pub const MAX_N: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckConfig {
    pub n: usize,
    pub trials: usize,
    pub tol: Tolerances,
    pub seed: u64,
}

impl CheckConfig {
    pub fn new(n: usize, trials: usize, tol: Tolerances, seed: u64) -> Result<Self> {
        if !(1..=MAX_N).contains(&n) {
            return Err(invalid(format!("n must be in 1..={MAX_N}, got {n}")));
        }
        if trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        Ok(CheckConfig { n, trials, tol, seed })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    pub max_residual: f64,
    pub status: Status,
    pub notes: String,
    /// Worst residual per measured quantity.
    #[serde(skip)]
    pub components: BTreeMap<String, f64>,
    /// Residuals that passed but came within a factor of ten of `eps_eq`.
    #[serde(skip)]
    pub warnings: usize,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn component(&self, name: &str) -> f64 {
        self.components.get(name).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub n: usize,
    pub trials: usize,
    pub eps_rank: f64,
    pub eps_eq: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ConfigEcho,
    pub checks: Vec<CheckResult>,
    pub overall: Status,
    pub version: String,
    pub rng_derivation: String,
    pub generated_unix: u64,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.overall == Status::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON with the timestamp zeroed, for reproducibility comparisons.
    pub fn canonical_json(&self) -> String {
        let mut copy = self.clone();
        copy.generated_unix = 0;
        copy.to_json()
    }
}

/// One measured quantity inside a trial.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    pub name: &'static str,
    pub residual: f64,
    pub pass: bool,
}

impl Measure {
    /// Passes iff `residual < threshold`.
    pub fn below(name: &'static str, residual: f64, threshold: f64) -> Self {
        Measure { name, residual, pass: residual < threshold }
    }

    /// A yes/no condition with residual 0 when it holds, 1 when it does not.
    pub fn flag(name: &'static str, ok: bool) -> Self {
        Measure { name, residual: if ok { 0.0 } else { 1.0 }, pass: ok }
    }
}

/// A family of trials sharing one label (a matching, an index `i`, ...).
pub(crate) struct Case<T> {
    pub label: String,
    pub data: T,
}

struct TrialRecord {
    case: usize,
    trial: usize,
    outcome: std::result::Result<Vec<Measure>, String>,
}

/// Runs `trials` trials for every case in parallel and reduces the
/// outcomes in index order.
pub(crate) fn run_cases<T, F>(name: &str, cfg: &CheckConfig, cases: &[Case<T>], trial: F) -> CheckResult
where
    T: Sync,
    F: Fn(&T, &mut rng::TrialRng) -> Result<Vec<Measure>> + Sync,
{
    let per_case = cfg.trials;
    let jobs: Vec<(usize, usize)> = (0..cases.len()).flat_map(|c| (0..per_case).map(move |t| (c, t))).collect();
    let records: Vec<TrialRecord> = jobs
        .par_iter()
        .map(|&(c, t)| {
            let index = (c * per_case + t) as u64;
            let mut r = rng::trial_rng(cfg.seed, name, index);
            TrialRecord { case: c, trial: t, outcome: trial(&cases[c].data, &mut r).map_err(|e| e.to_string()) }
        })
        .collect();

    let eps = cfg.tol.eps_eq;
    let mut failures = 0;
    let mut warnings = 0;
    let mut max_residual = 0.0f64;
    let mut components: BTreeMap<String, f64> = BTreeMap::new();
    let mut first_failure: Option<String> = None;
    let mut errors = 0;
    for rec in &records {
        let label = &cases[rec.case].label;
        match &rec.outcome {
            Ok(measures) => {
                let mut failed = None;
                for m in measures {
                    if m.residual.is_finite() {
                        max_residual = max_residual.max(m.residual);
                        let slot = components.entry(m.name.to_string()).or_insert(0.0);
                        *slot = slot.max(m.residual);
                    }
                    if m.pass && m.residual >= eps / 10.0 && m.residual < eps {
                        warnings += 1;
                        warn!(
                            "{name}/{label} trial {}: {} residual {:.3e} near tolerance",
                            rec.trial, m.name, m.residual
                        );
                    }
                    if !m.pass && failed.is_none() {
                        failed = Some(format!("{label} trial {}: {} residual {:.3e}", rec.trial, m.name, m.residual));
                    }
                }
                if let Some(f) = failed {
                    failures += 1;
                    first_failure.get_or_insert(f);
                }
            }
            Err(e) => {
                failures += 1;
                errors += 1;
                first_failure.get_or_insert(format!("{label} trial {}: {e}", rec.trial));
            }
        }
    }

    let mut notes = Vec::new();
    notes.push(format!("{} case(s) x {} trial(s)", cases.len(), per_case));
    if !components.is_empty() {
        let parts: Vec<String> = components.iter().map(|(k, v)| format!("{k}={v:.3e}")).collect();
        notes.push(format!("max residuals: {}", parts.join(", ")));
    }
    if warnings > 0 {
        notes.push(format!("{warnings} residual(s) within 10x of eps_eq"));
    }
    if errors > 0 {
        notes.push(format!("{errors} trial(s) raised errors"));
    }
    if let Some(f) = first_failure {
        notes.push(format!("first failure: {f}"));
    }

    CheckResult {
        name: name.to_string(),
        trials: records.len(),
        failures,
        max_residual,
        status: if failures == 0 { Status::Pass } else { Status::Fail },
        notes: notes.join("; "),
        components,
        warnings,
    }
}

/// Every check in dependency order.
pub fn run_all(cfg: &CheckConfig) -> Report {
    run_selected(cfg, &[]).expect("all names are known")
}

/// The named checks (all of them when `names` is empty), in dependency
/// order regardless of the order given.
pub fn run_selected(cfg: &CheckConfig, names: &[String]) -> Result<Report> {
    if let Some(bad) = names.iter().find(|n| !CHECK_NAMES.contains(&n.as_str())) {
        return Err(invalid(format!("unknown check {bad:?}; known: {}", CHECK_NAMES.join(", "))));
    }
    let wanted = |name: &str| names.is_empty() || names.iter().any(|n| n == name);
    let mut results: Vec<CheckResult> = Vec::new();
    for &name in CHECK_NAMES {
        if !wanted(name) {
            continue;
        }
        let mut r = checks::run_named(name, cfg);
        if name == "main" {
            let failed: Vec<&str> = results
                .iter()
                .filter(|r| !r.passed() && checks::MAIN_PREREQUISITES.contains(&r.name.as_str()))
                .map(|r| r.name.as_str())
                .collect();
            if !failed.is_empty() {
                r.notes.push_str(&format!("; prerequisite checks failed: {}", failed.join(", ")));
            }
        }
        results.push(r);
    }
    let overall = if results.iter().all(CheckResult::passed) { Status::Pass } else { Status::Fail };
    let generated_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    Ok(Report {
        config: ConfigEcho {
            n: cfg.n,
            trials: cfg.trials,
            eps_rank: cfg.tol.eps_rank,
            eps_eq: cfg.tol.eps_eq,
            seed: cfg.seed,
        },
        checks: results,
        overall,
        version: env!("CARGO_PKG_VERSION").to_string(),
        rng_derivation: rng::DERIVATION.to_string(),
        generated_unix,
    })
}

/// Runs `f` on a dedicated pool of `threads` workers (the global pool when
/// `None`).
pub fn with_threads<R, F>(threads: Option<usize>, f: F) -> Result<R>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    match threads {
        None => Ok(f()),
        Some(0) => Err(invalid("thread count must be at least 1")),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| invalid(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
