//! Verification experiments with seeded, schedule-independent reports.
//!
//! Exact identities are hard checks with a stated tolerance. Statements that
//! involve unknown constants are informational: they carry ratio statistics
//! and a pass/fail verdict of their own, but never fail the suite.

mod asymptotic;
mod exact;
mod stats;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{PqcError, Result};
use crate::padic::Prime;

pub use asymptotic::{
    check_approximation_chain, check_bmo_signatures, check_compactness_proxy, check_hilbert_kernel_agreement,
    check_schatten_besov,
};
pub use exact::{
    check_fft, check_finite_rank_stability, check_operator_algebra, check_rank_formula, check_trace_identity,
    corrected_character_rank, corrected_character_weight,
};
pub use stats::{median, monotone_drift, RatioStats};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Hard,
    Informational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Info,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// Named tolerances; every check cites the ones it uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub trace: f64,
    pub level_stability: f64,
    pub rank_rel: f64,
    pub leibniz: f64,
    pub skew: f64,
    pub matrix_free: f64,
    pub fft: f64,
    pub parseval: f64,
    pub roundtrip: f64,
    pub kernel: f64,
    pub log_spread: f64,
    pub chain_slack: f64,
    pub bmo_variation: f64,
    pub sigma_variation: f64,
    pub compact_floor: f64,
    pub power_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            trace: 1e-10,
            level_stability: 1e-9,
            rank_rel: 1e-10,
            leibniz: 1e-10,
            skew: 1e-12,
            matrix_free: 1e-10,
            fft: 1e-10,
            parseval: 1e-12,
            roundtrip: 1e-12,
            kernel: 1e-9,
            log_spread: 2.5,
            chain_slack: 1e-12,
            bmo_variation: 0.10,
            sigma_variation: 0.10,
            compact_floor: 1e-6,
            power_rel: 1e-13,
        }
    }
}

impl Tolerances {
    /// Applies `name=value`.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let bad = || PqcError::InvalidTolerance(assignment.to_string());
        let (key, value) = assignment.split_once('=').ok_or_else(bad)?;
        let value: f64 = value.trim().parse().map_err(|_| bad())?;
        if !(value.is_finite() && value >= 0.0) {
            return Err(bad());
        }
        let mut map = match serde_json::to_value(&*self)? {
            Value::Object(m) => m,
            _ => unreachable!("struct serializes to an object"),
        };
        let slot = map.get_mut(key.trim()).ok_or_else(bad)?;
        *slot = json!(value);
        *self = serde_json::from_value(Value::Object(map))?;
        Ok(())
    }
}

/// One prime and the largest level used for it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridCell {
    pub p: Prime,
    pub max_level: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub grid: Vec<GridCell>,
    /// Functions per (p, level) cell in ensemble checks.
    pub ensemble: usize,
    /// Functions per cell in the level-stability check.
    pub stability_ensemble: usize,
    /// Functions per level in the smooth family of the compactness proxy.
    pub smooth_ensemble: usize,
    /// Largest `p^N` for the level-stability and compactness sweeps.
    pub sweep_dim_cap: usize,
    /// Levels `1..=log_norm_levels` for the `log_norm` signatures.
    pub log_norm_levels: u32,
    pub seed: u64,
    pub qs: Vec<f64>,
    pub gammas: Vec<f64>,
    pub tolerances: Tolerances,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let cell = |p, max_level| GridCell { p: Prime::new(p).expect("odd prime"), max_level };
        ExperimentConfig {
            grid: vec![cell(3, 4), cell(5, 3), cell(7, 2)],
            ensemble: 100,
            stability_ensemble: 10,
            smooth_ensemble: 5,
            sweep_dim_cap: 625,
            log_norm_levels: 6,
            seed: 42,
            qs: vec![1.0, 2.0, 4.0],
            gammas: vec![0.0, 0.5, 1.0, 2.0],
            tolerances: Tolerances::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        for cell in &self.grid {
            let dim = cell.p.check_level(cell.max_level)? as usize;
            if dim > crate::operators::DENSE_CAP {
                return Err(PqcError::DenseCapExceeded { dim, cap: crate::operators::DENSE_CAP });
            }
        }
        if self.qs.iter().any(|&q| !(q >= 1.0 && q.is_finite())) {
            return Err(PqcError::InvalidSpec("q values must be finite and at least 1".into()));
        }
        if self.gammas.iter().any(|g| !g.is_finite()) {
            return Err(PqcError::InvalidSpec("decay exponents must be finite".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        json_hash(&serde_json::to_value(self).expect("config serializes"))
    }
}

/// SHA-256 of the compact JSON serialization, hex encoded.
pub fn json_hash(v: &Value) -> String {
    let digest = Sha256::digest(v.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub kind: CheckKind,
    pub status: Status,
    pub tolerance: Value,
    pub observed: Value,
    pub expected: Value,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub ratio_stats: BTreeMap<String, RatioStats>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
    /// Wall time; reported in the Markdown summary only, so JSON stays reproducible.
    #[serde(skip)]
    pub runtime: Duration,
}

impl CheckResult {
    pub fn new(name: &str, kind: CheckKind, status: Status) -> Self {
        CheckResult {
            name: name.to_string(),
            kind,
            status,
            tolerance: Value::Null,
            observed: Value::Null,
            expected: Value::Null,
            ratio_stats: BTreeMap::new(),
            notes: Vec::new(),
            runtime: Duration::ZERO,
        }
    }

    pub fn tolerance(mut self, v: Value) -> Self {
        self.tolerance = v;
        self
    }

    pub fn observed(mut self, v: Value) -> Self {
        self.observed = v;
        self
    }

    pub fn expected(mut self, v: Value) -> Self {
        self.expected = v;
        self
    }

    pub fn stat(mut self, label: &str, s: RatioStats) -> Self {
        self.ratio_stats.insert(label.to_string(), s);
        self
    }

    pub fn note(mut self, s: impl Into<String>) -> Self {
        self.notes.push(s.into());
        self
    }

    pub fn is_hard_failure(&self) -> bool {
        self.kind == CheckKind::Hard && self.status == Status::Fail
    }
}

/// Runs `f`, stamping every result with the elapsed time split evenly.
pub(crate) fn timed(f: impl FnOnce() -> Result<Vec<CheckResult>>) -> Result<Vec<CheckResult>> {
    let start = Instant::now();
    let mut out = f()?;
    let share = start.elapsed() / out.len().max(1) as u32;
    out.iter_mut().for_each(|c| c.runtime = share);
    Ok(out)
}

/// Selectable check groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckGroup {
    Rank,
    Trace,
    Stability,
    Algebra,
    Fft,
    Kernel,
    SchattenBesov,
    Approximation,
    Bmo,
    Compactness,
}

impl CheckGroup {
    pub const ALL: [CheckGroup; 10] = [
        CheckGroup::Rank,
        CheckGroup::Trace,
        CheckGroup::Stability,
        CheckGroup::Algebra,
        CheckGroup::Fft,
        CheckGroup::Kernel,
        CheckGroup::SchattenBesov,
        CheckGroup::Approximation,
        CheckGroup::Bmo,
        CheckGroup::Compactness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckGroup::Rank => "rank",
            CheckGroup::Trace => "trace",
            CheckGroup::Stability => "stability",
            CheckGroup::Algebra => "algebra",
            CheckGroup::Fft => "fft",
            CheckGroup::Kernel => "kernel",
            CheckGroup::SchattenBesov => "schatten-besov",
            CheckGroup::Approximation => "approximation",
            CheckGroup::Bmo => "bmo",
            CheckGroup::Compactness => "compactness",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|g| g.name() == s)
    }

    pub fn run(self, config: &ExperimentConfig) -> Result<Vec<CheckResult>> {
        timed(|| match self {
            CheckGroup::Rank => {
                let mut out = Vec::new();
                for cell in &config.grid {
                    out.extend(check_rank_formula(cell.p, cell.max_level, &config.tolerances)?);
                }
                Ok(out)
            }
            CheckGroup::Trace => check_trace_identity(config),
            CheckGroup::Stability => check_finite_rank_stability(config),
            CheckGroup::Algebra => check_operator_algebra(config),
            CheckGroup::Fft => check_fft(config),
            CheckGroup::Kernel => check_hilbert_kernel_agreement(config),
            CheckGroup::SchattenBesov => check_schatten_besov(config),
            CheckGroup::Approximation => check_approximation_chain(config),
            CheckGroup::Bmo => check_bmo_signatures(config),
            CheckGroup::Compactness => check_compactness_proxy(config),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub tool_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn run(config: &ExperimentConfig, groups: &[CheckGroup]) -> Result<Self> {
        config.validate()?;
        let mut checks = Vec::new();
        for g in groups {
            checks.extend(g.run(config)?);
        }
        Ok(VerificationReport {
            tool_version: VERSION.to_string(),
            config_hash: config.hash(),
            seed: config.seed,
            config: config.clone(),
            checks,
        })
    }

    pub fn run_all(config: &ExperimentConfig) -> Result<Self> {
        Self::run(config, &CheckGroup::ALL)
    }

    pub fn hard_failure(&self) -> bool {
        self.checks.iter().any(CheckResult::is_hard_failure)
    }

    pub fn find(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_markdown(&self) -> String {
        let mut s = format!(
            "# Verification report\n\ntool version {}, seed {}, config hash `{}`\n\n",
            self.tool_version, self.seed, self.config_hash
        );
        let grid: Vec<String> =
            self.config.grid.iter().map(|c| format!("p = {}, levels 1..{}", c.p, c.max_level)).collect();
        s.push_str(&format!("grid: {}\n\n", grid.join("; ")));
        s.push_str("| check | kind | status | runtime (s) | notes |\n|---|---|---|---|---|\n");
        for c in &self.checks {
            let kind = match c.kind {
                CheckKind::Hard => "hard",
                CheckKind::Informational => "informational",
            };
            let status = match c.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Info => "info",
            };
            s.push_str(&format!(
                "| {} | {} | {} | {:.2} | {} |\n",
                c.name,
                kind,
                status,
                c.runtime.as_secs_f64(),
                c.notes.join("; ").replace('|', "\\|")
            ));
        }
        let stats: Vec<_> = self.checks.iter().filter(|c| !c.ratio_stats.is_empty()).collect();
        if !stats.is_empty() {
            s.push_str("\n## Log-ratio statistics\n\n| check | cell | n | min | median | max | spread |\n|---|---|---|---|---|---|---|\n");
            for c in stats {
                for (label, r) in &c.ratio_stats {
                    s.push_str(&format!(
                        "| {} | {} | {} | {:.4} | {:.4} | {:.4} | {:.4} |\n",
                        c.name, label, r.count, r.min, r.median, r.max, r.spread
                    ));
                }
            }
        }
        s.push_str(&format!(
            "\nOverall: {}\n",
            if self.hard_failure() { "hard check failure" } else { "all hard checks pass" }
        ));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_overrides() {
        let mut t = Tolerances::default();
        t.set("trace=1e-8").unwrap();
        assert_eq!(t.trace, 1e-8);
        t.set(" log_spread = 3 ").unwrap();
        assert_eq!(t.log_spread, 3.0);
        assert!(t.set("nope=1").is_err());
        assert!(t.set("trace").is_err());
        assert!(t.set("trace=abc").is_err());
        assert!(t.set("trace=-1").is_err());
    }

    #[test]
    fn config_hash_is_stable_and_sensitive() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        b.seed = 43;
        assert_ne!(a.hash(), b.hash());
        let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn config_validation() {
        let mut c = ExperimentConfig::default();
        assert!(c.validate().is_ok());
        c.grid[0].max_level = 7;
        assert!(c.validate().is_err());
        let c = ExperimentConfig { qs: vec![0.5], ..ExperimentConfig::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn group_names_roundtrip() {
        for g in CheckGroup::ALL {
            assert_eq!(CheckGroup::parse(g.name()), Some(g));
        }
        assert_eq!(CheckGroup::parse("everything"), None);
    }

    #[test]
    fn runtime_stays_out_of_json() {
        let mut c = CheckResult::new("x", CheckKind::Hard, Status::Pass);
        c.runtime = Duration::from_secs(3);
        let v = serde_json::to_value(&c).unwrap();
        assert!(v.get("runtime").is_none());
    }
}
