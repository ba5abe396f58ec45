//! Experiment configuration, suite dispatch and report files.
//!
//! An experiment file is versioned JSON:
//!
//! ```json
//! {
//!   "schema": "exp-v1",
//!   "suites": ["green-covariance", "drift"],
//!   "seed": 7,
//!   "output_dir": "reports/run1"
//! }
//! ```
//!
//! `kappas`, `h`, `budgets` and `tolerances` are optional. A relative
//! `output_dir` is resolved against `$SLE_OUTPUT_ROOT` when that is set.

mod ingest;
pub mod metric;
mod suites;
mod tolerances;

pub use ingest::{ingest_traces, write_trace, IngestReport, TraceSidecar};
pub use suites::{
    covariance_error, escape_report, escape_slope, green_mc_ladder, integrability_check, lengthbias_null_distance,
    lengthbias_options, twosided_oracle_comparison, EscapeLaw, EscapeReport, GreenMcOptions, GreenMcPoint, GreenMcReport,
    IntegrabilityReport, OracleComparison,
};
pub use tolerances::Tolerances;

use crate::error::{Result, SleError};
use crate::loewner::CONVENTION;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const EXPERIMENT_SCHEMA: &str = "exp-v1";
pub const REPORT_SCHEMA: &str = "suite-v1";
pub const OUTPUT_ROOT_VAR: &str = "SLE_OUTPUT_ROOT";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    GreenCovariance,
    GreenMc,
    Martingale,
    Drift,
    TwosidedOracle,
    Escape,
    ContentScaling,
    Lengthbias,
    Metric,
    Integrability,
    All,
}

impl Suite {
    pub const EACH: [Suite; 10] = [
        Suite::GreenCovariance,
        Suite::GreenMc,
        Suite::Martingale,
        Suite::Drift,
        Suite::TwosidedOracle,
        Suite::Escape,
        Suite::ContentScaling,
        Suite::Lengthbias,
        Suite::Metric,
        Suite::Integrability,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::GreenCovariance => "green-covariance",
            Suite::GreenMc => "green-mc",
            Suite::Martingale => "martingale",
            Suite::Drift => "drift",
            Suite::TwosidedOracle => "twosided-oracle",
            Suite::Escape => "escape",
            Suite::ContentScaling => "content-scaling",
            Suite::Lengthbias => "lengthbias",
            Suite::Metric => "metric",
            Suite::Integrability => "integrability",
            Suite::All => "all",
        }
    }

    /// κ values used when the experiment does not list its own.
    pub fn default_kappas(self) -> Vec<f64> {
        match self {
            Suite::GreenMc => vec![2.0, 8.0 / 3.0, 4.0],
            Suite::Escape => vec![8.0 / 3.0, 4.0],
            Suite::Drift => vec![1.0, 2.0, 8.0 / 3.0, 4.0],
            Suite::Integrability => vec![3.0, 4.0],
            _ => vec![8.0 / 3.0],
        }
    }
}

/// Monte Carlo sizes per suite. The defaults are pilot sizes that keep a
/// full run under an hour on one core; [`Budgets::full`] gives the sizes of
/// the acceptance criteria.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    /// Random Möbius maps (minimum 10).
    pub covariance_maps: usize,
    /// Chordal traces per κ (minimum 200).
    pub green_mc_n: usize,
    /// Martingale paths (minimum 200).
    pub martingale_n: usize,
    /// Random driver states (minimum 10).
    pub drift_states: usize,
    /// Two-sided samples and oracle survivors (minimum 100).
    pub oracle_n: usize,
    /// Samples per law and κ (minimum 200).
    pub escape_n: usize,
    /// Samples per law (minimum 100).
    pub scan_n: usize,
    /// Two-sided samples per mesh and chordal traces (minimum 100).
    pub lengthbias_n: usize,
    /// Trials per property (minimum 10).
    pub metric_trials: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            covariance_maps: 100,
            green_mc_n: 2000,
            martingale_n: 5000,
            drift_states: 1000,
            oracle_n: 1000,
            escape_n: 600,
            scan_n: 600,
            lengthbias_n: 1000,
            metric_trials: 1000,
        }
    }
}

impl Budgets {
    pub fn full() -> Self {
        Budgets { green_mc_n: 10_000, oracle_n: 2000, escape_n: 5000, scan_n: 3000, lengthbias_n: 2000, ..Budgets::default() }
    }

    fn check(&self) -> Result<()> {
        let mins = [
            ("covariance_maps", self.covariance_maps, 10),
            ("green_mc_n", self.green_mc_n, 200),
            ("martingale_n", self.martingale_n, 200),
            ("drift_states", self.drift_states, 10),
            ("oracle_n", self.oracle_n, 100),
            ("escape_n", self.escape_n, 200),
            ("scan_n", self.scan_n, 100),
            ("lengthbias_n", self.lengthbias_n, 100),
            ("metric_trials", self.metric_trials, 10),
        ];
        for (name, v, min) in mins {
            if v < min {
                return Err(SleError::Config(format!("budget {name} = {v} is below the minimum {min}")));
            }
        }
        Ok(())
    }
}

fn default_h() -> f64 {
    0.05
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    pub suites: Vec<Suite>,
    /// Overrides the per-suite κ lists.
    #[serde(default)]
    pub kappas: Option<Vec<f64>>,
    pub seed: u64,
    /// Bulk spatial step of the samplers.
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default)]
    pub budgets: Budgets,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl ExperimentConfig {
    pub fn new(suites: Vec<Suite>, seed: u64, output_dir: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            schema: EXPERIMENT_SCHEMA.into(),
            suites,
            kappas: None,
            seed,
            h: default_h(),
            budgets: Budgets::default(),
            output_dir: output_dir.into(),
            tolerances: Tolerances::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| SleError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != EXPERIMENT_SCHEMA {
            return Err(SleError::Config(format!("unsupported schema {:?}, expected {EXPERIMENT_SCHEMA:?}", self.schema)));
        }
        if self.suites.is_empty() {
            return Err(SleError::Config("no suites selected".into()));
        }
        if let Some(ks) = &self.kappas {
            if ks.is_empty() || ks.iter().any(|k| !(*k > 0.0 && *k <= 4.0)) {
                return Err(SleError::Config(format!("kappa values must lie in (0, 4], got {ks:?}")));
            }
        }
        if !(self.h > 0.0 && self.h <= 0.25) {
            return Err(SleError::Config(format!("spatial step h = {} must lie in (0, 0.25]", self.h)));
        }
        self.budgets.check()
    }

    pub fn kappas_for(&self, suite: Suite) -> Vec<f64> {
        self.kappas.clone().unwrap_or_else(|| suite.default_kappas())
    }

    /// Selected suites with `all` expanded, in canonical order.
    pub fn expanded_suites(&self) -> Vec<Suite> {
        if self.suites.contains(&Suite::All) {
            return Suite::EACH.to_vec();
        }
        Suite::EACH.iter().copied().filter(|s| self.suites.contains(s)).collect()
    }

    /// Output directory after applying `$SLE_OUTPUT_ROOT`.
    pub fn resolved_output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_ROOT_VAR) {
            Some(root) if self.output_dir.is_relative() => Path::new(&root).join(&self.output_dir),
            _ => self.output_dir.clone(),
        }
    }
}

/// Self-describing result of one suite: rerunnable from `config`.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub schema: String,
    pub suite: Suite,
    pub passed: bool,
    pub summary: String,
    pub version: String,
    pub convention: String,
    pub config: ExperimentConfig,
    pub metrics: serde_json::Value,
}

/// Extra file written next to a suite's JSON report.
pub struct Artifact {
    pub name: String,
    pub contents: Vec<u8>,
}

/// Run one suite without writing anything.
pub fn run_one(cfg: &ExperimentConfig, suite: Suite) -> Result<(SuiteReport, Vec<Artifact>)> {
    let outcome = suites::dispatch(cfg, suite)?;
    let report = SuiteReport {
        schema: REPORT_SCHEMA.into(),
        suite,
        passed: outcome.passed,
        summary: outcome.summary,
        version: env!("CARGO_PKG_VERSION").into(),
        convention: CONVENTION.into(),
        config: ExperimentConfig { suites: vec![suite], ..cfg.clone() },
        metrics: outcome.metrics,
    };
    Ok((report, outcome.artifacts))
}

/// Run every selected suite and write `<suite>.json` (plus any CSV or plot
/// script) into the output directory. Reports are deterministic given the
/// config: no timestamps or timings are recorded.
pub fn run_suite(cfg: &ExperimentConfig) -> Result<Vec<SuiteReport>> {
    cfg.validate()?;
    let dir = cfg.resolved_output_dir();
    std::fs::create_dir_all(&dir)
        .map_err(|e| SleError::Config(format!("cannot create output directory {}: {e}", dir.display())))?;
    let probe = dir.join(".write-probe");
    std::fs::write(&probe, b"")
        .and_then(|_| std::fs::remove_file(&probe))
        .map_err(|e| SleError::Config(format!("output directory {} is not writable: {e}", dir.display())))?;
    let mut reports = Vec::new();
    for suite in cfg.expanded_suites() {
        log::info!("running suite {}", suite.name());
        let (report, artifacts) = run_one(cfg, suite)?;
        let mut json = serde_json::to_string_pretty(&report)?;
        json.push('\n');
        std::fs::write(dir.join(format!("{}.json", suite.name())), json)?;
        for a in artifacts {
            std::fs::write(dir.join(&a.name), a.contents)?;
        }
        log::info!("{}: {}", suite.name(), if report.passed { "pass" } else { "FAIL" });
        reports.push(report);
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_and_defaults() {
        let cfg = ExperimentConfig::from_json(r#"{"schema":"exp-v1","suites":["drift","all"],"seed":3,"output_dir":"out"}"#).unwrap();
        assert_eq!(cfg.h, 0.05);
        assert_eq!(cfg.budgets, Budgets::default());
        assert_eq!(cfg.expanded_suites(), Suite::EACH.to_vec());
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
        let part = ExperimentConfig::from_json(
            r#"{"schema":"exp-v1","suites":["metric","drift"],"seed":3,"output_dir":"o","budgets":{"drift_states":20},"tolerances":{"drift_rel":1e-7}}"#,
        )
        .unwrap();
        assert_eq!(part.expanded_suites(), vec![Suite::Drift, Suite::Metric]);
        assert_eq!(part.budgets.drift_states, 20);
        assert_eq!(part.budgets.metric_trials, 1000);
        assert_eq!(part.tolerances.drift_rel, 1e-7);
    }

    #[test]
    fn invalid_configs_are_config_errors() {
        let bad = [
            r#"{"schema":"exp-v0","suites":["drift"],"seed":1,"output_dir":"o"}"#,
            r#"{"schema":"exp-v1","suites":[],"seed":1,"output_dir":"o"}"#,
            r#"{"schema":"exp-v1","suites":["drift"],"kappas":[5.0],"seed":1,"output_dir":"o"}"#,
            r#"{"schema":"exp-v1","suites":["drift"],"seed":1,"output_dir":"o","budgets":{"drift_states":1}}"#,
            r#"{"schema":"exp-v1","suites":["drift"],"seed":1,"output_dir":"o","h":0.0}"#,
            r#"{"schema":"exp-v1","suites":["nope"],"seed":1,"output_dir":"o"}"#,
            r#"{"schema":"exp-v1","suites":["drift"],"output_dir":"o"}"#,
            r#"{"schema":"exp-v1","suites":["drift"],"seed":1,"output_dir":"o","typo":1}"#,
        ];
        for text in bad {
            assert!(matches!(ExperimentConfig::from_json(text), Err(SleError::Config(_))), "{text}");
        }
    }

    #[test]
    fn reports_are_deterministic_and_self_describing() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::new(vec![Suite::GreenCovariance, Suite::Drift, Suite::Integrability], 5, dir.path().join("a"));
        cfg.budgets.drift_states = 50;
        let reports = run_suite(&cfg).unwrap();
        assert!(reports.iter().all(|r| r.passed));
        let read = |s: &str| std::fs::read(dir.path().join("a").join(format!("{s}.json"))).unwrap();
        let first: Vec<Vec<u8>> = ["green-covariance", "drift", "integrability"].iter().map(|s| read(s)).collect();
        run_suite(&cfg).unwrap();
        for (s, a) in ["green-covariance", "drift", "integrability"].iter().zip(first) {
            assert_eq!(a, read(s));
            let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
            assert_eq!(v["convention"], CONVENTION);
            assert_eq!(v["schema"], REPORT_SCHEMA);
            // the embedded config reruns exactly this suite
            let again = ExperimentConfig::from_json(&v["config"].to_string()).unwrap();
            assert_eq!(again.suites.len(), 1);
            let mut rerun = serde_json::to_string_pretty(&run_one(&again, again.suites[0]).unwrap().0).unwrap();
            rerun.push('\n');
            assert_eq!(rerun.as_bytes(), &a[..]);
        }
    }

    #[test]
    fn unwritable_output_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("f");
        std::fs::write(&file, b"x").unwrap();
        let cfg = ExperimentConfig::new(vec![Suite::Drift], 1, file.join("sub"));
        assert!(matches!(run_suite(&cfg), Err(SleError::Config(_))));
    }
}
