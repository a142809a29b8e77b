//! Suite orchestration for the `hkm` binary: configuration, check execution and the
//! deterministic JSON report.

pub mod plot;
pub mod suites;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use hkm_core::calibration::{CalibrationConstants, FROZEN};
use hkm_core::io::KillingSpec;
use hkm_core::{CheckReport, GeomError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Projective,
    Calabi,
    Moment,
    Gibbons,
    Conformality,
    Calibration,
}

impl Suite {
    pub const ALL: [Suite; 6] =
        [Suite::Projective, Suite::Calabi, Suite::Moment, Suite::Gibbons, Suite::Conformality, Suite::Calibration];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Projective => "projective",
            Suite::Calabi => "calabi",
            Suite::Moment => "moment",
            Suite::Gibbons => "gibbons",
            Suite::Conformality => "conformality",
            Suite::Calibration => "calibration",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| format!("unknown suite '{s}'"))
    }
}

/// Everything a run depends on. Identical configs give identical reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub step: f64,
    /// Overrides the pinned tolerance of every finite-difference check.
    pub tol: Option<f64>,
    pub suites: Vec<Suite>,
    pub killing_spec: Option<PathBuf>,
    pub action_spec: Option<PathBuf>,
    pub gh_a: Option<f64>,
    /// The parsed Killing field, echoed in the report when a spec file is given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub killing_field: Option<KillingSpec>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            n: 1,
            samples: 20,
            seed: 42,
            step: 1e-4,
            tol: None,
            suites: Suite::ALL.to_vec(),
            killing_spec: None,
            action_spec: None,
            gh_a: None,
            killing_field: None,
        }
    }
}

/// Configuration and input errors; these map to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

impl SuiteConfig {
    pub fn validate(&self) -> Result<(), UsageError> {
        let bad = |m: String| Err(UsageError(m));
        if self.n < 1 {
            return bad("--n must be at least 1".into());
        }
        if self.samples < 1 {
            return bad("--samples must be at least 1".into());
        }
        if !(self.step > 0.0 && self.step < 0.1) {
            return bad(format!("--step {} must lie in (0, 0.1)", self.step));
        }
        if let Some(t) = self.tol {
            if !(t >= 0.0 && t.is_finite()) {
                return bad(format!("--tol {t} must be finite and non-negative"));
            }
        }
        if let Some(a) = self.gh_a {
            if !(a > 0.0 && a.is_finite()) {
                return bad(format!("--a {a} must be positive"));
            }
        }
        Ok(())
    }

    /// The tolerance for a finite-difference check whose pinned value is `default`.
    pub fn fd_tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub config: SuiteConfig,
    pub checks: Vec<CheckReport>,
    pub calibration: CalibrationConstants,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed())
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// A failure while running: bad input (exit 2) or a numerical error inside a suite (exit 1).
#[derive(Debug)]
pub enum RunError {
    Usage(UsageError),
    Geometry(GeomError),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Usage(e) => write!(f, "usage: {e}"),
            RunError::Geometry(e) => write!(f, "error: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<UsageError> for RunError {
    fn from(e: UsageError) -> Self {
        RunError::Usage(e)
    }
}

impl From<GeomError> for RunError {
    fn from(e: GeomError) -> Self {
        RunError::Geometry(e)
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) => 2,
            RunError::Geometry(_) => 1,
        }
    }
}

/// Runs the selected suites; checks are sorted by name.
pub fn run(config: &SuiteConfig) -> Result<Report, RunError> {
    config.validate()?;
    let mut config = config.clone();
    if config.killing_spec.is_some() {
        let u = suites::killing_generator(&config)?;
        config.killing_field = Some(KillingSpec::from_element(&u));
    }
    let config = &config;
    let mut suites = config.suites.clone();
    suites.sort();
    suites.dedup();
    let mut checks = Vec::new();
    for s in suites {
        checks.extend(suites::run_suite(s, config)?);
    }
    checks.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(Report { config: config.clone(), checks, calibration: FROZEN })
}

/// Caps the global thread pool from `HKM_THREADS`, if set.
pub fn init_threads() -> Result<(), UsageError> {
    if let Ok(v) = std::env::var("HKM_THREADS") {
        let k: usize = v.parse().map_err(|_| UsageError(format!("HKM_THREADS={v} is not a positive integer")))?;
        if k == 0 {
            return Err(UsageError("HKM_THREADS must be positive".into()));
        }
        // a second initialization is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    Ok(())
}
