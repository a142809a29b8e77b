use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Indeterminate,
}

/// Outcome of one named verification.
///
/// `status == Pass` exactly when `max_error <= tolerance`, unless the check was
/// indeterminate (e.g. every sample sat on a critical point).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub status: Status,
    pub max_error: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub seed: u64,
    pub notes: String,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, max_error: f64, tolerance: f64) -> Self {
        let status = if max_error <= tolerance { Status::Pass } else { Status::Fail };
        CheckReport { name: name.into(), status, max_error, tolerance, samples: 1, seed: 0, notes: String::new() }
    }

    pub fn indeterminate(name: impl Into<String>, tolerance: f64, notes: impl Into<String>) -> Self {
        CheckReport {
            name: name.into(),
            status: Status::Indeterminate,
            max_error: f64::NAN,
            tolerance,
            samples: 0,
            seed: 0,
            notes: notes.into(),
        }
    }

    /// A check whose outcome is a boolean verdict rather than a residual.
    pub fn verdict(name: impl Into<String>, ok: bool, notes: impl Into<String>) -> Self {
        let mut r = CheckReport::new(name, if ok { 0.0 } else { 1.0 }, 0.5);
        r.notes = notes.into();
        r
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_notes(mut self, notes: impl Into<String>) -> Self {
        self.notes = notes.into();
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// One-line human summary.
    pub fn line(&self) -> String {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Indeterminate => "INDET",
        };
        format!(
            "[{tag}] {:<48} max_err={:.3e} tol={:.1e} samples={}{}",
            self.name,
            self.max_error,
            self.tolerance,
            self.samples,
            if self.notes.is_empty() { String::new() } else { format!("  ({})", self.notes) }
        )
    }
}

/// Max of a residual sequence; NaN propagates so that a broken sample fails the check.
pub fn max_residual<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, |m, x| if x.is_nan() || m.is_nan() { f64::NAN } else { m.max(x) })
}
