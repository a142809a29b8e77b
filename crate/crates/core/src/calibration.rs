//! Joint calibration of the conventions left open by the closed-form formulas: the constant in
//! `a = sqrt(1 + 4κ g(X,X))`, the curvature sign, the symplectic sign, and the scale of the
//! S² identification. Each is chosen by an independent oracle, then frozen.

use serde::{Deserialize, Serialize};

use crate::calabi::{CalabiStructure, NORM_CONSTANT};
use crate::error::{GeomError, Result};
use crate::fd::central_diff_richardson;
use crate::matkit::random_su_from;
use crate::moment::{calibrate_s2_kappa, hamiltonian_residual, sweep_points, S2Point, Scheme, S2_KAPPA};
use crate::projective::{
    curvature_fd, fs_metric, jmul, killing_field, linear_hamiltonian, FubiniStudy, CURVATURE_SIGN, OMEGA_SIGN,
};
use crate::report::CheckReport;
use crate::sampling::{random_point, random_tangent, rng_for};

/// The frozen constants, as recorded in every report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConstants {
    pub norm_constant: f64,
    pub curvature_sign: f64,
    pub omega_sign: f64,
    pub s2_kappa: f64,
}

pub const FROZEN: CalibrationConstants = CalibrationConstants {
    norm_constant: NORM_CONSTANT,
    curvature_sign: CURVATURE_SIGN,
    omega_sign: OMEGA_SIGN,
    s2_kappa: S2_KAPPA,
};

pub const NORM_CANDIDATES: [f64; 3] = [1.0, 0.5, 0.25];
pub const SIGN_CANDIDATES: [f64; 2] = [1.0, -1.0];

/// Residual of the Hamiltonian identity required of the accepted norm constant.
pub const HAMILTONIAN_TOL: f64 = 1e-5;
/// Residuals that the two sign oracles must reach.
pub const SIGN_TOL: f64 = 1e-5;
pub const CURVATURE_TOL: f64 = 1e-4;
pub const S2_TOL: f64 = 1e-10;

/// Per-candidate residuals of one calibration.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidates {
    pub values: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl Candidates {
    /// The unique candidate below `tol`, if exactly one is.
    pub fn unique(&self, tol: f64) -> Option<f64> {
        let ok: Vec<f64> =
            self.values.iter().zip(&self.residuals).filter(|(_, r)| **r <= tol).map(|(v, _)| *v).collect();
        (ok.len() == 1).then(|| ok[0])
    }

    fn describe(&self) -> String {
        self.values.iter().zip(&self.residuals).map(|(v, r)| format!("{v}:{r:.1e}")).collect::<Vec<_>>().join(" ")
    }
}

/// Worst Hamiltonian-identity residual over random points for each candidate norm constant.
pub fn norm_constant_candidates(n: usize, samples: usize, step: f64, seed: u64) -> Result<Candidates> {
    let mut rng = rng_for(seed, "calibration.norm_constant");
    let u = random_su_from(n + 1, &mut rng);
    let points = sweep_points(n, samples, &mut rng)?;
    let mut residuals = Vec::new();
    for k in NORM_CANDIDATES {
        let cs = CalabiStructure::with_norm_constant(k);
        let mut worst: f64 = 0.0;
        for p in &points {
            worst = worst.max(hamiltonian_residual(&cs, &u, p, step, Scheme::Richardson)?);
        }
        residuals.push(worst);
    }
    Ok(Candidates { values: NORM_CANDIDATES.to_vec(), residuals })
}

/// Closed-form curvature against the finite-difference commutator, for each sign (relative).
pub fn curvature_sign_candidates(n: usize, samples: usize, step: f64, seed: u64) -> Result<Candidates> {
    let mut rng = rng_for(seed, "calibration.curvature_sign");
    let mut residuals = vec![0.0f64; SIGN_CANDIDATES.len()];
    for _ in 0..samples {
        let a = random_point(n + 1, &mut rng)?;
        let (x, y, z) = (random_tangent(&a, &mut rng)?, random_tangent(&a, &mut rng)?, random_tangent(&a, &mut rng)?);
        let fd = curvature_fd(&x, &y, &z, step)?;
        for (r, s) in residuals.iter_mut().zip(SIGN_CANDIDATES) {
            let closed = FubiniStudy::with_curvature_sign(s).curvature(&x, &y, &z)?;
            *r = r.max(closed.sub(&fd)?.norm() / fd.norm().max(1.0));
        }
    }
    Ok(Candidates { values: SIGN_CANDIDATES.to_vec(), residuals })
}

/// `df_u(X)` against `±g(Jγ_u, X)`.
pub fn omega_sign_candidates(n: usize, samples: usize, step: f64, seed: u64) -> Result<Candidates> {
    let mut rng = rng_for(seed, "calibration.omega_sign");
    let mut residuals = vec![0.0f64; SIGN_CANDIDATES.len()];
    for _ in 0..samples {
        let u = random_su_from(n + 1, &mut rng);
        let a = random_point(n + 1, &mut rng)?;
        let x = random_tangent(&a, &mut rng)?;
        let df = central_diff_richardson(|t| linear_hamiltonian(&u, &a.retract(x.matrix(), t)?), step)?;
        let om = fs_metric(&jmul(&killing_field(&u, &a)?), &x)?;
        for (r, s) in residuals.iter_mut().zip(SIGN_CANDIDATES) {
            *r = r.max((df - s * om).abs());
        }
    }
    Ok(Candidates { values: SIGN_CANDIDATES.to_vec(), residuals })
}

/// Everything the joint calibration found.
#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationRun {
    pub norm_constant: Candidates,
    pub curvature_sign: Candidates,
    pub omega_sign: Candidates,
    pub s2_kappa: f64,
    pub s2_residual: f64,
}

impl CalibrationRun {
    /// The calibrated constants, or an error naming the first ambiguous one.
    pub fn constants(&self) -> Result<CalibrationConstants> {
        let pick = |c: &Candidates, tol: f64, what: &str| {
            c.unique(tol)
                .ok_or_else(|| GeomError::InvalidInput(format!("{what} calibration is not unique: {}", c.describe())))
        };
        Ok(CalibrationConstants {
            norm_constant: pick(&self.norm_constant, HAMILTONIAN_TOL, "norm constant")?,
            curvature_sign: pick(&self.curvature_sign, CURVATURE_TOL, "curvature sign")?,
            omega_sign: pick(&self.omega_sign, SIGN_TOL, "omega sign")?,
            s2_kappa: self.s2_kappa,
        })
    }

    /// Uniqueness of each constant, agreement with the frozen values, and the S² residual.
    pub fn reports(&self, seed: u64) -> Vec<CheckReport> {
        let one = |name: &str, c: &Candidates, tol: f64, frozen: f64| {
            let found = c.unique(tol);
            CheckReport::verdict(format!("calibration.{name}"), found == Some(frozen), c.describe()).with_seed(seed)
        };
        vec![
            one("norm_constant", &self.norm_constant, HAMILTONIAN_TOL, FROZEN.norm_constant),
            one("curvature_sign", &self.curvature_sign, CURVATURE_TOL, FROZEN.curvature_sign),
            one("omega_sign", &self.omega_sign, SIGN_TOL, FROZEN.omega_sign),
            CheckReport::new(
                "calibration.s2_kappa",
                self.s2_residual.max((self.s2_kappa - FROZEN.s2_kappa).abs()),
                S2_TOL,
            )
            .with_seed(seed)
            .with_notes(format!("kappa={}", self.s2_kappa)),
        ]
    }
}

pub fn run_calibration(samples: usize, seed: u64) -> Result<CalibrationRun> {
    let n = 2;
    let norm_constant = norm_constant_candidates(n, samples, 1e-4, seed)?;
    let curvature_sign = curvature_sign_candidates(n, samples, 1e-3, seed)?;
    let omega_sign = omega_sign_candidates(n, samples, 1e-4, seed)?;
    let mut rng = rng_for(seed, "calibration.s2");
    let pairs: Vec<([f64; 3], S2Point)> = (0..samples.max(10))
        .map(|_| {
            let a = random_point(2, &mut rng)?;
            let x = random_tangent(&a, &mut rng)?;
            let p = s2_vector(a.matrix().as_matrix());
            let e = s2_vector(x.matrix().as_matrix());
            let b = s2_vector(random_tangent(&a, &mut rng)?.matrix().as_matrix());
            Ok((b, S2Point::projected(p, e)?))
        })
        .collect::<Result<_>>()?;
    let (s2_kappa, s2_residual) = calibrate_s2_kappa(&CalabiStructure::default(), &pairs)?;
    Ok(CalibrationRun { norm_constant, curvature_sign, omega_sign, s2_kappa, s2_residual })
}

/// `v` with `M = (tr M)/2 + v·σ/2`-style Pauli coordinates: `v_k = Re tr(σ_k M)`.
fn s2_vector(m: &crate::matkit::ComplexMatrix) -> [f64; 3] {
    [(m[(0, 1)] + m[(1, 0)]).re, (m[(1, 0)] - m[(0, 1)]).im, (m[(0, 0)] - m[(1, 1)]).re]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibration_reproduces_frozen_constants() {
        let run = run_calibration(6, 42).unwrap();
        assert_eq!(run.constants().unwrap(), FROZEN);
        for r in run.reports(42) {
            assert!(r.passed(), "{}", r.line());
        }
    }

    #[test]
    fn rejected_candidates_fail_clearly() {
        let run = run_calibration(4, 1).unwrap();
        for (k, r) in run.norm_constant.values.iter().zip(&run.norm_constant.residuals) {
            if *k != NORM_CONSTANT {
                assert!(*r > 1e-2, "{k}: {r}");
            }
        }
        assert!(run.curvature_sign.residuals[1] > 1e-2);
        assert!(run.omega_sign.residuals[1] > 1e-2);
    }

    #[test]
    fn ambiguity_is_an_error() {
        let c = Candidates { values: vec![1.0, -1.0], residuals: vec![0.0, 0.0] };
        assert_eq!(c.unique(1e-5), None);
        let run = CalibrationRun {
            norm_constant: c.clone(),
            curvature_sign: c.clone(),
            omega_sign: c,
            s2_kappa: 1.0,
            s2_residual: 0.0,
        };
        assert!(run.constants().unwrap_err().to_string().contains("norm constant"));
    }

    #[test]
    fn constants_serialize_with_stable_keys() {
        let s = serde_json::to_string(&FROZEN).unwrap();
        assert_eq!(s, r#"{"norm_constant":0.25,"curvature_sign":1.0,"omega_sign":1.0,"s2_kappa":1.0}"#);
    }
}
