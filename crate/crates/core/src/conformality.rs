//! Gram-matrix tests for horizontal weak conformality of torus moment maps on CP^n, and
//! isotropy of torus orbits.

use nalgebra::DMatrix;

use crate::error::{GeomError, Result};
use crate::fd::{central_diff_richardson, validate_step};
use crate::matkit::SuElement;
use crate::projective::{fs_metric, killing_field, linear_hamiltonian, omega, ProjPoint, TangentVec};
use crate::report::CheckReport;
use crate::sampling::{random_point, random_tangent, rng_for};

/// Largest `‖[u_i, u_j]‖` accepted for a torus.
pub const COMMUTATOR_TOL: f64 = 1e-12;
/// Normalized Frobenius distance below which two Gram matrices count as proportional.
pub const PROPORTIONALITY_TOL: f64 = 1e-8;
/// Frobenius norm below which a Gram matrix is treated as a fixed point.
pub const ZERO_GRAM: f64 = 1e-12;

/// Commuting generators of a torus acting on CP^n.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionSpec {
    n: usize,
    generators: Vec<SuElement>,
}

impl ActionSpec {
    pub fn new(n: usize, generators: Vec<SuElement>) -> Result<Self> {
        if n < 1 {
            return Err(GeomError::DimensionTooSmall(n));
        }
        if generators.is_empty() {
            return Err(GeomError::InvalidInput("an action needs at least one generator".into()));
        }
        for (i, u) in generators.iter().enumerate() {
            if u.dim() != n + 1 {
                return Err(GeomError::DimensionMismatch { expected: n + 1, found: u.dim() });
            }
            for (j, v) in generators.iter().enumerate().skip(i + 1) {
                let c = u.commutator_norm(v);
                if c > COMMUTATOR_TOL {
                    return Err(GeomError::InvalidInput(format!(
                        "generators {i} and {j} do not commute: |[u_{i}, u_{j}]| = {c:e}"
                    )));
                }
            }
        }
        Ok(ActionSpec { n, generators })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[SuElement] {
        &self.generators
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    fn fields(&self, a: &ProjPoint) -> Result<Vec<TangentVec>> {
        self.check_point(a)?;
        self.generators.iter().map(|u| killing_field(u, a)).collect()
    }

    fn check_point(&self, a: &ProjPoint) -> Result<()> {
        if a.dim() != self.n + 1 {
            return Err(GeomError::DimensionMismatch { expected: self.n + 1, found: a.dim() });
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct GramSample {
    pub point: ProjPoint,
    pub gram: DMatrix<f64>,
}

/// `g(V_i, V_j)` at `A`.
pub fn gram_matrix(spec: &ActionSpec, a: &ProjPoint) -> Result<GramSample> {
    let v = spec.fields(a)?;
    let k = v.len();
    let mut gram = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let g = fs_metric(&v[i], &v[j])?;
            gram[(i, j)] = g;
            gram[(j, i)] = g;
        }
    }
    Ok(GramSample { point: a.clone(), gram })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Proportionality {
    /// All nonzero Grams are multiples of `h` (unit Frobenius norm).
    Proportional { h: DMatrix<f64> },
    /// Indices of the first non-proportional pair, and their normalized distance.
    Witness { first: usize, second: usize, distance: f64 },
    /// Fewer than two samples with nonzero Gram.
    Indeterminate,
}

impl Proportionality {
    pub fn verdict(&self) -> Option<bool> {
        match self {
            Proportionality::Proportional { .. } => Some(true),
            Proportionality::Witness { .. } => Some(false),
            Proportionality::Indeterminate => None,
        }
    }
}

fn normalized(m: &DMatrix<f64>) -> DMatrix<f64> {
    m / m.norm()
}

/// Is there one `h` with `gram(x) = Λ(x) h` on every sample with nonzero Gram?
pub fn proportionality_test(samples: &[GramSample], tol: f64) -> Proportionality {
    let live: Vec<(usize, DMatrix<f64>)> = samples
        .iter()
        .enumerate()
        .filter(|(_, s)| s.gram.norm() > ZERO_GRAM)
        .map(|(i, s)| (i, normalized(&s.gram)))
        .collect();
    if live.len() < 2 {
        return Proportionality::Indeterminate;
    }
    for (x, (i, gi)) in live.iter().enumerate() {
        for (j, gj) in &live[x + 1..] {
            let d = (gi - gj).norm().min((gi + gj).norm());
            if d > tol {
                return Proportionality::Witness { first: *i, second: *j, distance: d };
            }
        }
    }
    Proportionality::Proportional { h: live[0].1.clone() }
}

/// Gram matrices at `samples` random points.
pub fn gram_sweep(spec: &ActionSpec, samples: usize, seed: u64) -> Result<Vec<GramSample>> {
    let mut rng = rng_for(seed, "conformality.gram");
    (0..samples).map(|_| gram_matrix(spec, &random_point(spec.n + 1, &mut rng)?)).collect()
}

/// Horizontal weak conformality of the moment map, as a report.
pub fn check_conformality(spec: &ActionSpec, samples: usize, seed: u64) -> Result<CheckReport> {
    let grams = gram_sweep(spec, samples, seed)?;
    let name = format!("conformality.torus.k{}.n{}", spec.rank(), spec.n);
    let r = match proportionality_test(&grams, PROPORTIONALITY_TOL) {
        Proportionality::Proportional { .. } => CheckReport::verdict(name, true, "all Gram matrices proportional"),
        Proportionality::Witness { first, second, distance } => {
            CheckReport::verdict(name, false, format!("witness samples {first} and {second}, distance {distance:.3e}"))
        }
        Proportionality::Indeterminate => {
            CheckReport::indeterminate(name, PROPORTIONALITY_TOL, "fewer than two nontrivial orbits")
        }
    };
    Ok(r.with_samples(samples).with_seed(seed))
}

/// `φ(A) = (f_{u_1}(A), …, f_{u_k}(A))`.
pub fn moment_map_cpn(spec: &ActionSpec, a: &ProjPoint) -> Result<Vec<f64>> {
    spec.check_point(a)?;
    spec.generators.iter().map(|u| linear_hamiltonian(u, a)).collect()
}

/// `max |dφ_i(X) - ω(V_i, X)|` over random tangent vectors at `A`.
pub fn moment_differential_residual(spec: &ActionSpec, a: &ProjPoint, step: f64, seed: u64) -> Result<f64> {
    validate_step(step)?;
    let mut rng = rng_for(seed, "conformality.dphi");
    let v = spec.fields(a)?;
    let mut worst: f64 = 0.0;
    for _ in 0..4 {
        let x = random_tangent(a, &mut rng)?;
        for (u, vi) in spec.generators.iter().zip(&v) {
            let d = central_diff_richardson(|t| linear_hamiltonian(u, &a.retract(x.matrix(), t)?), step)?;
            worst = worst.max((d - omega(vi, &x)?).abs());
        }
    }
    Ok(worst)
}

/// `ω(V_i, V_j) = 0` at random points; the orbit directions lie in `ker dφ`.
pub fn isotropy_check(spec: &ActionSpec, samples: usize, tol: f64, seed: u64) -> Result<CheckReport> {
    let mut rng = rng_for(seed, "conformality.isotropy");
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let v = spec.fields(&random_point(spec.n + 1, &mut rng)?)?;
        for vi in &v {
            for vj in &v {
                worst = worst.max(omega(vi, vj)?.abs());
            }
        }
    }
    Ok(CheckReport::new(format!("conformality.isotropy.k{}.n{}", spec.rank(), spec.n), worst, tol)
        .with_samples(samples)
        .with_seed(seed))
}
