//! The hyper-Kähler moment map of an `su(n+1)` Killing field lifted to TCP^n, and the
//! finite-difference machinery that checks it is a harmonic morphism.

mod eigen;
mod s2;

pub use eigen::{
    check_fiber_rotation, cp_laplacian, eigenfunction_check, eigenfunction_estimate, fiber_rotation,
    fiber_rotation_pairing, EigenEstimate, FiberRotationPairing, PAIRING_FAILURE_FLOOR,
};
pub use s2::{calibrate_s2_kappa, s2_convert, s2_moment, su2_rotation, S2Point, S2_KAPPA};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::calabi::{
    lifted_frame, lifted_frame_norms, tt_retract, CalabiStructure, Quaternion, TBPoint, TTVec, TbChart,
};
use crate::chart::{laplacian_richardson, LaplacianEstimate};
use crate::error::{GeomError, Result};
use crate::fd::{observed_order, richardson, validate_step};
use crate::matkit::{inner, SuElement};
use crate::projective::{jmul, killing_cov_deriv, killing_field};
use crate::report::CheckReport;
use crate::sampling::{random_tb_point, rng_for};

/// `Γ(A, X) = γ_u(A)^h + (∇_X γ_u)^v`.
pub fn gamma_lift(u: &SuElement, p: &TBPoint) -> Result<TTVec> {
    let h = killing_field(u, p.a())?;
    let v = killing_cov_deriv(u, p.x())?;
    TTVec::new(p, h, v)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentValue {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
}

impl MomentValue {
    pub fn as_array(&self) -> [f64; 3] {
        [self.f1, self.f2, self.f3]
    }

    pub fn get(&self, j: usize) -> f64 {
        self.as_array()[j]
    }
}

/// `f₁ = g(iu, JX)`, `f₂ = a g(A, iu) - 2/(a+1) g(X², iu)`, `f₃ = g(iu, X)`, with `g`
/// the ambient `2 tr` on the non-tangent arguments.
pub fn moment_map(cs: &CalabiStructure, u: &SuElement, p: &TBPoint) -> Result<MomentValue> {
    if u.dim() != p.a().dim() {
        return Err(GeomError::DimensionMismatch { expected: p.a().dim(), found: u.dim() });
    }
    let iu = u.times_i();
    let ium = iu.as_matrix();
    let x = p.x().matrix().as_matrix();
    let k = cs.coefs(p);
    let f1 = inner(ium, jmul(p.x()).matrix().as_matrix());
    let f2 = k.a * inner(p.a().matrix().as_matrix(), ium) - 2.0 / (k.a + 1.0) * inner(&(x * x), ium);
    let f3 = inner(ium, x);
    Ok(MomentValue { f1, f2, f3 })
}

/// Structure paired with each moment component: `grad f_j = Q_j Γ`.
pub const PAIRING: [Quaternion; 3] = [Quaternion::I, Quaternion::J, Quaternion::K];

/// Finite-difference scheme for frame derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Central,
    Richardson,
}

/// Derivatives `E_a(f)` of a scalar function along `s ↦ tt_retract(P, E_a, s)`.
pub fn frame_derivatives<F>(p: &TBPoint, frame: &[TTVec], f: &F, step: f64, scheme: Scheme) -> Result<Vec<f64>>
where
    F: Fn(&TBPoint) -> Result<f64>,
{
    let cd = |e: &TTVec, h: f64| -> Result<f64> {
        let fp = f(&tt_retract(p, e, h)?)?;
        let fm = f(&tt_retract(p, e, -h)?)?;
        if !(fp.is_finite() && fm.is_finite()) {
            return Err(GeomError::NonFinite("function value"));
        }
        Ok((fp - fm) / (2.0 * h))
    };
    frame
        .iter()
        .map(|e| match scheme {
            Scheme::Central => cd(e, step),
            Scheme::Richardson => Ok(richardson(cd(e, step)?, cd(e, 0.5 * step)?)),
        })
        .collect()
}

/// Gradient assembled against the Gram matrix of an arbitrary frame.
pub fn gradient_in_frame<F>(
    cs: &CalabiStructure,
    p: &TBPoint,
    frame: &[TTVec],
    f: &F,
    step: f64,
    scheme: Scheme,
) -> Result<TTVec>
where
    F: Fn(&TBPoint) -> Result<f64>,
{
    let m = frame.len();
    let df = DVector::from_vec(frame_derivatives(p, frame, f, step, scheme)?);
    let gram = DMatrix::from_fn(m, m, |a, b| cs.metric_unchecked(&frame[a], &frame[b]));
    let coeffs = gram.cholesky().ok_or_else(|| GeomError::NotPositiveDefinite("frame Gram matrix".into()))?.solve(&df);
    Ok(TTVec::combination(p, coeffs.as_slice(), frame))
}

/// `grad f = Σ E_a(f) E_a / |E_a|²` over the lifted adapted frame, whose squared norms are
/// known in closed form.
pub fn gradient_with<F>(cs: &CalabiStructure, p: &TBPoint, f: &F, step: f64, scheme: Scheme) -> Result<TTVec>
where
    F: Fn(&TBPoint) -> Result<f64>,
{
    let frame = lifted_frame(p)?;
    let norms = lifted_frame_norms(cs, p);
    let df = frame_derivatives(p, &frame, f, step, scheme)?;
    let coeffs: Vec<f64> = df.iter().zip(&norms).map(|(d, n)| d / n).collect();
    Ok(TTVec::combination(p, &coeffs, &frame))
}

/// Richardson-extrapolated gradient.
pub fn gradient<F>(cs: &CalabiStructure, p: &TBPoint, f: &F, step: f64) -> Result<TTVec>
where
    F: Fn(&TBPoint) -> Result<f64>,
{
    validate_step(step)?;
    gradient_with(cs, p, f, step, Scheme::Richardson)
}

/// `|ξ|_G`.
pub fn g_norm(cs: &CalabiStructure, xi: &TTVec) -> f64 {
    cs.metric_unchecked(xi, xi).max(0.0).sqrt()
}

fn component(cs: CalabiStructure, u: SuElement, j: usize) -> impl Fn(&TBPoint) -> Result<f64> {
    move |q: &TBPoint| Ok(moment_map(&cs, &u, q)?.get(j))
}

/// `max_j |grad f_j - Q_j Γ|_G / |Γ|_G` (absolute when `Γ` vanishes).
pub fn hamiltonian_residual(
    cs: &CalabiStructure,
    u: &SuElement,
    p: &TBPoint,
    step: f64,
    scheme: Scheme,
) -> Result<f64> {
    let gamma = gamma_lift(u, p)?;
    let scale = g_norm(cs, &gamma);
    let scale = if scale > 1e-10 { scale } else { 1.0 };
    let mut worst: f64 = 0.0;
    for (j, q) in PAIRING.into_iter().enumerate() {
        let grad = gradient_with(cs, p, &component(*cs, u.clone(), j), step, scheme)?;
        let diff = grad.sub(&cs.structure(q, &gamma))?;
        worst = worst.max(g_norm(cs, &diff) / scale);
    }
    Ok(worst)
}

/// `grad f₁ = I*Γ`, `grad f₂ = J*Γ`, `grad f₃ = K*Γ` at `P`.
pub fn check_hamiltonian(cs: &CalabiStructure, u: &SuElement, p: &TBPoint, step: f64, tol: f64) -> Result<CheckReport> {
    validate_step(step)?;
    let r = hamiltonian_residual(cs, u, p, step, Scheme::Richardson)?;
    Ok(CheckReport::new("moment.hamiltonian", r, tol))
}

/// Cauchy–Riemann residual `max |df₂(I*ξ) + df₃(ξ)|` over the lifted frame.
pub fn cauchy_riemann_residual(cs: &CalabiStructure, u: &SuElement, p: &TBPoint, step: f64) -> Result<f64> {
    let frame = lifted_frame(p)?;
    let iframe: Vec<TTVec> = frame.iter().map(|e| cs.istar(e)).collect();
    let df2 = frame_derivatives(p, &iframe, &component(*cs, u.clone(), 1), step, Scheme::Richardson)?;
    let df3 = frame_derivatives(p, &frame, &component(*cs, u.clone(), 2), step, Scheme::Richardson)?;
    Ok(df2.iter().zip(&df3).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max))
}

/// Laplace–Beltrami of `f` at `P` through the lifted-frame chart.
pub fn laplace_beltrami<F>(cs: &CalabiStructure, p: &TBPoint, f: &F, step: f64) -> Result<LaplacianEstimate>
where
    F: Fn(&TBPoint) -> Result<f64>,
{
    validate_step(step)?;
    let chart = TbChart::new(*cs, p)?;
    let g = |t: &[f64]| f(&chart.point(t)?);
    laplacian_richardson(&chart, &g, step)
}

/// Step multiplier from the gradient step to the Laplacian step.
pub const LAPLACIAN_STEP_FACTOR: f64 = 10.0;

/// Coarse steps for order-of-accuracy estimates (large enough to sit above roundoff).
pub const ORDER_STEPS: (f64, f64) = (0.02, 0.01);

/// Per-point harmonic-morphism diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct MorphismSample {
    /// `|Δf_j| / |grad f_j|_G`, Richardson-extrapolated.
    pub laplacian: [f64; 3],
    /// `max_{jk} |Q_jk - λ²δ_jk| / λ²`.
    pub conformality: f64,
    /// `λ²`, the mean of the diagonal of `Q`.
    pub dilation: f64,
    /// Raw central-difference Laplacians at the two coarse order steps.
    pub laplacian_coarse: [f64; 3],
    pub laplacian_fine: [f64; 3],
}

pub fn morphism_sample(cs: &CalabiStructure, u: &SuElement, p: &TBPoint, step: f64) -> Result<MorphismSample> {
    let mut grads = Vec::with_capacity(3);
    let mut laplacian = [0.0; 3];
    let mut laplacian_coarse = [0.0; 3];
    let mut laplacian_fine = [0.0; 3];
    let chart = TbChart::new(*cs, p)?;
    for j in 0..3 {
        let f = component(*cs, u.clone(), j);
        let grad = gradient(cs, p, &f, step)?;
        let gn = g_norm(cs, &grad).max(1e-300);
        let g = |t: &[f64]| f(&chart.point(t)?);
        let lap = laplacian_richardson(&chart, &g, LAPLACIAN_STEP_FACTOR * step)?;
        laplacian[j] = lap.extrapolated.abs() / gn;
        laplacian_coarse[j] = crate::chart::laplacian_at_origin(&chart, &g, ORDER_STEPS.0)?.abs() / gn;
        laplacian_fine[j] = crate::chart::laplacian_at_origin(&chart, &g, ORDER_STEPS.1)?.abs() / gn;
        grads.push(grad);
    }
    let q = DMatrix::from_fn(3, 3, |j, k| cs.metric_unchecked(&grads[j], &grads[k]));
    let dilation = (q[(0, 0)] + q[(1, 1)] + q[(2, 2)]) / 3.0;
    let off = DMatrix::from_fn(3, 3, |j, k| q[(j, k)] - if j == k { dilation } else { 0.0 });
    let conformality = off.amax() / dilation.max(1e-300);
    Ok(MorphismSample { laplacian, conformality, dilation, laplacian_coarse, laplacian_fine })
}

/// Sampling window for `|X|` in the harmonic-morphism sweeps.
pub const SAMPLE_RADII: (f64, f64) = (0.2, 2.0);

/// Results of a sweep over random points.
#[derive(Clone, Debug, PartialEq)]
pub struct MorphismSweep {
    pub samples: Vec<MorphismSample>,
    pub hamiltonian: Vec<f64>,
    pub hamiltonian_coarse: Vec<f64>,
    pub hamiltonian_fine: Vec<f64>,
    pub cauchy_riemann: Vec<f64>,
}

impl MorphismSweep {
    pub fn max_laplacian(&self) -> f64 {
        crate::report::max_residual(self.samples.iter().flat_map(|s| s.laplacian))
    }

    pub fn max_conformality(&self) -> f64 {
        crate::report::max_residual(self.samples.iter().map(|s| s.conformality))
    }

    pub fn max_hamiltonian(&self) -> f64 {
        crate::report::max_residual(self.hamiltonian.iter().copied())
    }

    /// Order of the aggregated raw Laplacian residuals under step halving.
    pub fn laplacian_order(&self) -> f64 {
        let c: f64 = self.samples.iter().flat_map(|s| s.laplacian_coarse).sum();
        let f: f64 = self.samples.iter().flat_map(|s| s.laplacian_fine).sum();
        observed_order(c, f)
    }

    pub fn hamiltonian_order(&self) -> f64 {
        observed_order(self.hamiltonian_coarse.iter().sum(), self.hamiltonian_fine.iter().sum())
    }
}

/// A random `u ∈ su(n+1)` (unless given) and random points with `|X| ∈ SAMPLE_RADII`.
pub fn sweep_points<R: Rng + ?Sized>(n: usize, samples: usize, rng: &mut R) -> Result<Vec<TBPoint>> {
    (0..samples).map(|_| random_tb_point(n + 1, SAMPLE_RADII.0, SAMPLE_RADII.1, rng)).collect()
}

type PointResult = (MorphismSample, f64, f64, f64, f64);

pub fn morphism_sweep(cs: &CalabiStructure, u: &SuElement, points: &[TBPoint], step: f64) -> Result<MorphismSweep> {
    use rayon::prelude::*;
    let per_point: Vec<Result<PointResult>> = points
        .par_iter()
        .map(|p| {
            let s = morphism_sample(cs, u, p, step)?;
            let h = hamiltonian_residual(cs, u, p, step, Scheme::Richardson)?;
            let hc = hamiltonian_residual(cs, u, p, ORDER_STEPS.0, Scheme::Central)?;
            let hf = hamiltonian_residual(cs, u, p, ORDER_STEPS.1, Scheme::Central)?;
            let cr = cauchy_riemann_residual(cs, u, p, step)?;
            Ok((s, h, hc, hf, cr))
        })
        .collect();
    let mut out = MorphismSweep {
        samples: Vec::new(),
        hamiltonian: Vec::new(),
        hamiltonian_coarse: Vec::new(),
        hamiltonian_fine: Vec::new(),
        cauchy_riemann: Vec::new(),
    };
    for r in per_point {
        let (s, h, hc, hf, cr) = r?;
        out.samples.push(s);
        out.hamiltonian.push(h);
        out.hamiltonian_coarse.push(hc);
        out.hamiltonian_fine.push(hf);
        out.cauchy_riemann.push(cr);
    }
    Ok(out)
}

/// Harmonicity of each `f_j` and horizontal weak conformality of `(f₁, f₂, f₃)` on random
/// points of TCP^n.
pub fn check_harmonic_morphism(
    cs: &CalabiStructure,
    u: &SuElement,
    samples: usize,
    step: f64,
    tol: f64,
    seed: u64,
) -> Result<Vec<CheckReport>> {
    validate_step(step)?;
    let n = u.dim() - 1;
    let mut rng = rng_for(seed, "moment.harmonic_morphism");
    let points = sweep_points(n, samples, &mut rng)?;
    let sweep = morphism_sweep(cs, u, &points, step)?;
    let lambda_min = sweep.samples.iter().map(|s| s.dilation).fold(f64::INFINITY, f64::min);
    Ok(vec![
        CheckReport::new(format!("moment.harmonic.n{n}"), sweep.max_laplacian(), tol)
            .with_samples(samples)
            .with_seed(seed)
            .with_notes(format!("order={:.2}", sweep.laplacian_order())),
        CheckReport::new(format!("moment.conformality.n{n}"), sweep.max_conformality(), tol)
            .with_samples(samples)
            .with_seed(seed)
            .with_notes(format!("min dilation={lambda_min:.3e}")),
    ])
}

#[cfg(test)]
mod tests;
