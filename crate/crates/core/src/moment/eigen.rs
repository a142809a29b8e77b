use crate::calabi::{lift_v, lifted_frame, CalabiStructure, Quaternion, TBPoint, TTVec, TbChart};
use crate::chart::{laplacian_richardson, LaplacianEstimate, MetricChart};
use crate::error::{GeomError, Result};
use crate::fd::validate_step;
use crate::matkit::SuElement;
use crate::projective::{jmul, linear_hamiltonian, CpChart, FubiniStudy, ProjPoint};
use crate::report::CheckReport;
use crate::sampling::{random_point, rng_for};

use super::{frame_derivatives, laplace_beltrami, Scheme};

/// Laplace–Beltrami of a function on CP^n at `A`.
pub fn cp_laplacian<F>(a: &ProjPoint, f: &F, step: f64) -> Result<LaplacianEstimate>
where
    F: Fn(&ProjPoint) -> Result<f64>,
{
    validate_step(step)?;
    let chart = CpChart::new(a)?;
    let g = |t: &[f64]| f(&chart.point(t)?);
    laplacian_richardson(&chart, &g, step)
}

/// Least-squares eigenvalue of `Δf_u = -λ f_u` over sample points.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenEstimate {
    pub lambda: f64,
    /// `max |Δf + λf| / max |f|` over the samples.
    pub spread: f64,
    /// `s/n` from the traced curvature tensor.
    pub s_over_n: f64,
}

impl EigenEstimate {
    pub fn lambda_mismatch(&self) -> f64 {
        (self.lambda - self.s_over_n).abs() / self.s_over_n
    }
}

pub fn eigenfunction_estimate(
    fs: &FubiniStudy,
    u: &SuElement,
    points: &[ProjPoint],
    step: f64,
) -> Result<EigenEstimate> {
    if points.is_empty() {
        return Err(GeomError::InvalidInput("no sample points".into()));
    }
    let mut pairs = Vec::with_capacity(points.len());
    for a in points {
        let f = |q: &ProjPoint| linear_hamiltonian(u, q);
        pairs.push((f(a)?, cp_laplacian(a, &f, step)?.extrapolated));
    }
    let num: f64 = pairs.iter().map(|(f, l)| f * l).sum();
    let den: f64 = pairs.iter().map(|(f, _)| f * f).sum();
    let lambda = -num / den;
    let fmax = pairs.iter().map(|(f, _)| f.abs()).fold(0.0, f64::max);
    let spread = pairs.iter().map(|(f, l)| (l + lambda * f).abs()).fold(0.0, f64::max) / fmax;
    let n = points[0].n() as f64;
    let s_over_n = fs.scalar_curvature(&points[0])? / n;
    Ok(EigenEstimate { lambda, spread, s_over_n })
}

/// `Δf_u = -(s/n) f_u` on CP^n: ratio constancy and agreement with the traced curvature.
pub fn eigenfunction_check(
    fs: &FubiniStudy,
    u: &SuElement,
    samples: usize,
    step: f64,
    tol: f64,
    seed: u64,
) -> Result<Vec<CheckReport>> {
    let mut rng = rng_for(seed, "moment.eigenfunction");
    let points: Vec<ProjPoint> = (0..samples).map(|_| random_point(u.dim(), &mut rng)).collect::<Result<_>>()?;
    let e = eigenfunction_estimate(fs, u, &points, step)?;
    let n = u.dim() - 1;
    Ok(vec![
        CheckReport::new(format!("moment.eigenfunction_ratio.n{n}"), e.spread, tol)
            .with_samples(samples)
            .with_seed(seed)
            .with_notes(format!("lambda={:.6}", e.lambda)),
        CheckReport::new(format!("moment.eigenvalue_vs_curvature.n{n}"), e.lambda_mismatch(), tol)
            .with_samples(samples)
            .with_seed(seed)
            .with_notes(format!("lambda={:.6} s/n={:.6}", e.lambda, e.s_over_n)),
    ])
}

/// `(A, X) ↦ (JX)^v`.
pub fn fiber_rotation(p: &TBPoint) -> TTVec {
    lift_v(p, &jmul(p.x())).expect("same base")
}

/// Diagnostics for the fibre-rotation field `V = (JX)^v` against `J*` and `I*`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberRotationPairing {
    /// `max |G(∇̄_ξV, η) + G(∇̄_ηV, ξ)|` over the lifted frame.
    pub killing: f64,
    /// `max |dθ_Q|` for `θ_Q = G(QV, ·)`, for `Q = J*` and `I*`.
    pub closed_j: f64,
    pub closed_i: f64,
    /// `max |θ_J(E_a) - E_a(a)|`: `a = sqrt(1 + 4κ|X|²)` is a potential for `θ_J`.
    pub potential: f64,
    /// `Δa`, Richardson-extrapolated.
    pub laplacian_potential: f64,
}

/// `max_{a<b} |∂_a θ_b - ∂_b θ_a|` at the chart origin for `θ(ξ) = G(QV, ξ)`.
fn one_form_exterior(cs: &CalabiStructure, chart: &TbChart, which: Quaternion, s: f64) -> Result<f64> {
    let m = chart.dim();
    let theta = |t: &[f64]| -> Result<Vec<f64>> {
        let (q, vecs) = chart.point_and_coordinate_vectors(t)?;
        let qv = cs.structure(which, &fiber_rotation(&q));
        Ok(vecs.iter().map(|v| cs.metric_unchecked(&qv, v)).collect())
    };
    let mut dtheta = Vec::with_capacity(m);
    for a in 0..m {
        let mut tp = vec![0.0; m];
        let mut tm = vec![0.0; m];
        tp[a] = s;
        tm[a] = -s;
        let (p, q) = (theta(&tp)?, theta(&tm)?);
        dtheta.push(p.iter().zip(&q).map(|(x, y)| (x - y) / (2.0 * s)).collect::<Vec<f64>>());
    }
    let mut worst: f64 = 0.0;
    for (a, row) in dtheta.iter().enumerate() {
        for (b, col) in dtheta.iter().enumerate().skip(a + 1) {
            worst = worst.max((row[b] - col[a]).abs());
        }
    }
    Ok(worst)
}

pub fn fiber_rotation_pairing(cs: &CalabiStructure, p: &TBPoint, step: f64) -> Result<FiberRotationPairing> {
    validate_step(step)?;
    let frame = lifted_frame(p)?;
    let nb_step = step.min(1e-2);
    let nablas: Vec<TTVec> =
        frame.iter().map(|e| cs.nabla_bar_field(e, |q| Ok(fiber_rotation(q)), nb_step)).collect::<Result<_>>()?;
    let mut killing: f64 = 0.0;
    for (a, ea) in frame.iter().enumerate() {
        for (b, eb) in frame.iter().enumerate() {
            killing = killing.max((cs.metric_unchecked(&nablas[a], eb) + cs.metric_unchecked(&nablas[b], ea)).abs());
        }
    }
    let chart = TbChart::new(*cs, p)?;
    let closed_j = one_form_exterior(cs, &chart, Quaternion::J, step)?;
    let closed_i = one_form_exterior(cs, &chart, Quaternion::I, step)?;

    let a_fn = |q: &TBPoint| Ok(cs.coefs(q).a);
    let da = frame_derivatives(p, &frame, &a_fn, nb_step, Scheme::Richardson)?;
    let jv = cs.jstar(&fiber_rotation(p));
    let potential = frame.iter().zip(&da).map(|(e, d)| (cs.metric_unchecked(&jv, e) - d).abs()).fold(0.0, f64::max);
    let laplacian_potential =
        laplace_beltrami(cs, p, &a_fn, super::LAPLACIAN_STEP_FACTOR * step.min(1e-3))?.extrapolated;
    Ok(FiberRotationPairing { killing, closed_j, closed_i, potential, laplacian_potential })
}

/// Smallest `|dθ_I|` that counts as a genuine failure of the `I*` pairing.
pub const PAIRING_FAILURE_FLOOR: f64 = 1e-3;

/// `(JX)^v` is Killing, `J*(JX)^v` is the gradient of `a` (so `(JX)^v = -J* grad a`), and
/// `I*(JX)^v` is not a gradient field anywhere in the sample.
pub fn check_fiber_rotation(
    cs: &CalabiStructure,
    n: usize,
    samples: usize,
    step: f64,
    tol: f64,
    seed: u64,
) -> Result<Vec<CheckReport>> {
    let mut rng = rng_for(seed, "moment.fiber_rotation");
    let points = super::sweep_points(n, samples, &mut rng)?;
    let mut killing: f64 = 0.0;
    let mut exact_j: f64 = 0.0;
    let mut closed_i = f64::INFINITY;
    let mut lap = (f64::INFINITY, f64::NEG_INFINITY);
    for p in &points {
        let r = fiber_rotation_pairing(cs, p, step)?;
        killing = killing.max(r.killing);
        exact_j = exact_j.max(r.closed_j).max(r.potential);
        closed_i = closed_i.min(r.closed_i);
        lap = (lap.0.min(r.laplacian_potential), lap.1.max(r.laplacian_potential));
    }
    Ok(vec![
        CheckReport::new(format!("moment.fiber_rotation.killing.n{n}"), killing, tol)
            .with_samples(samples)
            .with_seed(seed),
        CheckReport::new(format!("moment.fiber_rotation.j_pairing.n{n}"), exact_j, tol)
            .with_samples(samples)
            .with_seed(seed)
            .with_notes(format!("potential a, laplacian in [{:.6}, {:.6}]", lap.0, lap.1)),
        CheckReport::verdict(
            format!("moment.fiber_rotation.i_pairing_fails.n{n}"),
            closed_i > PAIRING_FAILURE_FLOOR,
            format!("min |d theta_I| = {closed_i:.3e}"),
        )
        .with_samples(samples)
        .with_seed(seed),
    ])
}
