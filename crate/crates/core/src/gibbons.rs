//! The Gibbons–Hawking metric `g_a` on ℝ⁴, the quadratic map `φ: ℝ⁴ → ℝ³`, its circle
//! symmetry, and direct products of such setups.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::chart::{laplacian_richardson, spd_inverse, EuclideanChart, LaplacianEstimate};
use crate::error::{GeomError, Result};
use crate::fd::{observed_order, validate_step};
use crate::report::{max_residual, CheckReport};
use crate::sampling::rng_for;

/// `|x|` window for random samples; the origin is a critical point of `φ`.
pub const SAMPLE_RADII: (f64, f64) = (0.1, 2.0);

/// A point of ℝ⁴ read as `(z₁, z₂) = (x₁ + i x₂, x₃ + i x₄)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct R4Point {
    x: [f64; 4],
}

impl R4Point {
    pub fn new(x: [f64; 4]) -> Result<Self> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(GeomError::NonFinite("R4 point"));
        }
        Ok(R4Point { x })
    }

    pub fn coords(&self) -> [f64; 4] {
        self.x
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x.iter().map(|v| v * v).sum()
    }

    /// `ζ·(z₁, z₂) = (ζz₁, ζz₂)` with `ζ = e^{iθ}`.
    pub fn rotate(&self, theta: f64) -> R4Point {
        let (s, c) = theta.sin_cos();
        let [x1, x2, x3, x4] = self.x;
        R4Point { x: [c * x1 - s * x2, s * x1 + c * x2, c * x3 - s * x4, s * x3 + c * x4] }
    }
}

/// Generator of the circle action, also the coefficient vector of the 1-form in `g_a`.
pub fn eta(x: &[f64]) -> [f64; 4] {
    [-x[1], x[0], -x[3], x[2]]
}

/// `g_a = (a|x|² + 1) g₀ - a(a|x|² + 2)/(a|x|² + 1) η ⊗ η`. `a = 0` is the flat metric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GHMetric {
    a: f64,
}

impl GHMetric {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(GeomError::InvalidInput(format!("Gibbons-Hawking parameter a = {a} must be positive")));
        }
        Ok(GHMetric { a })
    }

    pub fn flat() -> Self {
        GHMetric { a: 0.0 }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn matrix(&self, x: &[f64]) -> DMatrix<f64> {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let s = self.a * r2 + 1.0;
        let w = self.a * (self.a * r2 + 2.0) / s;
        let e = DVector::from_column_slice(&eta(x));
        DMatrix::identity(4, 4) * s - (&e * e.transpose()) * w
    }

    /// The metric matrix at `x`, rejected unless positive definite.
    pub fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        if x.len() != 4 {
            return Err(GeomError::DimensionMismatch { expected: 4, found: x.len() });
        }
        let g = self.matrix(x);
        if nalgebra::Cholesky::new(g.clone()).is_none() {
            return Err(GeomError::NotPositiveDefinite(format!("g_a at a = {}", self.a)));
        }
        Ok(g)
    }
}

pub fn metric_ga(a: f64, x: &R4Point) -> Result<DMatrix<f64>> {
    GHMetric::new(a)?.metric(&x.x)
}

/// `(|z₁|² - |z₂|², Re 2z₁z̄₂, Im 2z₁z̄₂)`.
pub fn phi(x: &[f64]) -> [f64; 3] {
    let [x1, x2, x3, x4] = [x[0], x[1], x[2], x[3]];
    [x1 * x1 + x2 * x2 - x3 * x3 - x4 * x4, 2.0 * (x1 * x3 + x2 * x4), 2.0 * (x2 * x3 - x1 * x4)]
}

/// Rows are `dφ_k`.
pub fn phi_jacobian(x: &[f64]) -> DMatrix<f64> {
    let [x1, x2, x3, x4] = [x[0], x[1], x[2], x[3]];
    DMatrix::from_row_slice(
        3,
        4,
        &[
            2.0 * x1,
            2.0 * x2,
            -2.0 * x3,
            -2.0 * x4,
            2.0 * x3,
            2.0 * x4,
            2.0 * x1,
            2.0 * x2,
            -2.0 * x4,
            2.0 * x3,
            2.0 * x2,
            -2.0 * x1,
        ],
    )
}

/// `Δ_{g} f` at `x` in global coordinates.
pub fn lb_r4<F>(g: &GHMetric, f: &F, x: &R4Point, step: f64) -> Result<LaplacianEstimate>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    validate_step(step)?;
    let chart = EuclideanChart { origin: x.x.to_vec(), metric_fn: |y: &[f64]| g.metric(y) };
    let shifted = |t: &[f64]| {
        let y: Vec<f64> = x.x.iter().zip(t).map(|(a, b)| a + b).collect();
        f(&y)
    };
    laplacian_richardson(&chart, &shifted, step)
}

/// `Q = J G⁻¹ Jᵀ` for a Jacobian `J` (rows = differentials).
pub fn gram(metric: &DMatrix<f64>, jac: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let ginv = spd_inverse(metric)?;
    Ok(jac * ginv * jac.transpose())
}

/// `max_{jk} |Q_jk - λ²δ_jk| / λ²` with `λ²` the mean diagonal.
pub fn conformality_residual(q: &DMatrix<f64>) -> (f64, f64) {
    let m = q.nrows();
    let l2 = q.trace() / m as f64;
    let off = DMatrix::from_fn(m, m, |j, k| q[(j, k)] - if j == k { l2 } else { 0.0 });
    (off.amax() / l2.max(1e-300), l2)
}

/// Uniform direction, `|x|` uniform in `[r_min, r_max]`.
pub fn random_r4<R: Rng + ?Sized>(r_min: f64, r_max: f64, rng: &mut R) -> R4Point {
    loop {
        let v: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(&mut *rng));
        let n = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        if n > 1e-8 {
            let r = rng.random_range(r_min..=r_max);
            return R4Point { x: v.map(|t| t * r / n) };
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GhSample {
    /// `|Δφ_k| / |dφ_k|` (Richardson).
    pub laplacian: [f64; 3],
    pub laplacian_coarse: [f64; 3],
    pub laplacian_fine: [f64; 3],
    pub conformality: f64,
    pub dilation: f64,
}

pub fn gh_sample(g: &GHMetric, x: &R4Point, step: f64) -> Result<GhSample> {
    let metric = g.metric(&x.x)?;
    let q = gram(&metric, &phi_jacobian(&x.x))?;
    let (conformality, dilation) = conformality_residual(&q);
    let mut out =
        GhSample { laplacian: [0.0; 3], laplacian_coarse: [0.0; 3], laplacian_fine: [0.0; 3], conformality, dilation };
    for k in 0..3 {
        let f = |y: &[f64]| Ok(phi(y)[k]);
        let lap = lb_r4(g, &f, x, step)?;
        let scale = q[(k, k)].sqrt().max(1e-300);
        out.laplacian[k] = lap.extrapolated.abs() / scale;
        out.laplacian_coarse[k] = lap.coarse.abs() / scale;
        out.laplacian_fine[k] = lap.fine.abs() / scale;
    }
    Ok(out)
}

/// Harmonicity of `φ_k` and conformality of the gradient Gram matrix over random `x ≠ 0`.
pub fn check_gh_harmonic_morphism(
    g: &GHMetric,
    samples: usize,
    step: f64,
    tol: f64,
    seed: u64,
) -> Result<Vec<CheckReport>> {
    validate_step(step)?;
    let mut rng = rng_for(seed, "gibbons.harmonic_morphism");
    let points: Vec<R4Point> = (0..samples).map(|_| random_r4(SAMPLE_RADII.0, SAMPLE_RADII.1, &mut rng)).collect();
    let res: Vec<GhSample> = points.par_iter().map(|x| gh_sample(g, x, step)).collect::<Result<_>>()?;
    let lap = max_residual(res.iter().flat_map(|s| s.laplacian));
    let conf = max_residual(res.iter().map(|s| s.conformality));
    let c: f64 = res.iter().flat_map(|s| s.laplacian_coarse).sum();
    let f: f64 = res.iter().flat_map(|s| s.laplacian_fine).sum();
    let tag = format!("a{}", g.a);
    Ok(vec![
        CheckReport::new(format!("gibbons.harmonic.{tag}"), lap, tol)
            .with_samples(samples)
            .with_seed(seed)
            .with_notes(format!("raw order={:.2}", observed_order(c, f))),
        CheckReport::new(format!("gibbons.conformality.{tag}"), conf, tol).with_samples(samples).with_seed(seed),
    ])
}

/// `max |(L_η g)_ab|` at `x`, with `∂g` by central differences.
pub fn killing_residual(g: &GHMetric, x: &R4Point, step: f64) -> Result<f64> {
    let v = eta(&x.x);
    // ∂_a η^c
    let dv = DMatrix::from_row_slice(4, 4, &[0., -1., 0., 0., 1., 0., 0., 0., 0., 0., 0., -1., 0., 0., 1., 0.]);
    let g0 = g.metric(&x.x)?;
    let mut lie = DMatrix::zeros(4, 4);
    for (c, vc) in v.iter().enumerate() {
        let mut p = x.x;
        let mut m = x.x;
        p[c] += step;
        m[c] -= step;
        lie += (g.metric(&p)? - g.metric(&m)?) * (vc / (2.0 * step));
    }
    lie += dv.transpose() * &g0 + &g0 * &dv;
    Ok(lie.amax())
}

/// `φ(ζ·x) = φ(x)` at 1e-12 (relative to `|x|²`) and `L_η g_a = 0` at `tol`.
pub fn circle_invariance(g: &GHMetric, samples: usize, step: f64, tol: f64, seed: u64) -> Result<Vec<CheckReport>> {
    validate_step(step)?;
    let mut rng = rng_for(seed, "gibbons.circle");
    let mut inv: f64 = 0.0;
    let mut kill: f64 = 0.0;
    for _ in 0..samples {
        let x = random_r4(SAMPLE_RADII.0, SAMPLE_RADII.1, &mut rng);
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        let (a, b) = (phi(&x.x), phi(&x.rotate(theta).x));
        for k in 0..3 {
            inv = inv.max((a[k] - b[k]).abs() / x.norm_sqr());
        }
        kill = kill.max(killing_residual(g, &x, step)?);
    }
    let tag = format!("a{}", g.a);
    Ok(vec![
        CheckReport::new(format!("gibbons.circle_invariance.{tag}"), inv, 1e-12).with_samples(samples).with_seed(seed),
        CheckReport::new(format!("gibbons.circle_killing.{tag}"), kill, tol).with_samples(samples).with_seed(seed),
    ])
}

/// A direct product of Gibbons–Hawking setups: block-diagonal metric on ℝ^{4k} and the
/// concatenated `3k` components.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductSetup {
    factors: Vec<GHMetric>,
}

pub fn product_moment(factors: &[GHMetric]) -> Result<ProductSetup> {
    if factors.len() < 2 {
        return Err(GeomError::InvalidInput(format!("a product needs at least 2 factors, got {}", factors.len())));
    }
    Ok(ProductSetup { factors: factors.to_vec() })
}

impl ProductSetup {
    pub fn factors(&self) -> &[GHMetric] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        4 * self.factors.len()
    }

    pub fn components(&self) -> usize {
        3 * self.factors.len()
    }

    pub fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        if x.len() != self.dim() {
            return Err(GeomError::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        let mut g = DMatrix::zeros(self.dim(), self.dim());
        for (i, f) in self.factors.iter().enumerate() {
            g.view_mut((4 * i, 4 * i), (4, 4)).copy_from(&f.metric(&x[4 * i..4 * i + 4])?);
        }
        Ok(g)
    }

    pub fn map(&self, x: &[f64]) -> Vec<f64> {
        (0..self.factors.len()).flat_map(|i| phi(&x[4 * i..4 * i + 4])).collect()
    }

    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(self.components(), self.dim());
        for i in 0..self.factors.len() {
            j.view_mut((3 * i, 4 * i), (3, 4)).copy_from(&phi_jacobian(&x[4 * i..4 * i + 4]));
        }
        j
    }
}

/// Every component is harmonic; the Gram matrix is block-diagonal with a conformal block per
/// factor (different factors carry different dilations, so no global proportionality).
pub fn check_product(p: &ProductSetup, samples: usize, step: f64, tol: f64, seed: u64) -> Result<Vec<CheckReport>> {
    validate_step(step)?;
    let mut rng = rng_for(seed, "gibbons.product");
    let k = p.factors.len();
    let mut lap: f64 = 0.0;
    let mut cross: f64 = 0.0;
    let mut block: f64 = 0.0;
    for _ in 0..samples {
        let x: Vec<f64> = (0..k).flat_map(|_| random_r4(SAMPLE_RADII.0, SAMPLE_RADII.1, &mut rng).x).collect();
        let chart = EuclideanChart { origin: x.clone(), metric_fn: |y: &[f64]| p.metric(y) };
        let q = gram(&p.metric(&x)?, &p.jacobian(&x))?;
        for c in 0..p.components() {
            let f = |t: &[f64]| {
                let y: Vec<f64> = x.iter().zip(t).map(|(a, b)| a + b).collect();
                Ok(p.map(&y)[c])
            };
            let l = laplacian_richardson(&chart, &f, step)?;
            lap = lap.max(l.extrapolated.abs() / q[(c, c)].sqrt());
        }
        for i in 0..k {
            let b = q.view((3 * i, 3 * i), (3, 3)).into_owned();
            let (r, l2) = conformality_residual(&b);
            block = block.max(r);
            for j in 0..k {
                if i != j {
                    cross = cross.max(q.view((3 * i, 3 * j), (3, 3)).amax() / l2);
                }
            }
        }
    }
    let tag = format!("k{k}");
    Ok(vec![
        CheckReport::new(format!("gibbons.product.harmonic.{tag}"), lap, tol).with_samples(samples).with_seed(seed),
        CheckReport::new(format!("gibbons.product.block_conformality.{tag}"), block.max(cross), tol)
            .with_samples(samples)
            .with_seed(seed),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkit::seeded_rng;
    use proptest::prelude::*;

    fn pt(x: [f64; 4]) -> R4Point {
        R4Point::new(x).unwrap()
    }

    #[test]
    fn identity_at_origin() {
        for a in [0.5, 1.0, 2.0] {
            assert_eq!(metric_ga(a, &pt([0.0; 4])).unwrap(), DMatrix::identity(4, 4));
        }
        assert!(GHMetric::new(0.0).is_err());
        assert!(GHMetric::new(-1.0).is_err());
        assert!(R4Point::new([f64::NAN, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi(&[1.0, 0.0, 0.0, 0.0]), [1.0, 0.0, 0.0]);
        assert_eq!(phi(&[0.0, 0.0, 1.0, 0.0]), [-1.0, 0.0, 0.0]);
        assert_eq!(phi(&[1.0, 0.0, 1.0, 0.0]), [0.0, 2.0, 0.0]);
    }

    #[test]
    fn jacobian_matches_differences() {
        let x = [0.3, -0.7, 1.1, 0.2];
        let j = phi_jacobian(&x);
        for c in 0..4 {
            let mut p = x;
            let mut m = x;
            p[c] += 1e-6;
            m[c] -= 1e-6;
            for k in 0..3 {
                assert!(((phi(&p)[k] - phi(&m)[k]) / 2e-6 - j[(k, c)]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn flat_control() {
        for r in check_gh_harmonic_morphism(&GHMetric::flat(), 20, 1e-3, 1e-8, 3).unwrap() {
            assert!(r.passed(), "{}", r.line());
        }
        let x = pt([0.4, 0.1, -0.3, 0.8]);
        let lap = lb_r4(&GHMetric::flat(), &|y: &[f64]| Ok(y[0]), &x, 1e-2).unwrap();
        assert!(lap.extrapolated.abs() < 1e-12);
    }

    #[test]
    fn small_a_tends_to_flat() {
        let x = pt([0.4, 0.1, -0.3, 0.8]);
        let f = |y: &[f64]| Ok(y[0] * y[0]);
        let flat = lb_r4(&GHMetric::flat(), &f, &x, 1e-2).unwrap().extrapolated;
        assert!((flat - 2.0).abs() < 1e-9);
        let small = lb_r4(&GHMetric::new(1e-6).unwrap(), &f, &x, 1e-2).unwrap().extrapolated;
        assert!((small - flat).abs() < 1e-5);
    }

    #[test]
    fn harmonic_morphism_for_several_a() {
        for a in [0.5, 1.0, 2.0] {
            let g = GHMetric::new(a).unwrap();
            for r in check_gh_harmonic_morphism(&g, 50, 1e-3, 1e-4, 7).unwrap() {
                assert!(r.passed(), "{}", r.line());
            }
        }
    }

    #[test]
    fn laplacian_converges_at_second_order() {
        let g = GHMetric::new(1.0).unwrap();
        let x = pt([0.5, -0.4, 0.9, 0.3]);
        let f = |y: &[f64]| Ok(phi(y)[1]);
        let c = lb_r4(&g, &f, &x, 0.04).unwrap().coarse.abs();
        let fi = lb_r4(&g, &f, &x, 0.02).unwrap().coarse.abs();
        assert!(observed_order(c, fi) > 1.8, "{}", observed_order(c, fi));
    }

    #[test]
    fn non_moment_function_is_not_harmonic() {
        let g = GHMetric::new(1.0).unwrap();
        let x = pt([0.5, -0.4, 0.9, 0.3]);
        let lap = lb_r4(&g, &|y: &[f64]| Ok(y[0] * y[0]), &x, 1e-2).unwrap().extrapolated;
        assert!(lap.abs() > 1e-2);
    }

    #[test]
    fn origin_is_critical() {
        assert_eq!(phi_jacobian(&[0.0; 4]).amax(), 0.0);
    }

    #[test]
    fn circle_symmetry() {
        assert_eq!(pt([0.1, 0.2, 0.3, 0.4]).rotate(0.0), pt([0.1, 0.2, 0.3, 0.4]));
        for a in [0.5, 1.0, 2.0] {
            for r in circle_invariance(&GHMetric::new(a).unwrap(), 20, 1e-4, 1e-5, 11).unwrap() {
                assert!(r.passed(), "{}", r.line());
            }
        }
    }

    #[test]
    fn non_generator_is_not_killing() {
        // ∂₁: g_a is U(2)-invariant but not translation-invariant
        let g = GHMetric::new(1.0).unwrap();
        let x = pt([0.5, -0.4, 0.9, 0.3]);
        let h = 1e-4;
        let v = [1.0, 0.0, 0.0, 0.0];
        let mut lie = DMatrix::<f64>::zeros(4, 4);
        for (c, vc) in v.iter().enumerate() {
            let mut p = x.x;
            let mut m = x.x;
            p[c] += h;
            m[c] -= h;
            lie += (g.metric(&p).unwrap() - g.metric(&m).unwrap()) * (vc / (2.0 * h));
        }
        assert!(lie.amax() > 1e-2);
        assert!(killing_residual(&g, &x, h).unwrap() < 1e-6);
    }

    #[test]
    fn products() {
        assert!(product_moment(&[]).is_err());
        assert!(product_moment(&[GHMetric::flat()]).is_err());
        let p = product_moment(&[GHMetric::new(1.0).unwrap(), GHMetric::new(2.0).unwrap()]).unwrap();
        assert_eq!((p.dim(), p.components()), (8, 6));
        for r in check_product(&p, 5, 1e-3, 1e-4, 2).unwrap() {
            assert!(r.passed(), "{}", r.line());
        }
        let q = product_moment(&[GHMetric::new(1.0).unwrap(), GHMetric::flat()]).unwrap();
        for r in check_product(&q, 5, 1e-3, 1e-4, 2).unwrap() {
            assert!(r.passed(), "{}", r.line());
        }
        // the full 6×6 Gram matrix is not a multiple of the identity
        let mut rng = seeded_rng(5);
        let x: Vec<f64> = (0..2).flat_map(|_| random_r4(0.1, 2.0, &mut rng).x).collect();
        let gq = gram(&p.metric(&x).unwrap(), &p.jacobian(&x)).unwrap();
        assert!(conformality_residual(&gq).0 > 1e-3);
    }

    proptest! {
        #[test]
        fn determinant_and_positivity(a in 0.01f64..5.0, x in prop::array::uniform4(-3.0f64..3.0)) {
            let g = GHMetric::new(a).unwrap();
            let m = g.metric(&x).unwrap();
            let r2: f64 = x.iter().map(|v| v * v).sum();
            let want = (a * r2 + 1.0).powi(2);
            prop_assert!((m.determinant() - want).abs() <= 1e-9 * want);
            let e = DVector::from_column_slice(&eta(&x));
            let ee = (e.transpose() * &m * &e)[(0, 0)];
            let s = a * r2 + 1.0;
            let closed = s * r2 - a * (a * r2 + 2.0) * r2 * r2 / s;
            prop_assert!((ee - closed).abs() <= 1e-9 * (1.0 + closed.abs()));
            if r2 > 1e-6 {
                prop_assert!(ee > 0.0);
            }
            prop_assert!((m.clone() - m.transpose()).amax() == 0.0);
        }
    }
}
