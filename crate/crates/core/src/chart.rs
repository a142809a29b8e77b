//! Coordinate charts and the Laplace–Beltrami operator at a chart origin.

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};
use crate::fd::richardson;

/// A local parametrization `t ∈ ℝ^m ↦ M` near `t = 0`, known through its pulled-back metric.
pub trait MetricChart {
    fn dim(&self) -> usize;

    /// The metric matrix `G_ab(t)`.
    fn metric(&self, t: &[f64]) -> Result<DMatrix<f64>>;
}

fn unit(m: usize, k: usize, h: f64) -> Vec<f64> {
    let mut e = vec![0.0; m];
    e[k] = h;
    e
}

fn plus(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Inverse of a symmetric positive-definite matrix via Cholesky.
pub fn spd_inverse(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if g.iter().any(|v| !v.is_finite()) {
        return Err(GeomError::NonFinite("metric matrix"));
    }
    let chol = nalgebra::Cholesky::new(g.clone())
        .ok_or_else(|| GeomError::NotPositiveDefinite(format!("{}x{} chart metric", g.nrows(), g.ncols())))?;
    let l = chol.l();
    let pivot = (0..l.nrows()).map(|i| l[(i, i)]).fold(f64::INFINITY, f64::min);
    if pivot < 1e-10 {
        return Err(GeomError::SingularMetric(pivot));
    }
    Ok(chol.inverse())
}

/// Central-difference gradient `∂_a f(0)`.
pub fn coordinate_gradient<F>(m: usize, f: &F, h: f64) -> Result<DVector<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut out = DVector::zeros(m);
    for a in 0..m {
        out[a] = (f(&unit(m, a, h))? - f(&unit(m, a, -h))?) / (2.0 * h);
    }
    Ok(out)
}

/// `Δf(0) = G^{ab}∂_a∂_b f - Γ^c ∂_c f` with
/// `Γ^c = G^{cd}(G^{ab}∂_a G_{bd} - ½ G^{ab}∂_d G_{ab})`, all by central differences at `h`.
pub fn laplacian_at_origin<C, F>(chart: &C, f: &F, h: f64) -> Result<f64>
where
    C: MetricChart + ?Sized,
    F: Fn(&[f64]) -> Result<f64>,
{
    let m = chart.dim();
    let zero = vec![0.0; m];
    let g0 = chart.metric(&zero)?;
    let ginv = spd_inverse(&g0)?;

    let mut dg = Vec::with_capacity(m);
    for c in 0..m {
        let gp = chart.metric(&unit(m, c, h))?;
        let gm = chart.metric(&unit(m, c, -h))?;
        dg.push((gp - gm) / (2.0 * h));
    }

    let f0 = f(&zero)?;
    let mut hess = DMatrix::zeros(m, m);
    let mut grad = DVector::zeros(m);
    let mut fp = vec![0.0; m];
    let mut fm = vec![0.0; m];
    for a in 0..m {
        fp[a] = f(&unit(m, a, h))?;
        fm[a] = f(&unit(m, a, -h))?;
        grad[a] = (fp[a] - fm[a]) / (2.0 * h);
        hess[(a, a)] = (fp[a] - 2.0 * f0 + fm[a]) / (h * h);
    }
    for a in 0..m {
        for b in (a + 1)..m {
            let ea = unit(m, a, h);
            let eb = unit(m, b, h);
            let nb = unit(m, b, -h);
            let na = unit(m, a, -h);
            let v =
                (f(&plus(&ea, &eb))? - f(&plus(&ea, &nb))? - f(&plus(&na, &eb))? + f(&plus(&na, &nb))?) / (4.0 * h * h);
            hess[(a, b)] = v;
            hess[(b, a)] = v;
        }
    }

    // w_d = G^{ab} ∂_a G_{bd} - ½ G^{ab} ∂_d G_{ab}
    let mut w = DVector::zeros(m);
    for d in 0..m {
        let mut s = 0.0;
        for a in 0..m {
            for b in 0..m {
                s += ginv[(a, b)] * (dg[a][(b, d)] - 0.5 * dg[d][(a, b)]);
            }
        }
        w[d] = s;
    }
    let gamma = &ginv * w;
    let second = ginv.component_mul(&hess).sum();
    let lap = second - gamma.dot(&grad);
    if !lap.is_finite() {
        return Err(GeomError::NonFinite("Laplacian"));
    }
    Ok(lap)
}

/// Laplacian estimates at `h`, `h/2`, and their Richardson combination.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaplacianEstimate {
    pub coarse: f64,
    pub fine: f64,
    pub extrapolated: f64,
}

pub fn laplacian_richardson<C, F>(chart: &C, f: &F, h: f64) -> Result<LaplacianEstimate>
where
    C: MetricChart + ?Sized,
    F: Fn(&[f64]) -> Result<f64>,
{
    let coarse = laplacian_at_origin(chart, f, h)?;
    let fine = laplacian_at_origin(chart, f, 0.5 * h)?;
    Ok(LaplacianEstimate { coarse, fine, extrapolated: richardson(coarse, fine) })
}

/// `|df|_G = sqrt(∂f·G⁻¹·∂f)` at the chart origin.
pub fn gradient_norm<C, F>(chart: &C, f: &F, h: f64) -> Result<f64>
where
    C: MetricChart + ?Sized,
    F: Fn(&[f64]) -> Result<f64>,
{
    let m = chart.dim();
    let ginv = spd_inverse(&chart.metric(&vec![0.0; m])?)?;
    let df = coordinate_gradient(m, f, h)?;
    Ok((df.transpose() * &ginv * &df)[(0, 0)].max(0.0).sqrt())
}

/// The identity chart on ℝ^m with a metric given as a function of position.
pub struct EuclideanChart<M> {
    pub origin: Vec<f64>,
    pub metric_fn: M,
}

impl<M> MetricChart for EuclideanChart<M>
where
    M: Fn(&[f64]) -> Result<DMatrix<f64>>,
{
    fn dim(&self) -> usize {
        self.origin.len()
    }

    fn metric(&self, t: &[f64]) -> Result<DMatrix<f64>> {
        (self.metric_fn)(&plus(&self.origin, t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_laplacian_of_quadratics() {
        let chart = EuclideanChart { origin: vec![0.3, -0.2, 0.5], metric_fn: |_: &[f64]| Ok(DMatrix::identity(3, 3)) };
        let f = |t: &[f64]| {
            let x: Vec<f64> = plus(&chart.origin, t);
            Ok(x[0] * x[0] + 2.0 * x[1] * x[1] - x[0] * x[2])
        };
        let l = laplacian_richardson(&chart, &f, 1e-2).unwrap();
        assert!((l.extrapolated - 6.0).abs() < 1e-8);
    }

    #[test]
    fn round_sphere_in_stereographic_coordinates() {
        // g = 4/(1+|x|²)² δ; the restriction of x₃ is (|x|²-1)/(|x|²+1), with Δ x₃ = -2 x₃.
        let metric = |x: &[f64]| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            Ok(DMatrix::identity(2, 2) * (4.0 / (1.0 + r2).powi(2)))
        };
        let chart = EuclideanChart { origin: vec![0.4, -0.7], metric_fn: metric };
        let f = |t: &[f64]| {
            let x = plus(&chart.origin, t);
            let r2 = x[0] * x[0] + x[1] * x[1];
            Ok((r2 - 1.0) / (r2 + 1.0))
        };
        let l = laplacian_richardson(&chart, &f, 1e-2).unwrap();
        let f0 = f(&[0.0, 0.0]).unwrap();
        assert!((l.extrapolated + 2.0 * f0).abs() < 1e-7, "{} {}", l.extrapolated, f0);
        assert!(gradient_norm(&chart, &f, 1e-4).unwrap() > 0.0);
    }

    #[test]
    fn singular_metric_is_reported() {
        let chart = EuclideanChart { origin: vec![0.0, 0.0], metric_fn: |_: &[f64]| Ok(DMatrix::zeros(2, 2)) };
        let f = |_: &[f64]| Ok(1.0);
        assert!(laplacian_at_origin(&chart, &f, 1e-2).is_err());
    }
}
