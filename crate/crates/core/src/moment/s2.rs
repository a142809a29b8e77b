use num_complex::Complex64;

use super::{moment_map, MomentValue};
use crate::calabi::{CalabiStructure, TBPoint};
use crate::error::{GeomError, Result};
use crate::matkit::{c, ComplexMatrix, Hermitian, SuElement, I};
use crate::projective::{ProjPoint, TangentVec};

/// Calibrated scale in `X = κ (e·σ)/2`.
pub const S2_KAPPA: f64 = 1.0;

/// `(p, e) ∈ TS²` with `|p| = 1` and `p·e = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct S2Point {
    p: [f64; 3],
    e: [f64; 3],
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

impl S2Point {
    pub fn new(p: [f64; 3], e: [f64; 3]) -> Result<Self> {
        if (dot(&p, &p).sqrt() - 1.0).abs() > 1e-12 {
            return Err(GeomError::InvalidInput(format!("|p| = {} is not 1", dot(&p, &p).sqrt())));
        }
        if dot(&p, &e).abs() > 1e-12 {
            return Err(GeomError::InvalidInput(format!("p·e = {:e} is not 0", dot(&p, &e))));
        }
        Ok(S2Point { p, e })
    }

    /// Normalizes `p` and removes the normal part of `e`.
    pub fn projected(p: [f64; 3], e: [f64; 3]) -> Result<Self> {
        let np = dot(&p, &p).sqrt();
        if np == 0.0 || !np.is_finite() {
            return Err(GeomError::ZeroVector);
        }
        let p = [p[0] / np, p[1] / np, p[2] / np];
        let s = dot(&p, &e);
        let e = [e[0] - s * p[0], e[1] - s * p[1], e[2] - s * p[2]];
        Ok(S2Point { p, e })
    }

    pub fn p(&self) -> [f64; 3] {
        self.p
    }

    pub fn e(&self) -> [f64; 3] {
        self.e
    }
}

/// `v·σ` for the Pauli triple.
fn pauli_dot(v: &[f64; 3]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(0, 0)] = c(v[2]);
    m[(1, 1)] = c(-v[2]);
    m[(0, 1)] = Complex64::new(v[0], -v[1]);
    m[(1, 0)] = Complex64::new(v[0], v[1]);
    m
}

/// `A = (I + p·σ)/2`, `X = κ (e·σ)/2`.
pub fn s2_convert_with(q: &S2Point, kappa: f64) -> TBPoint {
    let a = (ComplexMatrix::identity(2, 2) + pauli_dot(&q.p)) * c(0.5);
    let a = ProjPoint::from_projector_unchecked(Hermitian::symmetrize_square(a));
    let x = Hermitian::symmetrize_square(pauli_dot(&q.e) * c(0.5 * kappa));
    TBPoint::from_tangent(TangentVec::unchecked(&a, x))
}

pub fn s2_convert(q: &S2Point) -> TBPoint {
    s2_convert_with(q, S2_KAPPA)
}

/// `u_b = -(i/2) b·σ`, generating rotation about `b`.
pub fn su2_rotation(b: &[f64; 3]) -> SuElement {
    SuElement::new(pauli_dot(b) * (-0.5 * I), 1e-14).expect("traceless anti-Hermitian by construction")
}

/// `f₁ = b·(p × e)`, `f₂ = sqrt(1 + |e|²) b·p`, `f₃ = b·e`.
pub fn s2_moment(b: &[f64; 3], q: &S2Point) -> MomentValue {
    MomentValue { f1: dot(b, &cross(&q.p, &q.e)), f2: (1.0 + dot(&q.e, &q.e)).sqrt() * dot(b, &q.p), f3: dot(b, &q.e) }
}

/// Least-squares `κ` from the components linear in `X`, and the worst disagreement of all
/// three components at that `κ`.
pub fn calibrate_s2_kappa(cs: &CalabiStructure, pairs: &[([f64; 3], S2Point)]) -> Result<(f64, f64)> {
    let mut num = 0.0;
    let mut den = 0.0;
    for (b, q) in pairs {
        let unit = moment_map(cs, &su2_rotation(b), &s2_convert_with(q, 1.0))?;
        let target = s2_moment(b, q);
        for (t, m) in [(target.f1, unit.f1), (target.f3, unit.f3)] {
            num += t * m;
            den += m * m;
        }
    }
    if den == 0.0 {
        return Err(GeomError::InvalidInput("calibration samples carry no fibre component".into()));
    }
    let kappa = num / den;
    let mut worst: f64 = 0.0;
    for (b, q) in pairs {
        let m = moment_map(cs, &su2_rotation(b), &s2_convert_with(q, kappa))?;
        let t = s2_moment(b, q);
        for j in 0..3 {
            worst = worst.max((m.get(j) - t.get(j)).abs());
        }
    }
    Ok((kappa, worst))
}
