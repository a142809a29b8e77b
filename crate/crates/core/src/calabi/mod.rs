//! The Calabi hyper-Kähler structure on TCP^n.
//!
//! A point is a pair `(A, X)` with `X ∈ T_A CP^n`. Tangent vectors of TCP^n are kept
//! split as `U^h + W^v`; the ambient realization in `HM(n+1)²` is
//! `(U, W + i[X, JU])`.

mod chart;
mod verify;

pub use chart::{tt_retract, TbChart};
pub use verify::{
    algebraic_residuals, axiom_residuals, connection_residuals, parallel_residual, stokes_residual,
    verify_hyperkahler_axioms, AxiomResiduals, ConnectionResiduals,
};

use crate::error::{GeomError, Result};
use crate::matkit::{Hermitian, I};
use crate::projective::{jmul, project_unchecked, FubiniStudy, ProjPoint, TangentVec, VALIDATION_TOL};

/// Calibrated value of `κ` in `|X|² = κ·g(X, X)` inside `a = sqrt(1 + 4|X|²)`.
pub const NORM_CONSTANT: f64 = 0.25;

/// A point `(A, X)` of TCP^n.
#[derive(Clone, Debug)]
pub struct TBPoint {
    x: TangentVec,
}

impl TBPoint {
    pub fn new(a: &ProjPoint, x: Hermitian) -> Result<Self> {
        Ok(TBPoint { x: TangentVec::new(a, x)? })
    }

    pub fn from_tangent(x: TangentVec) -> Self {
        TBPoint { x }
    }

    pub fn zero_section(a: &ProjPoint) -> Self {
        TBPoint { x: TangentVec::zero(a) }
    }

    pub fn a(&self) -> &ProjPoint {
        self.x.base()
    }

    pub fn x(&self) -> &TangentVec {
        &self.x
    }

    pub fn n(&self) -> usize {
        self.a().n()
    }

    pub fn same_point(&self, other: &TBPoint) -> bool {
        self.a().same_point(other.a()) && (self.x.matrix() - other.x.matrix()).max_abs() <= 1e-12
    }
}

/// Horizontal or vertical lift.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LiftKind {
    H,
    V,
}

/// A tangent vector `U^h + W^v` of TCP^n.
#[derive(Clone, Debug)]
pub struct TTVec {
    base: TBPoint,
    hor: TangentVec,
    ver: TangentVec,
}

impl TTVec {
    pub fn new(base: &TBPoint, hor: TangentVec, ver: TangentVec) -> Result<Self> {
        if !hor.base().same_point(base.a()) || !ver.base().same_point(base.a()) {
            return Err(GeomError::BaseMismatch);
        }
        Ok(TTVec { base: base.clone(), hor, ver })
    }

    pub(crate) fn unchecked(base: &TBPoint, hor: TangentVec, ver: TangentVec) -> Self {
        TTVec { base: base.clone(), hor, ver }
    }

    pub fn zero(base: &TBPoint) -> Self {
        let z = TangentVec::zero(base.a());
        TTVec { base: base.clone(), hor: z.clone(), ver: z }
    }

    pub fn base(&self) -> &TBPoint {
        &self.base
    }

    pub fn hor(&self) -> &TangentVec {
        &self.hor
    }

    pub fn ver(&self) -> &TangentVec {
        &self.ver
    }

    pub fn scale(&self, s: f64) -> Self {
        TTVec { base: self.base.clone(), hor: self.hor.scale(s), ver: self.ver.scale(s) }
    }

    pub fn add(&self, o: &TTVec) -> Result<Self> {
        Ok(TTVec { base: self.base.clone(), hor: self.hor.add(&o.hor)?, ver: self.ver.add(&o.ver)? })
    }

    pub fn sub(&self, o: &TTVec) -> Result<Self> {
        Ok(TTVec { base: self.base.clone(), hor: self.hor.sub(&o.hor)?, ver: self.ver.sub(&o.ver)? })
    }

    pub fn combination(base: &TBPoint, coeffs: &[f64], vecs: &[TTVec]) -> TTVec {
        let hs: Vec<TangentVec> = vecs.iter().map(|v| v.hor.clone()).collect();
        let vs: Vec<TangentVec> = vecs.iter().map(|v| v.ver.clone()).collect();
        TTVec {
            base: base.clone(),
            hor: TangentVec::combination(base.a(), coeffs, &hs),
            ver: TangentVec::combination(base.a(), coeffs, &vs),
        }
    }

    /// Largest entry of either component.
    pub fn max_abs(&self) -> f64 {
        self.hor.matrix().max_abs().max(self.ver.matrix().max_abs())
    }

    /// Ambient velocity `(U, W + i[X, JU])`.
    pub fn realize(&self) -> (Hermitian, Hermitian) {
        let corr = horizontal_correction(&self.base, &self.hor);
        (self.hor.matrix().clone(), self.ver.matrix() + &corr)
    }
}

/// `i[X, JU]`, the ambient vertical part of `U^h`.
fn horizontal_correction(p: &TBPoint, u: &TangentVec) -> Hermitian {
    let x = p.x.matrix().as_matrix();
    let ju = jmul(u);
    let j = ju.matrix().as_matrix();
    Hermitian::symmetrize_square((x * j - j * x) * I)
}

pub fn lift_h(p: &TBPoint, y: &TangentVec) -> Result<TTVec> {
    if !y.base().same_point(p.a()) {
        return Err(GeomError::BaseMismatch);
    }
    Ok(TTVec::unchecked(p, y.clone(), TangentVec::zero(p.a())))
}

pub fn lift_v(p: &TBPoint, y: &TangentVec) -> Result<TTVec> {
    if !y.base().same_point(p.a()) {
        return Err(GeomError::BaseMismatch);
    }
    Ok(TTVec::unchecked(p, TangentVec::zero(p.a()), y.clone()))
}

pub fn lift(p: &TBPoint, kind: LiftKind, y: &TangentVec) -> Result<TTVec> {
    match kind {
        LiftKind::H => lift_h(p, y),
        LiftKind::V => lift_v(p, y),
    }
}

/// Splits an ambient velocity `(Ȧ, Ẋ)` at `P` into horizontal and vertical parts.
pub fn decompose(p: &TBPoint, da: &Hermitian, dx: &Hermitian) -> Result<TTVec> {
    let d = p.a().dim();
    if da.dim() != d || dx.dim() != d {
        return Err(GeomError::DimensionMismatch { expected: d, found: da.dim().max(dx.dim()) });
    }
    let hor = project_unchecked(p.a(), da.as_matrix());
    let corr = horizontal_correction(p, &hor);
    let ver = project_unchecked(p.a(), (dx - &corr).as_matrix());
    Ok(TTVec::unchecked(p, hor, ver))
}

/// The point-dependent scalars of the Calabi structure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CalabiCoefs {
    /// `g(X, X)`.
    pub x2: f64,
    /// `a = sqrt(1 + 4κ g(X, X))`.
    pub a: f64,
    /// `(a - 1)/g(X, X) = 4κ/(a + 1)`.
    pub q: f64,
    /// `ã = (a - 1)/(a g(X, X)) = q/a`.
    pub ta: f64,
}

/// The Calabi metric, its complex structures and Levi-Civita connection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CalabiStructure {
    pub norm_constant: f64,
    pub base: FubiniStudy,
}

impl Default for CalabiStructure {
    fn default() -> Self {
        CalabiStructure { norm_constant: NORM_CONSTANT, base: FubiniStudy::default() }
    }
}

impl CalabiStructure {
    pub fn with_norm_constant(norm_constant: f64) -> Self {
        CalabiStructure { norm_constant, ..Default::default() }
    }

    pub fn coefs(&self, p: &TBPoint) -> CalabiCoefs {
        let x2 = p.x.norm_sqr();
        let k4 = 4.0 * self.norm_constant;
        let a = (1.0 + k4 * x2).sqrt();
        let q = k4 / (a + 1.0);
        CalabiCoefs { x2, a, q, ta: q / a }
    }

    /// `g(U,X)g(V,X) + g(U,JX)g(V,JX)`.
    fn bracket(p: &TBPoint, jx: &TangentVec, u: &TangentVec, v: &TangentVec) -> f64 {
        u.dot(&p.x) * v.dot(&p.x) + u.dot(jx) * v.dot(jx)
    }

    /// `g(U,X)X + g(U,JX)JX`.
    fn bracket_vec(p: &TBPoint, jx: &TangentVec, u: &TangentVec) -> TangentVec {
        TangentVec::combination(p.a(), &[u.dot(&p.x), u.dot(jx)], &[p.x.clone(), jx.clone()])
    }

    pub fn metric_hh(&self, p: &TBPoint, u: &TangentVec, v: &TangentVec) -> f64 {
        let k = self.coefs(p);
        let jx = jmul(&p.x);
        0.5 * (k.a + 1.0) * u.dot(v) + 0.5 * k.q * Self::bracket(p, &jx, u, v)
    }

    pub fn metric_vv(&self, p: &TBPoint, u: &TangentVec, v: &TangentVec) -> f64 {
        let k = self.coefs(p);
        let jx = jmul(&p.x);
        2.0 / (k.a + 1.0) * u.dot(v) - k.q / (k.a * (k.a + 1.0)) * Self::bracket(p, &jx, u, v)
    }

    /// `G(ξ, η)`.
    pub fn metric(&self, xi: &TTVec, eta: &TTVec) -> Result<f64> {
        if !xi.base.same_point(&eta.base) {
            return Err(GeomError::BaseMismatch);
        }
        Ok(self.metric_unchecked(xi, eta))
    }

    pub(crate) fn metric_unchecked(&self, xi: &TTVec, eta: &TTVec) -> f64 {
        let p = &xi.base;
        let k = self.coefs(p);
        let jx = jmul(&p.x);
        let hh = 0.5 * (k.a + 1.0) * xi.hor.dot(&eta.hor) + 0.5 * k.q * Self::bracket(p, &jx, &xi.hor, &eta.hor);
        let vv = 2.0 / (k.a + 1.0) * xi.ver.dot(&eta.ver)
            - k.q / (k.a * (k.a + 1.0)) * Self::bracket(p, &jx, &xi.ver, &eta.ver);
        hh + vv
    }

    /// `G = a g ⊕ g/a`, valid only on TCP¹.
    pub fn metric_cp1(&self, xi: &TTVec, eta: &TTVec) -> Result<f64> {
        if xi.base.n() != 1 {
            return Err(GeomError::InvalidInput("CP¹ metric requires n = 1".into()));
        }
        if !xi.base.same_point(&eta.base) {
            return Err(GeomError::BaseMismatch);
        }
        let a = self.coefs(&xi.base).a;
        Ok(a * xi.hor.dot(&eta.hor) + xi.ver.dot(&eta.ver) / a)
    }

    pub fn jstar(&self, xi: &TTVec) -> TTVec {
        jstar(xi)
    }

    pub fn istar(&self, xi: &TTVec) -> TTVec {
        let p = &xi.base;
        let k = self.coefs(p);
        let jx = jmul(&p.x);
        let bu = Self::bracket_vec(p, &jx, &xi.hor);
        let bw = Self::bracket_vec(p, &jx, &xi.ver);
        let hor =
            TangentVec::combination(p.a(), &[-2.0 / (k.a + 1.0), k.q / (k.a * (k.a + 1.0))], &[xi.ver.clone(), bw]);
        let ver = TangentVec::combination(p.a(), &[0.5 * (k.a + 1.0), 0.5 * k.q], &[xi.hor.clone(), bu]);
        TTVec::unchecked(p, hor, ver)
    }

    /// `K* = I* ∘ J*`.
    pub fn kstar(&self, xi: &TTVec) -> TTVec {
        self.istar(&jstar(xi))
    }

    pub fn structure(&self, which: Quaternion, xi: &TTVec) -> TTVec {
        match which {
            Quaternion::I => self.istar(xi),
            Quaternion::J => jstar(xi),
            Quaternion::K => self.kstar(xi),
        }
    }

    /// Kähler form `ω_Q(ξ, η) = G(Qξ, η)`.
    pub fn kahler_form(&self, which: Quaternion, xi: &TTVec, eta: &TTVec) -> Result<f64> {
        self.metric(&self.structure(which, xi), eta)
    }

    /// The tensor `𝒜(U, V)`.
    pub fn tensor_a(&self, p: &TBPoint, u: &TangentVec, v: &TangentVec) -> Result<TangentVec> {
        u.same_base(v)?;
        if !u.base().same_point(p.a()) {
            return Err(GeomError::BaseMismatch);
        }
        let t = self.coefs(p).ta;
        let x = &p.x;
        let jx = jmul(x);
        let jv = jmul(v);
        let (ux, ujx, vx, vjx) = (u.dot(x), u.dot(&jx), v.dot(x), v.dot(&jx));
        let cx = t * (u.dot(v) - t * (ux * vx + ujx * vjx));
        let cjx = t * (jmul(u).dot(v) - t * (ux * vjx - ujx * vx));
        Ok(TangentVec::combination(p.a(), &[t * ux, -t * ujx, cx, cjx], &[v.clone(), jv, x.clone(), jx]))
    }

    /// The tensor `ℬ(U, V)`.
    pub fn tensor_b(&self, p: &TBPoint, u: &TangentVec, v: &TangentVec) -> Result<TangentVec> {
        u.same_base(v)?;
        if !u.base().same_point(p.a()) {
            return Err(GeomError::BaseMismatch);
        }
        let t = self.coefs(p).ta;
        let x = &p.x;
        let jx = jmul(x);
        let (ux, ujx, vx, vjx) = (u.dot(x), u.dot(&jx), v.dot(x), v.dot(&jx));
        let h = -0.5 * t;
        let t2 = 0.5 * t * t;
        Ok(TangentVec::combination(
            p.a(),
            &[h * vx, h * ux, h * vjx, h * ujx, t2 * (ux * vx - ujx * vjx), t2 * (ux * vjx + ujx * vx)],
            &[u.clone(), v.clone(), jmul(u), jmul(v), x.clone(), jx],
        ))
    }

    /// Tensorial part of `∇̄_{U^κ₁} V^κ₂`, plus `deriv` (the derivative of the
    /// component field `V` along the direction) placed in the `κ₂` slot.
    ///
    /// `∇̄_{U^h}V^h = (∇_U V)^h - ½[R(U,V)X + R(U,JV)JX]^v`, `∇̄_{U^v}V^h = ½𝒜(U,V)^h`,
    /// `∇̄_{U^h}V^v = (∇_U V)^v + ½𝒜(V,U)^h`, `∇̄_{U^v}V^v = ℬ(U,V)^v`.
    pub fn nabla_bar(
        &self,
        p: &TBPoint,
        ka: LiftKind,
        u: &TangentVec,
        kb: LiftKind,
        v: &TangentVec,
        deriv: Option<&TangentVec>,
    ) -> Result<TTVec> {
        u.same_base(v)?;
        if !u.base().same_point(p.a()) {
            return Err(GeomError::BaseMismatch);
        }
        let zero = TangentVec::zero(p.a());
        let (mut hor, mut ver) = match (ka, kb) {
            (LiftKind::H, LiftKind::H) => {
                let jx = jmul(&p.x);
                let r1 = self.base.curvature_unchecked(u, v, &p.x);
                let r2 = self.base.curvature_unchecked(u, &jmul(v), &jx);
                (zero, r1.add(&r2)?.scale(-0.5))
            }
            (LiftKind::V, LiftKind::H) => (self.tensor_a(p, u, v)?.scale(0.5), zero),
            (LiftKind::H, LiftKind::V) => (self.tensor_a(p, v, u)?.scale(0.5), zero),
            (LiftKind::V, LiftKind::V) => (zero, self.tensor_b(p, u, v)?),
        };
        if let Some(d) = deriv {
            match kb {
                LiftKind::H => hor = hor.add(d)?,
                LiftKind::V => ver = ver.add(d)?,
            }
        }
        Ok(TTVec::unchecked(p, hor, ver))
    }

    /// Tensorial part of `∇̄_ξ η` extended bilinearly over both splittings.
    pub fn nabla_bar_tensor(&self, xi: &TTVec, eta: &TTVec) -> Result<TTVec> {
        let p = &xi.base;
        let mut out = TTVec::zero(p);
        for (ka, u) in [(LiftKind::H, &xi.hor), (LiftKind::V, &xi.ver)] {
            for (kb, v) in [(LiftKind::H, &eta.hor), (LiftKind::V, &eta.ver)] {
                out = out.add(&self.nabla_bar(p, ka, u, kb, v, None)?)?;
            }
        }
        Ok(out)
    }

    /// `∇̄_ξ Z` for a vector field `Z`: the tangent projection of the ambient derivative
    /// of each component along `s ↦ tt_retract(P, ξ, s)`, plus the tensorial part.
    pub fn nabla_bar_field<F>(&self, xi: &TTVec, field: F, step: f64) -> Result<TTVec>
    where
        F: Fn(&TBPoint) -> Result<TTVec>,
    {
        if !(step > 0.0 && step <= 1e-2) {
            return Err(GeomError::InvalidInput(format!("step {step} outside (0, 1e-2]")));
        }
        let p = &xi.base;
        let z0 = field(p)?;
        let zp = field(&tt_retract(p, xi, step)?)?;
        let zm = field(&tt_retract(p, xi, -step)?)?;
        let dh = (zp.hor.matrix() - zm.hor.matrix()).scale(0.5 / step);
        let dv = (zp.ver.matrix() - zm.ver.matrix()).scale(0.5 / step);
        let deriv =
            TTVec::unchecked(p, project_unchecked(p.a(), dh.as_matrix()), project_unchecked(p.a(), dv.as_matrix()));
        deriv.add(&self.nabla_bar_tensor(xi, &z0)?)
    }
}

/// `J*(U^h + W^v) = (JU)^h - (JW)^v`.
pub fn jstar(xi: &TTVec) -> TTVec {
    TTVec::unchecked(&xi.base, jmul(&xi.hor), jmul(&xi.ver).scale(-1.0))
}

/// Labels for the three complex structures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quaternion {
    I,
    J,
    K,
}

impl Quaternion {
    pub const ALL: [Quaternion; 3] = [Quaternion::I, Quaternion::J, Quaternion::K];

    pub fn label(self) -> &'static str {
        match self {
            Quaternion::I => "I",
            Quaternion::J => "J",
            Quaternion::K => "K",
        }
    }
}

/// A G-orthogonal frame of `T_P TCP^n`: horizontal then vertical lifts of the
/// J-adapted base frame led by `X/|X|` (when `X ≠ 0`).
pub fn lifted_frame(p: &TBPoint) -> Result<Vec<TTVec>> {
    let lead = (p.x.norm() > 1e-12).then_some(&p.x);
    let base = crate::projective::adapted_frame(p.a(), lead)?;
    let mut out = Vec::with_capacity(2 * base.len());
    for e in &base {
        out.push(lift_h(p, e)?);
    }
    for e in &base {
        out.push(lift_v(p, e)?);
    }
    Ok(out)
}

/// Exact squared G-norms of [`lifted_frame`] (`X ≠ 0`): `a, a, (a+1)/2, …` for the
/// horizontal lifts and `1/a, 1/a, 2/(a+1), …` for the vertical ones. At `X = 0` all are 1.
pub fn lifted_frame_norms(cs: &CalabiStructure, p: &TBPoint) -> Vec<f64> {
    let k = cs.coefs(p);
    let m = 2 * p.n();
    let lead = p.x.norm() > 1e-12;
    let mut out = Vec::with_capacity(2 * m);
    for i in 0..m {
        out.push(if lead && i < 2 { k.a } else { 0.5 * (k.a + 1.0) });
    }
    for i in 0..m {
        out.push(if lead && i < 2 { 1.0 / k.a } else { 2.0 / (k.a + 1.0) });
    }
    out
}

/// Validates `P` for external callers.
pub fn validate_point(p: &TBPoint) -> Result<()> {
    let r = p.a().projector_residual();
    if r > VALIDATION_TOL {
        return Err(GeomError::NotProjector(format!("residual {r:e}")));
    }
    let t = p.x.tangency_residual();
    if t > VALIDATION_TOL * p.x.matrix().max_abs().max(1.0) {
        return Err(GeomError::NotTangent(format!("residual {t:e}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests;
