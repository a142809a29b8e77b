//! CP^n as the adjoint orbit of rank-one Hermitian projectors.
//!
//! A point is a Hermitian `A` with `A² = A`, `tr A = 1`; a tangent vector at `A`
//! is a Hermitian `X` with `XA + AX = X` (hence `tr X = 0`). The Fubini–Study
//! metric is the restriction of `2 tr(XY)`, normalized to holomorphic sectional
//! curvature 1, and `JX = i(I - 2A)X`.

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{GeomError, Result};
use crate::matkit::{self, c, inner, max_abs, rank1_project, ComplexMatrix, Hermitian, SuElement, I};
use crate::report::CheckReport;

/// Tolerance used when validating externally supplied points and vectors.
pub const VALIDATION_TOL: f64 = 1e-10;

/// Sign of the closed-form curvature tensor, fixed against the finite-difference
/// commutator oracle (`calibration::calibrate_curvature_sign`).
pub const CURVATURE_SIGN: f64 = 1.0;

/// Sign in `ω(X, Y) = ω_sign · g(JX, Y)`, fixed by `d f_u = ω(γ_u, ·)`.
pub const OMEGA_SIGN: f64 = 1.0;

/// A point of CP^n.
#[derive(Clone, Debug)]
pub struct ProjPoint {
    a: Arc<Hermitian>,
}

impl ProjPoint {
    pub(crate) fn from_projector_unchecked(a: Hermitian) -> Self {
        ProjPoint { a: Arc::new(a) }
    }

    /// Validates `A² = A` and `tr A = 1` to [`VALIDATION_TOL`].
    pub fn new(a: Hermitian) -> Result<Self> {
        if a.dim() < 2 {
            return Err(GeomError::DimensionTooSmall(a.dim()));
        }
        let p = ProjPoint::from_projector_unchecked(a);
        let r = p.projector_residual();
        if r > VALIDATION_TOL {
            return Err(GeomError::NotProjector(format!("residual {r:e}")));
        }
        Ok(p)
    }

    /// The base point `A₀ = diag(1, 0, …, 0)`.
    pub fn origin(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(GeomError::DimensionTooSmall(dim));
        }
        let mut d = vec![0.0; dim];
        d[0] = 1.0;
        Ok(ProjPoint::from_projector_unchecked(Hermitian::from_real_diagonal(&d)))
    }

    pub fn matrix(&self) -> &Hermitian {
        &self.a
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// Complex dimension `n` of CP^n.
    pub fn n(&self) -> usize {
        self.dim() - 1
    }

    pub fn same_point(&self, other: &ProjPoint) -> bool {
        Arc::ptr_eq(&self.a, &other.a)
            || (self.dim() == other.dim() && (self.matrix() - other.matrix()).max_abs() <= 1e-12)
    }

    /// `max(‖A² - A‖, |tr A - 1|)`.
    pub fn projector_residual(&self) -> f64 {
        let m = self.a.as_matrix();
        max_abs(&(m * m - m)).max((self.a.trace() - 1.0).abs())
    }

    /// `rank1_project(A + t·H)`.
    pub fn retract(&self, h: &Hermitian, t: f64) -> Result<ProjPoint> {
        rank1_project(&(self.matrix() + &h.scale(t)))
    }

    /// Conjugation `g A g†` by a unitary.
    pub fn conjugate(&self, g: &ComplexMatrix) -> ProjPoint {
        let m = g * self.a.as_matrix() * g.adjoint();
        ProjPoint::from_projector_unchecked(Hermitian::symmetrize_square(m))
    }
}

/// `A = z z† / |z|²`.
pub fn point_from_vector(z: &[Complex64]) -> Result<ProjPoint> {
    if z.len() < 2 {
        return Err(GeomError::DimensionTooSmall(z.len()));
    }
    let v = DVector::from_column_slice(z);
    let n2 = v.norm_squared();
    if n2 == 0.0 || !n2.is_finite() {
        return Err(GeomError::ZeroVector);
    }
    let m = &v * v.adjoint() / c(n2);
    Ok(ProjPoint::from_projector_unchecked(Hermitian::symmetrize_square(m)))
}

/// A Fubini–Study tangent vector `X ∈ T_A CP^n`.
#[derive(Clone, Debug)]
pub struct TangentVec {
    base: ProjPoint,
    x: Hermitian,
}

impl TangentVec {
    /// Validates `XA + AX = X` and `tr X = 0` (scaled by `max(1, |X|)`).
    pub fn new(base: &ProjPoint, x: Hermitian) -> Result<Self> {
        if x.dim() != base.dim() {
            return Err(GeomError::DimensionMismatch { expected: base.dim(), found: x.dim() });
        }
        let v = TangentVec { base: base.clone(), x };
        let r = v.tangency_residual();
        if r > VALIDATION_TOL * v.x.max_abs().max(1.0) {
            return Err(GeomError::NotTangent(format!("residual {r:e}")));
        }
        Ok(v)
    }

    pub(crate) fn unchecked(base: &ProjPoint, x: Hermitian) -> Self {
        TangentVec { base: base.clone(), x }
    }

    pub fn zero(base: &ProjPoint) -> Self {
        TangentVec { base: base.clone(), x: Hermitian::zeros(base.dim()) }
    }

    pub fn base(&self) -> &ProjPoint {
        &self.base
    }

    pub fn matrix(&self) -> &Hermitian {
        &self.x
    }

    pub fn scale(&self, s: f64) -> Self {
        TangentVec { base: self.base.clone(), x: self.x.scale(s) }
    }

    pub fn add(&self, other: &TangentVec) -> Result<Self> {
        self.same_base(other)?;
        Ok(TangentVec { base: self.base.clone(), x: &self.x + &other.x })
    }

    pub fn sub(&self, other: &TangentVec) -> Result<Self> {
        self.same_base(other)?;
        Ok(TangentVec { base: self.base.clone(), x: &self.x - &other.x })
    }

    /// `Σ c_k v_k` over vectors at this base (the receiver only supplies the base).
    pub fn combination(base: &ProjPoint, coeffs: &[f64], vecs: &[TangentVec]) -> TangentVec {
        let mut m = ComplexMatrix::zeros(base.dim(), base.dim());
        for (cf, v) in coeffs.iter().zip(vecs) {
            debug_assert!(v.base.same_point(base));
            m += v.x.as_matrix() * c(*cf);
        }
        TangentVec { base: base.clone(), x: Hermitian::symmetrize_square(m) }
    }

    pub fn same_base(&self, other: &TangentVec) -> Result<()> {
        if self.base.same_point(&other.base) {
            Ok(())
        } else {
            Err(GeomError::BaseMismatch)
        }
    }

    /// `max(‖XA + AX - X‖, |tr X|)`.
    pub fn tangency_residual(&self) -> f64 {
        let a = self.base.matrix().as_matrix();
        let x = self.x.as_matrix();
        max_abs(&(x * a + a * x - x)).max(self.x.trace().abs())
    }

    /// `|X| = sqrt(g(X, X))`.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `g(X, X) = 2 tr(X²)`.
    pub fn norm_sqr(&self) -> f64 {
        inner(self.x.as_matrix(), self.x.as_matrix())
    }

    /// `g(X, Y)` without the base check.
    pub(crate) fn dot(&self, other: &TangentVec) -> f64 {
        inner(self.x.as_matrix(), other.x.as_matrix())
    }

    pub fn jmul(&self) -> TangentVec {
        jmul(self)
    }
}

/// Orthogonal projection `X = AH + HA - 2AHA` onto `T_A CP^n`.
pub fn tangent_project(a: &ProjPoint, h: &Hermitian) -> Result<TangentVec> {
    if h.dim() != a.dim() {
        return Err(GeomError::DimensionMismatch { expected: a.dim(), found: h.dim() });
    }
    Ok(project_unchecked(a, h.as_matrix()))
}

pub(crate) fn project_unchecked(a: &ProjPoint, h: &ComplexMatrix) -> TangentVec {
    let am = a.matrix().as_matrix();
    let ah = am * h;
    let m = &ah + h * am - (&ah * am) * c(2.0);
    TangentVec::unchecked(a, Hermitian::symmetrize_square(m))
}

/// Fubini–Study metric `g(X, Y) = 2 tr(XY)`.
pub fn fs_metric(x: &TangentVec, y: &TangentVec) -> Result<f64> {
    x.same_base(y)?;
    matkit::ambient_inner(x.matrix(), y.matrix())
}

/// `JX = i(I - 2A)X`.
pub fn jmul(x: &TangentVec) -> TangentVec {
    let a = x.base.matrix().as_matrix();
    let d = x.base.dim();
    let m = (ComplexMatrix::identity(d, d) - a * c(2.0)) * x.x.as_matrix() * I;
    TangentVec::unchecked(&x.base, Hermitian::symmetrize_square(m))
}

/// Kähler form `ω(X, Y) = g(JX, Y)`.
pub fn omega(x: &TangentVec, y: &TangentVec) -> Result<f64> {
    x.same_base(y)?;
    Ok(OMEGA_SIGN * jmul(x).dot(y))
}

/// Residuals of the three matrix identities satisfied by tangent vectors of CP^n.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityResiduals {
    /// `XY + YX = tr(XY) I`; only defined for n = 1.
    pub anticommutator: Option<f64>,
    /// `(XY + YX) A = tr(XY) A`.
    pub projector_relation: f64,
    /// `2(XXY + YXX + XYX) = tr(XX) Y` for `X ⊥ Y`. The middle term carries
    /// coefficient 1; with 2 the relation already fails at `A₀` for `x ⊥ y` in `ℂⁿ`
    /// with `x†y ≠ 0`.
    pub cubic_relation: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        self.projector_relation.max(self.cubic_relation).max(self.anticommutator.unwrap_or(0.0))
    }
}

/// Evaluates the identities at `(X, Y)`; `Y` is orthogonalized against `X` for the
/// cubic relation.
pub fn identity_residuals(x: &TangentVec, y: &TangentVec) -> Result<IdentityResiduals> {
    x.same_base(y)?;
    let a = x.base.matrix().as_matrix();
    let d = x.base.dim();
    let xm = x.x.as_matrix();
    let ym = y.x.as_matrix();
    let id = ComplexMatrix::identity(d, d);

    let anti = xm * ym + ym * xm;
    let txy = (xm * ym).trace();
    let anticommutator = (d == 2).then(|| max_abs(&(&anti - &id * txy)));
    let projector_relation = max_abs(&(&anti * a - a * txy));

    let xx = x.norm_sqr();
    let y_perp = if xx > 0.0 { y.sub(&x.scale(x.dot(y) / xx))? } else { y.clone() };
    let yp = y_perp.x.as_matrix();
    let lhs = (xm * xm * yp + yp * xm * xm + xm * yp * xm) * c(2.0);
    let rhs = yp * (xm * xm).trace();
    let cubic_relation = max_abs(&(lhs - rhs));

    Ok(IdentityResiduals { anticommutator, projector_relation, cubic_relation })
}

pub fn check_identities(x: &TangentVec, y: &TangentVec) -> Result<CheckReport> {
    let r = identity_residuals(x, y)?;
    let notes = format!(
        "anticommutator={} projector={:.2e} cubic={:.2e}",
        r.anticommutator.map_or("n/a".to_string(), |v| format!("{v:.2e}")),
        r.projector_relation,
        r.cubic_relation
    );
    Ok(CheckReport::new("projective.identities", r.max(), 1e-12).with_notes(notes))
}

/// Killing field `γ_u(A) = uA - Au`.
pub fn killing_field(u: &SuElement, a: &ProjPoint) -> Result<TangentVec> {
    if u.dim() != a.dim() {
        return Err(GeomError::DimensionMismatch { expected: a.dim(), found: u.dim() });
    }
    let um = u.as_matrix();
    let am = a.matrix().as_matrix();
    Ok(TangentVec::unchecked(a, Hermitian::symmetrize_square(um * am - am * um)))
}

/// `∇_X γ_u = P_A([u, X])`.
pub fn killing_cov_deriv(u: &SuElement, x: &TangentVec) -> Result<TangentVec> {
    if u.dim() != x.base.dim() {
        return Err(GeomError::DimensionMismatch { expected: x.base.dim(), found: u.dim() });
    }
    let um = u.as_matrix();
    let xm = x.x.as_matrix();
    Ok(project_unchecked(&x.base, &(um * xm - xm * um)))
}

/// Hamiltonian of `γ_u`: `f_u(A) = 2 tr(A · iu)`.
pub fn linear_hamiltonian(u: &SuElement, a: &ProjPoint) -> Result<f64> {
    matkit::ambient_inner(a.matrix(), &u.times_i())
}

/// The vector field `A ↦ P_A(H)` for a fixed Hermitian `H`.
pub fn basic_field(h: &Hermitian, a: &ProjPoint) -> TangentVec {
    project_unchecked(a, h.as_matrix())
}

/// Ambient derivative of `A ↦ P_A(H)` along `U`: `UH + HU - 2UHA - 2AHU`.
pub fn basic_field_derivative(u: &TangentVec, h: &Hermitian) -> Hermitian {
    let a = u.base.matrix().as_matrix();
    let um = u.x.as_matrix();
    let hm = h.as_matrix();
    let m = um * hm + hm * um - (um * hm * a + a * hm * um) * c(2.0);
    Hermitian::symmetrize_square(m)
}

/// Levi-Civita derivative of the basic field `P_A(H)` along `U`.
pub fn basic_field_cov_deriv(u: &TangentVec, h: &Hermitian) -> TangentVec {
    project_unchecked(&u.base, basic_field_derivative(u, h).as_matrix())
}

/// A g-orthonormal, J-adapted frame `(e₁, Je₁, e₂, Je₂, …)` of `T_A CP^n`.
///
/// When `lead` is a nonzero vector the frame starts with `X/|X|, JX/|X|`. Further
/// vectors come from Gram–Schmidt over `P_A(i u_k)` for the su(n+1) basis, in order.
pub fn adapted_frame(a: &ProjPoint, lead: Option<&TangentVec>) -> Result<Vec<TangentVec>> {
    let target = 2 * a.n();
    let mut frame: Vec<TangentVec> = Vec::with_capacity(target);
    let push = |cand: TangentVec, frame: &mut Vec<TangentVec>| {
        let mut v = cand;
        for e in frame.iter() {
            v = v.sub(&e.scale(e.dot(&v))).expect("same base");
        }
        // second pass for stability
        for e in frame.iter() {
            v = v.sub(&e.scale(e.dot(&v))).expect("same base");
        }
        let nv = v.norm();
        if nv > 1e-6 {
            let e = v.scale(1.0 / nv);
            let je = jmul(&e);
            frame.push(e);
            frame.push(je);
        }
    };
    if let Some(x) = lead {
        if !x.base.same_point(a) {
            return Err(GeomError::BaseMismatch);
        }
        if x.norm() > 1e-12 {
            push(x.clone(), &mut frame);
        }
    }
    for u in matkit::su_basis(a.dim())? {
        if frame.len() >= target {
            break;
        }
        push(project_unchecked(a, u.times_i().as_matrix()), &mut frame);
    }
    debug_assert_eq!(frame.len(), target);
    Ok(frame)
}

/// Curvature tensor of CP^n with holomorphic sectional curvature 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FubiniStudy {
    pub curvature_sign: f64,
}

impl Default for FubiniStudy {
    fn default() -> Self {
        FubiniStudy { curvature_sign: CURVATURE_SIGN }
    }
}

impl FubiniStudy {
    pub fn with_curvature_sign(curvature_sign: f64) -> Self {
        FubiniStudy { curvature_sign }
    }

    /// `R(X,Y)Z = ¼[g(Y,Z)X - g(X,Z)Y + g(JY,Z)JX - g(JX,Z)JY + 2g(JY,X)JZ]`, for
    /// `R(X,Y) = ∇_X∇_Y - ∇_Y∇_X - ∇_[X,Y]`.
    pub fn curvature(&self, x: &TangentVec, y: &TangentVec, z: &TangentVec) -> Result<TangentVec> {
        x.same_base(y)?;
        x.same_base(z)?;
        Ok(self.curvature_unchecked(x, y, z))
    }

    pub(crate) fn curvature_unchecked(&self, x: &TangentVec, y: &TangentVec, z: &TangentVec) -> TangentVec {
        let jx = jmul(x);
        let jy = jmul(y);
        let jz = jmul(z);
        let coeffs = [y.dot(z), -x.dot(z), jy.dot(z), -jx.dot(z), 2.0 * jy.dot(x)];
        TangentVec::combination(&x.base, &coeffs, &[x.clone(), y.clone(), jx, jy, jz]).scale(0.25 * self.curvature_sign)
    }

    /// `g(R(X,JX)JX, X) / |X|⁴`.
    pub fn holomorphic_sectional_curvature(&self, x: &TangentVec) -> Result<f64> {
        let jx = jmul(x);
        let r = self.curvature(x, &jx, &jx)?;
        let n2 = x.norm_sqr();
        Ok(r.dot(x) / (n2 * n2))
    }

    /// `s = Σ_{ij} g(R(e_i, e_j) e_j, e_i)` over an orthonormal frame.
    pub fn scalar_curvature(&self, a: &ProjPoint) -> Result<f64> {
        let frame = adapted_frame(a, None)?;
        let mut s = 0.0;
        for ei in &frame {
            for ej in &frame {
                s += self.curvature_unchecked(ei, ej, ej).dot(ei);
            }
        }
        Ok(s)
    }
}

/// Levi-Civita derivative of a vector field along `X`: the tangent projection of the
/// central-difference derivative along `t ↦ rank1_project(A + tX)`.
pub fn nabla<F>(x: &TangentVec, field: F, step: f64) -> Result<TangentVec>
where
    F: Fn(&ProjPoint) -> Result<TangentVec>,
{
    if !(step > 0.0 && step <= 1e-2) {
        return Err(GeomError::InvalidInput(format!("step {step} outside (0, 1e-2]")));
    }
    let a = &x.base;
    let plus = field(&a.retract(x.matrix(), step)?)?;
    let minus = field(&a.retract(x.matrix(), -step)?)?;
    let d = (plus.matrix() - minus.matrix()).scale(0.5 / step);
    Ok(project_unchecked(a, d.as_matrix()))
}

/// Finite-difference curvature `∇_X∇_Y Z - ∇_Y∇_X Z - ∇_[X,Y] Z` on the basic extensions
/// `P_A(X)`, `P_A(Y)`, `P_A(Z)` of the given vectors. Independent of the closed form.
pub fn curvature_fd(x: &TangentVec, y: &TangentVec, z: &TangentVec, step: f64) -> Result<TangentVec> {
    x.same_base(y)?;
    x.same_base(z)?;
    let (hx, hy, hz) = (x.matrix().clone(), y.matrix().clone(), z.matrix().clone());
    let nabla_y_z = |p: &ProjPoint| -> Result<TangentVec> { Ok(basic_field_cov_deriv(&basic_field(&hy, p), &hz)) };
    let nabla_x_z = |p: &ProjPoint| -> Result<TangentVec> { Ok(basic_field_cov_deriv(&basic_field(&hx, p), &hz)) };
    let xy = nabla(x, nabla_y_z, step)?;
    let yx = nabla(y, nabla_x_z, step)?;
    // [X̃, Ỹ] at A from the ambient derivatives of the basic fields.
    let bracket = Hermitian::symmetrize_square(
        basic_field_derivative(x, &hy).as_matrix() - basic_field_derivative(y, &hx).as_matrix(),
    );
    let bracket = project_unchecked(&x.base, bracket.as_matrix());
    let b = basic_field_cov_deriv(&bracket, &hz);
    xy.sub(&yx)?.sub(&b)
}

/// Chart `t ↦ rank1_project(A + Σ t_a e_a)` over the adapted frame at `A`.
#[derive(Clone, Debug)]
pub struct CpChart {
    center: ProjPoint,
    frame: Vec<TangentVec>,
}

impl CpChart {
    pub fn new(center: &ProjPoint) -> Result<Self> {
        Ok(CpChart { center: center.clone(), frame: adapted_frame(center, None)? })
    }

    fn ambient(&self, t: &[f64]) -> Result<Hermitian> {
        if t.len() != self.frame.len() {
            return Err(GeomError::DimensionMismatch { expected: self.frame.len(), found: t.len() });
        }
        let mut h = self.center.matrix().as_matrix().clone();
        for (ti, e) in t.iter().zip(&self.frame) {
            h += e.matrix().as_matrix() * c(*ti);
        }
        Ok(Hermitian::symmetrize_square(h))
    }

    pub fn point(&self, t: &[f64]) -> Result<ProjPoint> {
        rank1_project(&self.ambient(t)?)
    }
}

impl crate::chart::MetricChart for CpChart {
    fn dim(&self) -> usize {
        self.frame.len()
    }

    fn metric(&self, t: &[f64]) -> Result<nalgebra::DMatrix<f64>> {
        let eig = matkit::DominantEigen::new(&self.ambient(t)?)?;
        let vecs: Vec<Hermitian> = self.frame.iter().map(|e| eig.projector_derivative(e.matrix())).collect();
        let m = vecs.len();
        Ok(nalgebra::DMatrix::from_fn(m, m, |a, b| inner(vecs[a].as_matrix(), vecs[b].as_matrix())))
    }
}
