use nalgebra::DMatrix;

use super::{decompose, lifted_frame, CalabiStructure, TBPoint, TTVec};
use crate::chart::MetricChart;
use crate::error::{GeomError, Result};
use crate::matkit::{c, rank1_project, ComplexMatrix, DominantEigen, Hermitian};
use crate::projective::{project_unchecked, ProjPoint, TangentVec};

/// `A' = rank1(A + sȦ)`, `X' = P_{A'}(X + sẊ)` for the ambient realization `(Ȧ, Ẋ)` of `ξ`.
pub fn tt_retract(p: &TBPoint, xi: &TTVec, s: f64) -> Result<TBPoint> {
    if s == 0.0 {
        return Ok(p.clone());
    }
    let (da, dx) = xi.realize();
    let a2 = if xi.hor().matrix().max_abs() == 0.0 {
        p.a().clone()
    } else {
        rank1_project(&(p.a().matrix() + &da.scale(s)))?
    };
    let y = p.x().matrix() + &dx.scale(s);
    Ok(TBPoint::from_tangent(project_unchecked(&a2, y.as_matrix())))
}

/// `B Y + Y B - 2 B Y A - 2 A Y B`: derivative of `P_A(Y)` in `A` along `B`.
fn projection_derivative(a: &ComplexMatrix, b: &ComplexMatrix, y: &ComplexMatrix) -> ComplexMatrix {
    b * y + y * b - (b * y * a + a * y * b) * c(2.0)
}

/// Chart `t ↦ tt_retract(P, Σ t_a ξ_a, 1)` over a frame `ξ_a` of `T_P TCP^n`.
#[derive(Clone, Debug)]
pub struct TbChart {
    center: TBPoint,
    frame: Vec<TTVec>,
    ambient: Vec<(Hermitian, Hermitian)>,
    structure: CalabiStructure,
}

impl TbChart {
    /// Chart over the lifted J-adapted frame of [`lifted_frame`].
    pub fn new(structure: CalabiStructure, center: &TBPoint) -> Result<Self> {
        Self::with_frame(structure, center, lifted_frame(center)?)
    }

    pub fn with_frame(structure: CalabiStructure, center: &TBPoint, frame: Vec<TTVec>) -> Result<Self> {
        if frame.iter().any(|f| !f.base().same_point(center)) {
            return Err(GeomError::BaseMismatch);
        }
        let ambient = frame.iter().map(TTVec::realize).collect();
        Ok(TbChart { center: center.clone(), frame, ambient, structure })
    }

    pub fn center(&self) -> &TBPoint {
        &self.center
    }

    pub fn frame(&self) -> &[TTVec] {
        &self.frame
    }

    fn check_len(&self, t: &[f64]) -> Result<()> {
        if t.len() != self.frame.len() {
            return Err(GeomError::DimensionMismatch { expected: self.frame.len(), found: t.len() });
        }
        Ok(())
    }

    fn ambient_sum(&self, t: &[f64]) -> (Hermitian, Hermitian) {
        let d = self.center.a().dim();
        let mut h = self.center.a().matrix().as_matrix().clone();
        let mut y = self.center.x().matrix().as_matrix().clone();
        for (ti, (da, dx)) in t.iter().zip(&self.ambient) {
            if *ti != 0.0 {
                h += da.as_matrix() * c(*ti);
                y += dx.as_matrix() * c(*ti);
            }
        }
        debug_assert_eq!(h.nrows(), d);
        (Hermitian::symmetrize_square(h), Hermitian::symmetrize_square(y))
    }

    /// The point with coordinates `t`.
    pub fn point(&self, t: &[f64]) -> Result<TBPoint> {
        self.check_len(t)?;
        let (h, y) = self.ambient_sum(t);
        let a2 = rank1_project(&h)?;
        Ok(TBPoint::from_tangent(project_unchecked(&a2, y.as_matrix())))
    }

    /// The point with coordinates `t` and the coordinate vectors `∂_a` there (analytic).
    pub fn point_and_coordinate_vectors(&self, t: &[f64]) -> Result<(TBPoint, Vec<TTVec>)> {
        self.check_len(t)?;
        let (h, y) = self.ambient_sum(t);
        let eig = DominantEigen::new(&h)?;
        let a2 = ProjPoint::from_projector_unchecked(eig.projector());
        let p2 = TBPoint::from_tangent(project_unchecked(&a2, y.as_matrix()));
        let am = a2.matrix().as_matrix();
        let mut vecs = Vec::with_capacity(self.frame.len());
        for (da, dx) in &self.ambient {
            let dadot = eig.projector_derivative(da);
            let px: TangentVec = project_unchecked(&a2, dx.as_matrix());
            let dxdot = px.matrix().as_matrix() + projection_derivative(am, dadot.as_matrix(), y.as_matrix());
            let dxdot = Hermitian::symmetrize_square(dxdot);
            vecs.push(decompose(&p2, &dadot, &dxdot)?);
        }
        Ok((p2, vecs))
    }

    pub fn structure(&self) -> &CalabiStructure {
        &self.structure
    }
}

impl MetricChart for TbChart {
    fn dim(&self) -> usize {
        self.frame.len()
    }

    fn metric(&self, t: &[f64]) -> Result<DMatrix<f64>> {
        let (_, vecs) = self.point_and_coordinate_vectors(t)?;
        let m = vecs.len();
        let mut g = DMatrix::zeros(m, m);
        for a in 0..m {
            for b in a..m {
                let v = self.structure.metric_unchecked(&vecs[a], &vecs[b]);
                g[(a, b)] = v;
                g[(b, a)] = v;
            }
        }
        Ok(g)
    }
}
