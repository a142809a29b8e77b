use super::{lift, lifted_frame, tt_retract, CalabiStructure, LiftKind, Quaternion, TBPoint, TTVec, TbChart};
use crate::error::Result;
use crate::fd::{observed_order, validate_step};
use crate::matkit::Hermitian;
use crate::projective::basic_field;
use crate::report::CheckReport;

/// The lift of the basic field `A ↦ P_A(H)`.
pub(crate) fn basic_lift(p: &TBPoint, kind: LiftKind, h: &Hermitian) -> TTVec {
    lift(p, kind, &basic_field(h, p.a())).expect("basic field lives at the base point")
}

/// Residuals of the pointwise and differential hyper-Kähler conditions at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct AxiomResiduals {
    /// `I² = J² = K² = -1`, `IJ = K`, `JK = I`, `KI = J` on the lifted frame.
    pub quaternionic: f64,
    /// `G(Qξ, Qη) - G(ξ, η)` on frame pairs.
    pub compatibility: f64,
    /// `G(U^h, V^v)` on frame pairs.
    pub lift_orthogonality: f64,
    /// Stokes residual of `dω_Q` for `Q = I*, J*, K*` at `step` and `step/2`.
    pub stokes: [f64; 3],
    pub stokes_fine: [f64; 3],
    /// `(∇̄_ξ Q)η` on basic lift fields at `step` and `step/2`.
    pub parallel: f64,
    pub parallel_fine: f64,
}

fn quaternionic_residual(cs: &CalabiStructure, xi: &TTVec) -> Result<f64> {
    let i = |v: &TTVec| cs.istar(v);
    let j = |v: &TTVec| cs.jstar(v);
    let k = |v: &TTVec| cs.kstar(v);
    let scale = xi.max_abs().max(1.0);
    let mut r: f64 = 0.0;
    r = r.max(i(&i(xi)).add(xi)?.max_abs());
    r = r.max(j(&j(xi)).add(xi)?.max_abs());
    r = r.max(k(&k(xi)).add(xi)?.max_abs());
    r = r.max(i(&j(xi)).sub(&k(xi))?.max_abs());
    r = r.max(j(&k(xi)).sub(&i(xi))?.max_abs());
    r = r.max(k(&i(xi)).sub(&j(xi))?.max_abs());
    Ok(r / scale)
}

/// Pointwise algebraic residuals: quaternion relations, G-compatibility and `G(U^h, V^v) = 0`.
pub fn algebraic_residuals(cs: &CalabiStructure, p: &TBPoint) -> Result<(f64, f64, f64)> {
    let frame = lifted_frame(p)?;
    let m = frame.len() / 2;
    let mut quat: f64 = 0.0;
    let mut compat: f64 = 0.0;
    let mut orth: f64 = 0.0;
    let scale = cs.coefs(p).a;
    for (a, xi) in frame.iter().enumerate() {
        quat = quat.max(quaternionic_residual(cs, xi)?);
        for (b, eta) in frame.iter().enumerate() {
            let g = cs.metric_unchecked(xi, eta);
            for q in Quaternion::ALL {
                let gq = cs.metric_unchecked(&cs.structure(q, xi), &cs.structure(q, eta));
                compat = compat.max((gq - g).abs() / scale);
            }
            if a < m && b >= m {
                orth = orth.max(g.abs());
            }
        }
    }
    Ok((quat, compat, orth))
}

/// Midpoint Stokes residual of `dω_Q` over every coordinate 3-cube of side `s` at
/// the chart origin: the boundary integral of `ω_Q` divided by the volume.
pub fn stokes_residual(chart: &TbChart, which: Quaternion, s: f64) -> Result<f64> {
    let m = chart.frame().len();
    let cs = *chart.structure();
    let mut om_plus = Vec::with_capacity(m);
    let mut om_minus = Vec::with_capacity(m);
    for k in 0..m {
        for (sign, store) in [(1.0, &mut om_plus), (-1.0, &mut om_minus)] {
            let mut t = vec![0.0; m];
            t[k] = sign * 0.5 * s;
            let (_, vecs) = chart.point_and_coordinate_vectors(&t)?;
            let qv: Vec<TTVec> = vecs.iter().map(|v| cs.structure(which, v)).collect();
            let mut om = vec![vec![0.0; m]; m];
            for a in 0..m {
                for b in 0..m {
                    om[a][b] = cs.metric_unchecked(&qv[a], &vecs[b]);
                }
            }
            store.push(om);
        }
    }
    let mut worst: f64 = 0.0;
    for a in 0..m {
        for b in (a + 1)..m {
            for c in (b + 1)..m {
                let da = om_plus[a][b][c] - om_minus[a][b][c];
                let db = om_plus[b][a][c] - om_minus[b][a][c];
                let dc = om_plus[c][a][b] - om_minus[c][a][b];
                worst = worst.max(((da - db + dc) / s).abs());
            }
        }
    }
    Ok(worst)
}

/// `max |(∇̄_ξ Q)η|` over basic lift fields through the lifted frame.
pub fn parallel_residual(cs: &CalabiStructure, p: &TBPoint, step: f64) -> Result<f64> {
    let frame = lifted_frame(p)?;
    let m = frame.len() / 2;
    let gens: Vec<(LiftKind, Hermitian)> = frame
        .iter()
        .enumerate()
        .map(
            |(k, f)| {
                if k < m {
                    (LiftKind::H, f.hor().matrix().clone())
                } else {
                    (LiftKind::V, f.ver().matrix().clone())
                }
            },
        )
        .collect();
    let mut worst: f64 = 0.0;
    for xi in &frame {
        for (kind, h) in &gens {
            let eta = |q: &TBPoint| Ok(basic_lift(q, *kind, h));
            let nabla_eta = cs.nabla_bar_field(xi, eta, step)?;
            for which in Quaternion::ALL {
                let q_eta = |q: &TBPoint| Ok(cs.structure(which, &basic_lift(q, *kind, h)));
                let lhs = cs.nabla_bar_field(xi, q_eta, step)?;
                let rhs = cs.structure(which, &nabla_eta);
                worst = worst.max(lhs.sub(&rhs)?.max_abs());
            }
        }
    }
    Ok(worst)
}

pub fn axiom_residuals(cs: &CalabiStructure, p: &TBPoint, step: f64) -> Result<AxiomResiduals> {
    validate_step(step)?;
    let (quaternionic, compatibility, lift_orthogonality) = algebraic_residuals(cs, p)?;
    let chart = TbChart::new(*cs, p)?;
    let mut stokes = [0.0; 3];
    let mut stokes_fine = [0.0; 3];
    for (k, q) in Quaternion::ALL.into_iter().enumerate() {
        stokes[k] = stokes_residual(&chart, q, step)?;
        stokes_fine[k] = stokes_residual(&chart, q, 0.5 * step)?;
    }
    let step_nb = step.min(1e-2);
    let parallel = parallel_residual(cs, p, step_nb)?;
    let parallel_fine = parallel_residual(cs, p, 0.5 * step_nb)?;
    Ok(AxiomResiduals { quaternionic, compatibility, lift_orthogonality, stokes, stokes_fine, parallel, parallel_fine })
}

/// Hyper-Kähler axioms at `P`: quaternion relations and G-compatibility at 1e-12,
/// closedness of `ω_I, ω_J, ω_K` and `∇̄Q = 0` at `tol`.
pub fn verify_hyperkahler_axioms(cs: &CalabiStructure, p: &TBPoint, step: f64, tol: f64) -> Result<Vec<CheckReport>> {
    let r = axiom_residuals(cs, p, step)?;
    let mut out = vec![
        CheckReport::new("calabi.quaternionic", r.quaternionic, 1e-12),
        CheckReport::new("calabi.compatibility", r.compatibility, 1e-12),
        CheckReport::new("calabi.lift_orthogonality", r.lift_orthogonality, 1e-12),
    ];
    let stokes = r.stokes.iter().copied().fold(0.0, f64::max);
    let order = r.stokes.iter().zip(&r.stokes_fine).map(|(c, f)| observed_order(*c, *f)).fold(f64::INFINITY, f64::min);
    out.push(
        CheckReport::new("calabi.closed_forms", stokes, tol)
            .with_notes(format!("I={:.2e} J={:.2e} K={:.2e} order={order:.2}", r.stokes[0], r.stokes[1], r.stokes[2])),
    );
    out.push(
        CheckReport::new("calabi.parallel_structures", r.parallel, tol)
            .with_notes(format!("order={:.2}", observed_order(r.parallel, r.parallel_fine))),
    );
    Ok(out)
}

/// Metric compatibility and torsion of `∇̄` on triples of basic lift fields.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConnectionResiduals {
    pub metric_compatibility: f64,
    pub torsion: f64,
}

/// Derivative of the ambient realization of a field along `s ↦ tt_retract(P, ξ, s)`.
fn ambient_derivative<F>(xi: &TTVec, field: &F, step: f64) -> Result<(Hermitian, Hermitian)>
where
    F: Fn(&TBPoint) -> Result<TTVec>,
{
    let p = xi.base();
    let (ap, xp) = field(&tt_retract(p, xi, step)?)?.realize();
    let (am, xm) = field(&tt_retract(p, xi, -step)?)?.realize();
    Ok(((&ap - &am).scale(0.5 / step), (&xp - &xm).scale(0.5 / step)))
}

/// Residuals for fields `P_A(H_k)` lifted in every `h`/`v` combination.
pub fn connection_residuals(
    cs: &CalabiStructure,
    p: &TBPoint,
    hs: [&Hermitian; 3],
    step: f64,
) -> Result<ConnectionResiduals> {
    validate_step(step)?;
    let kinds = [LiftKind::H, LiftKind::V];
    let mut mc: f64 = 0.0;
    let mut tor: f64 = 0.0;
    for k1 in kinds {
        let xi = basic_lift(p, k1, hs[0]);
        for k2 in kinds {
            let f2 = |q: &TBPoint| Ok(basic_lift(q, k2, hs[1]));
            let n2 = cs.nabla_bar_field(&xi, f2, step)?;
            for k3 in kinds {
                let f3 = |q: &TBPoint| Ok(basic_lift(q, k3, hs[2]));
                let g = |s: f64| -> Result<f64> {
                    let q = tt_retract(p, &xi, s)?;
                    Ok(cs.metric_unchecked(&f2(&q)?, &f3(&q)?))
                };
                let lhs = (g(step)? - g(-step)?) / (2.0 * step);
                let n3 = cs.nabla_bar_field(&xi, f3, step)?;
                let rhs = cs.metric_unchecked(&n2, &f3(p)?) + cs.metric_unchecked(&f2(p)?, &n3);
                mc = mc.max((lhs - rhs).abs());
            }
            // torsion with η = lift k2 of H₁
            let eta = f2(p)?;
            let f1 = |q: &TBPoint| Ok(basic_lift(q, k1, hs[0]));
            let (d1a, d1x) = ambient_derivative(&xi, &f2, step)?;
            let (d2a, d2x) = ambient_derivative(&eta, &f1, step)?;
            let bracket = super::decompose(p, &(&d1a - &d2a), &(&d1x - &d2x))?;
            let n12 = cs.nabla_bar_field(&xi, f2, step)?;
            let n21 = cs.nabla_bar_field(&eta, f1, step)?;
            tor = tor.max(n12.sub(&n21)?.sub(&bracket)?.max_abs());
        }
    }
    Ok(ConnectionResiduals { metric_compatibility: mc, torsion: tor })
}
