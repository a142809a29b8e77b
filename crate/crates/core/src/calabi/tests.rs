use super::verify::{algebraic_residuals, axiom_residuals};
use super::*;
use crate::chart::MetricChart;
use crate::matkit::{random_hermitian, random_su, seeded_rng, ComplexMatrix};
use crate::projective::basic_field;
use crate::sampling::{random_tangent, random_tb_point, random_tt_vec};

fn point(dim: usize, seed: u64, r: f64) -> TBPoint {
    random_tb_point(dim, r, r, &mut seeded_rng(seed)).unwrap()
}

fn close(a: &TTVec, b: &TTVec) -> f64 {
    a.sub(b).unwrap().max_abs()
}

#[test]
fn lifts_and_decompose_round_trip() {
    let p0 = TBPoint::zero_section(&ProjPoint::origin(3).unwrap());
    let mut rng = seeded_rng(1);
    let y = random_tangent(p0.a(), &mut rng).unwrap();
    let (da, dx) = lift_h(&p0, &y).unwrap().realize();
    assert!((&da - y.matrix()).max_abs() == 0.0);
    assert_eq!(dx.max_abs(), 0.0);

    let p = point(3, 2, 0.8);
    let y = random_tangent(p.a(), &mut rng).unwrap();
    let (da, dx) = lift_v(&p, &y).unwrap().realize();
    assert_eq!(da.max_abs(), 0.0);
    assert!((&dx - y.matrix()).max_abs() == 0.0);

    let (da, dx) = lift_h(&p, &y).unwrap().realize();
    let back = decompose(&p, &da, &dx).unwrap();
    assert!(close(&back, &lift_h(&p, &y).unwrap()) < 1e-12);

    for seed in 0..50 {
        let p = point(2 + (seed as usize % 3), seed, 1.3);
        let xi = random_tt_vec(&p, &mut rng).unwrap();
        let (da, dx) = xi.realize();
        assert!(close(&decompose(&p, &da, &dx).unwrap(), &xi) < 1e-12);
    }
}

#[test]
fn coefficients_are_regular() {
    let cs = CalabiStructure::default();
    let p0 = TBPoint::zero_section(&ProjPoint::origin(2).unwrap());
    let k = cs.coefs(&p0);
    assert_eq!((k.a, k.ta), (1.0, 0.5));
    for seed in 0..20 {
        let p = point(3, seed, 0.1 + seed as f64 * 0.2);
        let k = cs.coefs(&p);
        assert!(k.a >= 1.0);
        assert!((k.q * k.x2 - (k.a - 1.0)).abs() < 1e-14 * k.a);
        assert!((k.ta - (k.a - 1.0) / (k.a * k.x2)).abs() < 1e-12);
    }
}

#[test]
fn metric_at_zero_section_is_the_base_metric() {
    let cs = CalabiStructure::default();
    let mut rng = seeded_rng(4);
    let p = TBPoint::zero_section(&crate::sampling::random_point(3, &mut rng).unwrap());
    let u = random_tangent(p.a(), &mut rng).unwrap();
    let v = random_tangent(p.a(), &mut rng).unwrap();
    let g = u.dot(&v);
    let hh = cs.metric(&lift_h(&p, &u).unwrap(), &lift_h(&p, &v).unwrap()).unwrap();
    let vv = cs.metric(&lift_v(&p, &u).unwrap(), &lift_v(&p, &v).unwrap()).unwrap();
    let hv = cs.metric(&lift_h(&p, &u).unwrap(), &lift_v(&p, &v).unwrap()).unwrap();
    assert!((hh - g).abs() < 1e-14 && (vv - g).abs() < 1e-14 && hv == 0.0);
}

#[test]
fn cp1_simplification_matches_general_formula() {
    let cs = CalabiStructure::default();
    let mut rng = seeded_rng(5);
    for seed in 0..50 {
        let p = point(2, seed, 0.2 + 0.05 * seed as f64);
        let xi = random_tt_vec(&p, &mut rng).unwrap();
        let eta = random_tt_vec(&p, &mut rng).unwrap();
        let g = cs.metric(&xi, &eta).unwrap();
        let g1 = cs.metric_cp1(&xi, &eta).unwrap();
        assert!((g - g1).abs() < 1e-12 * g.abs().max(1.0));
        let k = cs.coefs(&p);
        let xh = lift_h(&p, p.x()).unwrap();
        let xv = lift_v(&p, p.x()).unwrap();
        assert!((cs.metric(&xh, &xh).unwrap() - k.a * k.x2).abs() < 1e-12);
        assert!((cs.metric(&xv, &xv).unwrap() - k.x2 / k.a).abs() < 1e-12);
    }
    let p3 = point(3, 1, 1.0);
    let z = TTVec::zero(&p3);
    assert!(cs.metric_cp1(&z, &z).is_err());
}

#[test]
fn structures_at_zero_section() {
    let cs = CalabiStructure::default();
    let mut rng = seeded_rng(6);
    let p = TBPoint::zero_section(&crate::sampling::random_point(3, &mut rng).unwrap());
    let u = random_tangent(p.a(), &mut rng).unwrap();
    let uh = lift_h(&p, &u).unwrap();
    let uv = lift_v(&p, &u).unwrap();
    assert!(close(&cs.istar(&uh), &uv) < 1e-15);
    assert!(close(&cs.istar(&uv), &uh.scale(-1.0)) < 1e-15);
    let ju = jmul(&u);
    assert!(close(&cs.kstar(&uh), &lift_v(&p, &ju).unwrap()) < 1e-15);
    assert!(close(&cs.kstar(&uv), &lift_h(&p, &ju).unwrap()) < 1e-15);
}

#[test]
fn jstar_and_kstar_display_formulas() {
    let cs = CalabiStructure::default();
    let mut rng = seeded_rng(7);
    for seed in 0..30 {
        let p = point(3, seed, 0.3 + 0.1 * seed as f64);
        let u = random_tangent(p.a(), &mut rng).unwrap();
        let ju = jmul(&u);
        assert!(close(&cs.jstar(&lift_h(&p, &u).unwrap()), &lift_h(&p, &ju).unwrap()) == 0.0);
        assert!(close(&cs.jstar(&lift_v(&p, &u).unwrap()), &lift_v(&p, &ju.scale(-1.0)).unwrap()) == 0.0);

        // K*(U^h) and K*(U^v) against the explicit expressions
        let k = cs.coefs(&p);
        let x = p.x();
        let jx = jmul(x);
        let br = TangentVec::combination(p.a(), &[u.dot(x), -u.dot(&jx)], &[jx.clone(), x.clone()]);
        let kuh = TangentVec::combination(p.a(), &[0.5 * (k.a + 1.0), 0.5 * k.q], &[ju.clone(), br.clone()]);
        let kuv = TangentVec::combination(p.a(), &[2.0 / (k.a + 1.0), -k.q / (k.a * (k.a + 1.0))], &[ju.clone(), br]);
        assert!(close(&cs.kstar(&lift_h(&p, &u).unwrap()), &lift_v(&p, &kuh).unwrap()) < 1e-12);
        assert!(close(&cs.kstar(&lift_v(&p, &u).unwrap()), &lift_h(&p, &kuv).unwrap()) < 1e-12);
    }
}

#[test]
fn tensors_vanish_at_zero_section_and_b_is_symmetric_and_complex_linear() {
    let cs = CalabiStructure::default();
    let mut rng = seeded_rng(8);
    let p0 = TBPoint::zero_section(&crate::sampling::random_point(3, &mut rng).unwrap());
    let u = random_tangent(p0.a(), &mut rng).unwrap();
    let v = random_tangent(p0.a(), &mut rng).unwrap();
    assert_eq!(cs.tensor_a(&p0, &u, &v).unwrap().matrix().max_abs(), 0.0);
    assert_eq!(cs.tensor_b(&p0, &u, &v).unwrap().matrix().max_abs(), 0.0);
    let t = cs.nabla_bar(&p0, LiftKind::H, &u, LiftKind::H, &v, None).unwrap();
    assert_eq!(t.max_abs(), 0.0);
    let t = cs.nabla_bar(&p0, LiftKind::V, &u, LiftKind::V, &v, None).unwrap();
    assert_eq!(t.max_abs(), 0.0);

    for seed in 0..50 {
        let p = point(2 + seed as usize % 3, seed, 0.2 + 0.04 * seed as f64);
        let u = random_tangent(p.a(), &mut rng).unwrap();
        let v = random_tangent(p.a(), &mut rng).unwrap();
        let b = cs.tensor_b(&p, &u, &v).unwrap();
        let bt = cs.tensor_b(&p, &v, &u).unwrap();
        assert!(b.sub(&bt).unwrap().matrix().max_abs() < 1e-12);
        let bj1 = cs.tensor_b(&p, &jmul(&u), &v).unwrap();
        let bj2 = cs.tensor_b(&p, &u, &jmul(&v)).unwrap();
        assert!(bj1.sub(&jmul(&b)).unwrap().matrix().max_abs() < 1e-12);
        assert!(bj2.sub(&jmul(&b)).unwrap().matrix().max_abs() < 1e-12);
    }
}

#[test]
fn pointwise_algebra_holds_to_machine_precision() {
    let cs = CalabiStructure::default();
    for dim in [2, 3] {
        for seed in 0..20 {
            let p = point(dim, seed, 0.05 + 0.15 * seed as f64);
            let (q, c, o) = algebraic_residuals(&cs, &p).unwrap();
            assert!(q < 1e-12 && c < 1e-12 && o < 1e-12, "dim={dim} {q} {c} {o}");
        }
        let (q, c, o) = algebraic_residuals(&cs, &TBPoint::zero_section(&ProjPoint::origin(dim).unwrap())).unwrap();
        assert!(q < 1e-12 && c < 1e-12 && o == 0.0);
    }
}

#[test]
fn tt_retract_properties() {
    let mut rng = seeded_rng(9);
    let p = point(3, 3, 0.9);
    let xi = random_tt_vec(&p, &mut rng).unwrap();
    assert!(tt_retract(&p, &xi, 0.0).unwrap().same_point(&p));
    let vert = lift_v(&p, xi.ver()).unwrap();
    let q = tt_retract(&p, &vert, 0.3).unwrap();
    assert!((q.a().matrix() - p.a().matrix()).max_abs() == 0.0);

    let (da, dx) = xi.realize();
    let errs: Vec<f64> = [1e-2, 5e-3]
        .iter()
        .map(|&s| {
            let qp = tt_retract(&p, &xi, s).unwrap();
            let qm = tt_retract(&p, &xi, -s).unwrap();
            let va = (qp.a().matrix() - qm.a().matrix()).scale(0.5 / s);
            let vx = (qp.x().matrix() - qm.x().matrix()).scale(0.5 / s);
            (&va - &da).max_abs().max((&vx - &dx).max_abs())
        })
        .collect();
    assert!(errs[1] < 1e-3, "{errs:?}");
    assert!(crate::fd::observed_order(errs[0], errs[1]) > 1.8, "{errs:?}");
}

#[test]
fn chart_metric_and_coordinate_vectors() {
    let cs = CalabiStructure::default();
    for dim in [2, 3] {
        let p = point(dim, 11, 1.1);
        let chart = TbChart::new(cs, &p).unwrap();
        let m = chart.dim();
        assert_eq!(m, 4 * (dim - 1));
        let g0 = chart.metric(&vec![0.0; m]).unwrap();
        let norms = lifted_frame_norms(&cs, &p);
        for a in 0..m {
            for b in 0..m {
                let want = cs.metric(&chart.frame()[a], &chart.frame()[b]).unwrap();
                assert!((g0[(a, b)] - want).abs() < 1e-10);
                if a == b {
                    assert!((g0[(a, a)] - norms[a]).abs() < 1e-10);
                } else {
                    assert!(g0[(a, b)].abs() < 1e-12);
                }
            }
        }
        // analytic coordinate vectors against differences of chart points
        let t: Vec<f64> = (0..m).map(|k| 0.01 * (k as f64 - 1.5)).collect();
        let (q, vecs) = chart.point_and_coordinate_vectors(&t).unwrap();
        let h = 1e-5;
        for a in 0..m {
            let mut tp = t.clone();
            let mut tm = t.clone();
            tp[a] += h;
            tm[a] -= h;
            let (pp, pm) = (chart.point(&tp).unwrap(), chart.point(&tm).unwrap());
            let da = (pp.a().matrix() - pm.a().matrix()).scale(0.5 / h);
            let dx = (pp.x().matrix() - pm.x().matrix()).scale(0.5 / h);
            let fd = decompose(&q, &da, &dx).unwrap();
            assert!(close(&fd, &vecs[a]) < 1e-8);
        }
        // distinct coordinates give distinct points
        let q1 = chart.point(&vec![0.01; m]).unwrap();
        let q2 = chart.point(&vec![-0.01; m]).unwrap();
        assert!(!q1.same_point(&q2));
    }
}

#[test]
fn connection_is_metric_and_torsion_free() {
    let cs = CalabiStructure::default();
    for dim in [2, 3] {
        for seed in 0..3 {
            let p = point(dim, 20 + seed, 0.4 + 0.5 * seed as f64);
            let h: Vec<Hermitian> = (0..3).map(|k| random_hermitian(dim, 100 * seed + k).unwrap()).collect();
            let r = connection_residuals(&cs, &p, [&h[0], &h[1], &h[2]], 1e-3).unwrap();
            assert!(r.metric_compatibility < 1e-4 && r.torsion < 1e-4, "dim={dim} {r:?}");
        }
    }
}

#[test]
fn literal_curvature_argument_breaks_the_connection() {
    // R(U,JX)JV in place of R(U,JV)JX: the metric/torsion oracle must notice.
    let cs = CalabiStructure::default();
    let p = point(3, 31, 1.0);
    let h: Vec<Hermitian> = (0..3).map(|k| random_hermitian(3, 300 + k).unwrap()).collect();
    let u = basic_field(&h[0], p.a());
    let v = basic_field(&h[1], p.a());
    let right = cs.nabla_bar(&p, LiftKind::H, &u, LiftKind::H, &v, None).unwrap();
    let jx = jmul(p.x());
    let alt = cs.base.curvature_unchecked(&u, &v, p.x()).add(&cs.base.curvature_unchecked(&u, &jx, &jmul(&v))).unwrap();
    assert!(right.ver().sub(&alt.scale(-0.5)).unwrap().matrix().max_abs() > 1e-3);
}

#[test]
fn hyperkahler_axioms_hold() {
    let cs = CalabiStructure::default();
    for dim in [2, 3] {
        for (seed, r) in [(40, 0.0), (41, 0.7), (42, 1.6)] {
            let p = point(dim, seed, r);
            let res = axiom_residuals(&cs, &p, 2e-2).unwrap();
            for k in 0..3 {
                assert!(res.stokes[k] < 1e-3, "dim={dim} r={r} {res:?}");
                let o = crate::fd::observed_order(res.stokes[k], res.stokes_fine[k]);
                assert!(res.stokes[k] < 1e-9 || o > 1.8, "dim={dim} r={r} order {o} {res:?}");
            }
            assert!(res.parallel < 1e-4, "{res:?}");
            let reps = verify_hyperkahler_axioms(&cs, &p, 1e-3, 1e-4).unwrap();
            assert!(reps.iter().all(|r| r.passed()), "{:?}", reps);
        }
    }
}

#[test]
fn unitary_lift_is_isometric_and_triholomorphic() {
    let cs = CalabiStructure::default();
    let mut rng = seeded_rng(50);
    for seed in 0..10 {
        let p = point(3, 60 + seed, 0.9);
        let g: ComplexMatrix = random_su(3, seed).unwrap().exp(0.7);
        let conj = |m: &Hermitian| Hermitian::symmetrize_square(&g * m.as_matrix() * g.adjoint());
        let a2 = p.a().conjugate(&g);
        let q = TBPoint::from_tangent(crate::projective::project_unchecked(&a2, conj(p.x().matrix()).as_matrix()));
        let push = |xi: &TTVec| {
            let (da, dx) = xi.realize();
            decompose(&q, &conj(&da), &conj(&dx)).unwrap()
        };
        let xi = random_tt_vec(&p, &mut rng).unwrap();
        let eta = random_tt_vec(&p, &mut rng).unwrap();
        let g0 = cs.metric(&xi, &eta).unwrap();
        let g1 = cs.metric(&push(&xi), &push(&eta)).unwrap();
        assert!((g0 - g1).abs() < 1e-10);
        for w in Quaternion::ALL {
            assert!(close(&push(&cs.structure(w, &xi)), &cs.structure(w, &push(&xi))) < 1e-10);
        }
    }
}

#[test]
fn base_mismatch_is_rejected() {
    let cs = CalabiStructure::default();
    let p = point(2, 1, 0.5);
    let q = point(2, 2, 0.5);
    let mut rng = seeded_rng(1);
    let xi = random_tt_vec(&p, &mut rng).unwrap();
    let eta = random_tt_vec(&q, &mut rng).unwrap();
    assert_eq!(cs.metric(&xi, &eta).unwrap_err(), GeomError::BaseMismatch);
    assert!(lift_h(&p, q.x()).is_err());
}
