use super::*;
use crate::calabi::lift_v;
use crate::matkit::{random_su, seeded_rng, ComplexMatrix, SuElement};
use crate::projective::{linear_hamiltonian, FubiniStudy, ProjPoint, TangentVec};
use crate::sampling::random_tt_vec;
use num_complex::Complex64;

fn diag_u() -> SuElement {
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(0, 0)] = Complex64::new(0.0, 0.5);
    m[(1, 1)] = Complex64::new(0.0, -0.5);
    SuElement::new(m, 1e-14).unwrap()
}

#[test]
fn zero_section_values() {
    let cs = CalabiStructure::default();
    let p = TBPoint::zero_section(&ProjPoint::origin(2).unwrap());
    let m = moment_map(&cs, &diag_u(), &p).unwrap();
    assert!(m.f1.abs() < 1e-15 && (m.f2 + 1.0).abs() < 1e-15 && m.f3.abs() < 1e-15);
    // f₂ restricts to the CP^n Hamiltonian on the zero section
    let u = random_su(3, 7).unwrap();
    let mut rng = seeded_rng(8);
    for _ in 0..10 {
        let a = crate::sampling::random_point(3, &mut rng).unwrap();
        let m = moment_map(&cs, &u, &TBPoint::zero_section(&a)).unwrap();
        assert!((m.f2 - linear_hamiltonian(&u, &a).unwrap()).abs() < 1e-13);
        assert!(m.f1.abs() < 1e-15 && m.f3.abs() < 1e-15);
    }
}

#[test]
fn dimension_mismatch_is_an_error() {
    let cs = CalabiStructure::default();
    let p = TBPoint::zero_section(&ProjPoint::origin(3).unwrap());
    assert!(moment_map(&cs, &diag_u(), &p).is_err());
}

#[test]
fn grad_f3_at_zero_section_is_vertical_j_gamma() {
    let cs = CalabiStructure::default();
    let u = random_su(3, 11).unwrap();
    let p = TBPoint::zero_section(&crate::sampling::random_point(3, &mut seeded_rng(12)).unwrap());
    let gamma = gamma_lift(&u, &p).unwrap();
    let want = lift_v(&p, &jmul(&killing_field(&u, p.a()).unwrap())).unwrap();
    assert!(cs.kstar(&gamma).sub(&want).unwrap().max_abs() < 1e-14);
    let grad = gradient_with(&cs, &p, &component(cs, u.clone(), 2), 1e-4, Scheme::Richardson).unwrap();
    assert!(g_norm(&cs, &grad.sub(&want).unwrap()) < 1e-9);
}

#[test]
fn hamiltonian_identity_and_order() {
    let cs = CalabiStructure::default();
    for n in [1usize, 2] {
        let u = random_su(n + 1, 20 + n as u64).unwrap();
        let pts = sweep_points(n, 6, &mut seeded_rng(30 + n as u64)).unwrap();
        for p in &pts {
            assert!(check_hamiltonian(&cs, &u, p, 1e-4, 1e-5).unwrap().passed());
            let c = hamiltonian_residual(&cs, &u, p, ORDER_STEPS.0, Scheme::Central).unwrap();
            let f = hamiltonian_residual(&cs, &u, p, ORDER_STEPS.1, Scheme::Central).unwrap();
            assert!(observed_order(c, f) > 1.8, "order {}", observed_order(c, f));
        }
    }
}

#[test]
fn gradient_of_constant_vanishes() {
    let cs = CalabiStructure::default();
    let p = &sweep_points(2, 1, &mut seeded_rng(3)).unwrap()[0];
    let g = gradient(&cs, p, &|_: &TBPoint| Ok(4.2), 1e-3).unwrap();
    assert_eq!(g.max_abs(), 0.0);
    assert!(gradient(&cs, p, &|_: &TBPoint| Ok(1.0), 0.5).is_err());
}

#[test]
fn gamma_is_killing_and_triholomorphic() {
    let cs = CalabiStructure::default();
    let u = random_su(3, 40).unwrap();
    let mut rng = seeded_rng(41);
    for p in sweep_points(2, 3, &mut rng).unwrap() {
        let frame = lifted_frame(&p).unwrap();
        let field = |q: &TBPoint| gamma_lift(&u, q);
        let nab: Vec<TTVec> = frame.iter().map(|e| cs.nabla_bar_field(e, field, 1e-3).unwrap()).collect();
        let mut killing: f64 = 0.0;
        for (a, ea) in frame.iter().enumerate() {
            for (b, eb) in frame.iter().enumerate() {
                killing = killing.max((cs.metric_unchecked(&nab[a], eb) + cs.metric_unchecked(&nab[b], ea)).abs());
            }
        }
        assert!(killing < 1e-5, "killing {killing:e}");
        // (L_Γ Q)ξ = Q∇̄_ξΓ - ∇̄_{Qξ}Γ
        for q in Quaternion::ALL {
            for (e, ne) in frame.iter().zip(&nab) {
                let lhs = cs.structure(q, ne);
                let rhs = cs.nabla_bar_field(&cs.structure(q, e), field, 1e-3).unwrap();
                assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-5);
            }
        }
    }
}

#[test]
fn harmonic_morphism_sweep() {
    let cs = CalabiStructure::default();
    for n in [1usize, 2] {
        let u = random_su(n + 1, 50 + n as u64).unwrap();
        let reports = check_harmonic_morphism(&cs, &u, 8, 1e-4, 1e-5, 9).unwrap();
        for r in &reports {
            assert!(r.passed(), "{}", r.line());
        }
        let sweep = morphism_sweep(&cs, &u, &sweep_points(n, 4, &mut seeded_rng(2)).unwrap(), 1e-4).unwrap();
        assert!(sweep.laplacian_order() > 1.8);
        assert!(sweep.hamiltonian_order() > 1.8);
        assert!(sweep.cauchy_riemann.iter().all(|r| *r < 1e-7));
    }
}

#[test]
fn fixed_point_is_critical() {
    let cs = CalabiStructure::default();
    let p = TBPoint::zero_section(&ProjPoint::origin(2).unwrap());
    let u = diag_u();
    assert_eq!(g_norm(&cs, &gamma_lift(&u, &p).unwrap()), 0.0);
    for j in 0..3 {
        let g = gradient(&cs, &p, &component(cs, u.clone(), j), 1e-3).unwrap();
        assert!(g_norm(&cs, &g) < 1e-10);
    }
}

#[test]
fn pulled_back_base_hamiltonian_is_not_harmonic() {
    let cs = CalabiStructure::default();
    let u = random_su(2, 60).unwrap();
    let p = &sweep_points(1, 1, &mut seeded_rng(61)).unwrap()[0];
    let f = |q: &TBPoint| linear_hamiltonian(&u, q.a());
    let lap = laplace_beltrami(&cs, p, &f, 1e-2).unwrap().extrapolated;
    assert!(lap.abs() > 1e-2, "{lap}");
    let f2 = component(cs, u.clone(), 1);
    assert!(laplace_beltrami(&cs, p, &f2, 1e-2).unwrap().extrapolated.abs() < 1e-6);
}

#[test]
fn constant_has_zero_laplacian() {
    let cs = CalabiStructure::default();
    let p = &sweep_points(1, 1, &mut seeded_rng(4)).unwrap()[0];
    let lap = laplace_beltrami(&cs, p, &|_: &TBPoint| Ok(3.0), 1e-2).unwrap();
    assert_eq!(lap.extrapolated, 0.0);
}

#[test]
fn cauchy_riemann_detects_wrong_pairing() {
    let cs = CalabiStructure::default();
    let u = random_su(2, 70).unwrap();
    let p = &sweep_points(1, 1, &mut seeded_rng(71)).unwrap()[0];
    assert!(cauchy_riemann_residual(&cs, &u, p, 1e-3).unwrap() < 1e-7);
    let frame = lifted_frame(p).unwrap();
    let jframe: Vec<TTVec> = frame.iter().map(|e| cs.jstar(e)).collect();
    let df2 = frame_derivatives(p, &jframe, &component(cs, u.clone(), 1), 1e-3, Scheme::Richardson).unwrap();
    let df3 = frame_derivatives(p, &frame, &component(cs, u, 2), 1e-3, Scheme::Richardson).unwrap();
    let wrong = df2.iter().zip(&df3).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
    assert!(wrong > 1e-2);
}

#[test]
fn base_eigenfunction() {
    let fs = FubiniStudy::default();
    for n in [1usize, 2] {
        let u = random_su(n + 1, 80 + n as u64).unwrap();
        let reports = eigenfunction_check(&fs, &u, 20, 1e-3, 1e-3, 5).unwrap();
        for r in &reports {
            assert!(r.passed(), "{}", r.line());
        }
        let pts: Vec<ProjPoint> = {
            let mut rng = seeded_rng(6);
            (0..5).map(|_| crate::sampling::random_point(n + 1, &mut rng).unwrap()).collect()
        };
        let e = eigenfunction_estimate(&fs, &u, &pts, 1e-3).unwrap();
        assert!((e.lambda - (n + 1) as f64).abs() < 1e-6);
        assert!((e.s_over_n - (n + 1) as f64).abs() < 1e-10);
    }
}

#[test]
fn fibre_rotation_pairs_with_j_only() {
    let cs = CalabiStructure::default();
    for n in [1usize, 2] {
        for r in check_fiber_rotation(&cs, n, 3, 1e-3, 1e-6, 1).unwrap() {
            assert!(r.passed(), "{}", r.line());
        }
        let p = &sweep_points(n, 1, &mut seeded_rng(90)).unwrap()[0];
        let r = fiber_rotation_pairing(&cs, p, 1e-3).unwrap();
        assert!((r.laplacian_potential - 2.0 * n as f64).abs() < 1e-6);
    }
}

#[test]
fn frame_gradient_matches_exact_norm_gradient() {
    let cs = CalabiStructure::default();
    let u = random_su(3, 100).unwrap();
    let mut rng = seeded_rng(101);
    let p = &sweep_points(2, 1, &mut rng).unwrap()[0];
    let f = component(cs, u, 0);
    let a = gradient_with(&cs, p, &f, 1e-4, Scheme::Richardson).unwrap();
    let b = gradient_in_frame(&cs, p, &lifted_frame(p).unwrap(), &f, 1e-4, Scheme::Richardson).unwrap();
    assert!(g_norm(&cs, &a.sub(&b).unwrap()) < 1e-8);
    // a non-orthogonal frame gives the same gradient through its Gram matrix
    let xi = random_tt_vec(p, &mut rng).unwrap();
    let mut skew = lifted_frame(p).unwrap();
    skew[0] = skew[0].add(&xi.scale(0.3)).unwrap();
    let c = gradient_in_frame(&cs, p, &skew, &f, 1e-4, Scheme::Richardson).unwrap();
    assert!(g_norm(&cs, &a.sub(&c).unwrap()) < 1e-8);
}

#[test]
fn moment_value_serde_round_trip() {
    let m = MomentValue { f1: 0.1, f2: -2.5, f3: 1e-17 };
    let s = serde_json::to_string(&m).unwrap();
    assert_eq!(serde_json::from_str::<MomentValue>(&s).unwrap(), m);
    assert_eq!(m.as_array(), [0.1, -2.5, 1e-17]);
    let _ = TangentVec::zero(&ProjPoint::origin(2).unwrap());
}
