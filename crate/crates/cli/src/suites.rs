use std::fs;

use hkm_core::calabi::{algebraic_residuals, axiom_residuals, connection_residuals, CalabiStructure, TBPoint};
use hkm_core::calibration::run_calibration;
use hkm_core::conformality::{
    check_conformality, gram_sweep, isotropy_check, moment_differential_residual, proportionality_test, ActionSpec,
    Proportionality, PROPORTIONALITY_TOL,
};
use hkm_core::fd::observed_order;
use hkm_core::gibbons::{check_gh_harmonic_morphism, check_product, circle_invariance, product_moment, GHMetric};
use hkm_core::io::{parse_action_spec, parse_killing_spec};
use hkm_core::matkit::{random_hermitian_from, random_su_from, ComplexMatrix, SuElement};
use hkm_core::moment::{
    check_fiber_rotation, eigenfunction_check, moment_map, morphism_sweep, s2_convert, s2_moment, su2_rotation,
    sweep_points, S2Point, LAPLACIAN_STEP_FACTOR,
};
use hkm_core::projective::{
    curvature_fd, fs_metric, identity_residuals, jmul, killing_field, linear_hamiltonian, FubiniStudy,
};
use hkm_core::report::max_residual;
use hkm_core::sampling::{random_point, random_tangent, random_tb_point, rng_for};
use hkm_core::{CheckReport, Result};

use crate::{RunError, Suite, SuiteConfig, UsageError};

/// Machine-precision tolerance for exact algebra.
pub const EXACT_TOL: f64 = 1e-12;
/// Minimum observed convergence order for second-order schemes.
pub const MIN_ORDER: f64 = 1.9;
/// Coarse steps for order estimates, where truncation dominates roundoff.
pub const ORDER_STEPS: (f64, f64) = (2e-2, 1e-2);
/// Gibbons–Hawking parameters swept when `--a` is absent.
pub const GH_PARAMS: [f64; 3] = [0.5, 1.0, 2.0];
/// Seeds for the 2-torus dichotomy sweep besides the primary seed.
pub const TORUS_SEEDS: std::ops::Range<u64> = 1..11;

pub fn run_suite(s: Suite, cfg: &SuiteConfig) -> std::result::Result<Vec<CheckReport>, RunError> {
    Ok(match s {
        Suite::Projective => projective(cfg)?,
        Suite::Calabi => calabi(cfg)?,
        Suite::Moment => moment(cfg)?,
        Suite::Gibbons => gibbons(cfg)?,
        Suite::Conformality => conformality(cfg)?,
        Suite::Calibration => {
            let run = run_calibration(cfg.samples.min(10), cfg.seed)?;
            run.reports(cfg.seed)
        }
    })
}

fn order_verdict(name: String, coarse: f64, fine: f64) -> CheckReport {
    let p = observed_order(coarse, fine);
    CheckReport::verdict(name, p >= MIN_ORDER, format!("order={p:.3} coarse={coarse:.3e} fine={fine:.3e}"))
}

pub fn projective(cfg: &SuiteConfig) -> Result<Vec<CheckReport>> {
    let (n, k, seed) = (cfg.n, cfg.samples, cfg.seed);
    let mut rng = rng_for(seed, "projective");
    let fs = FubiniStudy::default();
    let (mut model, mut jj, mut ident, mut hol, mut curv, mut ham) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let cstep = cfg.step.clamp(1e-4, 1e-2);
    for _ in 0..k {
        let a = random_point(n + 1, &mut rng)?;
        let x = random_tangent(&a, &mut rng)?;
        let y = random_tangent(&a, &mut rng)?;
        let z = random_tangent(&a, &mut rng)?;
        model = model.max(a.projector_residual()).max((a.matrix().trace() - 1.0).abs()).max(x.tangency_residual());
        let jjx = jmul(&jmul(&x));
        jj = jj.max(jjx.add(&x)?.matrix().max_abs());
        ident = ident.max(identity_residuals(&x, &y)?.max());
        let unit = x.scale(1.0 / x.norm());
        hol = hol.max((fs.holomorphic_sectional_curvature(&unit)? - 1.0).abs());
        let fd = curvature_fd(&x, &y, &z, cstep)?;
        curv = curv.max(fs.curvature(&x, &y, &z)?.sub(&fd)?.norm() / fd.norm().max(1.0));
        let u = random_su_from(n + 1, &mut rng);
        let df =
            hkm_core::fd::central_diff_richardson(|t| linear_hamiltonian(&u, &a.retract(x.matrix(), t)?), cfg.step)?;
        ham = ham.max((df - fs_metric(&jmul(&killing_field(&u, &a)?), &x)?).abs());
    }
    let tag = format!("n{n}");
    let r = |name: &str, e: f64, t: f64| {
        CheckReport::new(format!("projective.{name}.{tag}"), e, t).with_samples(k).with_seed(seed)
    };
    Ok(vec![
        r("model_invariants", model, EXACT_TOL),
        r("j_squared", jj, EXACT_TOL),
        r("identities", ident, EXACT_TOL),
        r("holomorphic_curvature", hol, EXACT_TOL),
        r("curvature_vs_fd", curv, cfg.fd_tol(1e-4)),
        r("hamiltonian", ham, cfg.fd_tol(1e-6)),
    ])
}

pub fn calabi(cfg: &SuiteConfig) -> Result<Vec<CheckReport>> {
    let (n, k, seed) = (cfg.n, cfg.samples, cfg.seed);
    let cs = CalabiStructure::default();
    let mut rng = rng_for(seed, "calabi");
    let points: Vec<TBPoint> = (0..k).map(|_| random_tb_point(n + 1, 0.2, 2.0, &mut rng)).collect::<Result<_>>()?;
    let (mut quat, mut compat, mut orth, mut tens) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut stokes, mut parallel, mut mc, mut tor) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut oc, mut of, mut pc, mut pf) = (0.0, 0.0, 0.0, 0.0);
    for (i, p) in points.iter().enumerate() {
        let (q, c, o) = algebraic_residuals(&cs, p)?;
        quat = quat.max(q);
        compat = compat.max(c);
        orth = orth.max(o);
        let u = random_tangent(p.a(), &mut rng)?;
        let v = random_tangent(p.a(), &mut rng)?;
        let b = cs.tensor_b(p, &u, &v)?;
        tens = tens
            .max(b.sub(&cs.tensor_b(p, &v, &u)?)?.matrix().max_abs())
            .max(cs.tensor_b(p, &jmul(&u), &v)?.sub(&jmul(&b))?.matrix().max_abs())
            .max(cs.tensor_b(p, &u, &jmul(&v))?.sub(&jmul(&b))?.matrix().max_abs());
        let r = axiom_residuals(&cs, p, cfg.step)?;
        stokes = stokes.max(r.stokes.iter().copied().fold(0.0, f64::max));
        parallel = parallel.max(r.parallel);
        let h = [
            random_hermitian_from(n + 1, &mut rng),
            random_hermitian_from(n + 1, &mut rng),
            random_hermitian_from(n + 1, &mut rng),
        ];
        let cr = connection_residuals(&cs, p, [&h[0], &h[1], &h[2]], cfg.step.min(1e-2))?;
        mc = mc.max(cr.metric_compatibility);
        tor = tor.max(cr.torsion);
        if i < 3 {
            let rc = axiom_residuals(&cs, p, ORDER_STEPS.0)?;
            oc += rc.stokes.iter().sum::<f64>();
            of += rc.stokes_fine.iter().sum::<f64>();
            pc += rc.parallel;
            pf += rc.parallel_fine;
        }
    }
    let zero = TBPoint::zero_section(points[0].a());
    let u = random_tangent(zero.a(), &mut rng)?;
    let v = random_tangent(zero.a(), &mut rng)?;
    let zero_tensors =
        cs.tensor_a(&zero, &u, &v)?.matrix().max_abs().max(cs.tensor_b(&zero, &u, &v)?.matrix().max_abs());
    let tag = format!("n{n}");
    let r = |name: &str, e: f64, t: f64| {
        CheckReport::new(format!("calabi.{name}.{tag}"), e, t).with_samples(k).with_seed(seed)
    };
    let fd = cfg.fd_tol(1e-4);
    Ok(vec![
        r("quaternionic", quat, EXACT_TOL),
        r("hermitian_structures", compat, EXACT_TOL),
        r("lift_orthogonality", orth, EXACT_TOL),
        r("tensor_b_symmetry_linearity", tens, EXACT_TOL),
        r("tensors_zero_section", zero_tensors, EXACT_TOL),
        r("closed_forms", stokes, fd),
        r("parallel_structures", parallel, fd),
        r("metric_compatibility", mc, fd),
        r("torsion", tor, fd),
        order_verdict(format!("calabi.closed_forms_order.{tag}"), oc, of).with_seed(seed),
        order_verdict(format!("calabi.parallel_order.{tag}"), pc, pf).with_seed(seed),
    ])
}

/// The Killing generator for the moment suite: from `--spec`, else random.
pub fn killing_generator(cfg: &SuiteConfig) -> std::result::Result<SuElement, RunError> {
    if let Some(k) = &cfg.killing_field {
        return Ok(k.element()?);
    }
    match &cfg.killing_spec {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
            let u = parse_killing_spec(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
            if u.dim() != cfg.n + 1 {
                return Err(UsageError(format!(
                    "{}: spec has n = {}, run has --n {}",
                    path.display(),
                    u.dim() - 1,
                    cfg.n
                ))
                .into());
            }
            Ok(u)
        }
        None => Ok(random_su_from(cfg.n + 1, &mut rng_for(cfg.seed, "moment.u"))),
    }
}

pub fn moment(cfg: &SuiteConfig) -> std::result::Result<Vec<CheckReport>, RunError> {
    let (n, k, seed) = (cfg.n, cfg.samples, cfg.seed);
    let cs = CalabiStructure::default();
    let u = killing_generator(cfg)?;
    let mut rng = rng_for(seed, "moment.harmonic_morphism");
    let points = sweep_points(n, k, &mut rng)?;
    let sweep = morphism_sweep(&cs, &u, &points, cfg.step)?;
    let tag = format!("n{n}");
    let spec_note = if cfg.killing_spec.is_some() { "u from spec" } else { "u random" };
    let r = |name: &str, e: f64, t: f64| {
        CheckReport::new(format!("moment.{name}.{tag}"), e, t).with_samples(k).with_seed(seed)
    };
    let lambda_min = sweep.samples.iter().map(|s| s.dilation).fold(f64::INFINITY, f64::min);
    let mut out = vec![
        r("hamiltonian", sweep.max_hamiltonian(), cfg.fd_tol(1e-5)).with_notes(spec_note),
        order_verdict(
            format!("moment.hamiltonian_order.{tag}"),
            sweep.hamiltonian_coarse.iter().sum(),
            sweep.hamiltonian_fine.iter().sum(),
        )
        .with_seed(seed),
        r("harmonic", sweep.max_laplacian(), cfg.fd_tol(1e-4)),
        order_verdict(
            format!("moment.harmonic_order.{tag}"),
            sweep.samples.iter().flat_map(|s| s.laplacian_coarse).sum(),
            sweep.samples.iter().flat_map(|s| s.laplacian_fine).sum(),
        )
        .with_seed(seed),
        r("conformality", sweep.max_conformality(), cfg.fd_tol(1e-4))
            .with_notes(format!("min dilation={lambda_min:.3e}")),
        r("cauchy_riemann", max_residual(sweep.cauchy_riemann.iter().copied()), cfg.fd_tol(1e-6)),
    ];
    out.extend(eigenfunction_check(
        &FubiniStudy::default(),
        &u,
        k,
        LAPLACIAN_STEP_FACTOR * cfg.step,
        cfg.fd_tol(1e-3),
        seed,
    )?);
    out.extend(check_fiber_rotation(
        &cs,
        n,
        k.min(5),
        (LAPLACIAN_STEP_FACTOR * cfg.step).min(1e-2),
        cfg.fd_tol(1e-6),
        seed,
    )?);
    out.push(s2_agreement(&cs, 100.max(k), seed)?);
    Ok(out)
}

/// Sphere formulas against the general moment map through the frozen identification.
pub fn s2_agreement(cs: &CalabiStructure, samples: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = rng_for(seed, "moment.s2");
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let a = random_point(2, &mut rng)?;
        let v =
            |m: &ComplexMatrix| [(m[(0, 1)] + m[(1, 0)]).re, (m[(1, 0)] - m[(0, 1)]).im, (m[(0, 0)] - m[(1, 1)]).re];
        let p = v(a.matrix().as_matrix());
        let e = v(random_tangent(&a, &mut rng)?.matrix().as_matrix());
        let b = v(random_tangent(&a, &mut rng)?.matrix().as_matrix());
        let q = S2Point::projected(p, e)?;
        let m = moment_map(cs, &su2_rotation(&b), &s2_convert(&q))?;
        let t = s2_moment(&b, &q);
        for j in 0..3 {
            worst = worst.max((m.get(j) - t.get(j)).abs());
        }
    }
    Ok(CheckReport::new("moment.s2_formulas", worst, 1e-10).with_samples(samples).with_seed(seed))
}

pub fn gibbons(cfg: &SuiteConfig) -> Result<Vec<CheckReport>> {
    let (k, seed) = (cfg.samples.max(50), cfg.seed);
    let params: Vec<f64> = cfg.gh_a.map_or(GH_PARAMS.to_vec(), |a| vec![a]);
    let gh_step = (LAPLACIAN_STEP_FACTOR * cfg.step).min(5e-2);
    let mut out = Vec::new();
    for a in &params {
        let g = GHMetric::new(*a)?;
        out.extend(check_gh_harmonic_morphism(&g, k, gh_step, cfg.fd_tol(1e-4), seed)?);
        out.extend(circle_invariance(&g, k, cfg.step, cfg.fd_tol(1e-5), seed)?);
    }
    for mut r in check_gh_harmonic_morphism(&GHMetric::flat(), k, gh_step, cfg.fd_tol(1e-8), seed)? {
        r.name = r.name.replace("a0", "flat");
        out.push(r);
    }
    let second = params.last().copied().unwrap_or(1.0);
    let prod = product_moment(&[GHMetric::new(params[0])?, GHMetric::new(second)?])?;
    out.extend(check_product(&prod, cfg.samples.min(10), gh_step, cfg.fd_tol(1e-4), seed)?);
    Ok(out)
}

fn diag_su(d: &[f64]) -> SuElement {
    let mut m = ComplexMatrix::zeros(d.len(), d.len());
    for (k, v) in d.iter().enumerate() {
        m[(k, k)] = hkm_core::matkit::I * (0.5 * v);
    }
    SuElement::new(m, 1e-14).expect("diagonal traceless")
}

/// The maximal torus pair `diag(i,-i,0)/2`, `diag(0,i,-i)/2` on CP².
pub fn standard_two_torus() -> ActionSpec {
    ActionSpec::new(2, vec![diag_su(&[1.0, -1.0, 0.0]), diag_su(&[0.0, 1.0, -1.0])]).expect("commuting")
}

pub fn load_action(cfg: &SuiteConfig) -> std::result::Result<Option<ActionSpec>, RunError> {
    match &cfg.action_spec {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
            Ok(Some(parse_action_spec(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))?))
        }
        None => Ok(None),
    }
}

/// Gram-matrix analysis of a user-supplied action.
pub fn gram(cfg: &SuiteConfig, spec: &ActionSpec) -> Result<Vec<CheckReport>> {
    let (k, seed) = (cfg.samples.max(10), cfg.seed);
    let mut out = vec![check_conformality(spec, k, seed)?];
    out.push(isotropy_check(spec, k, EXACT_TOL, seed)?);
    out.push(gram_psd(spec, k, seed)?);
    Ok(out)
}

fn gram_psd(spec: &ActionSpec, k: usize, seed: u64) -> Result<CheckReport> {
    let mut worst: f64 = 0.0;
    for s in gram_sweep(spec, k, seed)? {
        let asym = (&s.gram - s.gram.transpose()).amax();
        let neg = (-s.gram.clone().symmetric_eigenvalues().min()).max(0.0);
        worst = worst.max(asym).max(neg);
    }
    Ok(CheckReport::new(format!("conformality.gram_psd.k{}.n{}", spec.rank(), spec.n()), worst, 1e-10)
        .with_samples(k)
        .with_seed(seed))
}

pub fn conformality(cfg: &SuiteConfig) -> std::result::Result<Vec<CheckReport>, RunError> {
    let (k, seed) = (cfg.samples.max(10), cfg.seed);
    let n = cfg.n.max(2);
    let mut out = Vec::new();
    if let Some(spec) = load_action(cfg)? {
        out.extend(gram(cfg, &spec)?);
    }
    // one generator: always proportional
    let mut circle_ok = true;
    for j in 0..5u64 {
        let u = random_su_from(n + 1, &mut rng_for(seed.wrapping_add(j), "conformality.circle"));
        let spec = ActionSpec::new(n, vec![u])?;
        circle_ok &= check_conformality(&spec, k, seed)?.passed();
    }
    out.push(
        CheckReport::verdict(format!("conformality.circle_conformal.n{n}"), circle_ok, "5 random generators")
            .with_seed(seed),
    );

    let torus = standard_two_torus();
    let witness = |s: u64| -> Result<Proportionality> {
        Ok(proportionality_test(&gram_sweep(&torus, 10, s)?, PROPORTIONALITY_TOL))
    };
    let primary = witness(seed)?;
    let note = match &primary {
        Proportionality::Witness { first, second, distance } => {
            format!("witness samples {first},{second} distance {distance:.3e}")
        }
        other => format!("{other:?}"),
    };
    out.push(
        CheckReport::verdict("conformality.two_torus_not_conformal", primary.verdict() == Some(false), note)
            .with_samples(10)
            .with_seed(seed),
    );
    let hits = TORUS_SEEDS
        .map(|s| witness(seed.wrapping_add(s)).map(|p| p.verdict() == Some(false)))
        .collect::<Result<Vec<_>>>()?;
    let count = hits.iter().filter(|h| **h).count();
    out.push(
        CheckReport::verdict(
            "conformality.two_torus_seed_sweep",
            count >= 9,
            format!("{count}/10 seeds give a witness"),
        )
        .with_samples(10)
        .with_seed(seed),
    );
    out.push(isotropy_check(&torus, k.max(50), EXACT_TOL, seed)?);
    out.push(gram_psd(&torus, 100, seed)?);
    let mut rng = rng_for(seed, "conformality.dphi_points");
    let mut dphi: f64 = 0.0;
    for _ in 0..5 {
        dphi = dphi.max(moment_differential_residual(&torus, &random_point(3, &mut rng)?, cfg.step, seed)?);
    }
    out.push(
        CheckReport::new("conformality.moment_differential", dphi, cfg.fd_tol(1e-6)).with_samples(5).with_seed(seed),
    );
    Ok(out)
}
