//! CSV series for convergence and dilation plots.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use hkm_core::calabi::{CalabiStructure, TBPoint};
use hkm_core::gibbons::{gh_sample, lb_r4, phi, random_r4, GHMetric, R4Point};
use hkm_core::matkit::random_su_from;
use hkm_core::moment::{hamiltonian_residual, laplace_beltrami, moment_map, morphism_sample, sweep_points, Scheme};
use hkm_core::sampling::{random_point, random_tangent, rng_for};
use hkm_core::Result;

use crate::{RunError, Suite, SuiteConfig, UsageError};

/// Step sizes for the convergence series, halving each time.
pub const CONVERGENCE_STEPS: [f64; 5] = [0.04, 0.02, 0.01, 0.005, 0.0025];
/// Points per convergence series; kept small so plotting stays quick.
pub const CONVERGENCE_POINTS: usize = 4;
/// Scales along a ray for the dilation series.
pub const SLICE_SCALES: [f64; 12] = [0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0];

fn table(header: &str, rows: &[Vec<f64>]) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| format!("{v:e}")).collect();
        writeln!(s, "{}", cells.join(",")).expect("write to string");
    }
    s
}

/// `(step, aggregated raw Laplacian, aggregated Hamiltonian residual)` for the moment map.
pub fn moment_convergence(cfg: &SuiteConfig) -> Result<String> {
    let cs = CalabiStructure::default();
    let mut rng = rng_for(cfg.seed, "plot.moment");
    let u = random_su_from(cfg.n + 1, &mut rng);
    let points = sweep_points(cfg.n, CONVERGENCE_POINTS, &mut rng)?;
    let mut rows = Vec::new();
    for h in CONVERGENCE_STEPS {
        let (mut lap, mut ham) = (0.0, 0.0);
        for p in &points {
            for j in 0..3 {
                let f = |q: &TBPoint| Ok(moment_map(&cs, &u, q)?.get(j));
                lap += laplace_beltrami(&cs, p, &f, h)?.coarse.abs();
            }
            ham += hamiltonian_residual(&cs, &u, p, h, Scheme::Central)?;
        }
        rows.push(vec![h, lap, ham]);
    }
    Ok(table("step,laplacian,hamiltonian", &rows))
}

/// `(t, λ²)` along `t ↦ (A, tX)` in TCP^n.
pub fn moment_dilation(cfg: &SuiteConfig) -> Result<String> {
    let cs = CalabiStructure::default();
    let mut rng = rng_for(cfg.seed, "plot.moment_slice");
    let u = random_su_from(cfg.n + 1, &mut rng);
    let a = random_point(cfg.n + 1, &mut rng)?;
    let x = random_tangent(&a, &mut rng)?;
    let x = x.scale(1.0 / x.norm());
    let mut rows = Vec::new();
    for t in SLICE_SCALES {
        let p = TBPoint::from_tangent(x.scale(t));
        rows.push(vec![t, morphism_sample(&cs, &u, &p, cfg.step)?.dilation]);
    }
    Ok(table("t,dilation", &rows))
}

/// `(step, aggregated raw Laplacian of φ)` for each Gibbons–Hawking parameter.
pub fn gibbons_convergence(cfg: &SuiteConfig) -> Result<String> {
    let params = cfg.gh_a.map_or(crate::suites::GH_PARAMS.to_vec(), |a| vec![a]);
    let mut rng = rng_for(cfg.seed, "plot.gibbons");
    let points: Vec<R4Point> = (0..CONVERGENCE_POINTS).map(|_| random_r4(0.1, 2.0, &mut rng)).collect();
    let mut rows = Vec::new();
    for h in CONVERGENCE_STEPS {
        let mut row = vec![h];
        for a in &params {
            let g = GHMetric::new(*a)?;
            let mut lap = 0.0;
            for x in &points {
                for k in 0..3 {
                    let f = |y: &[f64]| Ok(phi(y)[k]);
                    lap += lb_r4(&g, &f, x, h)?.coarse.abs();
                }
            }
            row.push(lap);
        }
        rows.push(row);
    }
    let header: Vec<String> =
        std::iter::once("step".to_string()).chain(params.iter().map(|a| format!("a{a}"))).collect();
    Ok(table(&header.join(","), &rows))
}

/// `(t, λ²)` along a ray in ℝ⁴ for each parameter.
pub fn gibbons_dilation(cfg: &SuiteConfig) -> Result<String> {
    let params = cfg.gh_a.map_or(crate::suites::GH_PARAMS.to_vec(), |a| vec![a]);
    let dir = random_r4(1.0, 1.0 + 1e-9, &mut rng_for(cfg.seed, "plot.gibbons_slice")).coords();
    let step = (10.0 * cfg.step).min(5e-2);
    let mut rows = Vec::new();
    for t in SLICE_SCALES {
        let x = R4Point::new(dir.map(|c| t * c))?;
        let mut row = vec![t];
        for a in &params {
            row.push(gh_sample(&GHMetric::new(*a)?, &x, step)?.dilation);
        }
        rows.push(row);
    }
    let header: Vec<String> = std::iter::once("t".to_string()).chain(params.iter().map(|a| format!("a{a}"))).collect();
    Ok(table(&header.join(","), &rows))
}

type Job = (&'static str, fn(&SuiteConfig) -> Result<String>);

/// Writes the CSVs for the selected suites into `dir`; suites without plots are skipped.
pub fn write_plots(cfg: &SuiteConfig, dir: &Path) -> std::result::Result<Vec<PathBuf>, RunError> {
    cfg.validate()?;
    let mut jobs: Vec<Job> = Vec::new();
    if cfg.suites.contains(&Suite::Moment) {
        jobs.push(("moment_convergence.csv", moment_convergence));
        jobs.push(("moment_dilation.csv", moment_dilation));
    }
    if cfg.suites.contains(&Suite::Gibbons) {
        jobs.push(("gibbons_convergence.csv", gibbons_convergence));
        jobs.push(("gibbons_dilation.csv", gibbons_dilation));
    }
    if jobs.is_empty() {
        return Ok(Vec::new());
    }
    fs::create_dir_all(dir).map_err(|e| UsageError(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for (name, job) in jobs {
        let path = dir.join(name);
        let body = job(cfg)?;
        fs::write(&path, body).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
        written.push(path);
    }
    Ok(written)
}
