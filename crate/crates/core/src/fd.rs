//! Finite-difference helpers.

use crate::error::{GeomError, Result};

/// `(f(h) - f(-h)) / 2h`.
pub fn central_diff<F>(f: F, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    Ok((f(h)? - f(-h)?) / (2.0 * h))
}

/// Central difference at `h` and `h/2`, combined to cancel the `h²` term.
pub fn central_diff_richardson<F>(f: F, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let coarse = central_diff(&f, h)?;
    let fine = central_diff(&f, 0.5 * h)?;
    Ok(richardson(coarse, fine))
}

/// `(4·fine - coarse)/3` for a second-order scheme sampled at `h` and `h/2`.
pub fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

/// Observed order `log₂(e(h)/e(h/2))`.
pub fn observed_order(err_coarse: f64, err_fine: f64) -> f64 {
    (err_coarse / err_fine).log2()
}

/// Checks `0 < step < 0.1`.
pub fn validate_step(step: f64) -> Result<()> {
    if step > 0.0 && step < 0.1 && step.is_finite() {
        Ok(())
    } else {
        Err(GeomError::InvalidInput(format!("step {step} must lie in (0, 0.1)")))
    }
}
