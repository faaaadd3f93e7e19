//! Fourth-order central finite-difference stencils.
//!
//! These are the numerical oracle for every derivative identity the crate
//! checks; none of the model code differentiates through them.

use crate::error::Result;

/// Default relative step for first derivatives.
pub const DEFAULT_STEP: f64 = 1e-5;

/// Step `base * max(1, |at|)`.
pub fn scaled_step(base: f64, at: f64) -> f64 {
    base * at.abs().max(1.0)
}

/// `f'(x)` from the five-point stencil `(-f(x+2h) + 8f(x+h) - 8f(x-h) + f(x-2h)) / 12h`.
pub fn derivative<F>(f: F, x: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let fp1 = f(x + h)?;
    let fm1 = f(x - h)?;
    let fp2 = f(x + 2.0 * h)?;
    let fm2 = f(x - 2.0 * h)?;
    Ok((8.0 * (fp1 - fm1) - (fp2 - fm2)) / (12.0 * h))
}

/// `f''(x)` from `(-f(x+2h) + 16f(x+h) - 30f(x) + 16f(x-h) - f(x-2h)) / 12h^2`.
pub fn second_derivative<F>(f: F, x: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let f0 = f(x)?;
    let fp1 = f(x + h)?;
    let fm1 = f(x - h)?;
    let fp2 = f(x + 2.0 * h)?;
    let fm2 = f(x - 2.0 * h)?;
    Ok((-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h))
}
