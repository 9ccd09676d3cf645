//! Central finite differences with the crate-wide step policy.
//!
//! The default step for coordinate `k` is `cbrt(eps) * max(1, |x_k|)`, the
//! usual balance between truncation and rounding error for a first
//! derivative. A fixed step can be forced, which is what the
//! `RELMECH_FD_STEP` environment hook maps onto.

use crate::error::Result;

/// Environment variable that overrides the step policy.
pub const FD_STEP_ENV: &str = "RELMECH_FD_STEP";

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum FdStep {
    #[default]
    Auto,
    /// Absolute step used for every coordinate.
    Fixed(f64),
}

impl FdStep {
    /// Reads `RELMECH_FD_STEP`; falls back to [`FdStep::Auto`] when unset or
    /// not a positive finite number.
    pub fn from_env() -> Self {
        std::env::var(FD_STEP_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|h| h.is_finite() && *h > 0.0)
            .map(FdStep::Fixed)
            .unwrap_or(FdStep::Auto)
    }

    pub fn step(&self, xk: f64) -> f64 {
        match *self {
            FdStep::Auto => f64::EPSILON.cbrt() * xk.abs().max(1.0),
            FdStep::Fixed(h) => h,
        }
    }
}

/// Partial derivatives of a vector-valued function: `out[k][i] = d f_i / d x_k`.
pub fn jacobian_columns<F>(policy: FdStep, x: &[f64], mut f: F) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let mut probe = x.to_vec();
    let mut cols = Vec::with_capacity(x.len());
    for k in 0..x.len() {
        let h = policy.step(x[k]);
        probe[k] = x[k] + h;
        let hi = f(&probe)?;
        probe[k] = x[k] - h;
        let lo = f(&probe)?;
        probe[k] = x[k];
        // use the representable spacing actually realised
        let span = (x[k] + h) - (x[k] - h);
        cols.push(hi.iter().zip(&lo).map(|(a, b)| (a - b) / span).collect());
    }
    Ok(cols)
}

/// Gradient of a scalar function.
pub fn gradient<F>(policy: FdStep, x: &[f64], mut f: F) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let cols = jacobian_columns(policy, x, |p| Ok(vec![f(p)?]))?;
    Ok(cols.into_iter().map(|c| c[0]).collect())
}
