//! Adaptive Simpson quadrature for integrands that may fail.

const MAX_DEPTH: u32 = 40;
/// Integrand evaluations allowed per call.
pub const MAX_EVALS: usize = 100_000;

/// The evaluation budget ran out before the tolerance was met.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NotConverged {
    pub a: f64,
    pub b: f64,
}

/// `int_a^b f` to absolute tolerance `tol`. Refinement also stops once the
/// local error estimate is at rounding level.
pub fn adaptive_simpson<E, F>(f: &mut F, a: f64, b: f64, tol: f64) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<NotConverged>,
{
    let mut evals = 3;
    let mut counted = |t: f64| {
        evals += 1;
        if evals > MAX_EVALS {
            return Err(E::from(NotConverged { a, b }));
        }
        f(t)
    };
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (counted(a)?, counted(m)?, counted(b)?);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    refine(&mut counted, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn refine<E, F>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    let noise = 8.0 * f64::EPSILON * (left.abs() + right.abs());
    if depth == 0 || delta.abs() <= 15.0 * tol.max(noise) {
        return Ok(left + right + delta / 15.0);
    }
    Ok(refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_smooth_functions() {
        let r: Result<f64, NotConverged> =
            adaptive_simpson(&mut |t: f64| Ok(t.sin()), 0.0, std::f64::consts::PI, 1e-12);
        assert!((r.unwrap() - 2.0).abs() < 1e-11);
        let r: Result<f64, NotConverged> = adaptive_simpson(&mut |t: f64| Ok((-t * t).exp()), -6.0, 6.0, 1e-12);
        assert!((r.unwrap() - std::f64::consts::PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn propagates_errors() {
        let r = adaptive_simpson(
            &mut |t: f64| {
                if t > 0.7 {
                    Err(NotConverged { a: t, b: t })
                } else {
                    Ok(1.0)
                }
            },
            0.0,
            1.0,
            1e-10,
        );
        assert!(r.is_err());
    }

    #[test]
    fn noisy_integrand_runs_out_of_budget() {
        let mut k = 0u64;
        let r = adaptive_simpson(
            &mut |_t: f64| {
                k = k.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                Ok(1.0 + (k >> 11) as f64 / (1u64 << 53) as f64)
            },
            0.0,
            1.0,
            1e-14,
        );
        assert_eq!(r, Err(NotConverged { a: 0.0, b: 1.0 }));
    }
}
