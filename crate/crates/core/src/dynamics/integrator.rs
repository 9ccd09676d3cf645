//! Dormand-Prince 5(4) with error-per-unit-step control and a PI step-size
//! controller. The state is `(x, xdot)`; the position block always advances
//! by the velocity, so every solution is the lift of its base curve.

use crate::error::{Error, Result};
use crate::geometry::TangentPoint;

use super::trajectory::{IntegrationStats, Sample, Trajectory};
use super::SecondOrderEq;

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
// PI gains for an error estimate that scales like h^4 per unit step
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.25 - 0.75 * BETA;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub initial_step: Option<f64>,
    pub max_steps: usize,
}

impl IntegrateOptions {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Self {
        IntegrateOptions {
            rel_tol,
            abs_tol,
            initial_step: None,
            max_steps: 1_000_000,
        }
    }
}

struct Rhs<'a> {
    eq: &'a SecondOrderEq,
    n: usize,
    evaluations: usize,
}

impl Rhs<'_> {
    fn eval(&mut self, y: &[f64]) -> Result<Vec<f64>> {
        self.evaluations += 1;
        let p = TangentPoint::new(y[..self.n].to_vec(), y[self.n..].to_vec());
        let a = self.eq.accel(&p)?;
        let mut dy = p.xdot;
        dy.extend(a);
        Ok(dy)
    }
}

fn weighted_rms(e: &[f64], y0: &[f64], y1: &[f64], rel: f64, abs: f64) -> f64 {
    let s: f64 = e
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sc = abs + rel * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (s / e.len() as f64).sqrt()
}

fn initial_step(rhs: &mut Rhs, y0: &[f64], f0: &[f64], span: f64, opts: &IntegrateOptions) -> Result<f64> {
    let d0 = weighted_rms(y0, y0, y0, opts.rel_tol, opts.abs_tol);
    let d1 = weighted_rms(f0, y0, y0, opts.rel_tol, opts.abs_tol);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + h0 * f).collect();
    let f1 = rhs.eval(&y1)?;
    let df: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = weighted_rms(&df, y0, y0, opts.rel_tol, opts.abs_tol) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    Ok((100.0 * h0).min(h1).min(span))
}

/// Integrates `eq` from `init` over `[t0, t1]` at the given tolerances.
pub fn integrate(
    eq: &SecondOrderEq,
    init: &TangentPoint,
    t0: f64,
    t1: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Trajectory> {
    integrate_with(eq, init, t0, t1, &IntegrateOptions::new(rel_tol, abs_tol))
}

pub fn integrate_with(
    eq: &SecondOrderEq,
    init: &TangentPoint,
    t0: f64,
    t1: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    let n = eq.dim();
    crate::error::check_dim("initial position", n, init.x.len())?;
    crate::error::check_dim("initial velocity", n, init.xdot.len())?;
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::Domain(format!("integration needs t1 > t0, got [{t0}, {t1}]")));
    }
    if !(opts.rel_tol > 0.0) || !(opts.abs_tol >= 0.0) {
        return Err(Error::Domain("tolerances must be positive".into()));
    }

    let mut rhs = Rhs { eq, n, evaluations: 0 };
    let mut y: Vec<f64> = init.x.iter().chain(&init.xdot).copied().collect();
    let mut f = rhs.eval(&y)?;
    let span = t1 - t0;
    let mut h = match opts.initial_step {
        Some(h) => h.min(span),
        None => initial_step(&mut rhs, &y, &f, span, opts)?,
    };

    let mut t = t0;
    let mut samples = vec![Sample { t, point: init.clone() }];
    let mut accel = vec![f[n..].to_vec()];
    let (mut accepted, mut rejected) = (0usize, 0usize);
    let mut err_prev = 1e-4_f64;
    let mut last_rejected = false;
    let mut k: [Vec<f64>; 7] = Default::default();
    let mut stage = vec![0.0; 2 * n];

    while t < t1 {
        if accepted + rejected >= opts.max_steps {
            return Err(Error::TooManySteps {
                t,
                max_steps: opts.max_steps,
            });
        }
        let last = t + 1.01 * h >= t1;
        if last {
            h = t1 - t;
        }
        if h <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { t, h });
        }

        k[0] = f.clone();
        for s in 1..7 {
            for i in 0..2 * n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                stage[i] = y[i] + h * acc;
            }
            k[s] = rhs.eval(&stage)?;
        }
        // stage 7 is evaluated at the fifth-order solution (FSAL)
        let y_new = stage.clone();
        let e: Vec<f64> = (0..2 * n)
            .map(|i| h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>())
            .collect();
        let err = weighted_rms(&e, &y, &y_new, opts.rel_tol, opts.abs_tol) / h;

        if err <= 1.0 {
            accepted += 1;
            t = if last { t1 } else { t + h };
            y = y_new;
            f = k[6].clone();
            samples.push(Sample {
                t,
                point: TangentPoint::new(y[..n].to_vec(), y[n..].to_vec()),
            });
            accel.push(f[n..].to_vec());
            let mut fac = SAFETY * err.max(1e-10).powf(-ALPHA) * err_prev.powf(BETA);
            fac = fac.clamp(FAC_MIN, FAC_MAX);
            if last_rejected {
                fac = fac.min(1.0);
            }
            h *= fac;
            err_prev = err.max(1e-4);
            last_rejected = false;
        } else {
            rejected += 1;
            h *= (SAFETY * err.powf(-0.25)).max(FAC_MIN);
            last_rejected = true;
        }
    }

    Trajectory::from_hermite(
        samples,
        accel,
        Some(IntegrationStats {
            accepted_steps: accepted,
            rejected_steps: rejected,
            evaluations: rhs.evaluations,
            rel_tol: opts.rel_tol,
            abs_tol: opts.abs_tol,
        }),
    )
}
