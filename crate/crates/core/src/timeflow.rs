//! Class of time, duration, proper time and pushforward of trajectories.
//!
//! A duration is the integral, along the lift of a trajectory, of a
//! horizontal 1-form `tau` with `tau_dot = 1`. Two representatives are
//! available: the canonical `theta / theta_dot` built from the metric, and
//! `df / f_dot` for any coordinate clock `f`. On a canonical lift both
//! restrict to `dt`; the functions here do not assume that, they integrate
//! `tau` against the tangent of the base curve.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::dynamics::{Sample, Trajectory};
use crate::error::{check_dim, Error, Result};
use crate::fd::{self, FdStep};
use crate::forces::ScalarField;
use crate::geometry::{Matrix, MetricField, TangentPoint};
use crate::quadrature::adaptive_simpson;

/// Absolute tolerance of every duration / proper-time quadrature.
pub const QUADRATURE_TOL: f64 = 1e-10;
/// `|f_dot|` at or below this stalls a coordinate clock.
pub const CLOCK_TOL: f64 = 1e-12;
/// Image speeds at or below this count as hitting the zero section.
pub const ZERO_SECTION_TOL: f64 = 1e-12;

/// Representative of the class of time.
#[derive(Debug, Clone)]
pub enum TimeFormChoice {
    /// `theta / theta_dot`; needs a metric.
    CanonicalTheta,
    /// `df / f_dot`.
    CoordinateClock(ScalarField),
}

fn integrate_over_samples<F>(tr: &Trajectory, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let span = tr.t1() - tr.t0();
    let mut total = 0.0;
    for w in tr.samples().windows(2) {
        let (a, b) = (w[0].t, w[1].t);
        total += adaptive_simpson(&mut f, a, b, QUADRATURE_TOL * (b - a) / span)?;
    }
    Ok(total)
}

/// `tau` evaluated on the base-curve tangent at `t`.
fn time_form_on_tangent(tr: &Trajectory, choice: &TimeFormChoice, metric: Option<&MetricField>, t: f64) -> Result<f64> {
    let lift = tr.at(t)?;
    let tangent = tr.tangent(t)?;
    match choice {
        TimeFormChoice::CanonicalTheta => {
            let m = metric.ok_or_else(|| Error::Domain("the canonical time form needs a metric".into()))?;
            let p = m.liouville(&lift)?;
            let td = p.pair(&lift.xdot);
            if td.abs() <= m.lightlike_tol() {
                return Err(Error::ZeroSectionOrLightlike { t, theta_dot: td });
            }
            Ok(p.pair(&tangent) / td)
        }
        TimeFormChoice::CoordinateClock(f) => {
            let grad = f.gradient(&lift.x)?;
            let rate: f64 = grad.iter().zip(&lift.xdot).map(|(g, v)| g * v).sum();
            if rate.abs() <= CLOCK_TOL {
                return Err(Error::ClockStalls { t, rate });
            }
            Ok(grad.iter().zip(&tangent).map(|(g, v)| g * v).sum::<f64>() / rate)
        }
    }
}

/// Integral of the chosen time form along the lift of `tr`.
pub fn duration(tr: &Trajectory, choice: &TimeFormChoice, metric: Option<&MetricField>) -> Result<f64> {
    if let Some(m) = metric {
        check_dim("trajectory", m.dim(), tr.dim())?;
    }
    integrate_over_samples(tr, |t| time_form_on_tangent(tr, choice, metric, t))
}

fn rate_at(m: &MetricField, p: &TangentPoint, t: f64) -> Result<f64> {
    let td = m.theta_dot(p)?;
    if td.abs() <= m.lightlike_tol() {
        return Err(Error::ZeroSectionOrLightlike { t, theta_dot: td });
    }
    Ok(td.abs().sqrt())
}

/// Arc length `int sqrt(|theta_dot|) dt` of the lift.
pub fn proper_time(tr: &Trajectory, metric: &MetricField) -> Result<f64> {
    check_dim("trajectory", metric.dim(), tr.dim())?;
    integrate_over_samples(tr, |t| rate_at(metric, &tr.at(t)?, t))
}

/// Proper time elapsed up to each sample; `None` from the first interval on
/// which the lightlike guard trips.
pub fn cumulative_proper_time(tr: &Trajectory, metric: &MetricField) -> Vec<Option<f64>> {
    let span = tr.t1() - tr.t0();
    let mut out = Vec::with_capacity(tr.samples().len());
    let mut acc = Some(0.0);
    if rate_at(metric, tr.first(), tr.t0()).is_err() {
        acc = None;
    }
    out.push(acc);
    for w in tr.samples().windows(2) {
        let (a, b) = (w[0].t, w[1].t);
        acc = acc.and_then(|sum| {
            adaptive_simpson(
                &mut |t| rate_at(metric, &tr.at(t)?, t),
                a,
                b,
                QUADRATURE_TOL * (b - a) / span,
            )
            .ok()
            .map(|piece| sum + piece)
        });
        out.push(acc);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrictnessCheck {
    pub strict: bool,
    pub max_deviation: f64,
}

/// Parameterised by proper time: `max ||theta_dot| - 1| <= tol` over samples.
pub fn is_strictly_relativistic(tr: &Trajectory, metric: &MetricField, tol: f64) -> Result<StrictnessCheck> {
    let mut dev = 0.0_f64;
    for s in tr.samples() {
        dev = dev.max((metric.theta_dot(&s.point)?.abs() - 1.0).abs());
    }
    Ok(StrictnessCheck {
        strict: dev <= tol,
        max_deviation: dev,
    })
}

type MapFn = Arc<dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync>;
type MapJacobianFn = Arc<dyn Fn(&[f64]) -> Result<Matrix> + Send + Sync>;

/// Smooth map `phi: R^m -> R^n` with its Jacobian (analytic or central
/// differences).
#[derive(Clone)]
pub struct SmoothMap {
    dim_in: usize,
    dim_out: usize,
    eval: MapFn,
    jacobian: Option<MapJacobianFn>,
    fd_step: FdStep,
}

impl fmt::Debug for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SmoothMap({} -> {})", self.dim_in, self.dim_out)
    }
}

impl SmoothMap {
    pub fn new<F>(dim_in: usize, dim_out: usize, eval: F) -> Self
    where
        F: Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync + 'static,
    {
        SmoothMap {
            dim_in,
            dim_out,
            eval: Arc::new(eval),
            jacobian: None,
            fd_step: FdStep::Auto,
        }
    }

    pub fn identity(n: usize) -> Self {
        SmoothMap::new(n, n, |x| Ok(x.to_vec())).with_jacobian(move |_| Ok(Matrix::identity(n, n)))
    }

    /// Analytic Jacobian, `dim_out x dim_in`.
    pub fn with_jacobian<F>(mut self, jac: F) -> Self
    where
        F: Fn(&[f64]) -> Result<Matrix> + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(jac));
        self
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim("map input", self.dim_in, x.len())?;
        let y = (self.eval)(x)?;
        check_dim("map output", self.dim_out, y.len())?;
        Ok(y)
    }

    pub fn jacobian(&self, x: &[f64]) -> Result<Matrix> {
        check_dim("map input", self.dim_in, x.len())?;
        match &self.jacobian {
            Some(j) => j(x),
            None => {
                let cols = fd::jacobian_columns(self.fd_step, x, |p| self.eval(p))?;
                Ok(Matrix::from_fn(self.dim_out, self.dim_in, |i, k| cols[k][i]))
            }
        }
    }

    /// Tangent map `phi_*`.
    pub fn push(&self, v: &TangentPoint) -> Result<TangentPoint> {
        let y = self.eval(&v.x)?;
        let j = self.jacobian(&v.x)?;
        let w = (0..self.dim_out)
            .map(|i| (0..self.dim_in).map(|k| j[(i, k)] * v.xdot[k]).sum())
            .collect();
        Ok(TangentPoint::new(y, w))
    }
}

/// Image trajectory plus the zero-section diagnostics.
#[derive(Debug, Clone)]
pub struct Pushforward {
    pub trajectory: Trajectory,
    pub zero_section_hit: bool,
    pub min_image_speed: f64,
}

/// `t -> phi_*(Gamma(t))` on the same time grid.
pub fn pushforward_trajectory(phi: &SmoothMap, tr: &Trajectory) -> Result<Pushforward> {
    check_dim("pushforward source", phi.dim_in, tr.dim())?;
    let mut samples = Vec::with_capacity(tr.samples().len());
    let mut min_speed = f64::INFINITY;
    for s in tr.samples() {
        let image = phi.push(&s.point)?;
        let speed = image.xdot.iter().map(|v| v * v).sum::<f64>().sqrt();
        min_speed = min_speed.min(speed);
        samples.push(Sample { t: s.t, point: image });
    }
    let (map, src) = (phi.clone(), tr.clone());
    let lift = Arc::new(move |t| map.push(&src.at(t)?));
    // chain rule on the source base curve: d(phi(x(t)))/dt = Dphi x'(t)
    let (map, src) = (phi.clone(), tr.clone());
    let tangent = Arc::new(move |t| {
        let x = src.position(t)?;
        let v = src.tangent(t)?;
        Ok(map.push(&TangentPoint::new(x, v))?.xdot)
    });
    let trajectory = Trajectory::from_samples_curve_and_tangent(samples, lift, tangent)?;
    Ok(Pushforward {
        trajectory,
        zero_section_hit: min_speed <= ZERO_SECTION_TOL,
        min_image_speed: min_speed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PushforwardReport {
    pub duration_src: f64,
    /// `None` when the image meets the zero section.
    pub duration_img: Option<f64>,
    pub zero_section_hit: bool,
    pub min_image_speed: f64,
    pub agree: bool,
}

/// Durations of `tr` and `phi_*(tr)` under coordinate clocks.
pub fn duration_invariance_check(
    phi: &SmoothMap,
    tr: &Trajectory,
    clock_src: &ScalarField,
    clock_img: &ScalarField,
    tol: f64,
) -> Result<PushforwardReport> {
    let pf = pushforward_trajectory(phi, tr)?;
    let duration_src = duration(tr, &TimeFormChoice::CoordinateClock(clock_src.clone()), None)?;
    let duration_img = if pf.zero_section_hit {
        None
    } else {
        Some(duration(
            &pf.trajectory,
            &TimeFormChoice::CoordinateClock(clock_img.clone()),
            None,
        )?)
    };
    Ok(PushforwardReport {
        duration_src,
        duration_img,
        zero_section_hit: pf.zero_section_hit,
        min_image_speed: pf.min_image_speed,
        agree: duration_img.is_some_and(|d| (d - duration_src).abs() <= tol),
    })
}
