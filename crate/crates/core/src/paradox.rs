//! Two strictly relativistic test particles on Minkowski `R^4` joining the
//! same events `A` and `B` with different proper times.
//!
//! The charged particle (charge/mass 1, `c = 1`) circles in a unit magnetic
//! field along the x3 axis, `alpha = xdot1 dx2 - xdot2 dx1`, giving `Gamma'`;
//! the neutral one moves on a straight line `Gamma''`. A mechanical system
//! carrying both would impose one duration on both, which the proper times
//! contradict whenever `lambda != mu`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::dynamics::{geodesic_equation, integrate, newton_equation, Trajectory};
use crate::error::{Error, Result};
use crate::forces::{lorentz_force, ForceForm, TwoForm};
use crate::format::{sig17, sig17_opt};
use crate::geometry::{MetricField, TangentPoint};
use crate::timeflow::{duration, is_strictly_relativistic, proper_time, TimeFormChoice};

/// Samples stored on closed-form curves.
pub const CLOSED_FORM_SAMPLES: usize = 257;
/// Strictness and endpoint tolerance used by the report.
pub const REPORT_TOL: f64 = 1e-9;
pub const INTEGRATED_REL_TOL: f64 = 1e-12;
pub const INTEGRATED_ABS_TOL: f64 = 1e-14;

/// `(lambda, mu)` with `lambda = sqrt(1 + eta^2)` and
/// `mu = 1 / sqrt(1 - 4 eta^2 / (pi^2 (1 + eta^2)))`.
pub fn speed_constants(eta: f64) -> (f64, f64) {
    let lambda = (1.0 + eta * eta).sqrt();
    let mu = 1.0 / (1.0 - 4.0 * eta * eta / (PI * PI * (1.0 + eta * eta))).sqrt();
    (lambda, mu)
}

/// Minkowski `R^4` with the uniform magnetic field `F_12 = 1/2`.
pub fn charged_system() -> (MetricField, ForceForm) {
    (MetricField::minkowski(4), lorentz_force(&TwoForm::single(4, 1, 2, 0.5)))
}

pub fn point_a(eta: f64) -> Vec<f64> {
    vec![0.0, eta, 0.0, 0.0]
}

pub fn point_b(eta: f64) -> Vec<f64> {
    let (lambda, _) = speed_constants(eta);
    vec![lambda * PI, -eta, 0.0, 0.0]
}

/// `Gamma'` at `t` for an arbitrary time-rate `lambda`.
pub fn gamma_prime_at(eta: f64, lambda: f64, t: f64) -> TangentPoint {
    let (s, c) = t.sin_cos();
    TangentPoint::new(
        vec![lambda * t, eta * c, eta * s, 0.0],
        vec![lambda, -eta * s, eta * c, 0.0],
    )
}

/// `Gamma'` on `[0, pi]` with `lambda = sqrt(1 + eta^2)`.
pub fn gamma_prime(eta: f64) -> Trajectory {
    gamma_prime_with_rate(eta, speed_constants(eta).0)
}

/// `Gamma'` with a free time-rate; strictly relativistic only when
/// `lambda^2 - eta^2 = 1`.
pub fn gamma_prime_with_rate(eta: f64, lambda: f64) -> Trajectory {
    Trajectory::from_curve(0.0, PI, CLOSED_FORM_SAMPLES, move |t| {
        Ok(gamma_prime_at(eta, lambda, t))
    })
    .expect("pi > 0")
}

/// Constant velocity of `Gamma''`.
pub fn gamma_doubleprime_velocity(eta: f64) -> Vec<f64> {
    let (lambda, mu) = speed_constants(eta);
    vec![mu, -2.0 * mu * eta / (PI * lambda), 0.0, 0.0]
}

pub fn gamma_doubleprime_at(eta: f64, t: f64) -> TangentPoint {
    let v = gamma_doubleprime_velocity(eta);
    TangentPoint::new(vec![v[0] * t, v[1] * t + eta, 0.0, 0.0], v)
}

/// `Gamma''` on `[0, lambda pi / mu]`.
pub fn gamma_doubleprime(eta: f64) -> Trajectory {
    let (lambda, mu) = speed_constants(eta);
    Trajectory::from_curve(0.0, lambda * PI / mu, CLOSED_FORM_SAMPLES, move |t| {
        Ok(gamma_doubleprime_at(eta, t))
    })
    .expect("positive span")
}

fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s <= PI {
        Ok(())
    } else {
        Err(Error::Domain(format!("C = Gamma'(s) needs s in (0, pi], got {s}")))
    }
}

/// `2 (1 - cos s) / s^2`, by its Taylor series near zero.
fn chord_factor(s: f64) -> f64 {
    if s.abs() < 1e-3 {
        let s2 = s * s;
        1.0 - s2 / 12.0 + s2 * s2 / 360.0
    } else {
        let half = (0.5 * s).sin() / (0.5 * s);
        half * half
    }
}

/// Speed `sqrt(|theta_dot|)` of the straight line `Gamma_C` from `A` to
/// `Gamma'(s)` taking parameter time `s`.
pub fn k_c(eta: f64, s: f64) -> Result<f64> {
    check_s(s)?;
    Ok((1.0 + eta * eta * (1.0 - chord_factor(s))).sqrt())
}

/// `Gamma_C` on `[0, s]` and its speed `k_C`.
pub fn gamma_c(eta: f64, s: f64) -> Result<(Trajectory, f64)> {
    let k = k_c(eta, s)?;
    let lambda = (1.0 + eta * eta).sqrt();
    let (sin_half, cos_half) = (0.5 * s).sin_cos();
    // (cos s - 1) / s and sin s / s without cancellation
    let v1 = -2.0 * eta * sin_half * sin_half / s;
    let v2 = 2.0 * eta * sin_half * cos_half / s;
    let tr = Trajectory::from_curve(0.0, s, CLOSED_FORM_SAMPLES, move |t| {
        Ok(TangentPoint::new(
            vec![lambda * t, v1 * t + eta, v2 * t, 0.0],
            vec![lambda, v1, v2, 0.0],
        ))
    })?;
    Ok((tr, k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportMode {
    ClosedForm,
    Integrated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParadoxReport {
    pub mode: ReportMode,
    #[serde(serialize_with = "sig17")]
    pub eta: f64,
    #[serde(serialize_with = "sig17")]
    pub lambda: f64,
    #[serde(serialize_with = "sig17")]
    pub mu: f64,
    #[serde(serialize_with = "sig17")]
    pub duration_prime: f64,
    #[serde(serialize_with = "sig17")]
    pub duration_doubleprime: f64,
    #[serde(serialize_with = "sig17")]
    pub proper_prime: f64,
    #[serde(serialize_with = "sig17")]
    pub proper_doubleprime: f64,
    pub strict_prime: bool,
    pub strict_doubleprime: bool,
    #[serde(serialize_with = "sig17")]
    pub mismatch: f64,
    pub endpoints_agree: bool,
    /// Largest endpoint distance to `A` or `B` (sup norm).
    #[serde(serialize_with = "sig17_opt")]
    pub endpoint_error: Option<f64>,
}

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn report_from(
    eta: f64,
    mode: ReportMode,
    prime: &Trajectory,
    doubleprime: &Trajectory,
    metric: &MetricField,
) -> Result<ParadoxReport> {
    let (lambda, mu) = speed_constants(eta);
    let duration_prime = duration(prime, &TimeFormChoice::CanonicalTheta, Some(metric))?;
    let duration_doubleprime = duration(doubleprime, &TimeFormChoice::CanonicalTheta, Some(metric))?;
    let (a, b) = (point_a(eta), point_b(eta));
    let endpoint_error = [
        sup_dist(&prime.first().x, &a),
        sup_dist(&prime.last().x, &b),
        sup_dist(&doubleprime.first().x, &a),
        sup_dist(&doubleprime.last().x, &b),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok(ParadoxReport {
        mode,
        eta,
        lambda,
        mu,
        duration_prime,
        duration_doubleprime,
        proper_prime: proper_time(prime, metric)?,
        proper_doubleprime: proper_time(doubleprime, metric)?,
        strict_prime: is_strictly_relativistic(prime, metric, REPORT_TOL)?.strict,
        strict_doubleprime: is_strictly_relativistic(doubleprime, metric, REPORT_TOL)?.strict,
        mismatch: (duration_prime - duration_doubleprime).abs(),
        endpoints_agree: endpoint_error <= REPORT_TOL,
        endpoint_error: Some(endpoint_error),
    })
}

/// Durations and proper times of both particles, either from the closed
/// forms or by integrating the two equations of motion.
pub fn paradox_report(eta: f64, mode: ReportMode) -> Result<ParadoxReport> {
    if !eta.is_finite() {
        return Err(Error::Domain(format!("eta must be finite, got {eta}")));
    }
    let (lambda, mu) = speed_constants(eta);
    let (metric, force) = charged_system();
    match mode {
        ReportMode::ClosedForm => {
            let theta_prime = lambda * lambda - eta * eta;
            let theta_doubleprime = mu * mu * (1.0 - 4.0 * eta * eta / (PI * PI * lambda * lambda));
            let duration_prime = PI;
            let duration_doubleprime = lambda * PI / mu;
            let endpoint_error = [
                sup_dist(&gamma_prime_at(eta, lambda, 0.0).x, &point_a(eta)),
                sup_dist(&gamma_prime_at(eta, lambda, PI).x, &point_b(eta)),
                sup_dist(&gamma_doubleprime_at(eta, 0.0).x, &point_a(eta)),
                sup_dist(&gamma_doubleprime_at(eta, duration_doubleprime).x, &point_b(eta)),
            ]
            .into_iter()
            .fold(0.0, f64::max);
            Ok(ParadoxReport {
                mode,
                eta,
                lambda,
                mu,
                duration_prime,
                duration_doubleprime,
                proper_prime: duration_prime * theta_prime.abs().sqrt(),
                proper_doubleprime: duration_doubleprime * theta_doubleprime.abs().sqrt(),
                strict_prime: (theta_prime.abs() - 1.0).abs() <= REPORT_TOL,
                strict_doubleprime: (theta_doubleprime.abs() - 1.0).abs() <= REPORT_TOL,
                mismatch: (duration_prime - duration_doubleprime).abs(),
                endpoints_agree: endpoint_error <= REPORT_TOL,
                endpoint_error: Some(endpoint_error),
            })
        }
        ReportMode::Integrated => {
            let a = point_a(eta);
            let charged = newton_equation(&metric, &force)?;
            let prime = integrate(
                &charged,
                &TangentPoint::new(a.clone(), vec![lambda, 0.0, eta, 0.0]),
                0.0,
                PI,
                INTEGRATED_REL_TOL,
                INTEGRATED_ABS_TOL,
            )?;
            let doubleprime = integrate(
                &geodesic_equation(&metric),
                &TangentPoint::new(a, gamma_doubleprime_velocity(eta)),
                0.0,
                lambda * PI / mu,
                INTEGRATED_REL_TOL,
                INTEGRATED_ABS_TOL,
            )?;
            report_from(eta, mode, &prime, &doubleprime, &metric)
        }
    }
}

/// Same report computed by quadrature along the closed-form curves.
pub fn paradox_report_by_quadrature(eta: f64) -> Result<ParadoxReport> {
    let (metric, _) = charged_system();
    report_from(
        eta,
        ReportMode::ClosedForm,
        &gamma_prime(eta),
        &gamma_doubleprime(eta),
        &metric,
    )
}
