use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::TangentPoint;

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub point: TangentPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegrationStats {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub evaluations: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

/// Exact evaluator of a lifted curve, `t -> (x(t), xdot(t))`.
pub type CurveFn = Arc<dyn Fn(f64) -> Result<TangentPoint> + Send + Sync>;
/// `t -> dx/dt` of the base curve.
pub type TangentFn = Arc<dyn Fn(f64) -> Result<Vec<f64>> + Send + Sync>;

#[derive(Clone)]
enum Dense {
    /// Quintic Hermite on `(x, xdot, xddot)` at both ends of every step;
    /// `xdot` between samples is the derivative of the position polynomial.
    Hermite { accel: Vec<Vec<f64>> },
    /// Exact lift, plus the base-curve tangent when it is known in closed
    /// form (otherwise differenced).
    Curve(CurveFn, Option<TangentFn>),
}

/// A parameterised solution curve together with its lift to the tangent
/// bundle.
#[derive(Clone)]
pub struct Trajectory {
    samples: Vec<Sample>,
    dense: Dense,
    stats: Option<IntegrationStats>,
}

impl fmt::Debug for Trajectory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Trajectory")
            .field("samples", &self.samples.len())
            .field("span", &(self.t0(), self.t1()))
            .field("stats", &self.stats)
            .finish()
    }
}

fn check_increasing(samples: &[Sample]) -> Result<()> {
    if samples.len() < 2 {
        return Err(Error::Domain("a trajectory needs at least two samples".into()));
    }
    if samples.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(Error::Domain("sample times must be strictly increasing".into()));
    }
    Ok(())
}

impl Trajectory {
    /// Integrator output: samples plus the acceleration at each sample.
    pub fn from_hermite(samples: Vec<Sample>, accel: Vec<Vec<f64>>, stats: Option<IntegrationStats>) -> Result<Self> {
        check_increasing(&samples)?;
        if accel.len() != samples.len() {
            return Err(Error::DimensionMismatch {
                what: "accelerations per sample",
                expected: samples.len(),
                found: accel.len(),
            });
        }
        Ok(Trajectory {
            samples,
            dense: Dense::Hermite { accel },
            stats,
        })
    }

    /// Closed-form curve on `[t0, t1]` sampled at `n` uniform times.
    pub fn from_curve<F>(t0: f64, t1: f64, n: usize, curve: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<TangentPoint> + Send + Sync + 'static,
    {
        if !(t1 > t0) || n < 2 {
            return Err(Error::Domain(format!(
                "closed-form curve needs t1 > t0 and n >= 2 (got [{t0}, {t1}], n = {n})"
            )));
        }
        let mut samples = Vec::with_capacity(n);
        for i in 0..n {
            let t = if i + 1 == n {
                t1
            } else {
                t0 + (t1 - t0) * i as f64 / (n - 1) as f64
            };
            samples.push(Sample { t, point: curve(t)? });
        }
        Trajectory::from_samples_and_curve(samples, Arc::new(curve))
    }

    /// Samples with an exact evaluator for the dense output.
    pub fn from_samples_and_curve(samples: Vec<Sample>, curve: CurveFn) -> Result<Self> {
        check_increasing(&samples)?;
        Ok(Trajectory {
            samples,
            dense: Dense::Curve(curve, None),
            stats: None,
        })
    }

    /// Samples with exact evaluators for both the lift and the base-curve
    /// tangent.
    pub fn from_samples_curve_and_tangent(samples: Vec<Sample>, curve: CurveFn, tangent: TangentFn) -> Result<Self> {
        check_increasing(&samples)?;
        Ok(Trajectory {
            samples,
            dense: Dense::Curve(curve, Some(tangent)),
            stats: None,
        })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn dim(&self) -> usize {
        self.samples[0].point.dim()
    }

    pub fn t0(&self) -> f64 {
        self.samples[0].t
    }

    pub fn t1(&self) -> f64 {
        self.samples[self.samples.len() - 1].t
    }

    pub fn first(&self) -> &TangentPoint {
        &self.samples[0].point
    }

    pub fn last(&self) -> &TangentPoint {
        &self.samples[self.samples.len() - 1].point
    }

    pub fn stats(&self) -> Option<&IntegrationStats> {
        self.stats.as_ref()
    }

    /// Lift `(x(t), xdot(t))`. Times slightly outside the span extrapolate
    /// the end pieces.
    pub fn at(&self, t: f64) -> Result<TangentPoint> {
        match &self.dense {
            Dense::Curve(f, _) => f(t),
            Dense::Hermite { accel } => Ok(self.hermite(accel, t)),
        }
    }

    pub fn position(&self, t: f64) -> Result<Vec<f64>> {
        Ok(self.at(t)?.x)
    }

    /// Tangent of the base curve, `dx/dt`. Integrator output differentiates
    /// the dense position polynomial exactly. A closed-form curve uses its
    /// tangent evaluator when it has one and otherwise a fourth-order central
    /// difference of [`Trajectory::position`]; its lift's velocity components
    /// are never consulted.
    pub fn tangent(&self, t: f64) -> Result<Vec<f64>> {
        match &self.dense {
            Dense::Hermite { accel } => return Ok(self.hermite(accel, t).xdot),
            Dense::Curve(_, Some(tangent)) => return tangent(t),
            Dense::Curve(_, None) => {}
        }
        let h = 1e-4 * t.abs().max(1.0);
        let p2 = self.position(t + 2.0 * h)?;
        let p1 = self.position(t + h)?;
        let m1 = self.position(t - h)?;
        let m2 = self.position(t - 2.0 * h)?;
        Ok((0..p1.len())
            .map(|i| (-p2[i] + 8.0 * p1[i] - 8.0 * m1[i] + m2[i]) / (12.0 * h))
            .collect())
    }

    fn hermite(&self, accel: &[Vec<f64>], t: f64) -> TangentPoint {
        let s = &self.samples;
        let k = s.partition_point(|smp| smp.t <= t).clamp(1, s.len() - 1) - 1;
        if s[k].t == t {
            return s[k].point.clone();
        }
        let (a, b) = (&s[k], &s[k + 1]);
        let h = b.t - a.t;
        let u = (t - a.t) / h;
        let (u2, u3, u4, u5) = (u * u, u * u * u, u * u * u * u, u * u * u * u * u);
        let w = [
            1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5,
            u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5,
            0.5 * u2 - 1.5 * u3 + 1.5 * u4 - 0.5 * u5,
            0.5 * u3 - u4 + 0.5 * u5,
            -4.0 * u3 + 7.0 * u4 - 3.0 * u5,
            10.0 * u3 - 15.0 * u4 + 6.0 * u5,
        ];
        let dw = [
            -30.0 * u2 + 60.0 * u3 - 30.0 * u4,
            1.0 - 18.0 * u2 + 32.0 * u3 - 15.0 * u4,
            u - 4.5 * u2 + 6.0 * u3 - 2.5 * u4,
            1.5 * u2 - 4.0 * u3 + 2.5 * u4,
            -12.0 * u2 + 28.0 * u3 - 15.0 * u4,
            30.0 * u2 - 60.0 * u3 + 30.0 * u4,
        ];
        let n = a.point.dim();
        let mut x = Vec::with_capacity(n);
        let mut v = Vec::with_capacity(n);
        for i in 0..n {
            let c = [
                a.point.x[i],
                h * a.point.xdot[i],
                h * h * accel[k][i],
                h * h * accel[k + 1][i],
                h * b.point.xdot[i],
                b.point.x[i],
            ];
            x.push(w.iter().zip(&c).map(|(w, c)| w * c).sum());
            v.push(dw.iter().zip(&c).map(|(w, c)| w * c).sum::<f64>() / h);
        }
        TangentPoint::new(x, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quintic(t: f64) -> (f64, f64, f64) {
        let x = 1.0 - 2.0 * t + 0.5 * t.powi(2) + 3.0 * t.powi(3) - t.powi(4) + 0.25 * t.powi(5);
        let v = -2.0 + t + 9.0 * t.powi(2) - 4.0 * t.powi(3) + 1.25 * t.powi(4);
        let a = 1.0 + 18.0 * t - 12.0 * t.powi(2) + 5.0 * t.powi(3);
        (x, v, a)
    }

    #[test]
    fn hermite_reproduces_quintics() {
        let times = [0.0, 0.4, 1.1, 2.0];
        let samples = times
            .iter()
            .map(|&t| {
                let (x, v, _) = quintic(t);
                Sample {
                    t,
                    point: TangentPoint::new(vec![x], vec![v]),
                }
            })
            .collect();
        let accel = times.iter().map(|&t| vec![quintic(t).2]).collect();
        let tr = Trajectory::from_hermite(samples, accel, None).unwrap();
        for i in 0..=40 {
            let t = 2.0 * i as f64 / 40.0;
            let p = tr.at(t).unwrap();
            let (x, v, _) = quintic(t);
            assert!((p.x[0] - x).abs() < 1e-12, "x at {t}");
            assert!((p.xdot[0] - v).abs() < 1e-11, "v at {t}");
            assert!((tr.tangent(t).unwrap()[0] - v).abs() < 1e-9);
        }
    }

    #[test]
    fn hermite_tangent_differentiates_position() {
        let times = [0.0, 0.3, 0.35, 1.0];
        let samples = times
            .iter()
            .map(|&t: &f64| Sample {
                t,
                point: TangentPoint::new(vec![t.sin()], vec![t.cos() + 0.1]),
            })
            .collect();
        let accel = times.iter().map(|&t: &f64| vec![-t.sin()]).collect();
        let tr = Trajectory::from_hermite(samples, accel, None).unwrap();
        let h = 1e-6;
        for t in [0.1, 0.31, 0.34, 0.7] {
            let fd = (tr.position(t + h).unwrap()[0] - tr.position(t - h).unwrap()[0]) / (2.0 * h);
            assert!((tr.tangent(t).unwrap()[0] - fd).abs() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn rejects_unordered_samples() {
        let pt = TangentPoint::new(vec![0.0], vec![1.0]);
        let s = vec![
            Sample {
                t: 1.0,
                point: pt.clone(),
            },
            Sample {
                t: 1.0,
                point: pt.clone(),
            },
        ];
        assert!(Trajectory::from_hermite(s, vec![vec![0.0]; 2], None).is_err());
        assert!(Trajectory::from_curve(1.0, 0.0, 10, |t| Ok(TangentPoint::new(vec![t], vec![1.0]))).is_err());
    }

    #[test]
    fn closed_form_curve_hits_end_exactly() {
        let tr = Trajectory::from_curve(0.0, std::f64::consts::PI, 7, |t| {
            Ok(TangentPoint::new(vec![t.cos()], vec![-t.sin()]))
        })
        .unwrap();
        assert_eq!(tr.t1(), std::f64::consts::PI);
        assert_eq!(tr.samples().len(), 7);
        assert!((tr.tangent(1.0).unwrap()[0] + 1f64.sin()).abs() < 1e-11);
    }
}
