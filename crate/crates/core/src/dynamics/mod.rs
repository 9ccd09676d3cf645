//! Equations of motion of a mechanical system `(M, T2, alpha)`.
//!
//! [`newton_equation`] turns a metric and a force form into the acceleration
//! map `xddot^j = -Gamma^j_{kl} xdot^k xdot^l - g^ij alpha_i`. The
//! residual validators in [`residuals`] check the same correspondence
//! through independent finite-difference routes.

mod integrator;
pub mod residuals;
mod trajectory;

use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, Result};
use crate::fd::{self, FdStep};
use crate::forces::{ForceForm, ScalarField};
use crate::geometry::{MetricField, TangentPoint};

pub use integrator::{integrate, integrate_with, IntegrateOptions};
pub use residuals::{hj_residual, intermediate_integral_residual, newton_residual};
pub use trajectory::{CurveFn, IntegrationStats, Sample, Trajectory};

type AccelFn = Arc<dyn Fn(&TangentPoint) -> Result<Vec<f64>> + Send + Sync>;

/// Second-order differential equation on `TM`, given by its acceleration
/// map. The induced field is `D = xdot^j d/dx^j + f^j d/dxdot^j`; its
/// position block is the velocity for every equation, so the difference of
/// two equations is always vertical.
#[derive(Clone)]
pub struct SecondOrderEq {
    dim: usize,
    accel: AccelFn,
    metric: Option<MetricField>,
    force: Option<ForceForm>,
}

impl fmt::Debug for SecondOrderEq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SecondOrderEq")
            .field("dim", &self.dim)
            .field("metric", &self.metric)
            .field("force", &self.force)
            .finish()
    }
}

impl SecondOrderEq {
    pub fn from_fn<F>(dim: usize, accel: F) -> Self
    where
        F: Fn(&TangentPoint) -> Result<Vec<f64>> + Send + Sync + 'static,
    {
        SecondOrderEq {
            dim,
            accel: Arc::new(accel),
            metric: None,
            force: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> Option<&MetricField> {
        self.metric.as_ref()
    }

    pub fn force(&self) -> Option<&ForceForm> {
        self.force.as_ref()
    }

    pub fn accel(&self, v: &TangentPoint) -> Result<Vec<f64>> {
        check_dim("position", self.dim, v.x.len())?;
        check_dim("velocity", self.dim, v.xdot.len())?;
        let a = (self.accel)(v)?;
        check_dim("acceleration", self.dim, a.len())?;
        Ok(a)
    }

    /// Components of the induced field `D` at `v`: `(xdot, f(x, xdot))`.
    pub fn field(&self, v: &TangentPoint) -> Result<(Vec<f64>, Vec<f64>)> {
        Ok((v.xdot.clone(), self.accel(v)?))
    }
}

/// Newton equation of `(M, T2, alpha)`.
pub fn newton_equation(metric: &MetricField, force: &ForceForm) -> Result<SecondOrderEq> {
    check_dim("force form", metric.dim(), force.dim())?;
    let (m, f) = (metric.clone(), force.clone());
    let mut eq = SecondOrderEq::from_fn(metric.dim(), move |v| {
        let gamma = m.christoffel(&v.x)?.contract(&v.xdot);
        let alpha = f.eval(v)?;
        let up = m.raise(&v.x, &alpha)?;
        Ok(gamma.iter().zip(&up).map(|(g, a)| -g - a).collect())
    });
    eq.metric = Some(metric.clone());
    eq.force = Some(force.clone());
    Ok(eq)
}

/// Force-free system: geodesics of the metric.
pub fn geodesic_equation(metric: &MetricField) -> SecondOrderEq {
    newton_equation(metric, &ForceForm::zero(metric.dim())).expect("zero force matches the metric dimension")
}

type VectorFn = Arc<dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync>;
type JacobianFn = Arc<dyn Fn(&[f64]) -> Result<Vec<Vec<f64>>> + Send + Sync>;

/// Tangent field `u` on `M`.
#[derive(Clone)]
pub struct VectorField {
    dim: usize,
    eval: VectorFn,
    jacobian: Option<JacobianFn>,
    fd_step: FdStep,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorField").field("dim", &self.dim).finish()
    }
}

impl VectorField {
    pub fn new<F>(dim: usize, eval: F) -> Self
    where
        F: Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync + 'static,
    {
        VectorField {
            dim,
            eval: Arc::new(eval),
            jacobian: None,
            fd_step: FdStep::Auto,
        }
    }

    /// Analytic partials; `jac(x)[k][j] = d u^j / d x^k`.
    pub fn with_jacobian<F>(mut self, jac: F) -> Self
    where
        F: Fn(&[f64]) -> Result<Vec<Vec<f64>>> + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(jac));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim("vector field position", self.dim, x.len())?;
        let u = (self.eval)(x)?;
        check_dim("vector field components", self.dim, u.len())?;
        Ok(u)
    }

    /// `out[k][j] = d u^j / d x^k`.
    pub fn partials(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        check_dim("vector field position", self.dim, x.len())?;
        match &self.jacobian {
            Some(j) => j(x),
            None => fd::jacobian_columns(self.fd_step, x, |p| (self.eval)(p)),
        }
    }
}

/// `max_i |T(t_i) - T(t_0)|` over the samples.
pub fn energy_drift(tr: &Trajectory, metric: &MetricField) -> Result<f64> {
    let t0 = metric.kinetic_energy(tr.first())?;
    let mut drift = 0.0_f64;
    for s in tr.samples() {
        drift = drift.max((metric.kinetic_energy(&s.point)? - t0).abs());
    }
    Ok(drift)
}

/// `H = T + U`.
pub fn hamiltonian(metric: &MetricField, potential: &ScalarField, v: &TangentPoint) -> Result<f64> {
    Ok(metric.kinetic_energy(v)? + potential.eval(&v.x)?)
}
