//! Finite-difference validators for the equations relating metric, force
//! and motion. None of them reuses the Christoffel path of
//! [`newton_equation`](super::newton_equation).

use crate::error::{check_dim, Result};
use crate::fd;
use crate::forces::{ForceForm, ScalarField};
use crate::geometry::{MetricField, TangentPoint};

use super::{SecondOrderEq, VectorField};

/// Residual of `D _| omega2 + dT + alpha = 0` in the `(x, xdot)` chart.
///
/// `omega2 = d p_i ^ d x^i` with `p_i = g_ij xdot^j` is built by central
/// differences in all `2n` variables. Returns the `2n` components: the
/// first `n` along `dx`, the rest along `dxdot`.
pub fn newton_residual(
    metric: &MetricField,
    force: &ForceForm,
    eq: &SecondOrderEq,
    v: &TangentPoint,
) -> Result<Vec<f64>> {
    let n = metric.dim();
    check_dim("equation", n, eq.dim())?;
    let z: Vec<f64> = v.x.iter().chain(&v.xdot).copied().collect();
    let split = |z: &[f64]| TangentPoint::new(z[..n].to_vec(), z[n..].to_vec());
    let step = metric.fd_step();

    // dp[a][i] = d p_i / d z^a
    let dp = fd::jacobian_columns(step, &z, |z| Ok(metric.liouville(&split(z))?.0))?;
    let dt = fd::gradient(step, &z, |z| metric.kinetic_energy(&split(z)))?;
    let (vel, acc) = eq.field(v)?;
    let d: Vec<f64> = vel.into_iter().chain(acc).collect();
    let alpha = force.eval(v)?;

    // (D _| omega2)_b = sum_i [ D(p_i) delta_{b, x^i} - D^{x^i} d_b p_i ]
    let mut out = vec![0.0; 2 * n];
    for (b, o) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        if b < n {
            s += (0..2 * n).map(|a| d[a] * dp[a][b]).sum::<f64>();
        }
        s -= (0..n).map(|i| d[i] * dp[b][i]).sum::<f64>();
        s += dt[b];
        if b < n {
            s += alpha.0[b];
        }
        *o = s;
    }
    Ok(out)
}

/// Value at `x` of the 1-form `u _| d(u _| T2) + d(T(u)) + u*alpha`, which
/// vanishes exactly when `u` is an intermediate integral.
///
/// `u*alpha` substitutes `xdot := u(x)` into the force components.
pub fn intermediate_integral_residual(
    metric: &MetricField,
    force: &ForceForm,
    u: &VectorField,
    x: &[f64],
) -> Result<Vec<f64>> {
    let n = metric.dim();
    check_dim("vector field", n, u.dim())?;
    let g = metric.components(x)?;
    let dg = metric.partials(x)?;
    let uu = u.eval(x)?;
    let du = u.partials(x)?;

    // d_k beta_i with beta_i = g_ij u^j
    let dbeta = |k: usize, i: usize| -> f64 { (0..n).map(|j| dg[k][(i, j)] * uu[j] + g[(i, j)] * du[k][j]).sum() };
    // d_i T(u) with T(u) = 1/2 g_jk u^j u^k
    let dtu = |i: usize| -> f64 {
        let mut s = 0.0;
        for j in 0..n {
            for k in 0..n {
                s += 0.5 * dg[i][(j, k)] * uu[j] * uu[k] + g[(j, k)] * uu[j] * du[i][k];
            }
        }
        s
    };
    let alpha = force.eval(&TangentPoint::new(x.to_vec(), uu.clone()))?;
    Ok((0..n)
        .map(|i| {
            let curl: f64 = (0..n).map(|k| uu[k] * (dbeta(k, i) - dbeta(i, k))).sum();
            curl + dtu(i) + alpha.0[i]
        })
        .collect())
}

/// `1/2 g^jk d_j S d_k S + U(x) - E`.
pub fn hj_residual(
    metric: &MetricField,
    potential: &ScalarField,
    action: &ScalarField,
    x: &[f64],
    energy: f64,
) -> Result<f64> {
    let inv = metric.inverse(x)?;
    let ds = action.gradient(x)?;
    let n = metric.dim();
    let mut kinetic = 0.0;
    for j in 0..n {
        for k in 0..n {
            kinetic += 0.5 * inv[(j, k)] * ds[j] * ds[k];
        }
    }
    Ok(kinetic + potential.eval(x)? - energy)
}
