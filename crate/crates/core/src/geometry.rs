//! Coordinate representation of a configuration space `(M, T2)`: a single
//! global chart carrying a symmetric, nondegenerate metric of any signature.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};
use crate::fd::{self, FdStep};

pub type Matrix = DMatrix<f64>;

/// Default guard below which `|theta_dot|` counts as lightlike.
pub const DEFAULT_LIGHTLIKE_TOL: f64 = 1e-12;

/// A point of the tangent bundle in the chart `(x, xdot)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentPoint {
    pub x: Vec<f64>,
    pub xdot: Vec<f64>,
}

impl TangentPoint {
    pub fn new(x: Vec<f64>, xdot: Vec<f64>) -> Self {
        TangentPoint { x, xdot }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// Covariant components `b_j` of a horizontal 1-form at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Covector(pub Vec<f64>);

impl Covector {
    pub fn zeros(n: usize) -> Self {
        Covector(vec![0.0; n])
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    /// Pairing with a vector, `sum_j v^j b_j`.
    pub fn pair(&self, v: &[f64]) -> f64 {
        self.0.iter().zip(v).map(|(b, v)| b * v).sum()
    }
}

type PackedFn = Arc<dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync>;
type PartialsFn = Arc<dyn Fn(&[f64]) -> Result<Vec<Matrix>> + Send + Sync>;

/// Index of `(i, j)`, `i <= j`, in a row-major packed upper triangle.
pub(crate) fn packed_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

/// Metric `g_ij(x)`. Only the upper triangle (diagonal included) is ever
/// evaluated, so symmetry holds by construction.
#[derive(Clone)]
pub struct MetricField {
    dim: usize,
    upper: PackedFn,
    partials: Option<PartialsFn>,
    fd_step: FdStep,
    lightlike_tol: f64,
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricField")
            .field("dim", &self.dim)
            .field("analytic_partials", &self.partials.is_some())
            .field("fd_step", &self.fd_step)
            .finish()
    }
}

impl MetricField {
    /// `upper(x)` returns the `n(n+1)/2` entries `g_ij`, `i <= j`, row-major.
    pub fn new<F>(dim: usize, upper: F) -> Self
    where
        F: Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync + 'static,
    {
        assert!(dim > 0, "metric dimension must be positive");
        MetricField {
            dim,
            upper: Arc::new(upper),
            partials: None,
            fd_step: FdStep::Auto,
            lightlike_tol: DEFAULT_LIGHTLIKE_TOL,
        }
    }

    /// Constant metric; the upper triangle of `g` is used.
    pub fn constant(g: Matrix) -> Self {
        let n = g.nrows();
        assert_eq!(n, g.ncols(), "metric matrix must be square");
        let mut packed = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                packed.push(g[(i, j)]);
            }
        }
        MetricField::new(n, move |_| Ok(packed.clone())).with_partials(move |_| Ok(vec![Matrix::zeros(n, n); n]))
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        MetricField::constant(Matrix::from_diagonal(&nalgebra::DVector::from_column_slice(diag)))
    }

    pub fn euclidean(n: usize) -> Self {
        MetricField::diagonal(&vec![1.0; n])
    }

    /// `diag(1, -1, ..., -1)`.
    pub fn minkowski(n: usize) -> Self {
        let mut d = vec![-1.0; n];
        d[0] = 1.0;
        MetricField::diagonal(&d)
    }

    /// Supplies analytic `d g / d x^k`, one matrix per `k`.
    pub fn with_partials<F>(mut self, partials: F) -> Self
    where
        F: Fn(&[f64]) -> Result<Vec<Matrix>> + Send + Sync + 'static,
    {
        self.partials = Some(Arc::new(partials));
        self
    }

    pub fn with_fd_step(mut self, step: FdStep) -> Self {
        self.fd_step = step;
        self
    }

    pub fn with_lightlike_tol(mut self, tol: f64) -> Self {
        self.lightlike_tol = tol;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn fd_step(&self) -> FdStep {
        self.fd_step
    }

    pub fn lightlike_tol(&self) -> f64 {
        self.lightlike_tol
    }

    fn packed(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim("metric position", self.dim, x.len())?;
        let p = (self.upper)(x)?;
        check_dim("packed metric components", self.dim * (self.dim + 1) / 2, p.len())?;
        Ok(p)
    }

    fn unpack(&self, p: &[f64]) -> Matrix {
        let n = self.dim;
        Matrix::from_fn(n, n, |i, j| p[packed_index(n, i, j)])
    }

    /// `g_ij(x)`.
    pub fn components(&self, x: &[f64]) -> Result<Matrix> {
        Ok(self.unpack(&self.packed(x)?))
    }

    /// `d g / d x^k` for each `k`: analytic when supplied, else central
    /// differences.
    pub fn partials(&self, x: &[f64]) -> Result<Vec<Matrix>> {
        match &self.partials {
            Some(p) => {
                check_dim("metric position", self.dim, x.len())?;
                p(x)
            }
            None => self.partials_fd(x),
        }
    }

    /// Finite-difference partials regardless of any analytic override.
    pub fn partials_fd(&self, x: &[f64]) -> Result<Vec<Matrix>> {
        let cols = fd::jacobian_columns(self.fd_step, x, |p| self.packed(p))?;
        Ok(cols.iter().map(|c| self.unpack(c)).collect())
    }

    /// Degeneracy threshold `1e-10 * (max row norm)^n`.
    pub fn det_tol(g: &Matrix) -> f64 {
        let max_row = g.row_iter().map(|r| r.norm()).fold(0.0_f64, f64::max);
        1e-10 * max_row.powi(g.nrows() as i32)
    }

    fn invert(&self, x: &[f64], g: Matrix) -> Result<Matrix> {
        let tol = Self::det_tol(&g);
        let lu = g.lu();
        let det = lu.determinant();
        if !(det.abs() > tol) {
            return Err(Error::DegenerateMetric {
                x: x.to_vec(),
                det,
                tol,
            });
        }
        let inv = lu.try_inverse().ok_or_else(|| Error::DegenerateMetric {
            x: x.to_vec(),
            det,
            tol,
        })?;
        // symmetrise away rounding asymmetry
        Ok((&inv + inv.transpose()) * 0.5)
    }

    /// `g^ij(x)`.
    pub fn inverse(&self, x: &[f64]) -> Result<Matrix> {
        self.invert(x, self.components(x)?)
    }

    /// Christoffel symbols of the second kind at `x`.
    pub fn christoffel(&self, x: &[f64]) -> Result<Christoffel> {
        let n = self.dim;
        let inv = self.inverse(x)?;
        let dg = self.partials(x)?;
        check_dim("metric partials", n, dg.len())?;
        let mut out = Christoffel::zeros(n);
        if dg.iter().all(|m| m.iter().all(|v| *v == 0.0)) {
            return Ok(out);
        }
        // first kind: [m; k l] = 1/2 (d_k g_ml + d_l g_mk - d_m g_kl)
        let mut first = vec![0.0; n];
        for k in 0..n {
            for l in k..n {
                for (m, f) in first.iter_mut().enumerate() {
                    *f = 0.5 * (dg[k][(m, l)] + dg[l][(m, k)] - dg[m][(k, l)]);
                }
                for j in 0..n {
                    let v: f64 = (0..n).map(|m| inv[(j, m)] * first[m]).sum();
                    out.set(j, k, l, v);
                    out.set(j, l, k, v);
                }
            }
        }
        Ok(out)
    }

    /// `p_j = g_ij(x) xdot^i`.
    pub fn lower(&self, x: &[f64], v: &[f64]) -> Result<Covector> {
        check_dim("velocity", self.dim, v.len())?;
        let g = self.components(x)?;
        Ok(Covector(
            (0..self.dim)
                .map(|j| (0..self.dim).map(|i| g[(i, j)] * v[i]).sum())
                .collect(),
        ))
    }

    /// `a^j = g^ij a_i`.
    pub fn raise(&self, x: &[f64], c: &Covector) -> Result<Vec<f64>> {
        check_dim("covector", self.dim, c.0.len())?;
        let inv = self.inverse(x)?;
        Ok((0..self.dim)
            .map(|j| (0..self.dim).map(|i| inv[(i, j)] * c.0[i]).sum())
            .collect())
    }

    /// Components of the Liouville form, `p_j = g_ij xdot^i`.
    pub fn liouville(&self, v: &TangentPoint) -> Result<Covector> {
        self.lower(&v.x, &v.xdot)
    }

    /// `theta_dot = g_ij xdot^i xdot^j = 2T`.
    pub fn theta_dot(&self, v: &TangentPoint) -> Result<f64> {
        Ok(self.liouville(v)?.pair(&v.xdot))
    }

    /// `T = 1/2 g_ij xdot^i xdot^j`; negative values are allowed.
    pub fn kinetic_energy(&self, v: &TangentPoint) -> Result<f64> {
        Ok(0.5 * self.theta_dot(v)?)
    }

    /// `d tau / dt = sqrt(|theta_dot|)`.
    pub fn length_element_rate(&self, v: &TangentPoint) -> Result<f64> {
        let td = self.theta_dot(v)?;
        if td.abs() <= self.lightlike_tol {
            return Err(Error::LightlikeVelocity {
                theta_dot: td,
                tol: self.lightlike_tol,
            });
        }
        Ok(td.abs().sqrt())
    }
}

/// `Gamma^j_{kl}` stored densely, symmetric in the lower pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    dim: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(dim: usize) -> Self {
        Christoffel {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, j: usize, k: usize, l: usize) -> f64 {
        self.data[(j * self.dim + k) * self.dim + l]
    }

    fn set(&mut self, j: usize, k: usize, l: usize, v: f64) {
        self.data[(j * self.dim + k) * self.dim + l] = v;
    }

    /// `Gamma^j_{kl} v^k v^l` for each `j`.
    pub fn contract(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|j| {
                let mut s = 0.0;
                for k in 0..n {
                    for l in 0..n {
                        s += self.get(j, k, l) * v[k] * v[l];
                    }
                }
                s
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn polar() -> MetricField {
        MetricField::new(2, |x| Ok(vec![1.0, 0.0, x[0] * x[0]]))
    }

    fn tp(x: &[f64], v: &[f64]) -> TangentPoint {
        TangentPoint::new(x.to_vec(), v.to_vec())
    }

    fn mat_close(a: &Matrix, b: &Matrix, tol: f64) -> bool {
        (a - b).iter().all(|d| d.abs() <= tol)
    }

    #[test]
    fn packed_layout() {
        assert_eq!(packed_index(3, 0, 0), 0);
        assert_eq!(packed_index(3, 0, 2), 2);
        assert_eq!(packed_index(3, 1, 1), 3);
        assert_eq!(packed_index(3, 2, 1), 4);
        assert_eq!(packed_index(3, 2, 2), 5);
    }

    #[test]
    fn inverse_examples() {
        let x = [0.3, -1.0, 2.0, 5.0];
        let eta = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -1.0, -1.0, -1.0]));
        assert_eq!(MetricField::minkowski(4).inverse(&x).unwrap(), eta);
        assert_eq!(
            MetricField::euclidean(2).inverse(&[1.0, 2.0]).unwrap(),
            Matrix::identity(2, 2)
        );
        let inv = MetricField::diagonal(&[2.0, 1.0]).inverse(&[0.0, 0.0]).unwrap();
        assert!(mat_close(
            &inv,
            &Matrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 1.0]),
            1e-15
        ));
    }

    #[test]
    fn degenerate_metric_is_rejected() {
        let err = polar().inverse(&[0.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::DegenerateMetric { .. }));
        let m = MetricField::constant(Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]));
        assert!(matches!(
            m.christoffel(&[0.0, 0.0]),
            Err(Error::DegenerateMetric { .. })
        ));
    }

    #[test]
    fn inverse_is_accurate() {
        let m = MetricField::new(3, |x| {
            Ok(vec![2.0 + x[0].sin(), 0.3, x[1], -1.0 - x[2] * x[2], 0.1, 1.5])
        });
        let x = [0.4, 0.2, -0.7];
        let g = m.components(&x).unwrap();
        let prod = &g * m.inverse(&x).unwrap();
        assert!(mat_close(&prod, &Matrix::identity(3, 3), 1e-12 * g.norm()));
    }

    #[test]
    fn christoffel_constant_metrics_vanish() {
        assert_eq!(
            MetricField::minkowski(4)
                .christoffel(&[1.0, 2.0, 3.0, 4.0])
                .unwrap()
                .max_abs(),
            0.0
        );
        let m = MetricField::new(2, |_| Ok(vec![3.0, 1.0, 2.0]));
        assert!(m.christoffel(&[0.5, 0.5]).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn christoffel_polar() {
        // oracle: g = diag(1, r^2) => Gamma^r_{th th} = -r, Gamma^th_{r th} = 1/r
        let g = polar().christoffel(&[2.0, 0.0]).unwrap();
        assert!((g.get(0, 1, 1) + 2.0).abs() < 1e-9);
        assert!((g.get(1, 0, 1) - 0.5).abs() < 1e-9);
        assert!((g.get(1, 1, 0) - 0.5).abs() < 1e-9);
        for (j, k, l) in [(0, 0, 0), (0, 0, 1), (0, 1, 0), (1, 0, 0), (1, 1, 1)] {
            assert!(g.get(j, k, l).abs() < 1e-9, "{j}{k}{l}");
        }
    }

    #[test]
    fn kinetic_energy_examples() {
        let m = MetricField::minkowski(4);
        let x = [0.0; 4];
        assert_eq!(m.kinetic_energy(&tp(&x, &[1.0, 0.0, 0.0, 0.0])).unwrap(), 0.5);
        assert_eq!(m.kinetic_energy(&tp(&x, &[1.0, 1.0, 0.0, 0.0])).unwrap(), 0.0);
        let lambda = 2f64.sqrt();
        let t = m.kinetic_energy(&tp(&x, &[lambda, 0.0, 1.0, 0.0])).unwrap();
        assert!((t - 0.5).abs() < 1e-15);
    }

    #[test]
    fn liouville_examples() {
        assert_eq!(
            MetricField::euclidean(2)
                .liouville(&tp(&[0.0, 0.0], &[3.0, 4.0]))
                .unwrap(),
            Covector(vec![3.0, 4.0])
        );
        assert_eq!(
            MetricField::minkowski(4)
                .liouville(&tp(&[0.0; 4], &[1.0, 1.0, 0.0, 0.0]))
                .unwrap(),
            Covector(vec![1.0, -1.0, 0.0, 0.0])
        );
        assert_eq!(
            MetricField::diagonal(&[2.0, 1.0])
                .liouville(&tp(&[0.0, 0.0], &[1.0, 1.0]))
                .unwrap(),
            Covector(vec![2.0, 1.0])
        );
    }

    #[test]
    fn theta_dot_examples() {
        let m = MetricField::minkowski(4);
        let x = [0.0; 4];
        assert_eq!(m.theta_dot(&tp(&x, &[1.0, 0.0, 0.0, 0.0])).unwrap(), 1.0);
        assert_eq!(m.theta_dot(&tp(&x, &[1.0, 1.0, 0.0, 0.0])).unwrap(), 0.0);
        let (eta, lambda) = (1.0_f64, 2f64.sqrt());
        for i in 0..20 {
            let t = i as f64 * 0.3;
            let v = [lambda, -eta * t.sin(), eta * t.cos(), 0.0];
            assert!((m.theta_dot(&tp(&x, &v)).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn length_element_rate_examples() {
        let m = MetricField::minkowski(4);
        let x = [0.0; 4];
        assert_eq!(m.length_element_rate(&tp(&x, &[1.0, 0.0, 0.0, 0.0])).unwrap(), 1.0);
        // straight line of the neutral particle at eta = 1
        let lambda = 2f64.sqrt();
        let mu = 1.0 / (1.0 - 4.0 / (std::f64::consts::PI.powi(2) * 2.0)).sqrt();
        let v = [mu, -2.0 * mu / (std::f64::consts::PI * lambda), 0.0, 0.0];
        assert!((m.length_element_rate(&tp(&x, &v)).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(
            m.length_element_rate(&tp(&x, &[1.0, 1.0, 0.0, 0.0])),
            Err(Error::LightlikeVelocity { .. })
        ));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let m = MetricField::euclidean(3);
        assert!(matches!(m.components(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    fn cubic_metric() -> MetricField {
        // polynomial entries of degree <= 3 with analytic partials
        MetricField::new(2, |x| {
            Ok(vec![
                2.0 + x[0] * x[0] * x[1],
                0.5 * x[0] - x[1].powi(3) / 3.0,
                -1.0 - x[0] * x[1],
            ])
        })
        .with_partials(|x| {
            let d0 = Matrix::from_row_slice(2, 2, &[2.0 * x[0] * x[1], 0.5, 0.5, -x[1]]);
            let d1 = Matrix::from_row_slice(2, 2, &[x[0] * x[0], -x[1] * x[1], -x[1] * x[1], -x[0]]);
            Ok(vec![d0, d1])
        })
    }

    proptest! {
        #[test]
        fn christoffel_symmetric_and_fd_matches_analytic(a in -1.5f64..1.5, b in -1.5f64..1.5) {
            let m = cubic_metric();
            let x = [a, b];
            let g = m.components(&x).unwrap();
            prop_assume!(g.determinant().abs() > 1e-3);
            let analytic = m.christoffel(&x).unwrap();
            let fd_metric = MetricField::new(2, move |x| m.packed(x));
            let fd = fd_metric.christoffel(&x).unwrap();
            for j in 0..2 { for k in 0..2 { for l in 0..2 {
                prop_assert_eq!(analytic.get(j, k, l), analytic.get(j, l, k));
                prop_assert!((fd.get(j, k, l) - fd.get(j, l, k)).abs() <= 1e-10);
                prop_assert!((fd.get(j, k, l) - analytic.get(j, k, l)).abs() <= 1e-6);
            }}}
        }

        #[test]
        fn raise_then_lower_round_trips(a in -1.0f64..1.0, b in -1.0f64..1.0, c0 in -5.0f64..5.0, c1 in -5.0f64..5.0) {
            let m = cubic_metric();
            let x = [a, b];
            prop_assume!(m.components(&x).unwrap().determinant().abs() > 1e-3);
            let c = Covector(vec![c0, c1]);
            let back = m.lower(&x, &m.raise(&x, &c).unwrap()).unwrap();
            for (u, v) in back.0.iter().zip(&c.0) {
                prop_assert!((u - v).abs() <= 1e-12 * v.abs().max(1.0));
            }
        }

        #[test]
        fn theta_dot_is_twice_kinetic_energy(v in prop::collection::vec(-3.0f64..3.0, 4)) {
            let m = MetricField::minkowski(4);
            let p = TangentPoint::new(vec![0.1, 0.2, 0.3, 0.4], v);
            prop_assert_eq!(m.theta_dot(&p).unwrap(), 2.0 * m.kinetic_energy(&p).unwrap());
        }
    }
}
