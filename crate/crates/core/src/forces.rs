//! Horizontal 1-forms on the tangent bundle (force forms), their pairing
//! with the velocity and membership in the contact system.
//!
//! A [`ForceForm`] only ever produces `dx` components; horizontality is a
//! property of the representation rather than something to check.

use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::fd::{self, FdStep};
use crate::geometry::{Covector, Matrix, MetricField, TangentPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForceKind {
    Zero,
    Exact,
    Lorentz,
    Custom,
    Corrected,
}

type ScalarFn = Arc<dyn Fn(&[f64]) -> Result<f64> + Send + Sync>;
type GradientFn = Arc<dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync>;

/// Function on `M`, used for potentials, Hamilton-Jacobi unknowns and
/// coordinate clocks.
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    eval: ScalarFn,
    gradient: Option<GradientFn>,
    fd_step: FdStep,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("dim", &self.dim)
            .field("analytic_gradient", &self.gradient.is_some())
            .finish()
    }
}

impl ScalarField {
    pub fn new<F>(dim: usize, eval: F) -> Self
    where
        F: Fn(&[f64]) -> Result<f64> + Send + Sync + 'static,
    {
        ScalarField {
            dim,
            eval: Arc::new(eval),
            gradient: None,
            fd_step: FdStep::Auto,
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        ScalarField::new(dim, move |_| Ok(c)).with_gradient(move |_| Ok(vec![0.0; dim]))
    }

    /// The coordinate function `x^k`.
    pub fn coordinate(dim: usize, k: usize) -> Self {
        assert!(k < dim);
        ScalarField::new(dim, move |x| Ok(x[k])).with_gradient(move |_| {
            let mut g = vec![0.0; dim];
            g[k] = 1.0;
            Ok(g)
        })
    }

    pub fn with_gradient<F>(mut self, gradient: F) -> Self
    where
        F: Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync + 'static,
    {
        self.gradient = Some(Arc::new(gradient));
        self
    }

    pub fn with_fd_step(mut self, step: FdStep) -> Self {
        self.fd_step = step;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim("scalar field position", self.dim, x.len())?;
        (self.eval)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim("scalar field position", self.dim, x.len())?;
        match &self.gradient {
            Some(g) => g(x),
            None => fd::gradient(self.fd_step, x, |p| (self.eval)(p)),
        }
    }
}

type UpperFn = Arc<dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync>;

/// Differential 2-form given by its strict upper triangle `F_ij`, `i < j`;
/// `F_ji = -F_ij` is implied.
#[derive(Clone)]
pub struct TwoForm {
    dim: usize,
    upper: UpperFn,
}

impl fmt::Debug for TwoForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TwoForm").field("dim", &self.dim).finish()
    }
}

impl TwoForm {
    /// `upper(x)` returns the `n(n-1)/2` entries `F_ij`, `i < j`, row-major.
    pub fn new<F>(dim: usize, upper: F) -> Self
    where
        F: Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync + 'static,
    {
        TwoForm {
            dim,
            upper: Arc::new(upper),
        }
    }

    pub fn constant(dim: usize, upper: Vec<f64>) -> Self {
        assert_eq!(upper.len(), dim * (dim - 1) / 2, "strict upper triangle size");
        TwoForm::new(dim, move |_| Ok(upper.clone()))
    }

    pub fn zero(dim: usize) -> Self {
        TwoForm::constant(dim, vec![0.0; dim * (dim - 1) / 2])
    }

    /// Constant field with the single entry `F_ij = value` (`i < j`).
    pub fn single(dim: usize, i: usize, j: usize, value: f64) -> Self {
        assert!(i < j && j < dim);
        let mut upper = vec![0.0; dim * (dim - 1) / 2];
        upper[strict_index(dim, i, j)] = value;
        TwoForm::constant(dim, upper)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Full antisymmetric matrix `F_ij(x)`.
    pub fn components(&self, x: &[f64]) -> Result<Matrix> {
        let n = self.dim;
        check_dim("2-form position", n, x.len())?;
        let u = (self.upper)(x)?;
        check_dim("2-form components", n * (n - 1) / 2, u.len())?;
        let mut f = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let v = u[strict_index(n, i, j)];
                f[(i, j)] = v;
                f[(j, i)] = -v;
            }
        }
        Ok(f)
    }
}

fn strict_index(n: usize, i: usize, j: usize) -> usize {
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// What a force form was built from.
#[derive(Debug, Clone)]
pub enum Provenance {
    Potential(ScalarField),
    Field(TwoForm),
    Corrected { base: Box<ForceForm>, metric: MetricField },
}

type ForceFn = Arc<dyn Fn(&TangentPoint) -> Result<Covector> + Send + Sync>;

/// Horizontal 1-form `alpha = alpha_j(x, xdot) dx^j`.
#[derive(Clone)]
pub struct ForceForm {
    dim: usize,
    kind: ForceKind,
    eval: ForceFn,
    provenance: Option<Provenance>,
}

impl fmt::Debug for ForceForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ForceForm")
            .field("dim", &self.dim)
            .field("kind", &self.kind)
            .field("provenance", &self.provenance)
            .finish()
    }
}

impl ForceForm {
    pub fn zero(dim: usize) -> Self {
        ForceForm {
            dim,
            kind: ForceKind::Zero,
            eval: Arc::new(move |_| Ok(Covector::zeros(dim))),
            provenance: None,
        }
    }

    /// Arbitrary velocity-dependent components.
    pub fn custom<F>(dim: usize, eval: F) -> Self
    where
        F: Fn(&TangentPoint) -> Result<Covector> + Send + Sync + 'static,
    {
        ForceForm {
            dim,
            kind: ForceKind::Custom,
            eval: Arc::new(eval),
            provenance: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> ForceKind {
        self.kind
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    /// Components `alpha_j(x, xdot)`.
    pub fn eval(&self, v: &TangentPoint) -> Result<Covector> {
        check_dim("force position", self.dim, v.x.len())?;
        check_dim("force velocity", self.dim, v.xdot.len())?;
        let c = (self.eval)(v)?;
        check_dim("force components", self.dim, c.0.len())?;
        Ok(c)
    }
}

/// `alpha_dot = xdot^j alpha_j`.
pub fn alpha_dot(f: &ForceForm, v: &TangentPoint) -> Result<f64> {
    Ok(f.eval(v)?.pair(&v.xdot))
}

/// Lorentz-type force `alpha = xdot^i (F_ij - F_ji) dx^j`.
pub fn lorentz_force(field: &TwoForm) -> ForceForm {
    let f = field.clone();
    ForceForm {
        dim: field.dim,
        kind: ForceKind::Lorentz,
        eval: Arc::new(move |v| {
            let m = f.components(&v.x)?;
            let n = f.dim;
            Ok(Covector(
                (0..n)
                    .map(|j| (0..n).map(|i| (m[(i, j)] - m[(j, i)]) * v.xdot[i]).sum())
                    .collect(),
            ))
        }),
        provenance: Some(Provenance::Field(field.clone())),
    }
}

/// Exact force `alpha = dU`, independent of the velocity.
pub fn conservative_force(potential: &ScalarField) -> ForceForm {
    let u = potential.clone();
    ForceForm {
        dim: potential.dim,
        kind: ForceKind::Exact,
        eval: Arc::new(move |v| Ok(Covector(u.gradient(&v.x)?))),
        provenance: Some(Provenance::Potential(potential.clone())),
    }
}

/// `alpha~ = alpha - (alpha_dot / theta_dot) theta`, evaluated lazily.
/// Errors with [`Error::LightlikeVelocity`] where `|theta_dot|` is below the
/// metric's lightlike guard.
pub fn relativistic_correction(f: &ForceForm, metric: &MetricField) -> ForceForm {
    let (base, m) = (f.clone(), metric.clone());
    ForceForm {
        dim: f.dim,
        kind: ForceKind::Corrected,
        eval: Arc::new(move |v| {
            let alpha = base.eval(v)?;
            let p = m.liouville(v)?;
            let ad = alpha.pair(&v.xdot);
            let td = p.pair(&v.xdot);
            if td.abs() <= m.lightlike_tol() {
                return Err(Error::LightlikeVelocity {
                    theta_dot: td,
                    tol: m.lightlike_tol(),
                });
            }
            let c = ad / td;
            Ok(Covector(alpha.0.iter().zip(&p.0).map(|(a, p)| a - c * p).collect()))
        }),
        provenance: Some(Provenance::Corrected {
            base: Box::new(f.clone()),
            metric: metric.clone(),
        }),
    }
}

/// `alpha^j = g^ij alpha_i`.
pub fn raise_index(metric: &MetricField, c: &Covector, x: &[f64]) -> Result<Vec<f64>> {
    metric.raise(x, c)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ContactCheck {
    pub is_contact: bool,
    pub max_alpha_dot: f64,
}

/// Contact-system membership over a sample set: `max |alpha_dot| <= tol`.
pub fn is_contact(f: &ForceForm, samples: &[TangentPoint], tol: f64) -> Result<ContactCheck> {
    if samples.is_empty() {
        return Err(Error::Domain("contact check needs at least one sample".into()));
    }
    let mut max = 0.0_f64;
    for v in samples {
        max = max.max(alpha_dot(f, v)?.abs());
    }
    Ok(ContactCheck {
        is_contact: max <= tol,
        max_alpha_dot: max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn charged_field() -> TwoForm {
        TwoForm::single(4, 1, 2, 0.5)
    }

    fn tp(x: &[f64], v: &[f64]) -> TangentPoint {
        TangentPoint::new(x.to_vec(), v.to_vec())
    }

    fn random_points(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<TangentPoint> {
        (0..count)
            .map(|_| {
                let x = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
                let v = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
                TangentPoint::new(x, v)
            })
            .collect()
    }

    #[test]
    fn charged_lorentz_components() {
        let (eta, lambda) = (1.0, 2f64.sqrt());
        let alpha = lorentz_force(&charged_field());
        assert_eq!(alpha.kind(), ForceKind::Lorentz);
        let c = alpha
            .eval(&tp(&[0.3, 1.0, 0.0, 2.0], &[lambda, 0.0, eta, 0.0]))
            .unwrap();
        assert_eq!(c, Covector(vec![0.0, -eta, 0.0, 0.0]));
        // alpha = xdot1 dx2 - xdot2 dx1
        let c = alpha.eval(&tp(&[0.0; 4], &[0.0, 3.0, 5.0, 7.0])).unwrap();
        assert_eq!(c, Covector(vec![0.0, -5.0, 3.0, 0.0]));
    }

    #[test]
    fn lorentz_degenerate_cases() {
        let zero = lorentz_force(&TwoForm::zero(3));
        assert_eq!(
            zero.eval(&tp(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0])).unwrap(),
            Covector::zeros(3)
        );
        let f = lorentz_force(&TwoForm::constant(3, vec![1.0, -2.0, 0.5]));
        assert_eq!(f.eval(&tp(&[1.0, 2.0, 3.0], &[0.0; 3])).unwrap(), Covector::zeros(3));
    }

    #[test]
    fn alpha_dot_examples() {
        let v = tp(&[0.4, -0.1, 2.0, 1.0], &[1.3, 0.2, -0.7, 0.9]);
        assert_eq!(alpha_dot(&lorentz_force(&charged_field()), &v).unwrap(), 0.0);
        let u = ScalarField::coordinate(2, 0);
        let f = conservative_force(&u);
        assert_eq!(f.eval(&tp(&[0.0, 0.0], &[1.0, 0.0])).unwrap(), Covector(vec![1.0, 0.0]));
        assert_eq!(alpha_dot(&f, &tp(&[0.0, 0.0], &[1.0, 0.0])).unwrap(), 1.0);
        assert_eq!(alpha_dot(&ForceForm::zero(4), &v).unwrap(), 0.0);
    }

    #[test]
    fn conservative_force_examples() {
        let f = conservative_force(&ScalarField::coordinate(2, 0));
        assert_eq!(
            f.eval(&tp(&[5.0, -3.0], &[1.0, 1.0])).unwrap(),
            Covector(vec![1.0, 0.0])
        );
        let quad = ScalarField::new(2, |x| Ok(0.5 * (x[0] * x[0] + x[1] * x[1])));
        let c = conservative_force(&quad).eval(&tp(&[1.0, 2.0], &[0.0, 0.0])).unwrap();
        assert!((c.0[0] - 1.0).abs() < 1e-9 && (c.0[1] - 2.0).abs() < 1e-9);
        let c = conservative_force(&ScalarField::new(2, |_| Ok(3.0)))
            .eval(&tp(&[1.0, 2.0], &[1.0, 1.0]))
            .unwrap();
        assert_eq!(c, Covector::zeros(2));
    }

    #[test]
    fn contact_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts = random_points(&mut rng, 4, 100);
        let lorentz = lorentz_force(&TwoForm::constant(4, vec![0.3, -1.0, 2.0, 0.7, 0.1, -0.4]));
        assert!(is_contact(&lorentz, &pts, 1e-12).unwrap().is_contact);
        assert!(is_contact(&ForceForm::zero(4), &pts, 1e-12).unwrap().is_contact);

        let exact = conservative_force(&ScalarField::coordinate(2, 0));
        let mut pts2 = random_points(&mut rng, 2, 10);
        pts2.push(tp(&[0.0, 0.0], &[1.0, 0.0]));
        let check = is_contact(&exact, &pts2, 1e-12).unwrap();
        assert!(!check.is_contact);
        assert!(check.max_alpha_dot >= 1.0);
        assert!(is_contact(&exact, &[], 1e-12).is_err());
    }

    #[test]
    fn correction_examples() {
        let m = MetricField::euclidean(2);
        let exact = conservative_force(&ScalarField::coordinate(2, 0));
        let corrected = relativistic_correction(&exact, &m);
        assert_eq!(corrected.kind(), ForceKind::Corrected);
        for x in [[0.0, 0.0], [3.0, -1.0]] {
            let c = corrected.eval(&tp(&x, &[1.0, 0.0])).unwrap();
            assert_eq!(c, Covector(vec![0.0, 0.0]));
        }

        let mk = MetricField::minkowski(4);
        let lorentz = lorentz_force(&charged_field());
        let v = tp(&[0.0, 1.0, 0.0, 0.0], &[2.0, 0.3, 1.0, 0.1]);
        assert_eq!(
            relativistic_correction(&lorentz, &mk).eval(&v).unwrap(),
            lorentz.eval(&v).unwrap()
        );
        let zero = relativistic_correction(&ForceForm::zero(4), &mk);
        assert_eq!(zero.eval(&v).unwrap(), Covector::zeros(4));

        let light = tp(&[0.0; 4], &[1.0, 1.0, 0.0, 0.0]);
        assert!(matches!(zero.eval(&light), Err(Error::LightlikeVelocity { .. })));
    }

    #[test]
    fn raise_index_examples() {
        let mk = MetricField::minkowski(4);
        let up = raise_index(&mk, &Covector(vec![0.0, -1.0, 0.0, 0.0]), &[0.0; 4]).unwrap();
        assert_eq!(up, vec![0.0, 1.0, 0.0, 0.0]);
        let c = Covector(vec![1.5, -2.0, 0.25]);
        assert_eq!(raise_index(&MetricField::euclidean(3), &c, &[0.0; 3]).unwrap(), c.0);
        let up = raise_index(
            &MetricField::diagonal(&[2.0, 1.0]),
            &Covector(vec![2.0, 1.0]),
            &[0.0, 0.0],
        )
        .unwrap();
        assert_eq!(up, vec![1.0, 1.0]);
    }

    #[test]
    fn lorentz_alpha_dot_vanishes_on_random_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let upper: Vec<f64> = (0..6).map(|_| rng.random_range(-3.0..3.0)).collect();
            let f = lorentz_force(&TwoForm::constant(4, upper.clone()));
            let fmax = upper.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
            for v in random_points(&mut rng, 4, 1000) {
                // rounding budget: n^2 products of size |F| |xdot|^2
                let vmax = v.xdot.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
                let scale = 16.0 * 2.0 * fmax * vmax * vmax;
                assert!(alpha_dot(&f, &v).unwrap().abs() <= 4.0 * f64::EPSILON * scale.max(1e-300));
            }
        }
    }

    proptest! {
        #[test]
        fn conservative_force_ignores_velocity(
            x in prop::collection::vec(-2.0f64..2.0, 3),
            v1 in prop::collection::vec(-5.0f64..5.0, 3),
            v2 in prop::collection::vec(-5.0f64..5.0, 3),
        ) {
            let u = ScalarField::new(3, |x| Ok(x[0].sin() * x[1] + x[2].powi(3)));
            let f = conservative_force(&u);
            prop_assert_eq!(
                f.eval(&TangentPoint::new(x.clone(), v1)).unwrap(),
                f.eval(&TangentPoint::new(x, v2)).unwrap()
            );
        }

        #[test]
        fn corrected_force_is_contact(
            x in prop::collection::vec(-2.0f64..2.0, 4),
            v in prop::collection::vec(-2.0f64..2.0, 4),
        ) {
            let m = MetricField::minkowski(4);
            let p = TangentPoint::new(x, v);
            prop_assume!(m.theta_dot(&p).unwrap().abs() > 0.1);
            let u = ScalarField::new(4, |x| Ok(x[0] * x[1] + (x[2] - x[3]).cos()));
            let f = conservative_force(&u);
            let raw = alpha_dot(&f, &p).unwrap();
            let corrected = alpha_dot(&relativistic_correction(&f, &m), &p).unwrap();
            prop_assert!(corrected.abs() <= 1e-12 * (1.0 + raw.abs()));
        }
    }
}
