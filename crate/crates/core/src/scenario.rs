//! JSON scenario files: a metric, a force, initial data, a time span and
//! tolerances. Expressions are strings in the [`crate::expr`] grammar.
//!
//! ```json
//! {
//!   "dim": 4,
//!   "metric": "minkowski",
//!   "force": {"type": "lorentz", "F": [["0", "0", "0"], ["0.5", "0"], ["0"]]},
//!   "correct_relativistic": false,
//!   "initial": {"x": [0, 1, 0, 0], "xdot": [1.4142135623730951, 0, 1, 0]},
//!   "t_span": [0, 3.141592653589793],
//!   "tolerances": {"rel": 1e-10, "abs": 1e-12},
//!   "outputs": ["trajectory", "summary"]
//! }
//! ```
//!
//! `F` lists the strict upper triangle row by row: row `i` holds
//! `F_i(i+1) .. F_i(n-1)`. A matrix metric must be symmetric entry by entry
//! (compared after parsing).

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{self, Expr, ParseError};
use crate::fd::FdStep;
use crate::forces::{conservative_force, lorentz_force, relativistic_correction, ForceForm, ScalarField, TwoForm};
use crate::format::{sig17, sig17_vec};
use crate::geometry::{Covector, MetricField, TangentPoint};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid scenario field {field}: {message}")]
    Invalid { field: String, message: String },

    #[error("cannot parse expression in {field}: {error}")]
    Expr { field: String, error: ParseError },
}

impl ScenarioError {
    pub fn kind(&self) -> &'static str {
        match self {
            ScenarioError::Json(_) => "ScenarioJson",
            ScenarioError::Invalid { .. } => "ScenarioInvalid",
            ScenarioError::Expr { .. } => "ParseError",
        }
    }
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricSpec {
    Builtin(String),
    Matrix { components: Vec<Vec<String>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ForceSpec {
    Zero,
    Exact {
        potential: String,
    },
    Lorentz {
        #[serde(rename = "F")]
        f: Vec<Vec<String>>,
    },
    Custom {
        components: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Initial {
    #[serde(serialize_with = "sig17_vec")]
    pub x: Vec<f64>,
    #[serde(serialize_with = "sig17_vec")]
    pub xdot: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(serialize_with = "sig17")]
    pub rel: f64,
    #[serde(serialize_with = "sig17")]
    pub abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rel: 1e-10, abs: 1e-12 }
    }
}

/// Box for random tangent samples: `[lo, hi]` per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleBox {
    #[serde(serialize_with = "ser_ranges")]
    pub x: Vec<[f64; 2]>,
    #[serde(serialize_with = "ser_ranges")]
    pub xdot: Vec<[f64; 2]>,
}

fn ser_ranges<S: serde::Serializer>(v: &[[f64; 2]], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    struct Pair<'a>(&'a [f64; 2]);
    impl Serialize for Pair<'_> {
        fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            sig17_vec(self.0, s)
        }
    }
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for r in v {
        seq.serialize_element(&Pair(r))?;
    }
    seq.end()
}

pub const OUTPUT_TRAJECTORY: &str = "trajectory";
pub const OUTPUT_SUMMARY: &str = "summary";

fn default_outputs() -> Vec<String> {
    vec![OUTPUT_TRAJECTORY.into(), OUTPUT_SUMMARY.into()]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    pub metric: MetricSpec,
    pub force: ForceSpec,
    #[serde(default)]
    pub correct_relativistic: bool,
    pub initial: Initial,
    #[serde(serialize_with = "sig17_vec")]
    pub t_span: [f64; 2],
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_box: Option<SampleBox>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A validated scenario turned into numerical objects.
#[derive(Clone)]
pub struct System {
    pub dim: usize,
    pub metric: MetricField,
    /// Force as declared, before any correction.
    pub force: ForceForm,
    pub initial: TangentPoint,
    pub t_span: [f64; 2],
    pub tolerances: Tolerances,
}

impl fmt::Debug for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("System")
            .field("dim", &self.dim)
            .field("force", &self.force.kind())
            .field("initial", &self.initial)
            .field("t_span", &self.t_span)
            .finish()
    }
}

impl System {
    /// The force actually integrated: corrected when the scenario asks.
    pub fn effective_force(&self, correct: bool) -> ForceForm {
        if correct {
            relativistic_correction(&self.force, &self.metric)
        } else {
            self.force.clone()
        }
    }
}

fn parse_expr(field: String, src: &str, dim: usize, allow_velocity: bool) -> Result<Arc<Expr>, ScenarioError> {
    expr::parse(src, dim, allow_velocity)
        .map(Arc::new)
        .map_err(|error| ScenarioError::Expr { field, error })
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = serde_json::from_str(text)?;
        s.resolved_dim()?;
        Ok(s)
    }

    /// Canonical pretty-printed form, newline terminated.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenario serializes");
        s.push('\n');
        s
    }

    /// Dimension implied by the metric, checked against every other field.
    pub fn resolved_dim(&self) -> Result<usize, ScenarioError> {
        let n = match (&self.metric, self.dim) {
            (MetricSpec::Matrix { components }, d) => {
                let n = components.len();
                if let Some(d) = d {
                    if d != n {
                        return Err(invalid("metric", format!("matrix has {n} rows but dim is {d}")));
                    }
                }
                n
            }
            (MetricSpec::Builtin(name), d) => match name.as_str() {
                "minkowski" => d.unwrap_or(4),
                "euclidean" => d.unwrap_or(self.initial.x.len()),
                other => return Err(invalid("metric", format!("unknown builtin metric '{other}'"))),
            },
        };
        if n == 0 {
            return Err(invalid("dim", "dimension must be positive"));
        }
        if let MetricSpec::Matrix { components } = &self.metric {
            for (i, row) in components.iter().enumerate() {
                if row.len() != n {
                    return Err(invalid(
                        format!("metric.components[{i}]"),
                        format!("expected {n} entries"),
                    ));
                }
            }
        }
        match &self.force {
            ForceSpec::Lorentz { f } => {
                if f.len() != n - 1 {
                    return Err(invalid("force.F", format!("expected {} rows", n - 1)));
                }
                for (i, row) in f.iter().enumerate() {
                    if row.len() != n - 1 - i {
                        return Err(invalid(
                            format!("force.F[{i}]"),
                            format!("expected {} entries", n - 1 - i),
                        ));
                    }
                }
            }
            ForceSpec::Custom { components } if components.len() != n => {
                return Err(invalid("force.components", format!("expected {n} entries")));
            }
            _ => {}
        }
        if self.initial.x.len() != n {
            return Err(invalid("initial.x", format!("expected {n} entries")));
        }
        if self.initial.xdot.len() != n {
            return Err(invalid("initial.xdot", format!("expected {n} entries")));
        }
        if self.initial.x.iter().chain(&self.initial.xdot).any(|v| !v.is_finite()) {
            return Err(invalid("initial", "values must be finite"));
        }
        let [t0, t1] = self.t_span;
        if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
            return Err(invalid("t_span", "need finite t0 < t1"));
        }
        let tol = self.tolerances;
        if !(tol.rel > 0.0 && tol.abs > 0.0 && tol.rel.is_finite() && tol.abs.is_finite()) {
            return Err(invalid("tolerances", "rel and abs must be positive"));
        }
        for o in &self.outputs {
            if o != OUTPUT_TRAJECTORY && o != OUTPUT_SUMMARY {
                return Err(invalid("outputs", format!("unknown output '{o}'")));
            }
        }
        if let Some(b) = &self.sample_box {
            if b.x.len() != n || b.xdot.len() != n {
                return Err(invalid("sample_box", format!("expected {n} ranges for x and xdot")));
            }
            if b.x
                .iter()
                .chain(&b.xdot)
                .any(|[lo, hi]| !(lo.is_finite() && hi.is_finite() && lo <= hi))
            {
                return Err(invalid("sample_box", "ranges must be finite with lo <= hi"));
            }
        }
        Ok(n)
    }

    pub fn wants(&self, output: &str) -> bool {
        self.outputs.iter().any(|o| o == output)
    }

    /// Sampling box, defaulting to `x` within 1 of the initial position and
    /// `xdot` within 1 of the initial velocity.
    pub fn sample_box(&self) -> SampleBox {
        self.sample_box.clone().unwrap_or_else(|| SampleBox {
            x: self.initial.x.iter().map(|c| [c - 1.0, c + 1.0]).collect(),
            xdot: self.initial.xdot.iter().map(|c| [c - 1.0, c + 1.0]).collect(),
        })
    }

    /// Builds metric and force with the finite-difference policy taken
    /// from the environment.
    pub fn build(&self) -> Result<System, ScenarioError> {
        self.build_with(FdStep::from_env())
    }

    pub fn build_with(&self, step: FdStep) -> Result<System, ScenarioError> {
        let n = self.resolved_dim()?;
        let metric = match &self.metric {
            MetricSpec::Builtin(name) if name == "minkowski" => MetricField::minkowski(n),
            MetricSpec::Builtin(_) => MetricField::euclidean(n),
            MetricSpec::Matrix { components } => {
                let mut packed = Vec::with_capacity(n * (n + 1) / 2);
                for i in 0..n {
                    for j in i..n {
                        let e = parse_expr(format!("metric.components[{i}][{j}]"), &components[i][j], n, false)?;
                        let mirror = parse_expr(format!("metric.components[{j}][{i}]"), &components[j][i], n, false)?;
                        if e != mirror {
                            return Err(invalid(
                                format!("metric.components[{i}][{j}]"),
                                "metric matrix is not symmetric",
                            ));
                        }
                        packed.push(e);
                    }
                }
                MetricField::new(n, move |x| packed.iter().map(|e| Ok(e.eval(x, None)?)).collect())
            }
        }
        .with_fd_step(step);
        let force = match &self.force {
            ForceSpec::Zero => ForceForm::zero(n),
            ForceSpec::Exact { potential } => {
                let u = parse_expr("force.potential".into(), potential, n, false)?;
                conservative_force(&ScalarField::new(n, move |x| Ok(u.eval(x, None)?)).with_fd_step(step))
            }
            ForceSpec::Lorentz { f } => {
                let mut entries = Vec::new();
                for (i, row) in f.iter().enumerate() {
                    for (k, src) in row.iter().enumerate() {
                        let j = i + 1 + k;
                        entries.push(parse_expr(format!("force.F[{i}][{j}]"), src, n, false)?);
                    }
                }
                lorentz_force(&TwoForm::new(n, move |x| {
                    entries.iter().map(|e| Ok(e.eval(x, None)?)).collect()
                }))
            }
            ForceSpec::Custom { components } => {
                let comps = components
                    .iter()
                    .enumerate()
                    .map(|(i, src)| parse_expr(format!("force.components[{i}]"), src, n, true))
                    .collect::<Result<Vec<_>, _>>()?;
                ForceForm::custom(n, move |v| {
                    let c = comps
                        .iter()
                        .map(|e| Ok(e.eval(&v.x, Some(&v.xdot))?))
                        .collect::<crate::Result<Vec<_>>>()?;
                    Ok(Covector(c))
                })
            }
        };
        Ok(System {
            dim: n,
            metric,
            force,
            initial: TangentPoint::new(self.initial.x.clone(), self.initial.xdot.clone()),
            t_span: self.t_span,
            tolerances: self.tolerances,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forces::{alpha_dot, ForceKind};

    const LORENTZ: &str = r#"{
        "metric": "minkowski",
        "force": {"type": "lorentz", "F": [["0", "0", "0"], ["0.5", "0"], ["0"]]},
        "initial": {"x": [0, 1, 0, 0], "xdot": [1.4142135623730951, 0, 1, 0]},
        "t_span": [0, 3.141592653589793]
    }"#;

    #[test]
    fn defaults_and_builtin_dimension() {
        let s = Scenario::from_json(LORENTZ).unwrap();
        assert_eq!(s.resolved_dim().unwrap(), 4);
        assert_eq!(s.tolerances, Tolerances::default());
        assert!(s.wants(OUTPUT_TRAJECTORY) && s.wants(OUTPUT_SUMMARY));
        assert!(!s.correct_relativistic);
        let sys = s.build().unwrap();
        assert_eq!(sys.force.kind(), ForceKind::Lorentz);
        let c = sys.force.eval(&sys.initial).unwrap();
        // F_12 = 0.5 gives alpha = xdot1 dx2 - xdot2 dx1
        assert_eq!(c.0, vec![0.0, -1.0, 0.0, 0.0]);
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let s = Scenario::from_json(LORENTZ).unwrap();
        let a = s.to_json();
        let b = Scenario::from_json(&a).unwrap().to_json();
        assert_eq!(a, b);
        assert!(a.contains("3.1415926535897931"));
    }

    #[test]
    fn minkowski_dimension_override() {
        let s = Scenario::from_json(
            r#"{"dim": 2, "metric": "minkowski", "force": {"type": "zero"},
                "initial": {"x": [0, 0], "xdot": [1, 0.5]}, "t_span": [0, 1]}"#,
        )
        .unwrap();
        let sys = s.build().unwrap();
        assert_eq!(sys.metric.components(&[0.0, 0.0]).unwrap()[(1, 1)], -1.0);
    }

    #[test]
    fn matrix_metric_and_potential() {
        let s = Scenario::from_json(
            r#"{"metric": {"components": [["1", "0"], ["0", "x0^2"]]},
                "force": {"type": "exact", "potential": "0.5*(x0^2)"},
                "initial": {"x": [1, 0], "xdot": [0, 1]}, "t_span": [0, 1]}"#,
        )
        .unwrap();
        let sys = s.build().unwrap();
        assert_eq!(sys.metric.components(&[2.0, 0.0]).unwrap()[(1, 1)], 4.0);
        let v = TangentPoint::new(vec![2.0, 0.0], vec![1.0, 0.0]);
        assert!((alpha_dot(&sys.force, &v).unwrap() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn custom_force_may_use_velocity() {
        let s = Scenario::from_json(
            r#"{"metric": "euclidean", "force": {"type": "custom", "components": ["-xdot1", "xdot0"]},
                "initial": {"x": [0, 0], "xdot": [1, 2]}, "t_span": [0, 1]}"#,
        )
        .unwrap();
        let sys = s.build().unwrap();
        assert_eq!(sys.force.eval(&sys.initial).unwrap().0, vec![-2.0, 1.0]);
    }

    #[test]
    fn rejects_bad_scenarios() {
        let cases = [
            // asymmetric matrix
            r#"{"metric": {"components": [["1", "x1"], ["0", "1"]]}, "force": {"type": "zero"},
                "initial": {"x": [0, 0], "xdot": [1, 0]}, "t_span": [0, 1]}"#,
            // velocity in a metric entry
            r#"{"metric": {"components": [["xdot0", "0"], ["0", "1"]]}, "force": {"type": "zero"},
                "initial": {"x": [0, 0], "xdot": [1, 0]}, "t_span": [0, 1]}"#,
            // velocity in a potential
            r#"{"metric": "euclidean", "force": {"type": "exact", "potential": "xdot0"},
                "initial": {"x": [0, 0], "xdot": [1, 0]}, "t_span": [0, 1]}"#,
            // wrong F shape
            r#"{"metric": "euclidean", "force": {"type": "lorentz", "F": [["1", "0"]]},
                "initial": {"x": [0, 0], "xdot": [1, 0]}, "t_span": [0, 1]}"#,
            // reversed span
            r#"{"metric": "euclidean", "force": {"type": "zero"},
                "initial": {"x": [0, 0], "xdot": [1, 0]}, "t_span": [1, 0]}"#,
            // dimension mismatch
            r#"{"metric": "minkowski", "force": {"type": "zero"},
                "initial": {"x": [0, 0], "xdot": [1, 0]}, "t_span": [0, 1]}"#,
            // unknown builtin
            r#"{"metric": "schwarzschild", "force": {"type": "zero"},
                "initial": {"x": [0, 0], "xdot": [1, 0]}, "t_span": [0, 1]}"#,
            // unknown force type
            r#"{"metric": "euclidean", "force": {"type": "magic"},
                "initial": {"x": [0, 0], "xdot": [1, 0]}, "t_span": [0, 1]}"#,
            // unknown output
            r#"{"metric": "euclidean", "force": {"type": "zero"}, "outputs": ["plot"],
                "initial": {"x": [0, 0], "xdot": [1, 0]}, "t_span": [0, 1]}"#,
            "{not json",
        ];
        for c in cases {
            let r = Scenario::from_json(c).and_then(|s| s.build().map(|_| ()));
            assert!(r.is_err(), "accepted {c}");
        }
        let e = Scenario::from_json(
            r#"{"metric": "euclidean", "force": {"type": "exact", "potential": "2*(3+"},
                "initial": {"x": [0, 0], "xdot": [1, 0]}, "t_span": [0, 1]}"#,
        )
        .unwrap()
        .build()
        .unwrap_err();
        match e {
            ScenarioError::Expr { field, error } => {
                assert_eq!(field, "force.potential");
                assert_eq!(error.offset, 6);
            }
            other => panic!("{other:?}"),
        }
    }
}
