//! Scenario-driven operations behind the command-line tool: integrate,
//! contact check, relativistic correction, the two-particle report and the
//! end-to-end demo. Every file is written atomically.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{energy_drift, integrate, newton_equation, IntegrationStats, Trajectory};
use crate::error::Error;
use crate::forces::{is_contact, ContactCheck, ForceForm, ForceKind};
use crate::format::{fmt_sig17, sig17, sig17_opt, sig17_vec, write_atomic};
use crate::geometry::{MetricField, TangentPoint};
use crate::paradox::{
    gamma_c, gamma_doubleprime, gamma_doubleprime_velocity, gamma_prime, k_c, paradox_report, point_a, speed_constants,
    ParadoxReport, ReportMode, REPORT_TOL,
};
use crate::scenario::{
    ForceSpec, Initial, MetricSpec, Scenario, ScenarioError, System, Tolerances, OUTPUT_SUMMARY, OUTPUT_TRAJECTORY,
};
use crate::timeflow::{cumulative_proper_time, duration, is_strictly_relativistic, proper_time, TimeFormChoice};

pub const TRAJECTORY_CSV: &str = "trajectory.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const REPORT_JSON: &str = "report.json";
pub const CURVES_CSV: &str = "curves.csv";

/// Samples with `|theta_dot|` below this are skipped when checking a
/// corrected force, which is undefined on the light cone.
pub const CORRECTED_SAMPLE_MIN_THETA_DOT: f64 = 0.1;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),

    #[error(transparent)]
    Numeric(#[from] Error),

    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    /// 1 for scenario and file problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Numeric(_) => 2,
            RunError::Scenario(_) | RunError::Io { .. } => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Scenario(e) => e.kind(),
            RunError::Numeric(e) => e.kind(),
            RunError::Io { .. } => "Io",
        }
    }

    /// `{"error": kind, "message": text, "exit_code": code}`.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        })
        .to_string()
    }
}

pub type RunResult<T> = std::result::Result<T, RunError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn load_scenario(path: &Path) -> RunResult<Scenario> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    Ok(Scenario::from_json(&text)?)
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> RunResult<PathBuf> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(name);
    write_atomic(&path, bytes).map_err(io_err(&path))?;
    Ok(path)
}

pub fn to_json_pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegrateSummary {
    pub dim: usize,
    pub force: ForceKind,
    pub corrected: bool,
    #[serde(serialize_with = "sig17_vec")]
    pub t_span: [f64; 2],
    #[serde(serialize_with = "sig17_vec")]
    pub final_x: Vec<f64>,
    #[serde(serialize_with = "sig17_vec")]
    pub final_xdot: Vec<f64>,
    #[serde(serialize_with = "sig17")]
    pub energy_drift: f64,
    /// Integral of the canonical time form; `null` when it is undefined.
    #[serde(serialize_with = "sig17_opt")]
    pub duration: Option<f64>,
    /// `null` when the lightlike guard trips somewhere on the trajectory.
    #[serde(serialize_with = "sig17_opt")]
    pub proper_time: Option<f64>,
    pub strictly_relativistic: bool,
    #[serde(serialize_with = "sig17")]
    pub deviation: f64,
    pub stats: Option<IntegrationStats>,
}

/// Integrated trajectory plus the quantities reported about it.
#[derive(Debug, Clone)]
pub struct IntegrateOutcome {
    pub trajectory: Trajectory,
    pub summary: IntegrateSummary,
    pub csv: String,
}

fn lenient<T>(r: crate::Result<T>) -> crate::Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::ZeroSectionOrLightlike { .. } | Error::LightlikeVelocity { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// CSV: `t, x0.., xdot0.., T, theta_dot, tau_cum`.
pub fn trajectory_csv(tr: &Trajectory, metric: &MetricField) -> crate::Result<String> {
    let n = tr.dim();
    let mut out = String::from("t");
    for i in 0..n {
        write!(out, ",x{i}").unwrap();
    }
    for i in 0..n {
        write!(out, ",xdot{i}").unwrap();
    }
    out.push_str(",T,theta_dot,tau_cum\n");
    let tau = cumulative_proper_time(tr, metric);
    for (s, tau) in tr.samples().iter().zip(tau) {
        let td = metric.theta_dot(&s.point)?;
        out.push_str(&fmt_sig17(s.t));
        for v in s.point.x.iter().chain(&s.point.xdot) {
            out.push(',');
            out.push_str(&fmt_sig17(*v));
        }
        write!(out, ",{},{},", fmt_sig17(0.5 * td), fmt_sig17(td)).unwrap();
        if let Some(tau) = tau {
            out.push_str(&fmt_sig17(tau));
        }
        out.push('\n');
    }
    Ok(out)
}

fn integrate_system(sys: &System, force: &ForceForm) -> crate::Result<Trajectory> {
    integrate(
        &newton_equation(&sys.metric, force)?,
        &sys.initial,
        sys.t_span[0],
        sys.t_span[1],
        sys.tolerances.rel,
        sys.tolerances.abs,
    )
}

/// Integrates the scenario without touching the file system.
pub fn integrate_scenario(scenario: &Scenario) -> RunResult<IntegrateOutcome> {
    let sys = scenario.build()?;
    let force = sys.effective_force(scenario.correct_relativistic);
    let tr = integrate_system(&sys, &force)?;
    let m = &sys.metric;
    let strict = is_strictly_relativistic(&tr, m, REPORT_TOL)?;
    let summary = IntegrateSummary {
        dim: sys.dim,
        force: force.kind(),
        corrected: scenario.correct_relativistic,
        t_span: sys.t_span,
        final_x: tr.last().x.clone(),
        final_xdot: tr.last().xdot.clone(),
        energy_drift: energy_drift(&tr, m)?,
        duration: lenient(duration(&tr, &TimeFormChoice::CanonicalTheta, Some(m)))?,
        proper_time: lenient(proper_time(&tr, m))?,
        strictly_relativistic: strict.strict,
        deviation: strict.max_deviation,
        stats: tr.stats().cloned(),
    };
    let csv = trajectory_csv(&tr, m)?;
    Ok(IntegrateOutcome {
        trajectory: tr,
        summary,
        csv,
    })
}

/// Integrates and writes the requested `trajectory.csv` / `summary.json`.
pub fn run_integrate(scenario: &Scenario, out_dir: &Path) -> RunResult<IntegrateSummary> {
    let outcome = integrate_scenario(scenario)?;
    if scenario.wants(OUTPUT_TRAJECTORY) {
        write_file(out_dir, TRAJECTORY_CSV, outcome.csv.as_bytes())?;
    }
    if scenario.wants(OUTPUT_SUMMARY) {
        write_file(out_dir, SUMMARY_JSON, to_json_pretty(&outcome.summary).as_bytes())?;
    }
    Ok(outcome.summary)
}

/// Uniform samples from the scenario box, seeded by `seed` (default 0).
/// With `avoid_light_cone`, samples too close to the light cone are
/// redrawn.
pub fn sample_tangent_points(
    scenario: &Scenario,
    metric: &MetricField,
    count: usize,
    avoid_light_cone: bool,
) -> RunResult<Vec<TangentPoint>> {
    let bx = scenario.sample_box();
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed.unwrap_or(0));
    let draw = |rng: &mut ChaCha8Rng, ranges: &[[f64; 2]]| -> Vec<f64> {
        ranges
            .iter()
            .map(|&[lo, hi]| if hi > lo { rng.random_range(lo..hi) } else { lo })
            .collect()
    };
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        if attempts > 100 * count.max(1) {
            return Err(Error::Domain("sample box lies too close to the light cone".into()).into());
        }
        let v = TangentPoint::new(draw(&mut rng, &bx.x), draw(&mut rng, &bx.xdot));
        if avoid_light_cone && metric.theta_dot(&v)?.abs() < CORRECTED_SAMPLE_MIN_THETA_DOT {
            continue;
        }
        out.push(v);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub is_contact: bool,
    #[serde(serialize_with = "sig17")]
    pub max_alpha_dot: f64,
    pub force: ForceKind,
    pub samples: usize,
    #[serde(serialize_with = "sig17")]
    pub tol: f64,
}

/// Contact-system membership of the scenario force (corrected when the
/// scenario asks) on random samples.
pub fn run_check(scenario: &Scenario, samples: usize, tol: f64) -> RunResult<CheckReport> {
    let sys = scenario.build()?;
    let force = sys.effective_force(scenario.correct_relativistic);
    let pts = sample_tangent_points(scenario, &sys.metric, samples, scenario.correct_relativistic)?;
    let ContactCheck {
        is_contact,
        max_alpha_dot,
    } = is_contact(&force, &pts, tol)?;
    Ok(CheckReport {
        is_contact,
        max_alpha_dot,
        force: force.kind(),
        samples,
        tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrectReport {
    pub force: ForceKind,
    pub before: ContactCheckJson,
    pub after: ContactCheckJson,
    /// Largest component change `|alpha~ - alpha|` over the samples.
    #[serde(serialize_with = "sig17")]
    pub max_change: f64,
    pub unchanged: bool,
    #[serde(serialize_with = "sig17")]
    pub energy_drift_before: f64,
    #[serde(serialize_with = "sig17")]
    pub energy_drift_after: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContactCheckJson {
    pub is_contact: bool,
    #[serde(serialize_with = "sig17")]
    pub max_alpha_dot: f64,
}

impl From<ContactCheck> for ContactCheckJson {
    fn from(c: ContactCheck) -> Self {
        ContactCheckJson {
            is_contact: c.is_contact,
            max_alpha_dot: c.max_alpha_dot,
        }
    }
}

/// Applies the relativistic correction, re-checks contact membership and
/// compares energy drift along the integrated trajectories.
pub fn run_correct(scenario: &Scenario, samples: usize, tol: f64) -> RunResult<CorrectReport> {
    let sys = scenario.build()?;
    let corrected = sys.effective_force(true);
    let pts = sample_tangent_points(scenario, &sys.metric, samples, true)?;
    let before = is_contact(&sys.force, &pts, tol)?;
    let after = is_contact(&corrected, &pts, tol)?;
    let mut max_change = 0.0_f64;
    for v in &pts {
        let a = sys.force.eval(v)?;
        let b = corrected.eval(v)?;
        for (a, b) in a.0.iter().zip(&b.0) {
            max_change = max_change.max((a - b).abs());
        }
    }
    let drift_before = energy_drift(&integrate_system(&sys, &sys.force)?, &sys.metric)?;
    let drift_after = energy_drift(&integrate_system(&sys, &corrected)?, &sys.metric)?;
    Ok(CorrectReport {
        force: sys.force.kind(),
        before: before.into(),
        after: after.into(),
        max_change,
        unchanged: max_change == 0.0,
        energy_drift_before: drift_before,
        energy_drift_after: drift_after,
    })
}

/// CSV of `Gamma'`, `Gamma''` and `Gamma_C` at `s`: one row per sample,
/// `curve, t, x0..x3, xdot0..xdot3`.
pub fn paradox_curves_csv(eta: f64, s: f64) -> crate::Result<String> {
    let (gc, _) = gamma_c(eta, s)?;
    let mut out = String::from("curve,t,x0,x1,x2,x3,xdot0,xdot1,xdot2,xdot3\n");
    for (name, tr) in [
        ("prime", gamma_prime(eta)),
        ("doubleprime", gamma_doubleprime(eta)),
        ("chord", gc),
    ] {
        for sm in tr.samples() {
            out.push_str(name);
            out.push(',');
            out.push_str(&fmt_sig17(sm.t));
            for v in sm.point.x.iter().chain(&sm.point.xdot) {
                out.push(',');
                out.push_str(&fmt_sig17(*v));
            }
            out.push('\n');
        }
    }
    Ok(out)
}

/// Paradox report; with `out_dir`, writes `report.json` and the curve CSV
/// (`Gamma_C` at `s`, default `pi`). An `s` outside `(0, pi]` is an error
/// with or without `out_dir`.
pub fn run_paradox(eta: f64, mode: ReportMode, out_dir: Option<&Path>, s: Option<f64>) -> RunResult<ParadoxReport> {
    if let Some(s) = s {
        k_c(eta, s)?;
    }
    let report = paradox_report(eta, mode)?;
    if let Some(dir) = out_dir {
        let csv = paradox_curves_csv(eta, s.unwrap_or(PI))?;
        write_file(dir, REPORT_JSON, to_json_pretty(&report).as_bytes())?;
        write_file(dir, CURVES_CSV, csv.as_bytes())?;
    }
    Ok(report)
}

/// Scenario for the charged particle `Gamma'` at `eta`.
pub fn charged_scenario(eta: f64) -> Scenario {
    let (lambda, _) = speed_constants(eta);
    Scenario {
        dim: Some(4),
        metric: MetricSpec::Builtin("minkowski".into()),
        force: ForceSpec::Lorentz {
            f: vec![
                vec!["0".into(), "0".into(), "0".into()],
                vec!["0.5".into(), "0".into()],
                vec!["0".into()],
            ],
        },
        correct_relativistic: false,
        initial: Initial {
            x: point_a(eta),
            xdot: vec![lambda, 0.0, eta, 0.0],
        },
        t_span: [0.0, PI],
        tolerances: Tolerances { rel: 1e-12, abs: 1e-14 },
        outputs: vec![OUTPUT_TRAJECTORY.into(), OUTPUT_SUMMARY.into()],
        sample_box: None,
        seed: None,
    }
}

/// Scenario for the free particle `Gamma''` at `eta`.
pub fn neutral_scenario(eta: f64) -> Scenario {
    let (lambda, mu) = speed_constants(eta);
    Scenario {
        force: ForceSpec::Zero,
        initial: Initial {
            x: point_a(eta),
            xdot: gamma_doubleprime_velocity(eta),
        },
        t_span: [0.0, lambda * PI / mu],
        ..charged_scenario(eta)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DemoReport {
    pub charged: IntegrateSummary,
    pub neutral: IntegrateSummary,
    pub paradox: ParadoxReport,
}

/// Writes the `eta = 1` scenarios to `out_dir`, runs both and the
/// integrated paradox report, and writes `demo.json`.
pub fn demo(out_dir: &Path) -> RunResult<DemoReport> {
    let eta = 1.0;
    let mut summaries = Vec::new();
    for (name, sc) in [("charged", charged_scenario(eta)), ("neutral", neutral_scenario(eta))] {
        let path = write_file(out_dir, &format!("{name}.json"), sc.to_json().as_bytes())?;
        let sc = load_scenario(&path)?;
        summaries.push(run_integrate(&sc, &out_dir.join(name))?);
    }
    let paradox = run_paradox(eta, ReportMode::Integrated, Some(&out_dir.join("paradox")), None)?;
    let neutral = summaries.pop().expect("two runs");
    let charged = summaries.pop().expect("two runs");
    let report = DemoReport {
        charged,
        neutral,
        paradox,
    };
    write_file(out_dir, "demo.json", to_json_pretty(&report).as_bytes())?;
    Ok(report)
}
