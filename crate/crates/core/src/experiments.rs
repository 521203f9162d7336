//! Named scenarios with their expected verifier outcomes, and parameter
//! sweeps over them.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::solver::{
    detect_hitting, energy_diagnostic, hitting_index, max_descent_increase, max_distance_after, simulate,
    verify_differential_inequality, ConfigSpec, Diffusivity, HittingReport, InequalityCheck, InitialDatum,
    SimulationConfig, SourceTerm, TrajectoryRecord,
};

/// A verifier check and its pass threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Check {
    /// `t* ≤ d_K(θ₀)/(ρ − ρ*) + slack`, with `ρ*` taken over `[0, t*]`.
    HitBound { slack: f64 },
    /// `|t* − target| ≤ tol`.
    HitTime { target: f64, tol: f64 },
    /// Pre-hitting slope `≤ −(ρ − ρ*) + margin`.
    SlopeBound { margin: f64 },
    /// `|slope − target| ≤ tol`.
    SlopeTarget { target: f64, tol: f64 },
    /// `supₙ d_K(θⁿ) ≤ threshold`.
    Invariance { threshold: f64 },
    /// `d_K(θ(t)) ≤ threshold` for all sample times `t > after`; without
    /// `after`, for all `t > t* + dt`.
    Persistence { after: Option<f64>, threshold: f64 },
    /// `d_K` nonincreasing (up to `tol`) until it first drops below ε.
    MonotoneDescent { tol: f64 },
    /// Discrete differential inequality residual and the norm condition.
    InequalityResidual { max: f64 },
    EnergyRatio { max: f64 },
    /// `|mean θ(t) − (t − 1)| ≤ tol` on `t ∈ [0, until]`.
    AnalyticTrace { until: f64, tol: f64 },
}

impl Check {
    pub fn id(&self) -> &'static str {
        match self {
            Check::HitBound { .. } => "hit-bound",
            Check::HitTime { .. } => "hit-time",
            Check::SlopeBound { .. } => "slope",
            Check::SlopeTarget { .. } => "slope-target",
            Check::Invariance { .. } => "invariance",
            Check::Persistence { .. } => "persistence",
            Check::MonotoneDescent { .. } => "monotone-descent",
            Check::InequalityResidual { .. } => "inequality-residual",
            Check::EnergyRatio { .. } => "energy-ratio",
            Check::AnalyticTrace { .. } => "analytic-trace",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub spec: ConfigSpec,
    pub expectations: Vec<Check>,
}

impl Scenario {
    pub fn config(&self) -> Result<SimulationConfig> {
        self.spec.build()
    }
}

pub const SCENARIO_NAMES: [&str; 4] = ["intro_analytic", "pure_feedback", "double_obstacle", "degenerate_kappa"];

pub fn scenario_by_name(name: &str) -> Option<Scenario> {
    match name {
        "intro_analytic" => Some(scenario_intro_analytic()),
        "pure_feedback" => Some(scenario_pure_feedback(2.0)),
        "double_obstacle" => Some(scenario_double_obstacle()),
        "degenerate_kappa" => Some(scenario_degenerate_kappa(0.1)),
        _ => None,
    }
}

pub fn all_scenarios() -> Vec<Scenario> {
    SCENARIO_NAMES.iter().filter_map(|n| scenario_by_name(n)).collect()
}

/// Spatially constant datum `θ₀ ≡ −1` on the unit interval driven towards
/// `K = {v ≥ 0}` with `ρ = 1` and the step source under which
/// `θ(t) = t − 1` is an exact solution.
pub fn scenario_intro_analytic() -> Scenario {
    let eps = 1e-3;
    let spec = ConfigSpec {
        n_cells: 64,
        domain_length: 1.0,
        obstacle_lower: 0.0,
        obstacle_upper: f64::INFINITY,
        kappa: Diffusivity::constant(1.0).expect("valid"),
        source: SourceTerm::IntroStep,
        theta0: InitialDatum::Constant(-1.0),
        rho: 1.0,
        epsilon: eps,
        alpha: 0.0,
        t_final: 2.0,
        dt: 1e-4,
        ..Default::default()
    };
    Scenario {
        name: "intro_analytic".into(),
        expectations: vec![
            Check::AnalyticTrace { until: 1.0, tol: 0.02 },
            Check::HitTime { target: 1.0, tol: 0.01 },
            Check::HitBound { slack: 2.0 * spec.dt },
            Check::Persistence { after: Some(1.05), threshold: eps + 1e-5 },
            Check::InequalityResidual { max: 1e-2 * spec.rho },
            Check::EnergyRatio { max: 1.0 + 1e-9 },
        ],
        spec,
    }
}

fn pure_feedback_spec(rho: f64) -> ConfigSpec {
    ConfigSpec {
        n_cells: 64,
        domain_length: 1.0,
        obstacle_lower: 0.0,
        obstacle_upper: f64::INFINITY,
        kappa: Diffusivity::constant(1.0).expect("valid"),
        source: SourceTerm::Zero,
        theta0: InitialDatum::Constant(-1.0),
        rho,
        epsilon: 1e-3,
        alpha: 0.0,
        t_final: 2.0 / rho + 0.5,
        // small enough for a ρ-sweep up to 8 at ε = 1e-3
        dt: 5e-5,
        ..Default::default()
    }
}

fn feedback_expectations(spec: &ConfigSpec) -> Vec<Check> {
    let rho = spec.rho;
    let dt = spec.dt;
    let fp = spec.fp_tol;
    vec![
        Check::HitBound { slack: 2.0 * dt },
        Check::HitTime { target: 1.0 / rho, tol: 0.02 / rho },
        Check::SlopeBound { margin: 0.05 * rho },
        Check::SlopeTarget { target: -rho, tol: 0.02 * rho },
        Check::MonotoneDescent { tol: 0.0 },
        Check::Persistence { after: None, threshold: spec.epsilon + 10.0 * fp },
        Check::InequalityResidual { max: 1e-3 },
        Check::EnergyRatio { max: 1.0 + 1e-9 },
    ]
}

/// `f = 0`, `θ₀ ≡ −1`, `K = {v ≥ 0}`: the distance decays as `1 − ρt`.
pub fn scenario_pure_feedback(rho: f64) -> Scenario {
    let spec = pure_feedback_spec(rho);
    Scenario {
        name: "pure_feedback".into(),
        expectations: feedback_expectations(&spec),
        spec,
    }
}

/// `θ₀ = 3cos(2πx)` violating both bounds of `I = [−1, 1]`.
pub fn scenario_double_obstacle() -> Scenario {
    let spec = ConfigSpec {
        n_cells: 64,
        domain_length: 1.0,
        obstacle_lower: -1.0,
        obstacle_upper: 1.0,
        kappa: Diffusivity::constant(1.0).expect("valid"),
        source: SourceTerm::Zero,
        theta0: InitialDatum::Cosine { amplitude: 3.0, frequency: 1.0 },
        rho: 3.0,
        epsilon: 1e-3,
        alpha: 0.0,
        t_final: 1.0,
        dt: 1e-4,
        ..Default::default()
    };
    Scenario {
        name: "double_obstacle".into(),
        expectations: vec![
            Check::HitBound { slack: 2.0 * spec.dt },
            Check::SlopeBound { margin: 0.05 * spec.rho },
            Check::MonotoneDescent { tol: 0.0 },
            Check::Persistence { after: None, threshold: spec.epsilon + 10.0 * spec.fp_tol },
            Check::InequalityResidual { max: 1e-2 * spec.rho },
            Check::EnergyRatio { max: 1.0 + 1e-9 },
        ],
        spec,
    }
}

/// Pure feedback with the degenerate conductivity `|r|/(1+|r|)` lifted by α.
pub fn scenario_degenerate_kappa(alpha: f64) -> Scenario {
    let rho = 2.0;
    let spec = ConfigSpec {
        kappa: Diffusivity::saturating(),
        alpha,
        dt: 1e-4,
        ..pure_feedback_spec(rho)
    };
    let mut expectations = feedback_expectations(&spec);
    for c in expectations.iter_mut() {
        if let Check::HitTime { target, tol } = c {
            *target = 1.0 / rho;
            *tol = 0.02 / rho;
        }
    }
    Scenario {
        name: "degenerate_kappa".into(),
        expectations,
        spec,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub check: Check,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutcome {
    pub trajectory: TrajectoryRecord,
    pub report: HittingReport,
    pub inequality: InequalityCheck,
    pub worst_ratio: f64,
    pub checks: Vec<CheckResult>,
}

impl ScenarioOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// `ρ*` restricted to the time levels `0..=last`.
fn rho_star_until(cfg: &SimulationConfig, last: usize) -> f64 {
    (0..=last.min(cfg.n_steps())).map(|n| cfg.source_norm(n)).fold(0.0, f64::max)
}

/// Evaluates one check on an already computed trajectory.
pub fn evaluate_check(
    check: &Check,
    cfg: &SimulationConfig,
    traj: &TrajectoryRecord,
    report: &HittingReport,
    inequality: &InequalityCheck,
    worst_ratio: f64,
) -> CheckResult {
    let rho = cfg.rho();
    let d0 = traj.samples.first().map_or(0.0, |s| s.d_k);
    let (value, threshold) = match *check {
        Check::HitBound { slack } => match hitting_index(traj, cfg.hit_tol()) {
            Some(i) => {
                let rho_star = rho_star_until(cfg, i);
                let bound = if rho > rho_star { d0 / (rho - rho_star) } else { f64::INFINITY };
                (traj.samples[i].time, bound + slack)
            }
            None => (f64::INFINITY, 0.0),
        },
        Check::HitTime { target, tol } => (report.t_star.map_or(f64::INFINITY, |t| (t - target).abs()), tol),
        Check::SlopeBound { margin } => {
            let last = hitting_index(traj, cfg.hit_tol()).unwrap_or(cfg.n_steps());
            let rho_star = rho_star_until(cfg, last);
            (report.slope_fit.unwrap_or(f64::INFINITY), -(rho - rho_star) + margin)
        }
        Check::SlopeTarget { target, tol } => (report.slope_fit.map_or(f64::INFINITY, |s| (s - target).abs()), tol),
        Check::Invariance { threshold } => (max_distance_after(traj, f64::NEG_INFINITY), threshold),
        Check::Persistence { after, threshold } => {
            let after = after.unwrap_or_else(|| report.t_star.map_or(f64::INFINITY, |t| t + cfg.dt()));
            (max_distance_after(traj, after), threshold)
        }
        Check::MonotoneDescent { tol } => (max_descent_increase(traj, cfg.epsilon()), tol),
        Check::InequalityResidual { max } => {
            let value = if inequality.norm_condition_holds() { inequality.max_violation } else { f64::INFINITY };
            (value, max)
        }
        Check::EnergyRatio { max } => (worst_ratio, max),
        Check::AnalyticTrace { until, tol } => {
            let err = traj
                .samples
                .iter()
                .filter(|s| s.time <= until + 0.5 * traj.dt)
                .map(|s| (s.theta_mean - (s.time - 1.0)).abs())
                .fold(0.0, f64::max);
            (err, tol)
        }
    };
    CheckResult {
        check: *check,
        value,
        threshold,
        passed: value <= threshold,
    }
}

pub fn evaluate(cfg: &SimulationConfig, expectations: &[Check]) -> Result<ScenarioOutcome> {
    let trajectory = simulate(cfg)?;
    let report = detect_hitting(&trajectory, cfg);
    let inequality = verify_differential_inequality(&trajectory, cfg);
    let worst_ratio = energy_diagnostic(&trajectory, cfg);
    let checks = expectations
        .iter()
        .map(|c| evaluate_check(c, cfg, &trajectory, &report, &inequality, worst_ratio))
        .collect();
    Ok(ScenarioOutcome {
        trajectory,
        report,
        inequality,
        worst_ratio,
        checks,
    })
}

pub fn run_scenario(scenario: &Scenario) -> Result<ScenarioOutcome> {
    evaluate(&scenario.config()?, &scenario.expectations)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Rho,
    Epsilon,
    Alpha,
    Dt,
    NCells,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Rho => "rho",
            SweepAxis::Epsilon => "epsilon",
            SweepAxis::Alpha => "alpha",
            SweepAxis::Dt => "dt",
            SweepAxis::NCells => "n_cells",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [Self::Rho, Self::Epsilon, Self::Alpha, Self::Dt, Self::NCells]
            .into_iter()
            .find(|a| a.name() == name)
    }

    pub fn apply(self, spec: &mut ConfigSpec, value: f64) -> Result<()> {
        match self {
            SweepAxis::Rho => spec.rho = value,
            SweepAxis::Epsilon => spec.epsilon = value,
            SweepAxis::Alpha => spec.alpha = value,
            SweepAxis::Dt => spec.dt = value,
            SweepAxis::NCells => {
                if value.fract() != 0.0 || value < 0.0 {
                    return Err(Error::param("n_cells", format!("not a count: {value}")));
                }
                spec.n_cells = value as usize;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub trajectory: TrajectoryRecord,
    pub report: HittingReport,
    pub max_violation: f64,
    pub worst_ratio: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: SweepAxis,
    /// Sorted by parameter value; a rejected or failed run carries its error.
    pub rows: Vec<(f64, std::result::Result<SweepRow, String>)>,
}

/// One simulation per value, run in parallel; rows come back sorted by
/// value. Expectations of the base scenario are re-derived only where they
/// do not depend on the swept parameter; `passed` reflects the base list.
pub fn run_sweep(base: &Scenario, axis: SweepAxis, values: &[f64]) -> Result<SweepResult> {
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rows = sorted
        .par_iter()
        .map(|&value| {
            let row = (|| -> Result<SweepRow> {
                let mut spec = base.spec.clone();
                axis.apply(&mut spec, value)?;
                let expectations = expectations_for(base, &spec);
                let outcome = evaluate(&spec.build()?, &expectations)?;
                Ok(SweepRow {
                    value,
                    trajectory: outcome.trajectory.clone(),
                    passed: outcome.passed(),
                    report: outcome.report,
                    max_violation: outcome.report.max_violation,
                    worst_ratio: outcome.worst_ratio,
                })
            })();
            (value, row.map_err(|e| e.to_string()))
        })
        .collect();
    Ok(SweepResult { axis, rows })
}

/// Expectations of `base` re-derived for a modified spec: pure-feedback
/// targets scale with ρ, everything else carries over.
pub fn expectations_for(base: &Scenario, spec: &ConfigSpec) -> Vec<Check> {
    match base.name.as_str() {
        "pure_feedback" | "degenerate_kappa" => feedback_expectations(spec),
        _ => base.expectations.clone(),
    }
}
