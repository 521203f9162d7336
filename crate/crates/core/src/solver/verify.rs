//! Post-hoc checks of a recorded trajectory against the reaching theory.

use super::config::SimulationConfig;
use super::stepper::TrajectoryRecord;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HittingReport {
    pub hit: bool,
    pub t_star: Option<f64>,
    /// `d_K(θ₀)/(ρ − ρ*)`, present only when `ρ > ρ*`.
    pub bound: Option<f64>,
    /// Least-squares slope of `d_K(θ(t))` on the samples before hitting
    /// with `d_K > ε`; absent with fewer than two such samples.
    pub slope_fit: Option<f64>,
    pub max_violation: f64,
}

/// Index of the first sample with `d_K ≤ hit_tol`.
pub fn hitting_index(traj: &TrajectoryRecord, hit_tol: f64) -> Option<usize> {
    traj.samples.iter().position(|s| s.d_k <= hit_tol)
}

pub fn detect_hitting(traj: &TrajectoryRecord, cfg: &SimulationConfig) -> HittingReport {
    let first = hitting_index(traj, cfg.hit_tol());
    let t_star = first.map(|i| traj.samples[i].time);
    let rho_star = cfg.rho_star();
    let d0 = traj.samples.first().map_or(0.0, |s| s.d_k);
    let bound = (cfg.rho() > rho_star).then(|| d0 / (cfg.rho() - rho_star));
    let end = first.unwrap_or(traj.samples.len());
    let eps = cfg.epsilon();
    let window: Vec<(f64, f64)> = traj.samples[..end]
        .iter()
        .filter(|s| s.d_k > eps)
        .map(|s| (s.time, s.d_k))
        .collect();
    HittingReport {
        hit: t_star.is_some(),
        t_star,
        bound,
        slope_fit: least_squares_slope(&window),
        max_violation: verify_differential_inequality(traj, cfg).max_violation,
    }
}

pub fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mt = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (sxy, sxx) = points.iter().fold((0.0, 0.0), |(sxy, sxx), &(t, y)| {
        (sxy + (t - mt) * (y - my), sxx + (t - mt) * (t - mt))
    });
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityCheck {
    /// `max(0, maxₙ rₙ)` with `rₙ = (ψⁿ⁺¹ − ψⁿ)/dt + ρ‖σⁿ⁺¹‖² − ‖f(tₙ₊₁)‖`.
    pub max_violation: f64,
    /// Samples with `ψ > ε/2` where `‖σ‖ < 1 − 10·fp_tol/ε`.
    pub norm_failures: usize,
    /// Smallest `‖σ‖` among samples with `ψ > ε/2` (1 when there are none).
    pub min_sigma_norm_outside_layer: f64,
}

impl InequalityCheck {
    pub fn norm_condition_holds(&self) -> bool {
        self.norm_failures == 0
    }
}

pub fn verify_differential_inequality(traj: &TrajectoryRecord, cfg: &SimulationConfig) -> InequalityCheck {
    let (rho, eps, dt) = (cfg.rho(), cfg.epsilon(), traj.dt);
    let mut max_violation = 0.0f64;
    for (n, w) in traj.samples.windows(2).enumerate() {
        let r = (w[1].d_eps_k - w[0].d_eps_k) / dt + rho * w[1].sigma_norm * w[1].sigma_norm
            - cfg.source_norm(n + 1);
        max_violation = max_violation.max(r);
    }
    let floor = 1.0 - 10.0 * cfg.fp_tol() / eps;
    let mut norm_failures = 0;
    let mut min_norm = 1.0f64;
    for s in traj.samples.iter().filter(|s| s.d_eps_k > 0.5 * eps) {
        min_norm = min_norm.min(s.sigma_norm);
        if s.sigma_norm < floor {
            norm_failures += 1;
        }
    }
    InequalityCheck {
        max_violation,
        norm_failures,
        min_sigma_norm_outside_layer: min_norm,
    }
}

/// Worst ratio of `½‖θⁿ⁺¹‖²` to
/// `½‖θⁿ‖² + dt(‖f(tₙ₊₁)‖ + ρ)‖θⁿ⁺¹‖ + 10·fp_tol·‖θⁿ⁺¹‖` over all steps.
/// A value above 1 flags a scheme defect. Steps where both sides vanish
/// count as ratio 1.
pub fn energy_diagnostic(traj: &TrajectoryRecord, cfg: &SimulationConfig) -> f64 {
    let (rho, dt, tol) = (cfg.rho(), traj.dt, cfg.fp_tol());
    let mut worst = 0.0f64;
    for (n, w) in traj.samples.windows(2).enumerate() {
        let (old, new) = (w[0].theta_norm, w[1].theta_norm);
        let lhs = 0.5 * new * new;
        let rhs = 0.5 * old * old + dt * (cfg.source_norm(n + 1) + rho) * new + 10.0 * tol * new;
        let ratio = if rhs > 0.0 {
            lhs / rhs
        } else if lhs == 0.0 {
            1.0
        } else {
            f64::INFINITY
        };
        worst = worst.max(ratio);
    }
    worst
}

/// Largest increase of `d_K` between consecutive samples before the first
/// sample with `d_K ≤ ε`. Zero for a monotone descent.
pub fn max_descent_increase(traj: &TrajectoryRecord, eps: f64) -> f64 {
    let end = traj.samples.iter().position(|s| s.d_k <= eps).unwrap_or(traj.samples.len());
    traj.samples[..(end + 1).min(traj.samples.len())]
        .windows(2)
        .map(|w| w[1].d_k - w[0].d_k)
        .fold(0.0, f64::max)
}

/// Largest `d_K` over samples later than `after`.
pub fn max_distance_after(traj: &TrajectoryRecord, after: f64) -> f64 {
    traj.samples
        .iter()
        .filter(|s| s.time > after)
        .map(|s| s.d_k)
        .fold(0.0, f64::max)
}
