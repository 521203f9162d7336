//! Semi-implicit time stepping: backward Euler diffusion with the
//! conductivity lagged to the previous level, and the Yosida term resolved
//! implicitly by a fixed-point loop.

use super::config::SimulationConfig;
use crate::convex::{distance, moreau_envelope, yosida_gradient};
use crate::error::{Error, Result};
use crate::grid::{assemble_diffusion, face_conductivity, solve_shifted_system, GridFunction};

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub theta: GridFunction,
    /// `Dd^ε_K` at the new level.
    pub sigma: GridFunction,
    pub iterations: usize,
}

/// Advances `theta_n` to level `step_index` (time `cfg.time(step_index)`).
pub fn step(theta_n: &GridFunction, step_index: usize, cfg: &SimulationConfig) -> Result<StepOutcome> {
    let grid = cfg.grid();
    if theta_n.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let (k, eps, rho, dt) = (cfg.obstacle(), cfg.epsilon(), cfg.rho(), cfg.dt());
    let faces = face_conductivity(theta_n, cfg.kappa(), cfg.alpha())?;
    let a = assemble_diffusion(&faces, grid)?;
    let f = cfg.source().field(step_index, cfg.time(step_index), grid);
    // θⁿ/dt + f
    let base = f.axpy(1.0 / dt, theta_n)?;

    let mut current = theta_n.clone();
    let mut residual = f64::INFINITY;
    for iterations in 1..=cfg.fp_max_iter() {
        let sigma = yosida_gradient(&current, k, eps);
        let rhs = base.axpy(-rho, &sigma)?;
        let next = solve_shifted_system(&a, 1.0 / dt, &rhs)?;
        residual = next.sub(&current)?.norm();
        current = next;
        if residual <= cfg.fp_tol() {
            let sigma = yosida_gradient(&current, k, eps);
            return Ok(StepOutcome { theta: current, sigma, iterations });
        }
    }
    Err(Error::FixedPointDiverged {
        iterations: cfg.fp_max_iter(),
        residual,
    })
}

/// Scalars sampled at one time level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub time: f64,
    /// `d_K(θⁿ)`.
    pub d_k: f64,
    /// `ψⁿ = d^ε_K(θⁿ)`.
    pub d_eps_k: f64,
    pub sigma_norm: f64,
    pub theta_norm: f64,
    pub theta_mean: f64,
    pub fp_iters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub dt: f64,
    pub samples: Vec<Sample>,
    pub final_theta: Option<GridFunction>,
    pub snapshots: Vec<(f64, GridFunction)>,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.time)
    }
}

/// Borrowed view of one accepted level, handed to observers.
#[derive(Debug)]
pub struct StepView<'a> {
    pub index: usize,
    pub time: f64,
    pub theta: &'a GridFunction,
    pub sigma: &'a GridFunction,
}

fn sample(cfg: &SimulationConfig, n: usize, theta: &GridFunction, sigma: &GridFunction, iters: usize) -> Sample {
    let k = cfg.obstacle();
    Sample {
        time: cfg.time(n),
        d_k: distance(theta, k),
        d_eps_k: moreau_envelope(theta, k, cfg.epsilon()),
        sigma_norm: sigma.norm(),
        theta_norm: theta.norm(),
        theta_mean: theta.mean(),
        fp_iters: iters,
    }
}

pub fn simulate(cfg: &SimulationConfig) -> Result<TrajectoryRecord> {
    simulate_observed(cfg, |_| {})
}

/// Runs `cfg.n_steps()` steps from `θ₀`, calling `observe` on every level
/// including the initial one.
pub fn simulate_observed(cfg: &SimulationConfig, mut observe: impl FnMut(&StepView<'_>)) -> Result<TrajectoryRecord> {
    let n_steps = cfg.n_steps();
    let mut samples = Vec::with_capacity(n_steps + 1);
    let mut pending: Vec<f64> = cfg.spec().snapshot_times.clone();
    pending.sort_by(f64::total_cmp);
    let mut pending = pending.into_iter().peekable();
    let mut snapshots = Vec::new();

    let mut theta = cfg.theta0().clone();
    let sigma0 = yosida_gradient(&theta, cfg.obstacle(), cfg.epsilon());
    samples.push(sample(cfg, 0, &theta, &sigma0, 0));
    observe(&StepView { index: 0, time: 0.0, theta: &theta, sigma: &sigma0 });

    let mut take_snapshots = |n: usize, theta: &GridFunction, snapshots: &mut Vec<(f64, GridFunction)>| {
        let t = cfg.time(n);
        while let Some(&want) = pending.peek() {
            if want <= t + 0.5 * cfg.dt() {
                snapshots.push((t, theta.clone()));
                pending.next();
            } else {
                break;
            }
        }
    };
    take_snapshots(0, &theta, &mut snapshots);

    for n in 1..=n_steps {
        let out = step(&theta, n, cfg).map_err(|e| Error::StepFailed { step: n, source: Box::new(e) })?;
        samples.push(sample(cfg, n, &out.theta, &out.sigma, out.iterations));
        observe(&StepView { index: n, time: cfg.time(n), theta: &out.theta, sigma: &out.sigma });
        theta = out.theta;
        take_snapshots(n, &theta, &mut snapshots);
    }
    Ok(TrajectoryRecord {
        dt: cfg.dt(),
        samples,
        final_theta: Some(theta),
        snapshots,
    })
}
