use super::model::{Diffusivity, InitialDatum, SourceTerm};
use crate::convex::{ObstacleSet, RegularizationParams};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, SpatialGrid};

/// Largest admissible `dt·ρ/ε`: the inner fixed-point map contracts with
/// factor at most this value.
pub const MAX_CONTRACTION: f64 = 0.5;

/// Unvalidated description of a run. Every field is a closed form, so the
/// same spec can be re-evaluated on a different grid or time step.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigSpec {
    pub n_cells: usize,
    pub domain_length: f64,
    pub obstacle_lower: f64,
    pub obstacle_upper: f64,
    pub kappa: Diffusivity,
    pub source: SourceTerm,
    pub theta0: InitialDatum,
    pub rho: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub t_final: f64,
    pub dt: f64,
    pub fp_tol: f64,
    pub fp_max_iter: usize,
    /// Defaults to ε when absent.
    pub hit_tol: Option<f64>,
    pub snapshot_times: Vec<f64>,
}

impl Default for ConfigSpec {
    fn default() -> Self {
        Self {
            n_cells: 64,
            domain_length: 1.0,
            obstacle_lower: 0.0,
            obstacle_upper: f64::INFINITY,
            kappa: Diffusivity::constant(1.0).expect("valid constant"),
            source: SourceTerm::Zero,
            theta0: InitialDatum::Constant(-1.0),
            rho: 2.0,
            epsilon: 1e-3,
            alpha: 0.0,
            t_final: 1.0,
            dt: 1e-4,
            fp_tol: 1e-10,
            fp_max_iter: 200,
            hit_tol: None,
            snapshot_times: Vec::new(),
        }
    }
}

impl ConfigSpec {
    pub fn build(&self) -> Result<SimulationConfig> {
        SimulationConfig::new(self.clone())
    }
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    spec: ConfigSpec,
    grid: SpatialGrid,
    obstacle: ObstacleSet,
    reg: RegularizationParams,
    theta0: GridFunction,
    n_steps: usize,
    hit_tol: f64,
}

fn positive(key: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::param(key, format!("must be positive and finite, got {value}")))
    }
}

impl SimulationConfig {
    pub fn new(spec: ConfigSpec) -> Result<Self> {
        let grid = SpatialGrid::new(spec.n_cells, spec.domain_length).map_err(|e| match e {
            Error::GridTooSmall(_) => Error::param("n_cells", e.to_string()),
            other => Error::param("domain_length", other.to_string()),
        })?;
        let obstacle = ObstacleSet::from_extended(spec.obstacle_lower, spec.obstacle_upper).map_err(|e| match e {
            Error::InvalidParameter { .. } => e,
            other => Error::param("obstacle", other.to_string()),
        })?;
        let reg = RegularizationParams::new(spec.epsilon, spec.alpha)?;
        positive("rho", spec.rho)?;
        positive("dt", spec.dt)?;
        positive("fp_tol", spec.fp_tol)?;
        if !(spec.t_final >= 0.0 && spec.t_final.is_finite()) {
            return Err(Error::param("t_final", format!("must be nonnegative and finite, got {}", spec.t_final)));
        }
        if spec.fp_max_iter == 0 {
            return Err(Error::param("fp_max_iter", "must be at least 1"));
        }
        let contraction = spec.dt * spec.rho / spec.epsilon;
        if contraction > MAX_CONTRACTION {
            return Err(Error::param(
                "dt",
                format!("dt*rho/epsilon = {contraction} > {MAX_CONTRACTION}"),
            ));
        }
        if spec.kappa.is_degenerate() && spec.alpha <= 0.0 {
            return Err(Error::param(
                "alpha",
                "kappa has infimum 0, so alpha > 0 is required",
            ));
        }
        let hit_tol = spec.hit_tol.unwrap_or(spec.epsilon);
        positive("hit_tol", hit_tol)?;
        spec.source.validate()?;
        let n_steps = (spec.t_final / spec.dt).round() as usize;
        if let SourceTerm::PerStep(values) = &spec.source {
            if values.len() < n_steps + 1 {
                return Err(Error::param(
                    "f.values",
                    format!("need {} values (one per time level), got {}", n_steps + 1, values.len()),
                ));
            }
        }
        let theta0 = spec.theta0.evaluate(&grid)?;
        Ok(Self {
            spec,
            grid,
            obstacle,
            reg,
            theta0,
            n_steps,
            hit_tol,
        })
    }

    pub fn spec(&self) -> &ConfigSpec {
        &self.spec
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn obstacle(&self) -> &ObstacleSet {
        &self.obstacle
    }

    pub fn kappa(&self) -> &Diffusivity {
        &self.spec.kappa
    }

    pub fn source(&self) -> &SourceTerm {
        &self.spec.source
    }

    pub fn theta0(&self) -> &GridFunction {
        &self.theta0
    }

    pub fn rho(&self) -> f64 {
        self.spec.rho
    }

    pub fn reg(&self) -> &RegularizationParams {
        &self.reg
    }

    pub fn epsilon(&self) -> f64 {
        self.reg.epsilon()
    }

    pub fn alpha(&self) -> f64 {
        self.reg.alpha()
    }

    pub fn t_final(&self) -> f64 {
        self.spec.t_final
    }

    pub fn dt(&self) -> f64 {
        self.spec.dt
    }

    pub fn fp_tol(&self) -> f64 {
        self.spec.fp_tol
    }

    pub fn fp_max_iter(&self) -> usize {
        self.spec.fp_max_iter
    }

    pub fn hit_tol(&self) -> f64 {
        self.hit_tol
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Time of level `n`.
    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.spec.dt
    }

    /// `‖f(tₙ)‖_H`.
    pub fn source_norm(&self, n: usize) -> f64 {
        self.spec.source.norm_at(n, self.time(n), &self.grid)
    }

    /// `ρ*` read off the sampled time levels. Recomputed on every call.
    pub fn rho_star(&self) -> f64 {
        self.spec.source.rho_star_bound(&self.grid, self.spec.dt, self.n_steps)
    }

    /// Inner-loop contraction factor `dt·ρ/ε`.
    pub fn contraction(&self) -> f64 {
        self.spec.dt * self.spec.rho / self.reg.epsilon()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contraction_condition_is_enforced() {
        let spec = ConfigSpec { rho: 2.0, epsilon: 1e-3, dt: 5e-3, ..Default::default() };
        let err = spec.build().unwrap_err();
        match err {
            Error::InvalidParameter { key, message } => {
                assert_eq!(key, "dt");
                assert!(message.contains("dt*rho/epsilon = 10 > 0.5"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn degenerate_kappa_requires_lift() {
        let spec = ConfigSpec { kappa: Diffusivity::saturating(), alpha: 0.0, ..Default::default() };
        assert!(matches!(spec.build(), Err(Error::InvalidParameter { key, .. }) if key == "alpha"));
        let spec = ConfigSpec { kappa: Diffusivity::saturating(), alpha: 0.1, ..Default::default() };
        assert!(spec.build().is_ok());
    }

    #[test]
    fn named_keys_on_failure() {
        let bad = [
            (ConfigSpec { n_cells: 1, ..Default::default() }, "n_cells"),
            (ConfigSpec { epsilon: 0.0, ..Default::default() }, "epsilon"),
            (ConfigSpec { rho: -1.0, ..Default::default() }, "rho"),
            (ConfigSpec { fp_max_iter: 0, ..Default::default() }, "fp_max_iter"),
            (
                ConfigSpec { obstacle_lower: f64::NEG_INFINITY, obstacle_upper: f64::INFINITY, ..Default::default() },
                "obstacle",
            ),
        ];
        for (spec, key) in bad {
            match spec.build() {
                Err(Error::InvalidParameter { key: k, .. }) => assert_eq!(k, key),
                other => panic!("{key}: {other:?}"),
            }
        }
    }

    #[test]
    fn step_count_and_defaults() {
        let cfg = ConfigSpec { t_final: 0.5, dt: 1e-4, ..Default::default() }.build().unwrap();
        assert_eq!(cfg.n_steps(), 5000);
        assert_eq!(cfg.hit_tol(), cfg.epsilon());
        assert_eq!(cfg.rho_star(), 0.0);
    }
}
