//! Data of the controlled problem: diffusivity, source term and initial datum.

use crate::error::{Error, Result};
use crate::grid::{GridFunction, SpatialGrid};
use std::f64::consts::PI;

/// Nonconstant diffusivities admitted by the solver. Each vanishes at most
/// on a set with empty interior, so its primitive is strictly increasing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedKappa {
    /// `|r| / (1 + |r|)`: degenerate at the origin, bounded by 1.
    Saturating,
    /// `1 + |r| / (1 + |r|)`: uniformly parabolic, bounded by 2.
    LiftedSaturating,
}

impl NamedKappa {
    pub const ALL: [NamedKappa; 2] = [NamedKappa::Saturating, NamedKappa::LiftedSaturating];

    pub fn name(self) -> &'static str {
        match self {
            NamedKappa::Saturating => "saturating",
            NamedKappa::LiftedSaturating => "lifted_saturating",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    fn eval(self, r: f64) -> f64 {
        let s = r.abs() / (1.0 + r.abs());
        match self {
            NamedKappa::Saturating => s,
            NamedKappa::LiftedSaturating => 1.0 + s,
        }
    }

    fn bounds(self) -> (f64, f64) {
        match self {
            NamedKappa::Saturating => (0.0, 1.0),
            NamedKappa::LiftedSaturating => (1.0, 2.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KappaKind {
    Constant(f64),
    Named(NamedKappa),
}

/// Conductivity `κ` together with `κ_* = inf κ` and `κ* = sup κ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diffusivity {
    kind: KappaKind,
    kappa_star: f64,
    kappa_sup: f64,
}

impl Diffusivity {
    pub fn constant(value: f64) -> Result<Self> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::param("kappa.value", format!("must be finite and nonnegative, got {value}")));
        }
        Ok(Self {
            kind: KappaKind::Constant(value),
            kappa_star: value,
            kappa_sup: value,
        })
    }

    pub fn named(which: NamedKappa) -> Self {
        let (lo, hi) = which.bounds();
        Self {
            kind: KappaKind::Named(which),
            kappa_star: lo,
            kappa_sup: hi,
        }
    }

    pub fn saturating() -> Self {
        Self::named(NamedKappa::Saturating)
    }

    pub fn kind(&self) -> KappaKind {
        self.kind
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self.kind {
            KappaKind::Constant(c) => c,
            KappaKind::Named(k) => k.eval(r),
        }
    }

    pub fn kappa_star(&self) -> f64 {
        self.kappa_star
    }

    pub fn kappa_sup(&self) -> f64 {
        self.kappa_sup
    }

    pub fn constant_value(&self) -> Option<f64> {
        match self.kind {
            KappaKind::Constant(c) => Some(c),
            KappaKind::Named(_) => None,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.kappa_star == 0.0
    }
}

/// Spatially constant source `f(t, x) = c(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceTerm {
    Zero,
    Constant(f64),
    /// Piecewise-linear in time through `(t, c)` knots sorted by time. A
    /// repeated time encodes a jump, sampled right-continuously. Constant
    /// extrapolation outside the table.
    Table(Vec<(f64, f64)>),
    /// `c(t) = 1 − |Ω|^{−1/2}` for `t < 1` and `c(t) = 1` afterwards: the
    /// profile under which `θ(t) = t − 1` solves the controlled equation
    /// with `ρ = 1`, `K = {v ≥ 0}`.
    IntroStep,
    /// One value per time level `tₙ = n·dt`.
    PerStep(Vec<f64>),
}

// Sampling times are n·dt in floating point; a jump at τ is taken as
// reached once t ≥ τ − JUMP_SNAP.
const JUMP_SNAP: f64 = 1e-12;

impl SourceTerm {
    pub fn validate(&self) -> Result<()> {
        match self {
            SourceTerm::Constant(c) if !c.is_finite() => Err(Error::param("f.value", "must be finite")),
            SourceTerm::Table(knots) => {
                if knots.is_empty() {
                    return Err(Error::param("f.table", "empty table"));
                }
                if knots.iter().any(|(t, c)| !t.is_finite() || !c.is_finite()) {
                    return Err(Error::param("f.table", "non-finite entry"));
                }
                if knots.windows(2).any(|w| w[1].0 < w[0].0) {
                    return Err(Error::param("f.table", "times must be nondecreasing"));
                }
                Ok(())
            }
            SourceTerm::PerStep(values) if values.iter().any(|v| !v.is_finite()) => {
                Err(Error::param("f.values", "non-finite entry"))
            }
            _ => Ok(()),
        }
    }

    /// Spatial value at time level `step` (time `t = step·dt`).
    pub fn amplitude(&self, step: usize, t: f64, grid: &SpatialGrid) -> f64 {
        match self {
            SourceTerm::Zero => 0.0,
            SourceTerm::Constant(c) => *c,
            SourceTerm::Table(knots) => table_value(knots, t),
            SourceTerm::IntroStep => {
                if t >= 1.0 - JUMP_SNAP {
                    1.0
                } else {
                    1.0 - grid.domain_length().powf(-0.5)
                }
            }
            SourceTerm::PerStep(values) => values.get(step).or(values.last()).copied().unwrap_or(0.0),
        }
    }

    pub fn field(&self, step: usize, t: f64, grid: &SpatialGrid) -> GridFunction {
        GridFunction::from_raw(*grid, vec![self.amplitude(step, t, grid); grid.n_cells()])
    }

    /// `‖f(t)‖_H`.
    pub fn norm_at(&self, step: usize, t: f64, grid: &SpatialGrid) -> f64 {
        self.amplitude(step, t, grid).abs() * grid.domain_length().sqrt()
    }

    /// `ρ* = maxₙ ‖f(tₙ)‖_H` over the time levels `0..=n_steps`.
    pub fn rho_star_bound(&self, grid: &SpatialGrid, dt: f64, n_steps: usize) -> f64 {
        (0..=n_steps)
            .map(|n| self.norm_at(n, n as f64 * dt, grid))
            .fold(0.0, f64::max)
    }
}

fn table_value(knots: &[(f64, f64)], t: f64) -> f64 {
    // last knot with time <= t (right-continuous at repeated times)
    let idx = knots.partition_point(|&(tk, _)| tk <= t + JUMP_SNAP);
    if idx == 0 {
        return knots[0].1;
    }
    if idx == knots.len() {
        return knots[idx - 1].1;
    }
    let (t0, c0) = knots[idx - 1];
    let (t1, c1) = knots[idx];
    if t1 <= t0 {
        return c1;
    }
    let s = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
    c0 + s * (c1 - c0)
}

/// Closed-form initial data evaluated at cell centers.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialDatum {
    Constant(f64),
    /// `amplitude · cos(2π · frequency · x / |Ω|)`.
    Cosine { amplitude: f64, frequency: f64 },
    Values(Vec<f64>),
}

impl InitialDatum {
    pub fn evaluate(&self, grid: &SpatialGrid) -> Result<GridFunction> {
        match self {
            InitialDatum::Constant(c) => GridFunction::constant(*grid, *c),
            InitialDatum::Cosine { amplitude, frequency } => {
                let l = grid.domain_length();
                GridFunction::from_fn(*grid, |x| amplitude * (2.0 * PI * frequency * x / l).cos())
            }
            InitialDatum::Values(v) => GridFunction::new(*grid, v.clone()),
        }
        .map_err(|e| Error::param("theta0", e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;

    #[test]
    fn diffusivity_registry() {
        let s = Diffusivity::saturating();
        assert!(s.is_degenerate());
        assert_eq!(s.eval(0.0), 0.0);
        assert_eq!(s.eval(1.0), 0.5);
        assert_eq!(s.eval(-3.0), 0.75);
        for k in NamedKappa::ALL {
            let d = Diffusivity::named(k);
            for i in -1000..=1000 {
                let r = i as f64 * 0.05;
                let v = d.eval(r);
                assert!(v >= d.kappa_star() && v <= d.kappa_sup());
            }
            assert_eq!(NamedKappa::from_name(k.name()), Some(k));
        }
        assert!(Diffusivity::constant(-1.0).is_err());
    }

    #[test]
    fn intro_profile_jumps_right_continuously() {
        let g = build_grid(4, 1.0).unwrap();
        let f = SourceTerm::IntroStep;
        assert_eq!(f.amplitude(0, 0.5, &g), 0.0);
        let dt = 1e-4;
        assert_eq!(f.amplitude(9999, 9999.0 * dt, &g), 0.0);
        assert_eq!(f.amplitude(10000, 10000.0 * dt, &g), 1.0);
        let g4 = build_grid(4, 4.0).unwrap();
        assert_eq!(f.amplitude(0, 0.0, &g4), 0.5);
        assert_eq!(f.rho_star_bound(&g, dt, 20000), 1.0);
        assert_eq!(f.rho_star_bound(&g, dt, 9999), 0.0);
    }

    #[test]
    fn table_interpolation() {
        let knots = vec![(0.0, 0.0), (1.0, 2.0), (1.0, 5.0), (2.0, 5.0)];
        let f = SourceTerm::Table(knots);
        f.validate().unwrap();
        let g = build_grid(2, 1.0).unwrap();
        assert_eq!(f.amplitude(0, -1.0, &g), 0.0);
        assert!((f.amplitude(0, 0.5, &g) - 1.0).abs() < 1e-15);
        assert_eq!(f.amplitude(0, 1.0, &g), 5.0);
        assert_eq!(f.amplitude(0, 3.0, &g), 5.0);
        assert!(SourceTerm::Table(vec![(1.0, 0.0), (0.0, 1.0)]).validate().is_err());
    }

    #[test]
    fn rho_star_tracks_profile() {
        let g = build_grid(4, 4.0).unwrap();
        let f = SourceTerm::Constant(-0.5);
        assert_eq!(f.rho_star_bound(&g, 0.1, 10), 1.0);
        let p = SourceTerm::PerStep(vec![0.0, 3.0, 1.0]);
        assert_eq!(p.rho_star_bound(&g, 0.1, 2), 6.0);
        assert_eq!(p.rho_star_bound(&g, 0.1, 0), 0.0);
    }

    #[test]
    fn initial_data() {
        let g = build_grid(4, 1.0).unwrap();
        let c = InitialDatum::Cosine { amplitude: 3.0, frequency: 1.0 }.evaluate(&g).unwrap();
        assert!((c.values()[0] - 3.0 * (std::f64::consts::PI / 4.0).cos()).abs() < 1e-14);
        assert!(InitialDatum::Values(vec![1.0]).evaluate(&g).is_err());
    }
}
