//! Obstacle sets `K = {v : v(x) ∈ I a.e.}` and the distance, projection,
//! Moreau envelope and Yosida gradient built from them.
//!
//! For a closed interval `I` the projection acts pointwise, so every
//! quantity here reduces to a clamp followed by a weighted norm:
//!
//! * `P_K v = clamp(v, I)`, `Q_K v = v − P_K v`, `d_K(v) = ‖Q_K v‖_H`;
//! * `Dd^ε_K(v) = Q_K v / max{ε, d_K(v)}`;
//! * `d^ε_K(v) = ∫₀^{d_K(v)} min{s/ε, 1} ds`.

use crate::error::{Error, Result};
use crate::grid::GridFunction;

/// Closed interval with optional bounds. At least one bound must be finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObstacleSet {
    lower: Option<f64>,
    upper: Option<f64>,
}

impl ObstacleSet {
    pub fn new(lower: Option<f64>, upper: Option<f64>) -> Result<Self> {
        for (name, b) in [("lower", lower), ("upper", upper)] {
            if let Some(v) = b {
                if !v.is_finite() {
                    return Err(Error::param(
                        &format!("obstacle.{name}"),
                        "finite value expected; omit the bound for an infinite one",
                    ));
                }
            }
        }
        match (lower, upper) {
            (None, None) => Err(Error::TrivialConstraintSet),
            (Some(l), Some(u)) if l > u => Err(Error::EmptyInterval { lower: l, upper: u }),
            _ => Ok(Self { lower, upper }),
        }
    }

    /// Builds the set from extended reals, mapping `±∞` to a missing bound.
    pub fn from_extended(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() {
            return Err(Error::param("obstacle", "NaN bound"));
        }
        let lo = (lower != f64::NEG_INFINITY).then_some(lower);
        let hi = (upper != f64::INFINITY).then_some(upper);
        if lower == f64::INFINITY || upper == f64::NEG_INFINITY {
            return Err(Error::EmptyInterval { lower, upper });
        }
        Self::new(lo, hi)
    }

    pub fn double(lower: f64, upper: f64) -> Result<Self> {
        Self::new(Some(lower), Some(upper))
    }

    pub fn at_least(lower: f64) -> Result<Self> {
        Self::new(Some(lower), None)
    }

    pub fn at_most(upper: f64) -> Result<Self> {
        Self::new(None, Some(upper))
    }

    pub fn lower(&self) -> Option<f64> {
        self.lower
    }

    pub fn upper(&self) -> Option<f64> {
        self.upper
    }

    /// Projection of a scalar onto `I`.
    pub fn clamp(&self, r: f64) -> f64 {
        match (self.lower, self.upper) {
            (Some(l), _) if r < l => l,
            (_, Some(u)) if r > u => u,
            _ => r,
        }
    }

    /// Pointwise residual `q_I(r) = r − clamp(r)`.
    pub fn excess(&self, r: f64) -> f64 {
        r - self.clamp(r)
    }

    pub fn contains(&self, r: f64) -> bool {
        self.clamp(r) == r
    }
}

/// Yosida parameter ε and the parabolicity lift α, both in the unit
/// interval (α may be zero).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizationParams {
    epsilon: f64,
    alpha: f64,
}

impl RegularizationParams {
    pub fn new(epsilon: f64, alpha: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::param(
                "epsilon",
                format!("RegularizationParams requires 0 < epsilon < 1, got {epsilon}"),
            ));
        }
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::param(
                "alpha",
                format!("RegularizationParams requires 0 <= alpha < 1, got {alpha}"),
            ));
        }
        Ok(Self { epsilon, alpha })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

pub fn project(v: &GridFunction, k: &ObstacleSet) -> GridFunction {
    v.map(|r| k.clamp(r))
}

/// `Q_K v = v − P_K v`.
pub fn residual(v: &GridFunction, k: &ObstacleSet) -> GridFunction {
    v.map(|r| k.excess(r))
}

pub fn distance(v: &GridFunction, k: &ObstacleSet) -> f64 {
    residual(v, k).norm()
}

/// Unit-norm gradient of `d_K` away from `K`.
pub fn distance_gradient(v: &GridFunction, k: &ObstacleSet) -> Result<GridFunction> {
    let q = residual(v, k);
    let d = q.norm();
    if d == 0.0 {
        return Err(Error::GradientUndefinedOnK);
    }
    Ok(q.map(|r| r / d))
}

/// `Dd^ε_K(v) = Q_K v / max{ε, d_K(v)}`; total, `1/ε`-Lipschitz.
pub fn yosida_gradient(v: &GridFunction, k: &ObstacleSet, eps: f64) -> GridFunction {
    let q = residual(v, k);
    let scale = q.norm().max(eps);
    q.map(|r| r / scale)
}

/// Closed form of the Moreau envelope of `d_K` at level ε, as a function of
/// the distance alone.
pub fn envelope_of_distance(d: f64, eps: f64) -> f64 {
    if d <= eps {
        d * d / (2.0 * eps)
    } else {
        d - 0.5 * eps
    }
}

pub fn moreau_envelope(v: &GridFunction, k: &ObstacleSet, eps: f64) -> f64 {
    envelope_of_distance(distance(v, k), eps)
}

/// Brute-force evaluation of `inf_z d_K(z) + ‖z − v‖²/(2ε)`.
///
/// Exterior minimizers share the projection of `v`, so the search runs over
/// the segment `z(t) = v + t (P_K v − v)`, `t ∈ [0, 1]`: a uniform scan
/// of 10⁴ points followed by golden-section refinement around the best one.
/// Each trial point is evaluated through [`distance`], never through the
/// closed form.
pub fn moreau_oracle(v: &GridFunction, k: &ObstacleSet, eps: f64) -> f64 {
    let q = residual(v, k);
    let objective = |t: f64| {
        let z = v.axpy(-t, &q).expect("same grid");
        let step = z.sub(v).expect("same grid");
        distance(&z, k) + step.norm_squared() / (2.0 * eps)
    };
    const SCAN: usize = 10_000;
    let (mut best_t, mut best) = (0.0, objective(0.0));
    for i in 1..=SCAN {
        let t = i as f64 / SCAN as f64;
        let val = objective(t);
        if val < best {
            best = val;
            best_t = t;
        }
    }
    let width = 1.0 / SCAN as f64;
    let (mut a, mut b) = ((best_t - width).max(0.0), (best_t + width).min(1.0));
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (objective(c), objective(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = objective(d);
        }
    }
    best.min(fc).min(fd).min(objective(0.5 * (a + b)))
}
