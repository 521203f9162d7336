//! Seeded battery checking the closed-form envelope and Yosida gradient
//! against brute force, finite differences and their structural bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::convex::{
    distance, moreau_envelope, moreau_oracle, project, yosida_gradient, ObstacleSet,
};
use crate::grid::{build_grid, inner_product, GridFunction};

pub const DEFAULT_SEED: u64 = 20_240_917;

/// The formulas under test. Swapping one out is how the battery's own
/// sensitivity is checked.
#[derive(Clone, Copy)]
pub struct Formulas {
    pub envelope: fn(&GridFunction, &ObstacleSet, f64) -> f64,
    pub gradient: fn(&GridFunction, &ObstacleSet, f64) -> GridFunction,
}

impl Default for Formulas {
    fn default() -> Self {
        Self {
            envelope: moreau_envelope,
            gradient: yosida_gradient,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: &'static str,
    pub trials: usize,
    /// Largest normalized error; the check passes when it is at most 1.
    pub worst: f64,
    pub worst_trial: usize,
    pub worst_seed: u64,
}

impl CheckLine {
    pub fn passed(&self) -> bool {
        self.worst <= 1.0
    }

    pub fn render(&self) -> String {
        format!(
            "{} {:<24} trials={:<5} worst={:.3e} (trial {}, seed {})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.trials,
            self.worst,
            self.worst_trial,
            self.worst_seed
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub seed: u64,
    pub checks: Vec<CheckLine>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckLine::passed)
    }

    pub fn render(&self) -> String {
        let mut out = format!("selftest seed {}\n", self.seed);
        for c in &self.checks {
            out.push_str(&c.render());
            out.push('\n');
        }
        out.push_str(if self.passed() { "all checks passed\n" } else { "FAILED\n" });
        out
    }
}

/// Random obstacle, field and ε drawn from a per-trial seed.
pub struct Trial {
    pub k: ObstacleSet,
    pub v: GridFunction,
    pub w: GridFunction,
    pub eps: f64,
}

fn random_obstacle(rng: &mut ChaCha8Rng) -> ObstacleSet {
    let a = rng.gen_range(-2.0..2.0);
    match rng.gen_range(0..3) {
        0 => ObstacleSet::at_least(a),
        1 => ObstacleSet::at_most(a),
        _ => ObstacleSet::double(a, a + rng.gen_range(0.0..2.0)),
    }
    .expect("nonempty interval")
}

// A field that lies outside K: exterior cells get an excess of random sign
// with magnitude spread over several decades, so both envelope regimes
// occur; interior cells stay clear of the bounds, where the clamp has a
// kink that would dominate finite-difference errors.
fn exterior_field(rng: &mut ChaCha8Rng, grid: crate::grid::SpatialGrid, k: &ObstacleSet) -> GridFunction {
    let scale = 10f64.powf(rng.gen_range(-3.0..0.5));
    let interior = |rng: &mut ChaCha8Rng| match (k.lower(), k.upper()) {
        (Some(l), Some(u)) if u - l > 1e-3 => Some(l + (u - l) * rng.gen_range(0.1..0.9)),
        (Some(_), Some(_)) => None,
        (Some(l), None) => Some(l + rng.gen_range(0.01..2.0)),
        (None, Some(u)) => Some(u - rng.gen_range(0.01..2.0)),
        (None, None) => unreachable!("K = H is rejected at construction"),
    };
    let mut vals: Vec<f64> = (0..grid.n_cells())
        .map(|_| {
            let excess = scale * rng.gen_range(0.05..1.0);
            let inside = if rng.gen_bool(0.3) { interior(rng) } else { None };
            inside.unwrap_or_else(|| match (k.lower(), k.upper()) {
                (Some(l), Some(u)) => {
                    if rng.gen_bool(0.5) { l - excess } else { u + excess }
                }
                (Some(l), None) => l - excess,
                (None, Some(u)) => u + excess,
                (None, None) => unreachable!(),
            })
        })
        .collect();
    if vals.iter().all(|&r| k.contains(r)) {
        vals[0] = k.lower().map_or_else(|| k.upper().unwrap() + scale, |l| l - scale);
    }
    GridFunction::new(grid, vals).expect("finite")
}

impl Trial {
    pub fn draw(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = build_grid(rng.gen_range(2..17), rng.gen_range(0.5..3.0)).expect("valid grid");
        let k = random_obstacle(&mut rng);
        let v = exterior_field(&mut rng, grid, &k);
        let noise = GridFunction::new(grid, (0..grid.n_cells()).map(|_| rng.gen_range(-3.0..3.0)).collect())
            .expect("finite");
        // half the partners are close to v, where the 1/ε bound is tight
        let w = if rng.gen_bool(0.5) {
            noise
        } else {
            v.axpy(10f64.powf(rng.gen_range(-5.0..-1.0)), &noise).expect("same grid")
        };
        let eps = 10f64.powf(rng.gen_range(-3.0..-0.3));
        Self { k, v, w, eps }
    }
}

fn run_check(
    name: &'static str,
    trials: usize,
    master: &mut ChaCha8Rng,
    mut err: impl FnMut(&Trial, u64) -> f64,
) -> CheckLine {
    let mut line = CheckLine { name, trials, worst: 0.0, worst_trial: 0, worst_seed: 0 };
    for i in 0..trials {
        let seed: u64 = master.gen();
        let e = err(&Trial::draw(seed), seed);
        // NaN counts as a failure
        if e.is_nan() || e > line.worst {
            line.worst = if e.is_nan() { f64::INFINITY } else { e };
            line.worst_trial = i;
            line.worst_seed = seed;
        }
    }
    line
}

/// Oracle agreement, relative to `1e-6·(1 + d_K(v))`.
pub fn oracle_error(t: &Trial, f: &Formulas) -> f64 {
    let d = distance(&t.v, &t.k);
    ((f.envelope)(&t.v, &t.k, t.eps) - moreau_oracle(&t.v, &t.k, t.eps)).abs() / (1e-6 * (1.0 + d))
}

/// Empirical Lipschitz ratio over `1/ε·(1 + 1e-9)`.
pub fn lipschitz_error(t: &Trial, f: &Formulas) -> f64 {
    let du = (f.gradient)(&t.v, &t.k, t.eps);
    let dw = (f.gradient)(&t.w, &t.k, t.eps);
    let num = du.sub(&dw).expect("same grid").norm();
    let den = t.v.sub(&t.w).expect("same grid").norm();
    if den == 0.0 {
        return 0.0;
    }
    (num / den) / (1.0 / t.eps * (1.0 + 1e-9))
}

/// Central finite difference of the envelope along `w` against
/// `⟨gradient, w⟩`, relative to `1e-5` of the Cauchy–Schwarz scale.
pub fn finite_difference_error(t: &Trial, f: &Formulas) -> f64 {
    let h = 1e-7;
    let plus = t.v.axpy(h, &t.w).expect("same grid");
    let minus = t.v.axpy(-h, &t.w).expect("same grid");
    let fd = ((f.envelope)(&plus, &t.k, t.eps) - (f.envelope)(&minus, &t.k, t.eps)) / (2.0 * h);
    let g = (f.gradient)(&t.v, &t.k, t.eps);
    let an = inner_product(&g, &t.w).expect("same grid");
    let scale = (g.norm() * t.w.norm()).max(f64::MIN_POSITIVE);
    (fd - an).abs() / (1e-5 * scale)
}

/// `‖Dd^ε_K‖ = 1` iff `d_K > ε`, and `d_K > ε` iff `d^ε_K > ε/2`.
pub fn threshold_error(t: &Trial, f: &Formulas) -> f64 {
    let mut worst = 0.0f64;
    // probe both sides of the threshold along the ray through v
    for s in [0.25, 0.5, 0.9, 1.1, 2.0, 10.0] {
        let p = project(&t.v, &t.k);
        let q = t.v.sub(&p).expect("same grid");
        let d0 = q.norm();
        let z = p.axpy(s * t.eps / d0, &q).expect("same grid");
        let d = distance(&z, &t.k);
        let norm = (f.gradient)(&z, &t.k, t.eps).norm();
        let env = (f.envelope)(&z, &t.k, t.eps);
        let unit = (norm - 1.0).abs() <= 1e-12;
        if (d > t.eps) != unit {
            worst = worst.max(2.0);
        }
        if (d > t.eps) != (env > 0.5 * t.eps) {
            worst = worst.max(2.0);
        }
    }
    worst
}

/// `⟨Dd^ε_K(v) − Dd^ε_K(w), v − w⟩ ≥ 0`.
pub fn monotonicity_error(t: &Trial, f: &Formulas) -> f64 {
    let gv = (f.gradient)(&t.v, &t.k, t.eps);
    let gw = (f.gradient)(&t.w, &t.k, t.eps);
    let pairing = inner_product(&gv.sub(&gw).unwrap(), &t.v.sub(&t.w).unwrap()).unwrap();
    if pairing >= -1e-12 { 0.0 } else { 2.0 }
}

pub fn run_battery(seed: u64) -> SelftestReport {
    run_battery_with(seed, &Formulas::default())
}

pub fn run_battery_with(seed: u64, formulas: &Formulas) -> SelftestReport {
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let f = *formulas;
    let checks = vec![
        run_check("oracle-agreement", 100, &mut master, |t, _| oracle_error(t, &f)),
        run_check("yosida-lipschitz", 1000, &mut master, |t, _| lipschitz_error(t, &f)),
        run_check("envelope-gradient-fd", 100, &mut master, |t, _| finite_difference_error(t, &f)),
        run_check("threshold", 200, &mut master, |t, _| threshold_error(t, &f)),
        run_check("yosida-monotone", 1000, &mut master, |t, _| monotonicity_error(t, &f)),
    ];
    SelftestReport { seed, checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trials_lie_outside_k() {
        for seed in 0..200 {
            let t = Trial::draw(seed);
            assert!(distance(&t.v, &t.k) > 0.0);
        }
    }

    #[test]
    fn deterministic_report() {
        let a = run_battery(3).render();
        let b = run_battery(3).render();
        assert_eq!(a, b);
    }

    #[test]
    fn corrupted_quadratic_branch_is_caught() {
        fn bad_envelope(v: &GridFunction, k: &ObstacleSet, eps: f64) -> f64 {
            let d = distance(v, k);
            if d <= eps { d * d / eps } else { d - 0.5 * eps }
        }
        let rep = run_battery_with(DEFAULT_SEED, &Formulas { envelope: bad_envelope, ..Default::default() });
        assert!(!rep.passed());
        assert!(!rep.checks[0].passed());
    }
}
