//! Feedback-controlled quasilinear diffusion
//!
//! ```text
//! θₜ − div(κ(θ)∇θ) + ρ ∂d_K(θ) ∋ f     in Ω × (0, T),   no-flux boundary,
//! ```
//!
//! where `d_K` is the L² distance to a convex obstacle set
//! `K = {v : v(x) ∈ I}`. The subdifferential is replaced by its Yosida
//! approximation `Dd^ε_K` and, when `κ` degenerates, the conductivity is
//! lifted to `κ + α`. For `ρ` above the disturbance level
//! `ρ* = sup ‖f(t)‖` the state reaches `K` no later than
//! `d_K(θ₀)/(ρ − ρ*)` and stays there; the verifiers in [`solver`] check
//! that on every recorded trajectory.
//!
//! ```
//! use reachflow::experiments::{run_scenario, scenario_pure_feedback};
//!
//! let mut scenario = scenario_pure_feedback(4.0);
//! scenario.spec.t_final = 0.4;
//! let outcome = run_scenario(&scenario).unwrap();
//! let t_star = outcome.report.t_star.unwrap();
//! assert!((t_star - 0.25).abs() < 0.005);
//! assert!(t_star <= outcome.report.bound.unwrap());
//! ```

pub mod cli_io;
pub mod convex;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod selftest;
pub mod solver;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/obstacle-sets.md")]
    mod obstacle_sets {}
    #[doc = include_str!("../../../book/src/time-stepping.md")]
    mod time_stepping {}
    #[doc = include_str!("../../../book/src/verifiers.md")]
    mod verifiers {}
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
