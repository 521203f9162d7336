use reachflow::convex::ObstacleSet;
use reachflow::experiments::{
    run_scenario, run_sweep, scenario_double_obstacle, scenario_pure_feedback, Check, SweepAxis,
};
use reachflow::experiments::evaluate;
use reachflow::cli_io::render_sweep;
use reachflow::solver::{
    detect_hitting, max_descent_increase, max_distance_after, simulate, simulate_observed, ConfigSpec, Diffusivity,
    InitialDatum, NamedKappa, SourceTerm,
};

fn cosine_runs() -> Vec<ConfigSpec> {
    let kappas = [
        (Diffusivity::constant(1.0).unwrap(), 0.0),
        (Diffusivity::constant(0.05).unwrap(), 0.0),
        (Diffusivity::named(NamedKappa::LiftedSaturating), 0.0),
        (Diffusivity::saturating(), 0.05),
    ];
    kappas
        .into_iter()
        .map(|(kappa, alpha)| ConfigSpec {
            n_cells: 48,
            obstacle_lower: -0.5,
            obstacle_upper: 0.5,
            kappa,
            alpha,
            theta0: InitialDatum::Cosine { amplitude: 2.0, frequency: 2.0 },
            rho: 4.0,
            t_final: 0.6,
            dt: 1e-4,
            ..Default::default()
        })
        .collect()
}

#[test]
fn descent_is_monotone_and_persists_without_source() {
    for spec in cosine_runs() {
        let cfg = spec.build().unwrap();
        let rec = simulate(&cfg).unwrap();
        let rep = detect_hitting(&rec, &cfg);
        assert_eq!(max_descent_increase(&rec, cfg.epsilon()), 0.0, "{:?}", spec.kappa);
        let t_star = rep.t_star.expect("reaches K");
        assert!(t_star <= rep.bound.unwrap() + 2.0 * cfg.dt());
        assert!(rep.slope_fit.unwrap() <= -cfg.rho() + 0.05 * cfg.rho());
        assert!(max_distance_after(&rec, t_star + cfg.dt()) <= cfg.epsilon() + 10.0 * cfg.fp_tol());
    }
}

#[test]
fn disturbances_below_the_gain_are_rejected() {
    for f in [0.5, -0.5, -1.5] {
        let spec = ConfigSpec {
            source: SourceTerm::Constant(f),
            rho: 2.0,
            t_final: 2.5,
            dt: 1e-4,
            ..Default::default()
        };
        let cfg = spec.build().unwrap();
        assert_eq!(cfg.rho_star(), f64::abs(f));
        let out = evaluate(
            &cfg,
            &[
                Check::HitBound { slack: 2.0 * cfg.dt() },
                Check::SlopeBound { margin: 0.05 * cfg.rho() },
                Check::Persistence { after: None, threshold: cfg.epsilon() + 10.0 * cfg.fp_tol() },
                Check::InequalityResidual { max: 1e-2 * cfg.rho() },
                Check::EnergyRatio { max: 1.0 + 1e-9 },
            ],
        )
        .unwrap();
        assert!(out.passed(), "f = {f}: {:#?}", out.checks);
    }
}

#[test]
fn inner_iterations_are_uniformly_bounded() {
    let mut specs = cosine_runs();
    specs.push(scenario_pure_feedback(8.0).spec);
    specs.push(scenario_double_obstacle().spec);
    for spec in specs {
        let cfg = spec.build().unwrap();
        let rec = simulate(&cfg).unwrap();
        let d0 = rec.samples[0].d_k;
        let bound = ((cfg.fp_tol() / d0).ln() / cfg.contraction().ln()).ceil() as usize + 1;
        let worst = rec.samples.iter().map(|s| s.fp_iters).max().unwrap();
        assert!(worst <= bound, "{worst} > {bound}");
    }
}

#[test]
fn yosida_term_has_the_sign_of_the_excess() {
    let s = scenario_double_obstacle();
    let cfg = s.config().unwrap();
    let k: ObstacleSet = *cfg.obstacle();
    let mut checked = 0;
    simulate_observed(&cfg, |view| {
        for (&th, &sg) in view.theta.values().iter().zip(view.sigma.values()) {
            let q = k.excess(th);
            assert!(sg.signum() == q.signum() || (sg == 0.0 && q == 0.0), "t={} θ={th} σ={sg}", view.time);
        }
        checked += 1;
    })
    .unwrap();
    assert_eq!(checked, cfg.n_steps() + 1);
}

#[test]
fn double_obstacle_initial_distance_matches_fine_quadrature() {
    // ∫₀¹ (|3cos 2πx| − 1)₊² dx with 10⁶ midpoint nodes
    let m = 1_000_000;
    let fine: f64 = (0..m)
        .map(|i| {
            let x = (i as f64 + 0.5) / m as f64;
            let e = ((3.0 * (2.0 * std::f64::consts::PI * x).cos()).abs() - 1.0).max(0.0);
            e * e / m as f64
        })
        .sum::<f64>()
        .sqrt();
    let s = scenario_double_obstacle();
    let out = run_scenario(&s).unwrap();
    let d0 = out.trajectory.samples[0].d_k;
    assert!((d0 - fine).abs() < 1e-3, "grid {d0} vs fine {fine}");
    assert!(out.report.t_star.unwrap() <= d0 / 3.0 + 2.0 * s.spec.dt);
    assert!(out.passed(), "{:#?}", out.checks);
}

#[test]
fn epsilon_sweep_is_stable() {
    let mut base = scenario_pure_feedback(2.0);
    base.spec.dt = 2e-5;
    base.spec.t_final = 0.6;
    let res = run_sweep(&base, SweepAxis::Epsilon, &[1e-2, 1e-3, 1e-4]).unwrap();
    let t: Vec<(f64, f64)> = res
        .rows
        .iter()
        .map(|(eps, row)| (*eps, row.as_ref().unwrap().report.t_star.unwrap()))
        .collect();
    for w in t.windows(2) {
        let larger = w[0].0.max(w[1].0);
        assert!((w[0].1 - w[1].1).abs() <= 4.0 * larger / 2.0, "{w:?}");
    }
}

#[test]
fn sweeps_are_reproducible() {
    let mut base = scenario_pure_feedback(2.0);
    base.spec.t_final = 0.3;
    let a = render_sweep(&run_sweep(&base, SweepAxis::NCells, &[16.0, 8.0, 1.0]).unwrap());
    let b = render_sweep(&run_sweep(&base, SweepAxis::NCells, &[8.0, 1.0, 16.0]).unwrap());
    assert_eq!(a, b);
    assert!(a.lines().nth(1).unwrap().starts_with("1,rejected"));
}

#[test]
fn pure_feedback_at_rho_four() {
    let out = run_scenario(&scenario_pure_feedback(4.0)).unwrap();
    assert!((out.report.t_star.unwrap() - 0.25).abs() < 0.005);
    assert_eq!(out.report.bound, Some(0.25));
}
