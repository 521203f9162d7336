use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use reachflow::cli_io::{
    apply_override, document_from_spec, emit_trajectory_csv, parse_document, parse_trajectory_csv, render_document,
    render_sweep, spec_from_document,
};
use reachflow::experiments::{
    evaluate, evaluate_check, expectations_for, run_sweep, scenario_by_name, Check, Scenario, SweepAxis,
    SCENARIO_NAMES,
};
use reachflow::selftest::{run_battery, DEFAULT_SEED};
use reachflow::solver::{detect_hitting, energy_diagnostic, verify_differential_inequality, ConfigSpec};

const EXIT_VERIFY: u8 = 1;
const EXIT_IO: u8 = 2;

#[derive(Parser)]
#[command(name = "reachflow", version, about = "Feedback-controlled diffusion towards obstacle sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a bundled scenario or a config file and write its trajectory.
    Run {
        /// Scenario name or path to a config document.
        target: String,
        /// Parameter override, `key=value`; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run a scenario once per value of one parameter.
    Sweep {
        scenario: String,
        /// rho | epsilon | alpha | dt | n_cells
        #[arg(long)]
        axis: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Re-check a previously written trajectory against its config.
    Verify {
        trajectory: PathBuf,
        /// Scenario name or path to a config document.
        config: String,
    },
    /// Run the seeded envelope and Yosida gradient battery.
    Selftest {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Print the bundled scenario names.
    ListScenarios,
}

struct Failure(u8, String);

fn io_err(context: &Path, e: std::io::Error) -> Failure {
    Failure(EXIT_IO, format!("{}: {e}", context.display()))
}

fn cfg_err(e: reachflow::Error) -> Failure {
    Failure(EXIT_IO, e.to_string())
}

/// Resolves a scenario name or config path, then applies overrides.
fn load(target: &str, overrides: &[String]) -> Result<(String, Scenario), Failure> {
    let (name, base) = match scenario_by_name(target) {
        Some(s) => (s.name.clone(), s),
        None => {
            let path = Path::new(target);
            let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
            let spec = spec_from_document(&parse_document(&text).map_err(cfg_err)?).map_err(cfg_err)?;
            let name = path.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned());
            let expectations = generic_expectations(&spec);
            (name.clone(), Scenario { name, spec, expectations })
        }
    };
    if overrides.is_empty() {
        return Ok((name, base));
    }
    let mut doc = document_from_spec(&base.spec);
    for o in overrides {
        apply_override(&mut doc, o).map_err(cfg_err)?;
    }
    let spec = spec_from_document(&doc).map_err(cfg_err)?;
    let expectations = if scenario_by_name(&base.name).is_some() {
        expectations_for(&base, &spec)
    } else {
        generic_expectations(&spec)
    };
    Ok((name, Scenario { name: base.name, spec, expectations }))
}

fn generic_expectations(spec: &ConfigSpec) -> Vec<Check> {
    vec![
        Check::HitBound { slack: 2.0 * spec.dt },
        Check::InequalityResidual { max: 1e-2 * spec.rho },
        Check::EnergyRatio { max: 1.0 + 1e-9 },
    ]
}

fn print_checks(checks: &[reachflow::experiments::CheckResult]) -> bool {
    let mut ok = true;
    for c in checks {
        println!(
            "{} {:<20} value={:.6e} threshold={:.6e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.check.id(),
            c.value,
            c.threshold
        );
        ok &= c.passed;
    }
    ok
}

fn run(target: &str, overrides: &[String], out: &Path) -> Result<bool, Failure> {
    let (name, scenario) = load(target, overrides)?;
    let cfg = scenario.config().map_err(cfg_err)?;
    let outcome = evaluate(&cfg, &scenario.expectations).map_err(|e| Failure(EXIT_VERIFY, e.to_string()))?;
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let csv = out.join(format!("{name}.csv"));
    emit_trajectory_csv(&outcome.trajectory, &outcome.report, outcome.worst_ratio, &csv).map_err(|e| io_err(&csv, e))?;
    let conf = out.join(format!("{name}.toml"));
    fs::write(&conf, render_document(&document_from_spec(&scenario.spec))).map_err(|e| io_err(&conf, e))?;
    println!("{name}: {} samples -> {}", outcome.trajectory.len(), csv.display());
    Ok(print_checks(&outcome.checks))
}

fn sweep(scenario: &str, axis: &str, values: &[f64], overrides: &[String], out: &Path) -> Result<bool, Failure> {
    let axis = SweepAxis::from_name(axis).ok_or_else(|| Failure(EXIT_IO, format!("unknown axis `{axis}`")))?;
    let (name, base) = load(scenario, overrides)?;
    let result = run_sweep(&base, axis, values).map_err(cfg_err)?;
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let mut ok = true;
    for (value, row) in &result.rows {
        match row {
            Ok(row) => {
                ok &= row.passed;
                let csv = out.join(format!("{name}_{}_{}.csv", axis.name(), reachflow::cli_io::format_sig(*value)));
                emit_trajectory_csv(&row.trajectory, &row.report, row.worst_ratio, &csv)
                    .map_err(|e| io_err(&csv, e))?;
            }
            Err(e) => eprintln!("{}={value}: rejected: {e}", axis.name()),
        }
    }
    let table = render_sweep(&result);
    let path = out.join(format!("sweep_{name}_{}.csv", axis.name()));
    fs::write(&path, &table).map_err(|e| io_err(&path, e))?;
    print!("{table}");
    Ok(ok)
}

fn verify(trajectory: &Path, config: &str) -> Result<bool, Failure> {
    let text = fs::read_to_string(trajectory).map_err(|e| io_err(trajectory, e))?;
    let traj = parse_trajectory_csv(&text).map_err(cfg_err)?;
    let (_, scenario) = load(config, &[])?;
    let cfg = scenario.config().map_err(cfg_err)?;
    if traj.len() > 1 && (traj.dt - cfg.dt()).abs() > 1e-9 * cfg.dt() {
        return Err(Failure(EXIT_IO, format!("trajectory step {} does not match config dt {}", traj.dt, cfg.dt())));
    }
    let report = detect_hitting(&traj, &cfg);
    let inequality = verify_differential_inequality(&traj, &cfg);
    let worst_ratio = energy_diagnostic(&traj, &cfg);
    let checks: Vec<_> = generic_expectations(cfg.spec())
        .iter()
        .filter(|c| report.hit || !matches!(c, Check::HitBound { .. }))
        .map(|c| evaluate_check(c, &cfg, &traj, &report, &inequality, worst_ratio))
        .collect();
    Ok(print_checks(&checks))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { target, overrides, out } => run(&target, &overrides, &out),
        Command::Sweep { scenario, axis, values, overrides, out } => sweep(&scenario, &axis, &values, &overrides, &out),
        Command::Verify { trajectory, config } => verify(&trajectory, &config),
        Command::Selftest { seed } => {
            let report = run_battery(seed);
            print!("{}", report.render());
            Ok(report.passed())
        }
        Command::ListScenarios => {
            for name in SCENARIO_NAMES {
                println!("{name}");
            }
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERIFY),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
