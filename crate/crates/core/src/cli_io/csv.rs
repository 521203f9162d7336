//! Trajectory CSV and the sibling summary file.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::solver::{HittingReport, Sample, TrajectoryRecord};

pub const HEADER: &str = "time,d_K,d_eps_K,sigma_norm,theta_norm,fp_iters";

/// Decimal rendering with 12 significant digits, trailing zeros trimmed
/// (the `%.12g` convention).
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn optional(x: Option<f64>) -> String {
    x.map_or_else(|| "none".into(), format_sig)
}

pub fn render_trajectory(traj: &TrajectoryRecord) -> String {
    let mut out = String::with_capacity(64 * (traj.len() + 1));
    out.push_str(HEADER);
    out.push('\n');
    for s in &traj.samples {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            format_sig(s.time),
            format_sig(s.d_k),
            format_sig(s.d_eps_k),
            format_sig(s.sigma_norm),
            format_sig(s.theta_norm),
            s.fp_iters
        ));
    }
    out
}

pub fn render_summary(report: &HittingReport, worst_ratio: f64) -> String {
    format!(
        "t_star={}\nbound={}\nslope_fit={}\nmax_violation={}\nworst_ratio={}\n",
        optional(report.t_star),
        optional(report.bound),
        optional(report.slope_fit),
        format_sig(report.max_violation),
        format_sig(worst_ratio),
    )
}

pub fn summary_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("summary")
}

fn write_atomically(path: &Path, contents: &str) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    let result = fs::File::create(&tmp)
        .and_then(|mut f| f.write_all(contents.as_bytes()).and_then(|_| f.sync_all()))
        .and_then(|_| fs::rename(&tmp, path));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// Writes the trajectory to `path` and the summary next to it. The summary
/// is only written after the trajectory succeeded, and never partially.
pub fn emit_trajectory_csv(
    traj: &TrajectoryRecord,
    report: &HittingReport,
    worst_ratio: f64,
    path: &Path,
) -> io::Result<PathBuf> {
    write_atomically(path, &render_trajectory(traj))?;
    let summary = summary_path(path);
    write_atomically(&summary, &render_summary(report, worst_ratio))?;
    Ok(summary)
}

/// Reads a trajectory CSV back into a record (scalars only).
pub fn parse_trajectory_csv(text: &str) -> Result<TrajectoryRecord> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == HEADER => {}
        other => {
            return Err(Error::Config(format!(
                "bad trajectory header {:?}, expected {HEADER:?}",
                other.unwrap_or("")
            )))
        }
    }
    let mut samples = Vec::new();
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let bad = || Error::Config(format!("trajectory row {}: cannot parse {line:?}", i + 1));
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 6 {
            return Err(bad());
        }
        let num = |j: usize| fields[j].parse::<f64>().map_err(|_| bad());
        samples.push(Sample {
            time: num(0)?,
            d_k: num(1)?,
            d_eps_k: num(2)?,
            sigma_norm: num(3)?,
            theta_norm: num(4)?,
            theta_mean: f64::NAN,
            fp_iters: fields[5].parse().map_err(|_| bad())?,
        });
    }
    if samples.is_empty() {
        return Err(Error::Config("trajectory has no samples".into()));
    }
    let dt = if samples.len() > 1 { samples[1].time - samples[0].time } else { 0.0 };
    Ok(TrajectoryRecord {
        dt,
        samples,
        final_theta: None,
        snapshots: vec![],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(-0.5), "-0.5");
        assert_eq!(format_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig(123456.7890123456), "123456.789012");
        assert_eq!(format_sig(2.5e-7), "2.5e-07");
        assert_eq!(format_sig(1e15), "1e+15");
        assert_eq!(format_sig(0.0001), "0.0001");
    }

    proptest! {
        #[test]
        fn twelve_digits_survive(x in -1e6..1e6f64) {
            let back: f64 = format_sig(x).parse().unwrap();
            prop_assert!((back - x).abs() <= 1e-11 * x.abs().max(1e-300));
        }
    }

    fn record(n: usize) -> TrajectoryRecord {
        TrajectoryRecord {
            dt: 0.1,
            samples: (0..n)
                .map(|i| Sample {
                    time: i as f64 * 0.1,
                    d_k: 1.0 - i as f64 * 0.2,
                    d_eps_k: 0.9995 - i as f64 * 0.2,
                    sigma_norm: 1.0,
                    theta_norm: 1.0,
                    theta_mean: -1.0,
                    fp_iters: 2,
                })
                .collect(),
            final_theta: None,
            snapshots: vec![],
        }
    }

    #[test]
    fn three_samples_four_lines() {
        let text = render_trajectory(&record(3));
        assert_eq!(text.lines().count(), 4);
        assert_eq!(text.lines().next(), Some(HEADER));
        let back = parse_trajectory_csv(&text).unwrap();
        assert_eq!(back.len(), 3);
        assert!((back.dt - 0.1).abs() < 1e-15);
        assert!(parse_trajectory_csv("time,x\n").is_err());
    }

    #[test]
    fn summary_keys() {
        let rep = HittingReport { hit: false, t_star: None, bound: Some(0.5), slope_fit: None, max_violation: 0.0 };
        let text = render_summary(&rep, 0.75);
        assert_eq!(text, "t_star=none\nbound=0.5\nslope_fit=none\nmax_violation=0\nworst_ratio=0.75\n");
    }

    #[test]
    fn unwritable_path_leaves_no_summary() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("missing").join("run.csv");
        let rep = HittingReport { hit: false, t_star: None, bound: None, slope_fit: None, max_violation: 0.0 };
        assert!(emit_trajectory_csv(&record(2), &rep, 1.0, &path).is_err());
        assert!(!summary_path(&path).exists());
    }
}
