//! Config documents and result files for the command-line front end.

mod csv;
mod document;

pub use csv::{
    emit_trajectory_csv, format_sig, parse_trajectory_csv, render_summary, render_trajectory, summary_path, HEADER,
};
pub use document::{
    apply_override, document_from_spec, parse_config, parse_document, render_document, spec_from_document,
    ConfigDocument, KEYS,
};

use crate::experiments::{SweepResult, SweepRow};

/// Sweep table, one row per value in sorted order.
pub fn render_sweep(result: &SweepResult) -> String {
    let mut out = format!(
        "{},status,hit,t_star,bound,slope_fit,max_violation,worst_ratio\n",
        result.axis.name()
    );
    let opt = |x: Option<f64>| x.map_or_else(|| "none".to_string(), format_sig);
    for (value, row) in &result.rows {
        match row {
            Ok(SweepRow { report, max_violation, worst_ratio, passed, .. }) => out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                format_sig(*value),
                if *passed { "pass" } else { "fail" },
                report.hit,
                opt(report.t_star),
                opt(report.bound),
                opt(report.slope_fit),
                format_sig(*max_violation),
                format_sig(*worst_ratio),
            )),
            Err(_) => out.push_str(&format!("{},rejected,,,,,,\n", format_sig(*value))),
        }
    }
    out
}
