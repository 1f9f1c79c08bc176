//! CSV artifact rendering.
//!
//! Every artifact starts with a metadata comment line (tool version, seed,
//! config digest) followed by a header row. Numbers print with six
//! significant digits, `.` decimal separator, no locale dependence, so
//! identical inputs yield byte-identical files.

use std::path::Path;

use relsel_core::{PolicyTable, SimulationStats, ValueTable};

use crate::error::CliError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy)]
pub struct Meta<'a> {
    pub seed: Option<u64>,
    pub config_digest: &'a str,
}

impl Meta<'_> {
    /// The comment line stamped at the top of every artifact.
    pub fn line(&self) -> String {
        let seed = match self.seed {
            Some(s) => s.to_string(),
            None => "-".to_string(),
        };
        format!(
            "# tool=relsel v{TOOL_VERSION} seed={seed} config_digest={}\n",
            self.config_digest
        )
    }
}

/// Six significant digits; plain decimal inside a sane range, scientific
/// outside it.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let magnitude = v.abs();
    if !(1e-9..1e15).contains(&magnitude) {
        return format!("{v:.5e}");
    }
    let exponent = magnitude.log10().floor() as i32;
    let decimals = (5 - exponent).max(0) as usize;
    format!("{v:.decimals$}")
}

pub fn write(path: &Path, content: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
    }
    std::fs::write(path, content).map_err(|e| CliError::io(path, e))
}

/// One row per state: `x_1..x_m`, then the value at each retained period.
pub fn values_csv(table: &ValueTable, meta: Meta<'_>) -> String {
    let grid = table.grid();
    let mut out = meta.line();
    let mut header: Vec<String> = (1..=grid.axes()).map(|i| format!("x_{i}")).collect();
    header.extend(table.periods().iter().map(|t| format!("v_t{t}")));
    out.push_str(&header.join(","));
    out.push('\n');
    for (idx, state) in grid.states() {
        let mut row: Vec<String> = state.iter().map(|x| x.to_string()).collect();
        for &t in table.periods() {
            row.push(fmt_sig(table.slice(t).expect("retained")[idx]));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// One row per state: `x_1..x_m`, then the 1-based module choice per period.
pub fn policy_csv(policy: &PolicyTable, meta: Meta<'_>) -> String {
    let grid = policy.grid();
    let mut out = meta.line();
    let mut header: Vec<String> = (1..=grid.axes()).map(|i| format!("x_{i}")).collect();
    header.extend((0..policy.horizon()).map(|t| format!("choice_t{t}")));
    out.push_str(&header.join(","));
    out.push('\n');
    for (idx, state) in grid.states() {
        let mut row: Vec<String> = state.iter().map(|x| x.to_string()).collect();
        for t in 0..policy.horizon() {
            row.push((policy.choice_by_index(t, idx) + 1).to_string());
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn histogram_csv(stats: &SimulationStats, meta: Meta<'_>) -> String {
    let mut out = meta.line();
    out.push_str("bin_lo,bin_hi,count,frequency\n");
    let runs = stats.runs as f64;
    for (i, &count) in stats.bin_counts.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_sig(stats.bin_edges[i]),
            fmt_sig(stats.bin_edges[i + 1]),
            count,
            fmt_sig(count as f64 / runs)
        ));
    }
    out
}

pub fn stats_csv(stats: &SimulationStats, meta: Meta<'_>) -> String {
    let mut out = meta.line();
    out.push_str("mean,variance,runs,seed\n");
    out.push_str(&format!(
        "{},{},{},{}\n",
        fmt_sig(stats.mean),
        fmt_sig(stats.variance),
        stats.runs,
        stats.seed
    ));
    out
}

/// One row per property scan: name, verdict, witness count, states checked,
/// and the first witnesses as `t:(x_1|x_2|…)` tokens.
pub fn property_reports_csv(reports: &[relsel_core::diagnostics::PropertyReport], meta: Meta<'_>) -> String {
    let mut out = meta.line();
    out.push_str("property,holds,witnesses,states_checked,first_witnesses\n");
    for report in reports {
        let first: Vec<String> = report
            .witnesses
            .iter()
            .take(5)
            .map(|w| {
                let coords: Vec<String> = w.counts.iter().map(|x| x.to_string()).collect();
                format!("{}:({})", w.period, coords.join("|"))
            })
            .collect();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            report.property_name.replace(',', ";"),
            report.holds,
            report.witnesses.len(),
            report.states_checked,
            first.join(" ")
        ));
    }
    out
}

/// A row of a profile-sweep study.
#[derive(Debug, Clone, PartialEq)]
pub struct GapRow {
    /// `assumed`, `truth`, or `robust`.
    pub mode: &'static str,
    pub p1: f64,
    pub optimal: f64,
    pub achieved: f64,
    pub gap_percent: f64,
}

pub fn gaps_csv(rows: &[GapRow], meta: Meta<'_>) -> String {
    let mut out = meta.line();
    out.push_str("mode,p1,optimal,achieved,gap_percent\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.mode,
            fmt_sig(row.p1),
            fmt_sig(row.optimal),
            fmt_sig(row.achieved),
            fmt_sig(row.gap_percent)
        ));
    }
    out
}

/// A row of the risk-tolerance sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaRow {
    pub gamma: f64,
    pub mean: f64,
    pub variance: f64,
    /// Exact expected reliability of the policy under the scoring profile.
    pub exact_mean: f64,
    pub value_at_start: f64,
}

pub fn gamma_sweep_csv(rows: &[GammaRow], meta: Meta<'_>) -> String {
    let mut out = meta.line();
    out.push_str("gamma,mean,variance,exact_mean,value_at_start\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_sig(row.gamma),
            fmt_sig(row.mean),
            fmt_sig(row.variance),
            fmt_sig(row.exact_mean),
            fmt_sig(row.value_at_start)
        ));
    }
    out
}
