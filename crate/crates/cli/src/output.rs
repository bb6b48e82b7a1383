use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context;
use epoch_gda::metrics::LogLogFit;
use epoch_gda::Trace;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

pub const CSV_HEADER: &str = "epoch,iters_cumulative,gap,near_stationarity,radius,eta_x,eta_y,wallclock_ns";

/// Version of the JSON summary layout, bumped on incompatible changes.
pub const SCHEMA_VERSION: u32 = 1;

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

/// Renders a trace as CSV: shortest round-trip decimals, empty cells for
/// absent values, LF line endings.
pub fn trace_to_csv(trace: &Trace) -> String {
    let mut out = String::with_capacity(64 * (trace.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &trace.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.epoch,
            r.iters_cumulative,
            opt(r.gap),
            opt(r.near_stationarity),
            opt(r.radius),
            r.eta_x,
            r.eta_y,
            r.wallclock_ns
        )
        .expect("writing to a String");
    }
    out
}

pub fn emit_csv(trace: &Trace, path: &Path) -> anyhow::Result<()> {
    std::fs::write(path, trace_to_csv(trace)).with_context(|| format!("writing {}", path.display()))
}

/// Final state of one seeded run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    /// CSV file name, relative to the summary's directory.
    pub trace_file: Option<String>,
    pub total_iterations: Option<u64>,
    pub final_gap: Option<f64>,
    pub final_near_stationarity: Option<f64>,
    /// Epoch whose start point was returned (WCSC only).
    pub tau: Option<usize>,
    pub error: Option<String>,
}

/// Runs sharing one schedule: one eps target for the SCSC solver, all runs
/// otherwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub eps_target: Option<f64>,
    pub epochs: Option<usize>,
    pub total_iterations: u64,
    pub median_final_gap: Option<f64>,
    pub median_final_near_stationarity: Option<f64>,
    pub runs: Vec<RunRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetPoint {
    pub iterations: u64,
    pub median_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub software_version: String,
    pub solver: String,
    pub eps0: Option<f64>,
    pub groups: Vec<GroupSummary>,
    /// Median gap against iteration budget: one point per eps target for the
    /// SCSC solver, one per checkpoint for the baseline.
    pub budget_points: Vec<BudgetPoint>,
    pub fit: Option<LogLogFit>,
    pub failed_runs: usize,
    pub config: ExperimentConfig,
}

impl RunSummary {
    pub fn all_runs(&self) -> impl Iterator<Item = &RunRecord> {
        self.groups.iter().flat_map(|g| g.runs.iter())
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("summary serializes");
    s.push('\n');
    s
}

pub fn emit_summary<T: Serialize>(summary: &T, path: &Path) -> anyhow::Result<()> {
    std::fs::write(path, to_json(summary)).with_context(|| format!("writing {}", path.display()))
}

pub fn read_summary(path: &Path) -> anyhow::Result<RunSummary> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let summary: RunSummary = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if summary.schema_version != SCHEMA_VERSION {
        anyhow::bail!("{}: schema version {} is not {SCHEMA_VERSION}", path.display(), summary.schema_version);
    }
    Ok(summary)
}
