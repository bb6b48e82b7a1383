use serde::Serialize;

use crate::config::{ConfigError, ExperimentConfig};
use crate::experiment::run_experiment;
use crate::output::{emit_summary, RunSummary, SCHEMA_VERSION};

pub const SWEEP_FILE: &str = "sweep.json";

/// Short names accepted for common axes.
const ALIASES: &[(&str, &str)] = &[
    ("sigma", "problem.sigma"),
    ("scale", "scale"),
    ("delta", "solver.delta"),
    ("epochs", "solver.epochs"),
    ("iterations", "solver.iterations"),
    ("mu", "problem.mu"),
    ("lambda", "problem.lambda"),
    ("data_seed", "problem.data_seed"),
];

#[derive(Debug, Serialize)]
pub struct SweepSummary {
    pub schema_version: u32,
    pub axis: String,
    pub values: Vec<f64>,
    pub subdirectories: Vec<String>,
    pub summaries: Vec<RunSummary>,
}

fn resolve(axis: &str) -> &str {
    ALIASES.iter().find(|(a, _)| *a == axis).map_or(axis, |(_, p)| p)
}

/// Returns `base` with the numeric field at `axis` set to `value`. The field
/// must already be present (defaults are filled in on parse).
pub fn with_axis(base: &ExperimentConfig, axis: &str, value: f64) -> anyhow::Result<ExperimentConfig> {
    let path = resolve(axis);
    let mut doc = toml::Value::try_from(base).expect("config serializes");
    let mut slot = &mut doc;
    for key in path.split('.') {
        slot = slot.get_mut(key).ok_or_else(|| ConfigError(format!("unknown sweep axis '{axis}'")))?;
    }
    *slot = match slot {
        toml::Value::Float(_) => toml::Value::Float(value),
        toml::Value::Integer(_) if value.fract() == 0.0 && value >= 0.0 => toml::Value::Integer(value as i64),
        toml::Value::Integer(_) => return Err(ConfigError(format!("axis '{axis}' is an integer; got {value}")).into()),
        _ => return Err(ConfigError(format!("axis '{axis}' is not numeric")).into()),
    };
    let config: ExperimentConfig = doc.try_into().map_err(|e: toml::de::Error| ConfigError(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

/// One [`run_experiment`] per value, each in `<output_dir>/<axis>=<value>/`,
/// plus `sweep.json` aggregating the summaries.
pub fn sweep(base: &ExperimentConfig, axis: &str, values: &[f64]) -> anyhow::Result<Vec<RunSummary>> {
    if values.is_empty() {
        return Err(ConfigError("sweep needs at least one value".into()).into());
    }
    // Build every config first so that a bad value fails before any run.
    let mut configs = Vec::with_capacity(values.len());
    let mut dirs = Vec::with_capacity(values.len());
    for &v in values {
        let mut c = with_axis(base, axis, v)?;
        let dir = format!("{axis}={v}");
        c.output_dir = base.output_dir.join(&dir);
        configs.push(c);
        dirs.push(dir);
    }
    let summaries = configs.iter().map(run_experiment).collect::<anyhow::Result<Vec<_>>>()?;
    std::fs::create_dir_all(&base.output_dir)?;
    let aggregate = SweepSummary {
        schema_version: SCHEMA_VERSION,
        axis: axis.to_string(),
        values: values.to_vec(),
        subdirectories: dirs,
        summaries,
    };
    emit_summary(&aggregate, &base.output_dir.join(SWEEP_FILE))?;
    Ok(aggregate.summaries)
}
