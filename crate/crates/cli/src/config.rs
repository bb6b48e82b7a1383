use std::fmt;
use std::path::{Path, PathBuf};

use epoch_gda::baselines::StepRule;
use epoch_gda::scsc::ScheduleMode;
use epoch_gda::TestbedSpec;
use serde::{Deserialize, Serialize};

/// Rejected configuration; maps to exit code 1.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Theory,
    #[default]
    Practical,
}

/// A hand-set SCSC schedule, used instead of the tuned one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManualSchedule {
    pub r1: f64,
    pub eta_x1: f64,
    pub eta_y1: f64,
    pub t1: u64,
    pub epochs: usize,
}

fn default_delta() -> f64 {
    0.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SolverSpec {
    /// One run per seed and per entry of `eps_targets`, with the tuned
    /// schedule, or one run per seed with `manual`.
    EpochGdaScsc {
        #[serde(default = "default_delta")]
        delta: f64,
        /// Initial gap bound; the exact gap at the start point when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eps0: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        manual: Option<ManualSchedule>,
    },
    EpochGdaWcsc {
        epochs: usize,
        /// Proximal weight; `2 rho` when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma: Option<f64>,
    },
    PdSgd {
        iterations: u64,
        /// Gap checkpoints; powers of two up to `iterations` when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        checkpoints: Option<Vec<u64>>,
        /// `inv_sqrt` with `c = 1/min(mu, lambda)` when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        step: Option<StepRule>,
    },
}

impl SolverSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SolverSpec::EpochGdaScsc { .. } => "epoch_gda_scsc",
            SolverSpec::EpochGdaWcsc { .. } => "epoch_gda_wcsc",
            SolverSpec::PdSgd { .. } => "pd_sgd",
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_scale() -> f64 {
    ScheduleMode::DEFAULT_PRACTICAL_SCALE
}

/// One experiment: a testbed, a solver, and the seeds to run it with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seeds: Vec<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "default_scale")]
    pub scale: f64,
    #[serde(default)]
    pub eps_targets: Vec<f64>,
    /// Write zero in every `wallclock_ns` field, for byte-stable output.
    #[serde(default)]
    pub zero_wallclock: bool,
    pub problem: TestbedSpec,
    pub solver: SolverSpec,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn schedule_mode(&self) -> ScheduleMode {
        match self.mode {
            Mode::Theory => ScheduleMode::Theory,
            Mode::Practical => ScheduleMode::Practical { scale: self.scale },
        }
    }

    /// Checks everything that can be checked without running a solver,
    /// including that the testbed builds.
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.seeds.is_empty() {
            return Err(config_err("seeds must not be empty"));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(config_err("seeds must be distinct"));
        }
        if !(self.scale > 0.0 && self.scale <= 1.0) {
            return Err(config_err(format!("scale {} must lie in (0, 1]", self.scale)));
        }
        if self.eps_targets.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(config_err("eps_targets must be positive"));
        }
        let problem = self.problem.build().map_err(|e| config_err(format!("problem: {e}")))?;
        match &self.solver {
            SolverSpec::EpochGdaScsc { delta, eps0, manual } => {
                if problem.mu().is_none() {
                    return Err(config_err("epoch_gda_scsc needs a strongly convex testbed"));
                }
                if !(*delta > 0.0 && *delta < 1.0) {
                    return Err(config_err(format!("delta = {delta} must lie in (0, 1)")));
                }
                if let Some(e) = eps0 {
                    if !(*e > 0.0 && e.is_finite()) {
                        return Err(config_err("eps0 must be positive"));
                    }
                }
                match manual {
                    Some(m) => {
                        epoch_gda::scsc::ScscSchedule::manual(m.r1, m.eta_x1, m.eta_y1, m.t1, m.epochs)
                            .map_err(|e| config_err(format!("manual schedule: {e}")))?;
                        if !self.eps_targets.is_empty() {
                            return Err(config_err("eps_targets and a manual schedule are exclusive"));
                        }
                    }
                    None if self.eps_targets.is_empty() => {
                        return Err(config_err("epoch_gda_scsc needs eps_targets or a manual schedule"))
                    }
                    None => {}
                }
            }
            SolverSpec::EpochGdaWcsc { epochs, gamma } => {
                let rho = problem.rho().ok_or_else(|| config_err("epoch_gda_wcsc needs a weakly convex testbed"))?;
                if *epochs == 0 {
                    return Err(config_err("epochs must be at least 1"));
                }
                if let Some(g) = gamma {
                    if *g <= rho || g.is_nan() {
                        return Err(config_err(format!("gamma = {g} must exceed rho = {rho}")));
                    }
                }
            }
            SolverSpec::PdSgd { iterations, checkpoints, step } => {
                if problem.mu().is_none() {
                    return Err(config_err("pd_sgd needs a strongly convex testbed"));
                }
                if *iterations == 0 {
                    return Err(config_err("iterations must be positive"));
                }
                if let Some(c) = checkpoints {
                    if c.is_empty() || c[0] == 0 || c.windows(2).any(|w| w[0] >= w[1]) {
                        return Err(config_err("checkpoints must be positive and strictly increasing"));
                    }
                    if *c.last().unwrap() != *iterations {
                        return Err(config_err("the last checkpoint must equal iterations"));
                    }
                }
                if let Some(StepRule::Constant { c } | StepRule::InvSqrt { c }) = step {
                    if !(*c > 0.0 && c.is_finite()) {
                        return Err(config_err("step constant must be positive"));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
seeds = [1, 2]
eps_targets = [0.25]

[problem]
testbed = "quadratic"
dim_x = 2
dim_y = 2
mu = 1.0
lambda = 1.0
coupling = { kind = "identity" }
box_radius = 1.0

[solver]
kind = "epoch_gda_scsc"
"#;

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::from_toml(BASIC).unwrap();
        assert_eq!(c.mode, Mode::Practical);
        assert_eq!(c.scale, 1e-3);
        assert_eq!(c.solver, SolverSpec::EpochGdaScsc { delta: 0.1, eps0: None, manual: None });
    }

    #[test]
    fn toml_round_trip() {
        let c = ExperimentConfig::from_toml(BASIC).unwrap();
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn rejects_unknown_fields_and_bad_values() {
        assert!(ExperimentConfig::from_toml(&format!("{BASIC}\nbogus = 1")).is_err());
        let no_seeds = BASIC.replace("seeds = [1, 2]", "seeds = []");
        assert!(ExperimentConfig::from_toml(&no_seeds).is_err());
        let no_targets = BASIC.replace("eps_targets = [0.25]", "");
        assert!(ExperimentConfig::from_toml(&no_targets).is_err());
        let err = ExperimentConfig::from_toml(&no_seeds).unwrap_err();
        assert!(err.downcast_ref::<ConfigError>().is_some());
    }
}
