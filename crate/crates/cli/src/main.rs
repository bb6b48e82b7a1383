use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use epoch_gda_cli::{output, rate_fit, run_experiment, sweep, ConfigError, ExperimentConfig, Mode};

#[derive(Parser)]
#[command(name = "epoch-gda", version, about = "Run epoch-wise stochastic GDA experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run an experiment once per value of a numeric config field.
    Sweep {
        config: PathBuf,
        /// Field to vary: an alias (sigma, scale, delta, epochs, ...) or a dotted path.
        #[arg(long)]
        axis: String,
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Vec<f64>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Refit the log-log rate of a summary's budget points.
    RateFit { summary: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Theory,
    Practical,
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long)]
    zero_wallclock: bool,
}

impl Overrides {
    fn apply(self, mut config: ExperimentConfig) -> anyhow::Result<ExperimentConfig> {
        if let Some(dir) = self.output_dir {
            config.output_dir = dir;
        }
        if let Some(seeds) = self.seeds {
            config.seeds = seeds;
        }
        if let Some(mode) = self.mode {
            config.mode = match mode {
                ModeArg::Theory => Mode::Theory,
                ModeArg::Practical => Mode::Practical,
            };
        }
        if let Some(scale) = self.scale {
            config.scale = scale;
        }
        config.zero_wallclock |= self.zero_wallclock;
        config.validate()?;
        Ok(config)
    }
}

fn report_failures(summaries: &[output::RunSummary]) -> bool {
    let failed: usize = summaries.iter().map(|s| s.failed_runs).sum();
    if failed > 0 {
        for s in summaries {
            for r in s.all_runs().filter(|r| r.error.is_some()) {
                eprintln!("seed {}: {}", r.seed, r.error.as_deref().unwrap_or_default());
            }
        }
    }
    failed == 0
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, overrides } => {
            ExperimentConfig::load(&config).and_then(|c| overrides.apply(c)).and_then(|c| run_experiment(&c)).map(|s| {
                println!(
                    "{}",
                    output::to_json(&serde_json::json!({
                        "output_dir": s.config.output_dir,
                        "failed_runs": s.failed_runs,
                        "budget_points": s.budget_points,
                        "fit": s.fit,
                    }))
                    .trim_end()
                );
                report_failures(std::slice::from_ref(&s))
            })
        }
        Command::Sweep { config, axis, values, overrides } => ExperimentConfig::load(&config)
            .and_then(|c| overrides.apply(c))
            .and_then(|c| sweep(&c, &axis, &values))
            .map(|s| report_failures(&s)),
        Command::RateFit { summary } => rate_fit(&summary).map(|fit| {
            println!("{}", output::to_json(&fit).trim_end());
            true
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
