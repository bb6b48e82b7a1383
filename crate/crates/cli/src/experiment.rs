use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::Context;
use epoch_gda::baselines::{power_of_two_checkpoints, run_pdsgd_with_checkpoints, StepRule};
use epoch_gda::metrics::fit_loglog_slope;
use epoch_gda::scsc::{estimate_eps0, run_epoch_gda_scsc, theory_schedule, ScheduleInputs, ScscSchedule};
use epoch_gda::wcsc::{run_epoch_gda_wcsc, WcscConfig};
use epoch_gda::{run_rng, SaddleProblem, Trace};

use crate::config::{ConfigError, ExperimentConfig, SolverSpec};
use crate::output::{emit_csv, emit_summary, BudgetPoint, GroupSummary, RunRecord, RunSummary, SCHEMA_VERSION};

pub const SUMMARY_FILE: &str = "summary.json";

enum Plan {
    Scsc(Vec<(Option<f64>, ScscSchedule)>),
    Wcsc(WcscConfig),
    PdSgd { checkpoints: Vec<u64>, rule: StepRule },
}

struct Job {
    group: usize,
    seed: u64,
}

struct Outcome {
    trace: Trace,
    tau: Option<usize>,
}

fn plan(config: &ExperimentConfig, problem: &SaddleProblem) -> anyhow::Result<(Plan, Option<f64>)> {
    let invalid = |e: epoch_gda::Error| anyhow::Error::from(ConfigError(e.to_string()));
    match &config.solver {
        SolverSpec::EpochGdaScsc { delta, eps0, manual } => {
            if let Some(m) = manual {
                let s = ScscSchedule::manual(m.r1, m.eta_x1, m.eta_y1, m.t1, m.epochs).map_err(invalid)?;
                return Ok((Plan::Scsc(vec![(None, s)]), *eps0));
            }
            let eps0 = match eps0 {
                Some(e) => *e,
                None => {
                    let (x0, y0) = problem.start();
                    estimate_eps0(problem, &x0, &y0).context("computing the initial gap")?
                }
            };
            let schedules = config
                .eps_targets
                .iter()
                .map(|&eps| {
                    let inputs = ScheduleInputs::from_problem(problem, eps0, eps, *delta)?;
                    Ok((Some(eps), theory_schedule(&inputs, config.schedule_mode())?))
                })
                .collect::<Result<Vec<_>, epoch_gda::Error>>()
                .map_err(invalid)?;
            Ok((Plan::Scsc(schedules), Some(eps0)))
        }
        SolverSpec::EpochGdaWcsc { epochs, gamma } => {
            let rho = problem.rho().expect("validated");
            let c = match gamma {
                Some(g) => WcscConfig::with_gamma(*g, rho, problem.lambda(), *epochs),
                None => WcscConfig::for_problem(problem, *epochs),
            }
            .map_err(invalid)?;
            Ok((Plan::Wcsc(c), None))
        }
        SolverSpec::PdSgd { iterations, checkpoints, step } => {
            let checkpoints = checkpoints.clone().unwrap_or_else(|| power_of_two_checkpoints(*iterations));
            let rule = match step {
                Some(r) => *r,
                None => StepRule::default_for(problem).map_err(invalid)?,
            };
            Ok((Plan::PdSgd { checkpoints, rule }, None))
        }
    }
}

fn execute(problem: &SaddleProblem, plan: &Plan, job: &Job) -> epoch_gda::Result<Outcome> {
    let (x0, y0) = problem.start();
    let mut rng = run_rng(job.seed);
    match plan {
        Plan::Scsc(groups) => {
            let run = run_epoch_gda_scsc(problem, &x0, &y0, &groups[job.group].1, &mut rng)?;
            Ok(Outcome { trace: run.trace, tau: None })
        }
        Plan::Wcsc(config) => {
            let run = run_epoch_gda_wcsc(problem, &x0, &y0, config, &mut rng)?;
            Ok(Outcome { trace: run.trace, tau: Some(run.tau) })
        }
        Plan::PdSgd { checkpoints, rule } => {
            let run = run_pdsgd_with_checkpoints(problem, &x0, &y0, checkpoints, *rule, &mut rng)?;
            Ok(Outcome { trace: run.trace, tau: None })
        }
    }
}

/// Runs `jobs` on a pool of scoped threads; results come back in job order.
fn run_pool<T: Send>(jobs: &[Job], work: impl Fn(&Job) -> T + Sync) -> Vec<T> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(jobs.len()).max(1);
    let next = AtomicUsize::new(0);
    let done = Mutex::new(Vec::with_capacity(jobs.len()));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(i) else { break };
                let result = work(job);
                done.lock().expect("worker panicked").push((i, result));
            });
        }
    });
    let mut done = done.into_inner().expect("worker panicked");
    done.sort_by_key(|(i, _)| *i);
    done.into_iter().map(|(_, r)| r).collect()
}

/// Median of the finite values, averaging the middle pair for even counts.
pub fn median(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let mut v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

fn trace_file(plan: &Plan, job: &Job) -> String {
    match plan {
        Plan::Scsc(groups) if groups.len() > 1 || groups[0].0.is_some() => {
            format!("target{}-seed{}.csv", job.group, job.seed)
        }
        _ => format!("seed{}.csv", job.seed),
    }
}

/// Executes one run per seed (and per eps target), writing a CSV per run and
/// `summary.json` to the output directory.
///
/// Configuration problems are reported as [`ConfigError`] before any run
/// starts. A failing run is recorded in the summary and does not stop the
/// others.
pub fn run_experiment(config: &ExperimentConfig) -> anyhow::Result<RunSummary> {
    config.validate()?;
    let problem = config.problem.build().map_err(|e| ConfigError(e.to_string()))?;
    let (plan, eps0) = plan(config, &problem)?;
    let out_dir = &config.output_dir;
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;

    let n_groups = match &plan {
        Plan::Scsc(g) => g.len(),
        _ => 1,
    };
    let mut seeds = config.seeds.clone();
    seeds.sort_unstable();
    let jobs: Vec<Job> = (0..n_groups).flat_map(|group| seeds.iter().map(move |&seed| Job { group, seed })).collect();

    let results = run_pool(&jobs, |job| execute(&problem, &plan, job));

    let mut groups: Vec<GroupSummary> = (0..n_groups)
        .map(|g| {
            let (eps_target, epochs, total) = match &plan {
                Plan::Scsc(s) => (s[g].0, Some(s[g].1.epochs), s[g].1.total_iterations()),
                Plan::Wcsc(c) => (None, Some(c.epochs), c.total_iterations()),
                Plan::PdSgd { checkpoints, .. } => (None, None, *checkpoints.last().expect("nonempty")),
            };
            GroupSummary {
                eps_target,
                epochs,
                total_iterations: total,
                median_final_gap: None,
                median_final_near_stationarity: None,
                runs: Vec::new(),
            }
        })
        .collect();
    let mut traces: Vec<Option<Trace>> = Vec::with_capacity(jobs.len());

    for (job, result) in jobs.iter().zip(results) {
        let record = match result {
            Ok(mut outcome) => {
                if config.zero_wallclock {
                    outcome.trace.zero_wallclock();
                }
                let file = trace_file(&plan, job);
                emit_csv(&outcome.trace, &out_dir.join(&file))?;
                let last = outcome.trace.last();
                let record = RunRecord {
                    seed: job.seed,
                    trace_file: Some(file),
                    total_iterations: Some(outcome.trace.total_iterations()),
                    final_gap: last.and_then(|r| r.gap),
                    final_near_stationarity: last.and_then(|r| r.near_stationarity),
                    tau: outcome.tau,
                    error: None,
                };
                traces.push(Some(outcome.trace));
                record
            }
            Err(e) => {
                traces.push(None);
                RunRecord {
                    seed: job.seed,
                    trace_file: None,
                    total_iterations: None,
                    final_gap: None,
                    final_near_stationarity: None,
                    tau: None,
                    error: Some(e.to_string()),
                }
            }
        };
        groups[job.group].runs.push(record);
    }

    for g in &mut groups {
        g.median_final_gap = median(g.runs.iter().filter_map(|r| r.final_gap));
        g.median_final_near_stationarity = median(g.runs.iter().filter_map(|r| r.final_near_stationarity));
    }

    let budget_points: Vec<BudgetPoint> = match &plan {
        Plan::Scsc(_) => groups
            .iter()
            .filter(|g| g.eps_target.is_some())
            .filter_map(|g| g.median_final_gap.map(|m| BudgetPoint { iterations: g.total_iterations, median_gap: m }))
            .collect(),
        Plan::PdSgd { checkpoints, .. } => checkpoints
            .iter()
            .enumerate()
            .filter_map(|(j, &c)| {
                let gaps = traces.iter().flatten().filter_map(|t| t.rows.get(j).and_then(|r| r.gap));
                median(gaps).map(|m| BudgetPoint { iterations: c, median_gap: m })
            })
            .collect(),
        Plan::Wcsc(_) => Vec::new(),
    };
    let fit = fit_points(&budget_points);
    let failed_runs = groups.iter().flat_map(|g| &g.runs).filter(|r| r.error.is_some()).count();

    let summary = RunSummary {
        schema_version: SCHEMA_VERSION,
        software_version: env!("CARGO_PKG_VERSION").to_string(),
        solver: config.solver.name().to_string(),
        eps0,
        groups,
        budget_points,
        fit,
        failed_runs,
        config: config.clone(),
    };
    emit_summary(&summary, &out_dir.join(SUMMARY_FILE))?;
    Ok(summary)
}

/// Log-log fit of median gap against budget, when there are at least three
/// positive points.
pub fn fit_points(points: &[BudgetPoint]) -> Option<epoch_gda::metrics::LogLogFit> {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|p| p.median_gap > 0.0).map(|p| (p.iterations as f64, p.median_gap)).collect();
    fit_loglog_slope(&pts).ok()
}

/// Reads a summary and refits its budget points.
pub fn rate_fit(summary_path: &Path) -> anyhow::Result<epoch_gda::metrics::LogLogFit> {
    let summary = crate::output::read_summary(summary_path)?;
    let pts: Vec<(f64, f64)> = summary.budget_points.iter().map(|p| (p.iterations as f64, p.median_gap)).collect();
    Ok(fit_loglog_slope(&pts)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(median([3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median([4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(Vec::new()), None);
    }

    #[test]
    fn pool_preserves_job_order() {
        let jobs: Vec<Job> = (0..17).map(|i| Job { group: 0, seed: i }).collect();
        let out = run_pool(&jobs, |j| j.seed * 2);
        assert_eq!(out, (0..17).map(|i| i * 2).collect::<Vec<_>>());
    }
}
