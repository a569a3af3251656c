//! The `run` command: every configured algorithm on every seed.

use std::path::{Path, PathBuf};

use log::{info, warn};
use zomirror_core::optimizer::run;

use crate::config::ExperimentConfig;
use crate::output::{finite, status_text, svg_curve, trace_csv, write_atomic, RunSummary, Summary};

#[derive(Debug)]
pub struct RunOutcome {
    pub summaries: Vec<RunSummary>,
    pub summary_path: PathBuf,
}

impl RunOutcome {
    pub fn diverged(&self) -> usize {
        self.summaries.iter().filter(|s| s.status != "completed").count()
    }
}

/// Runs the experiment and writes `{label}-seed{seed}.csv` files plus
/// `summary.json` into the configured output directory (resolved against
/// `base` when relative).
pub fn run_experiment(cfg: &ExperimentConfig, base: &Path) -> anyhow::Result<RunOutcome> {
    let out_dir = base.join(&cfg.output);
    let mut summaries = Vec::new();
    for &seed in &cfg.seeds {
        let problem = cfg.problem.build(seed)?;
        for spec in &cfg.algorithms {
            let opt = spec.optimizer_config(&problem, seed, cfg.record_wallclock)?;
            let trace = run(&problem, &opt)?;
            let stem = format!("{}-seed{seed}", spec.label());
            let csv_name = format!("{stem}.csv");
            write_atomic(&out_dir.join(&csv_name), trace_csv(&trace).as_bytes())?;
            if cfg.svg {
                let values: Vec<f64> = trace.records.iter().map(|r| r.objective).collect();
                write_atomic(&out_dir.join(format!("{stem}.svg")), svg_curve(&stem, &values).as_bytes())?;
            }
            let status = status_text(&trace.status);
            if trace.is_diverged() {
                warn!("{stem}: {status}");
            } else {
                info!("{stem}: F = {:.6e}", trace.final_objective);
            }
            let returned = trace
                .records
                .get(trace.returned_index.wrapping_sub(1))
                .map_or(f64::NAN, |r| r.objective);
            summaries.push(RunSummary {
                label: spec.label(),
                algorithm: spec.name.clone(),
                seed,
                eta: opt.eta_const,
                nu: opt.estimator.nu,
                batch: opt.estimator.batch,
                iterations: opt.iterations,
                status,
                returned_index: trace.returned_index,
                returned_objective: finite(returned),
                best_objective: finite(trace.best_objective),
                final_objective: finite(trace.final_objective),
                final_stationarity_sq: finite(trace.final_stationarity_sq),
                oracle_calls: trace.oracle_calls,
                csv: csv_name,
            });
        }
    }
    let summary_path = out_dir.join("summary.json");
    let summary = Summary {
        config_hash: cfg.hash(),
        runs: &summaries,
    };
    write_atomic(&summary_path, serde_json::to_string_pretty(&summary)?.as_bytes())?;
    Ok(RunOutcome { summaries, summary_path })
}
