//! Stepsize-grid comparison of the three methods at a fixed batch size.
//!
//! Each constant-stepsize method runs over the grid `{10, 100, ..., 1e5}`
//! and the adaptive method runs once, giving 11 entries. Every entry runs
//! on every seed; seeds pick both the problem instance and the optimizer
//! randomness.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use zomirror_core::optimizer::{run, stationarity_in, Algorithm};
use zomirror_core::prox::Geometry;
use zomirror_core::CompositeProblem;

use crate::config::{AlgorithmSpec, EtaSpec, ProblemSpec, TaskKind};
use crate::oracles::median;
use crate::output::{finite, write_atomic};

/// Common stepsize at which final iterates of all methods are compared in
/// both geometries.
pub const REFERENCE_ETA: f64 = 1.0;

pub const STEPSIZE_GRID: [f64; 5] = [10.0, 100.0, 1e3, 1e4, 1e5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Quadratic,
    Explain,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchSpec {
    pub suite: Suite,
    pub problem: ProblemSpec,
    pub seeds: Vec<u64>,
    pub iterations: usize,
    pub batch: usize,
    pub grid: Vec<f64>,
}

impl BenchSpec {
    /// Sparse quadratic with `s = 10`, noise 0.1 and elastic net (0.1, 0.1).
    pub fn quadratic(d: usize, seeds: usize) -> Self {
        Self {
            suite: Suite::Quadratic,
            problem: ProblemSpec::SparseQuadratic {
                d,
                s: 10.min(d),
                noise_std: 0.1,
                gamma1: 0.1,
                gamma2: 0.1,
                box_radius: None,
                instance_seed: None,
            },
            seeds: (0..seeds as u64).collect(),
            iterations: 300,
            batch: 200,
            grid: STEPSIZE_GRID.to_vec(),
        }
    }

    /// Pertinent-negative search on the 784-input classifier with elastic
    /// net (0.1, 0.1) and `kappa = 0`.
    pub fn explain(seeds: usize) -> Self {
        Self {
            suite: Suite::Explain,
            problem: ProblemSpec::Explain {
                model: "tiny-n784".to_string(),
                task: TaskKind::Pn,
                kappa: 0.0,
                gamma1: 0.1,
                gamma2: 0.1,
                sample_seed: None,
            },
            seeds: (0..seeds as u64).collect(),
            iterations: 100,
            batch: 200,
            grid: STEPSIZE_GRID.to_vec(),
        }
    }

    pub fn entries(&self) -> Vec<AlgorithmSpec> {
        let spec = |name: &str, eta: Option<f64>| AlgorithmSpec {
            name: name.to_string(),
            iterations: self.iterations,
            batch: self.batch,
            eta: eta.map(EtaSpec::Value),
            nu: None,
        };
        let mut out = Vec::new();
        for name in ["zo-expmd", "zo-psgd"] {
            out.extend(self.grid.iter().map(|&eta| spec(name, Some(eta))));
        }
        out.push(spec("zo-ada-expmd", None));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub diverged: bool,
    /// `F(x_final)`; infinite for diverged runs.
    pub final_objective: f64,
    pub best_objective: f64,
    /// Stationarity in the method's own geometry and stepsize.
    pub final_stationarity_own: f64,
    /// Mirror (l1) and Euclidean (l2) stationarity at [`REFERENCE_ETA`].
    pub stationarity_l1: f64,
    pub stationarity_l2: f64,
    pub oracle_calls: u64,
    #[serde(skip)]
    pub curve: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryReport {
    pub label: String,
    pub algorithm: String,
    pub eta: Option<f64>,
    pub outcomes: Vec<SeedOutcome>,
}

fn column(outcomes: &[SeedOutcome], f: impl Fn(&SeedOutcome) -> f64) -> Vec<f64> {
    outcomes
        .iter()
        .map(|o| {
            let v = f(o);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        })
        .collect()
}

impl EntryReport {
    pub fn median_final_objective(&self) -> f64 {
        median(&column(&self.outcomes, |o| o.final_objective))
    }

    pub fn median_best_objective(&self) -> f64 {
        median(&column(&self.outcomes, |o| o.best_objective))
    }

    pub fn median_stationarity_l1(&self) -> f64 {
        median(&column(&self.outcomes, |o| o.stationarity_l1))
    }

    pub fn median_stationarity_l2(&self) -> f64 {
        median(&column(&self.outcomes, |o| o.stationarity_l2))
    }

    pub fn diverged_seeds(&self) -> usize {
        self.outcomes.iter().filter(|o| o.diverged).count()
    }

    /// Per-iteration median of `F` over the seeds that reached it.
    pub fn median_curve(&self) -> Vec<f64> {
        let len = self.outcomes.iter().map(|o| o.curve.len()).max().unwrap_or(0);
        (0..len)
            .map(|t| {
                let v: Vec<f64> = self.outcomes.iter().filter_map(|o| o.curve.get(t).copied()).collect();
                median(&v)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankRow {
    pub rank: usize,
    pub label: String,
    pub median_final_objective: Option<f64>,
    pub median_best_objective: Option<f64>,
    pub median_stationarity_l1: Option<f64>,
    pub median_stationarity_l2: Option<f64>,
    pub diverged_seeds: usize,
}

/// The headline comparison: best-tuned constant-stepsize entries of the
/// mirror method and the Euclidean baseline, compared in both norms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trend {
    pub expmd: String,
    pub psgd: String,
    pub expmd_l1: f64,
    pub psgd_l1: f64,
    pub expmd_l2: f64,
    pub psgd_l2: f64,
}

impl Trend {
    /// Baseline-to-mirror stationarity ratios `(l1, l2)`; above one means
    /// the mirror method is ahead.
    pub fn advantage(&self) -> (f64, f64) {
        (self.psgd_l1 / self.expmd_l1, self.psgd_l2 / self.expmd_l2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub spec: BenchSpec,
    pub entries: Vec<EntryReport>,
}

fn outcome(problem: &CompositeProblem, spec: &AlgorithmSpec, seed: u64) -> zomirror_core::Result<SeedOutcome> {
    let cfg = spec.optimizer_config(problem, seed, false)?;
    let trace = run(problem, &cfg)?;
    let diverged = trace.is_diverged();
    let at_ref = |geometry: Geometry| {
        if diverged {
            return Ok(f64::INFINITY);
        }
        match stationarity_in(problem, &trace.x_final, REFERENCE_ETA, geometry) {
            Ok(v) => Ok(v),
            Err(zomirror_core::Error::MissingExactGradient) => Ok(f64::NAN),
            // a reference step can itself overflow far from the optimum
            Err(zomirror_core::Error::DualOverflow { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    };
    let inf_if_nan = |v: f64| if v.is_nan() { f64::INFINITY } else { v };
    Ok(SeedOutcome {
        seed,
        diverged,
        final_objective: inf_if_nan(trace.final_objective),
        best_objective: inf_if_nan(trace.best_objective),
        final_stationarity_own: trace.final_stationarity_sq,
        stationarity_l1: at_ref(Geometry::EntropyMirror)?,
        stationarity_l2: at_ref(Geometry::Euclidean)?,
        oracle_calls: trace.oracle_calls,
        curve: trace.records.iter().map(|r| r.objective).collect(),
    })
}

/// Runs every (entry, seed) pair on a pool of `threads` workers (0 picks the
/// rayon default).
pub fn run_bench(spec: &BenchSpec, threads: usize) -> anyhow::Result<BenchReport> {
    use rayon::prelude::*;

    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    let entries = spec.entries();
    pool.install(|| {
        let problems: Vec<CompositeProblem> = spec
            .seeds
            .par_iter()
            .map(|&s| spec.problem.build(s))
            .collect::<zomirror_core::Result<_>>()?;
        let jobs: Vec<(usize, usize)> = (0..entries.len())
            .flat_map(|e| (0..spec.seeds.len()).map(move |s| (e, s)))
            .collect();
        let results: Vec<SeedOutcome> = jobs
            .par_iter()
            .map(|&(e, s)| outcome(&problems[s], &entries[e], spec.seeds[s]))
            .collect::<zomirror_core::Result<_>>()?;
        let mut results = results.into_iter();
        let reports = entries
            .iter()
            .map(|a| EntryReport {
                label: a.label(),
                algorithm: a.name.clone(),
                eta: match a.eta {
                    Some(EtaSpec::Value(v)) => Some(v),
                    _ => None,
                },
                outcomes: results.by_ref().take(spec.seeds.len()).collect(),
            })
            .collect();
        Ok(BenchReport {
            spec: spec.clone(),
            entries: reports,
        })
    })
}

impl BenchReport {
    /// The same report restricted to the first `n` seeds.
    pub fn with_seeds(&self, n: usize) -> BenchReport {
        let mut out = self.clone();
        out.spec.seeds.truncate(n);
        for e in &mut out.entries {
            e.outcomes.truncate(n);
        }
        out
    }

    /// Entries sorted by median final objective (diverged seeds count as
    /// infinite), ties kept in grid order.
    pub fn ranking(&self) -> Vec<RankRow> {
        let mut order: Vec<&EntryReport> = self.entries.iter().collect();
        order.sort_by(|a, b| a.median_final_objective().total_cmp(&b.median_final_objective()));
        order
            .into_iter()
            .enumerate()
            .map(|(i, e)| RankRow {
                rank: i + 1,
                label: e.label.clone(),
                median_final_objective: finite(e.median_final_objective()),
                median_best_objective: finite(e.median_best_objective()),
                median_stationarity_l1: finite(e.median_stationarity_l1()),
                median_stationarity_l2: finite(e.median_stationarity_l2()),
                diverged_seeds: e.diverged_seeds(),
            })
            .collect()
    }

    /// Best grid entry of `algorithm` by median final objective.
    pub fn best_constant(&self, algorithm: Algorithm) -> Option<&EntryReport> {
        self.entries
            .iter()
            .filter(|e| e.algorithm == algorithm.name() && e.eta.is_some())
            .min_by(|a, b| a.median_final_objective().total_cmp(&b.median_final_objective()))
    }

    pub fn best_grid_entry(&self) -> Option<&EntryReport> {
        self.entries
            .iter()
            .filter(|e| e.eta.is_some())
            .min_by(|a, b| a.median_final_objective().total_cmp(&b.median_final_objective()))
    }

    pub fn adaptive(&self) -> Option<&EntryReport> {
        self.entries.iter().find(|e| e.algorithm == Algorithm::ZoAdaExpMd.name())
    }

    pub fn trend(&self) -> Option<Trend> {
        let e = self.best_constant(Algorithm::ZoExpMd)?;
        let p = self.best_constant(Algorithm::ZoPsgd)?;
        Some(Trend {
            expmd: e.label.clone(),
            psgd: p.label.clone(),
            expmd_l1: e.median_stationarity_l1(),
            psgd_l1: p.median_stationarity_l1(),
            expmd_l2: e.median_stationarity_l2(),
            psgd_l2: p.median_stationarity_l2(),
        })
    }

    pub fn ranking_table(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "{:>4}  {:<22} {:>14} {:>14} {:>14} {:>14} {:>8}",
            "rank", "entry", "median F", "median best F", "stat l1", "stat l2", "diverged"
        )
        .expect("writing to a String");
        let show = |v: Option<f64>| v.map_or("inf".to_string(), |v| format!("{v:.6e}"));
        for r in self.ranking() {
            writeln!(
                out,
                "{:>4}  {:<22} {:>14} {:>14} {:>14} {:>14} {:>8}",
                r.rank,
                r.label,
                show(r.median_final_objective),
                show(r.median_best_objective),
                show(r.median_stationarity_l1),
                show(r.median_stationarity_l2),
                r.diverged_seeds
            )
            .expect("writing to a String");
        }
        out
    }

    pub fn ranking_csv(&self) -> String {
        let mut out = String::from("rank,entry,median_F,median_best_F,median_stationarity_l1,median_stationarity_l2,diverged_seeds\n");
        let show = |v: Option<f64>| v.map_or("inf".to_string(), |v| v.to_string());
        for r in self.ranking() {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.rank,
                r.label,
                show(r.median_final_objective),
                show(r.median_best_objective),
                show(r.median_stationarity_l1),
                show(r.median_stationarity_l2),
                r.diverged_seeds
            )
            .expect("writing to a String");
        }
        out
    }

    /// One row per iteration, one median-`F` column per entry.
    pub fn curves_csv(&self) -> String {
        let curves: Vec<Vec<f64>> = self.entries.iter().map(EntryReport::median_curve).collect();
        let len = curves.iter().map(Vec::len).max().unwrap_or(0);
        let mut out = String::from("iter");
        for e in &self.entries {
            out.push(',');
            out.push_str(&e.label);
        }
        out.push('\n');
        for t in 0..len {
            write!(out, "{}", t + 1).expect("writing to a String");
            for c in &curves {
                match c.get(t) {
                    Some(v) => write!(out, ",{v}").expect("writing to a String"),
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        let name = match self.spec.suite {
            Suite::Quadratic => "quadratic",
            Suite::Explain => "explain",
        };
        write_atomic(&dir.join(format!("{name}-ranking.csv")), self.ranking_csv().as_bytes())?;
        write_atomic(&dir.join(format!("{name}-curves.csv")), self.curves_csv().as_bytes())?;
        let json = serde_json::json!({
            "spec": self.spec,
            "ranking": self.ranking(),
            "trend": self.trend(),
        });
        write_atomic(&dir.join(format!("{name}-summary.json")), serde_json::to_string_pretty(&json)?.as_bytes())?;
        Ok(())
    }
}
