//! Optimization drivers: exponentiated mirror descent with a constant
//! stepsize, its adaptive-stepsize variant, and the Euclidean proximal SGD
//! baseline.
//!
//! All three share one loop. At iteration `t` the driver estimates the
//! gradient at `x_t` with `2m` oracle calls, takes the prox step in the
//! algorithm's geometry and records exact diagnostics for `x_t`.

mod adaptive;
mod trace;

pub use adaptive::AdaptiveState;
pub use trace::{IterationRecord, RunStatus, RunTrace};

use std::time::Instant;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::estimator::{estimate, EstimatorConfig, Scheme};
use crate::problem::{CompositeProblem, DecisionVector};
use crate::prox::{generalized_projection, gradient_map, Geometry, ProxRequest};
use crate::rng::RngStream;

/// Objective values above this end the run as diverged.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    ZoExpMd,
    ZoAdaExpMd,
    ZoPsgd,
}

impl Algorithm {
    pub fn geometry(self) -> Geometry {
        match self {
            Algorithm::ZoExpMd | Algorithm::ZoAdaExpMd => Geometry::EntropyMirror,
            Algorithm::ZoPsgd => Geometry::Euclidean,
        }
    }

    pub fn scheme(self) -> Scheme {
        match self {
            Algorithm::ZoExpMd | Algorithm::ZoAdaExpMd => Scheme::Rademacher,
            Algorithm::ZoPsgd => Scheme::Gaussian,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::ZoExpMd => "zo-expmd",
            Algorithm::ZoAdaExpMd => "zo-ada-expmd",
            Algorithm::ZoPsgd => "zo-psgd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub algorithm: Algorithm,
    pub iterations: usize,
    /// Constant stepsize; required by the constant-step methods, forbidden
    /// for the adaptive one.
    pub eta_const: Option<f64>,
    pub estimator: EstimatorConfig,
    pub seed: u64,
    /// Record real per-iteration timings (otherwise zero, keeping traces
    /// reproducible byte for byte).
    pub record_wallclock: bool,
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(invalid("iterations", "must be at least 1"));
        }
        self.estimator.validate()?;
        if self.estimator.scheme != self.algorithm.scheme() {
            return Err(invalid(
                "estimator.scheme",
                format!("{} uses {:?} directions", self.algorithm.name(), self.algorithm.scheme()),
            ));
        }
        match (self.algorithm, self.eta_const) {
            (Algorithm::ZoAdaExpMd, Some(_)) => {
                Err(invalid("eta", "the adaptive method does not take a constant stepsize"))
            }
            (Algorithm::ZoExpMd | Algorithm::ZoPsgd, None) => {
                Err(invalid("eta", format!("{} needs a constant stepsize", self.algorithm.name())))
            }
            (_, Some(eta)) if !(eta > 0.0 && eta.is_finite()) => {
                Err(invalid("eta", format!("must be positive and finite, got {eta}")))
            }
            _ => Ok(()),
        }
    }
}

/// Constant stepsize `L (D + 1)` from the smoothness constant and the l1
/// radius of the feasible set.
pub fn theorem1_eta(lipschitz_grad: f64, l1_radius: f64) -> f64 {
    lipschitz_grad * (l1_radius + 1.0)
}

/// [`theorem1_eta`] from the problem's smoothness metadata.
pub fn theorem1_eta_for(problem: &CompositeProblem) -> Result<f64> {
    let s = &problem.smoothness;
    match (s.lipschitz_grad, s.l1_radius) {
        (Some(l), Some(d)) => Ok(theorem1_eta(l, d)),
        _ => Err(invalid("smoothness", "L and D must both be known")),
    }
}

/// `||G_K(x, grad f(x), eta)||^2` in the given geometry (l1 for the mirror
/// geometry, l2 for the Euclidean one).
pub fn stationarity_in(problem: &CompositeProblem, x: &[f64], eta: f64, geometry: Geometry) -> Result<f64> {
    let grad = problem.exact_gradient(x)?;
    let g = gradient_map(&ProxRequest {
        anchor: x,
        gradient: &grad,
        eta,
        regularizer: problem.regularizer,
        feasible: &problem.feasible,
        geometry,
    })?;
    Ok(geometry.norm_sq(&g))
}

/// Mirror-geometry stationarity `||G_K(x, grad f(x), eta)||_1^2`.
pub fn stationarity(problem: &CompositeProblem, x: &[f64], eta: f64) -> Result<f64> {
    stationarity_in(problem, x, eta, Geometry::EntropyMirror)
}

pub fn run_zo_expmd(problem: &CompositeProblem, cfg: &OptimizerConfig) -> Result<RunTrace> {
    expect(cfg, Algorithm::ZoExpMd)?;
    run(problem, cfg)
}

pub fn run_zo_ada_expmd(problem: &CompositeProblem, cfg: &OptimizerConfig) -> Result<RunTrace> {
    expect(cfg, Algorithm::ZoAdaExpMd)?;
    run(problem, cfg)
}

pub fn run_zo_psgd(problem: &CompositeProblem, cfg: &OptimizerConfig) -> Result<RunTrace> {
    expect(cfg, Algorithm::ZoPsgd)?;
    run(problem, cfg)
}

fn expect(cfg: &OptimizerConfig, algorithm: Algorithm) -> Result<()> {
    if cfg.algorithm != algorithm {
        return Err(invalid(
            "algorithm",
            format!("expected {}, got {}", algorithm.name(), cfg.algorithm.name()),
        ));
    }
    Ok(())
}

fn diverged(objective: f64) -> bool {
    !objective.is_finite() || objective > DIVERGENCE_LIMIT
}

/// Runs whichever algorithm `cfg` names.
pub fn run(problem: &CompositeProblem, cfg: &OptimizerConfig) -> Result<RunTrace> {
    cfg.validate()?;
    let geometry = cfg.algorithm.geometry();
    let start = problem.start_point();
    problem.check_dim(&start)?;
    if let Some(index) = problem.feasible.violation(&start) {
        return Err(Error::Infeasible { index });
    }

    let iteration_root = RngStream::new(cfg.seed, 0);
    let mut adaptive = AdaptiveState::new();
    let mut records = Vec::with_capacity(cfg.iterations);
    let mut iterates: Vec<DecisionVector> = Vec::with_capacity(cfg.iterations);
    let mut status = RunStatus::Completed;
    let mut calls = 0u64;
    let mut x = start;

    for t in 1..=cfg.iterations {
        let clock = cfg.record_wallclock.then(Instant::now);
        let eta = match cfg.algorithm {
            Algorithm::ZoAdaExpMd => adaptive.alpha,
            _ => cfg.eta_const.expect("validated"),
        };

        let objective = problem.exact_objective_value(&x)?;
        if diverged(objective) {
            status = RunStatus::Diverged {
                at: t,
                reason: format!("objective {objective:e} at iterate {t}"),
            };
            break;
        }
        let stationarity_sq = match stationarity_in(problem, &x, eta, geometry) {
            Ok(v) => v,
            Err(Error::MissingExactGradient) => f64::NAN,
            Err(e) => return Err(e),
        };

        let est = estimate(problem.oracle.as_ref(), &x, &cfg.estimator, iteration_root.child(t as u64))?;
        calls += est.oracle_calls;

        let step = generalized_projection(&ProxRequest {
            anchor: &x,
            gradient: &est.vector,
            eta,
            regularizer: problem.regularizer,
            feasible: &problem.feasible,
            geometry,
        });
        let next = match step {
            Ok(next) => next,
            Err(e @ (Error::DualOverflow { .. } | Error::NonFinite(_))) => {
                status = RunStatus::Diverged {
                    at: t,
                    reason: e.to_string(),
                };
                break;
            }
            Err(e) => return Err(e),
        };
        debug_assert!(problem.feasible.contains(&next), "iterate left the feasible set");

        if cfg.algorithm == Algorithm::ZoAdaExpMd {
            adaptive.update(&x, &next);
        }

        records.push(IterationRecord {
            iter: t,
            oracle_calls: calls,
            objective,
            stationarity_sq,
            eta,
            wallclock_ms: clock.map_or(0.0, |c| c.elapsed().as_secs_f64() * 1e3),
        });
        iterates.push(std::mem::replace(&mut x, next));
    }

    let mut final_objective = problem.exact_objective_value(&x)?;
    if records.is_empty() {
        // diverged before the first step: report the start point
        iterates.push(x.clone());
    }
    if diverged(final_objective) {
        if let RunStatus::Completed = status {
            status = RunStatus::Diverged {
                at: cfg.iterations + 1,
                reason: format!("objective {final_objective:e} at final iterate"),
            };
        }
        final_objective = f64::NAN;
    }

    let final_stationarity_sq = if final_objective.is_nan() {
        f64::NAN
    } else {
        let eta = match cfg.algorithm {
            Algorithm::ZoAdaExpMd => adaptive.alpha,
            _ => cfg.eta_const.expect("validated"),
        };
        match stationarity_in(problem, &x, eta, geometry) {
            Ok(v) => v,
            Err(Error::MissingExactGradient) => f64::NAN,
            Err(e) => return Err(e),
        }
    };

    let mut r_rng = RngStream::new(cfg.seed, 1).generator();
    let returned_index = r_rng.random_range(1..=iterates.len());

    let (mut best_idx, mut best_objective) = (0, f64::INFINITY);
    for (i, rec) in records.iter().enumerate() {
        if rec.objective < best_objective {
            best_idx = i;
            best_objective = rec.objective;
        }
    }
    let x_best = if final_objective < best_objective {
        best_objective = final_objective;
        x.clone()
    } else if records.is_empty() {
        best_objective = problem.exact_objective_value(&iterates[0]).unwrap_or(f64::NAN);
        iterates[0].clone()
    } else {
        iterates[best_idx].clone()
    };

    Ok(RunTrace {
        records,
        status,
        returned_index,
        x_returned: iterates[returned_index - 1].clone(),
        x_best,
        best_objective,
        x_final: x,
        final_objective,
        final_stationarity_sq,
        oracle_calls: calls,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::EstimatorConfig;
    use crate::problem::FeasibleSet;
    use crate::problems::{ConstantOracle, FailingOracle};
    use std::sync::Arc;

    fn cfg(algorithm: Algorithm, iterations: usize, eta: Option<f64>, m: usize) -> OptimizerConfig {
        OptimizerConfig {
            algorithm,
            iterations,
            eta_const: eta,
            estimator: EstimatorConfig::new(algorithm.scheme(), 1e-3, m).unwrap(),
            seed: 3,
            record_wallclock: false,
        }
    }

    fn constant_problem(d: usize) -> CompositeProblem {
        CompositeProblem::new("const", Arc::new(ConstantOracle::new(d, 1.5)))
            .with_start(DecisionVector::new((0..d).map(|i| 0.1 * i as f64 - 0.2).collect()).unwrap())
            .unwrap()
    }

    #[test]
    fn config_rules() {
        assert!(cfg(Algorithm::ZoExpMd, 5, None, 1).validate().is_err());
        assert!(cfg(Algorithm::ZoPsgd, 5, None, 1).validate().is_err());
        assert!(cfg(Algorithm::ZoAdaExpMd, 5, Some(1.0), 1).validate().is_err());
        assert!(cfg(Algorithm::ZoExpMd, 0, Some(1.0), 1).validate().is_err());
        assert!(cfg(Algorithm::ZoExpMd, 5, Some(-1.0), 1).validate().is_err());
        let mut c = cfg(Algorithm::ZoExpMd, 5, Some(1.0), 1);
        c.estimator.scheme = Scheme::Gaussian;
        assert!(c.validate().is_err());
        assert!(cfg(Algorithm::ZoAdaExpMd, 5, None, 1).validate().is_ok());
    }

    #[test]
    fn wrong_driver_is_rejected() {
        let p = constant_problem(4);
        assert!(run_zo_expmd(&p, &cfg(Algorithm::ZoPsgd, 2, Some(1.0), 1)).is_err());
        assert!(run_zo_psgd(&p, &cfg(Algorithm::ZoExpMd, 2, Some(1.0), 1)).is_err());
        assert!(run_zo_ada_expmd(&p, &cfg(Algorithm::ZoExpMd, 2, Some(1.0), 1)).is_err());
    }

    #[test]
    fn constant_objective_is_a_fixed_point() {
        let p = constant_problem(4);
        for c in [
            cfg(Algorithm::ZoExpMd, 1, Some(2.0), 3),
            cfg(Algorithm::ZoAdaExpMd, 6, None, 3),
            cfg(Algorithm::ZoPsgd, 6, Some(2.0), 3),
        ] {
            let trace = run(&p, &c).unwrap();
            let x1 = p.start_point();
            for (a, b) in trace.x_final.iter().zip(x1.iter()) {
                assert!((a - b).abs() <= 1e-15 * (1.0 + b.abs()), "{:?}", c.algorithm);
            }
            assert_eq!(trace.records[0].stationarity_sq, 0.0);
            if c.algorithm == Algorithm::ZoAdaExpMd {
                assert!(trace.records.iter().all(|r| (r.eta - 1.0).abs() < 1e-12));
            }
        }
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let mut p = constant_problem(3)
            .with_feasible(FeasibleSet::uniform_box(3, 0.0, 1.0).unwrap())
            .unwrap();
        p.start = Some(DecisionVector::new(vec![0.5, 2.0, 0.5]).unwrap());
        assert_eq!(
            run(&p, &cfg(Algorithm::ZoExpMd, 2, Some(1.0), 1)).unwrap_err(),
            Error::Infeasible { index: 1 }
        );
    }

    #[test]
    fn oracle_failure_propagates() {
        let p = CompositeProblem::new("fail", Arc::new(FailingOracle::new(3, 7)));
        assert!(matches!(
            run(&p, &cfg(Algorithm::ZoExpMd, 10, Some(1.0), 2)),
            Err(Error::Oracle { .. })
        ));
    }

    #[test]
    fn closed_form_stepsize() {
        assert_eq!(theorem1_eta(2.0, 3.0), 8.0);
        let p = constant_problem(3)
            .with_feasible(FeasibleSet::uniform_box(3, -1.0, 1.0).unwrap())
            .unwrap();
        assert!(theorem1_eta_for(&p).is_err());
        let mut q = p.clone();
        q.smoothness.lipschitz_grad = Some(0.5);
        assert_eq!(theorem1_eta_for(&q).unwrap(), 2.0);
    }
}
