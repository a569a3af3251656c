//! Experiment configuration (TOML).
//!
//! ```toml
//! seeds = [0, 1, 2]
//! output = "runs/quadratic"
//!
//! [problem]
//! kind = "sparse-quadratic"
//! d = 50
//! s = 5
//! noise_std = 0.1
//! gamma1 = 0.1
//! gamma2 = 0.1
//!
//! [[algorithms]]
//! name = "zo-expmd"
//! iterations = 300
//! batch = 200
//! eta = 10.0
//! ```
//!
//! `eta` may also be the string `"theorem1"` (`L (D + 1)`, needs a box).
//! `nu` defaults to the fixed-batch formula of each method.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use zomirror_core::estimator::{fixed_batch_nu, psgd_nu, EstimatorConfig};
use zomirror_core::explain::{make_explain_problem, sample_input, ExplainKind, ExplainTask, TinyClassifier};
use zomirror_core::optimizer::{theorem1_eta_for, Algorithm, OptimizerConfig};
use zomirror_core::problems::make_sparse_quadratic;
use zomirror_core::{CompositeProblem, FeasibleSet, Regularizer, RngStream};

pub const SEED_ENV: &str = "ZOMIRROR_SEED";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

fn bad(field: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seeds: Vec<u64>,
    pub output: PathBuf,
    pub problem: ProblemSpec,
    pub algorithms: Vec<AlgorithmSpec>,
    /// Record real per-iteration timings. Off by default so reruns are
    /// byte-identical.
    #[serde(default)]
    pub record_wallclock: bool,
    /// Also emit an SVG of the objective curve next to every CSV.
    #[serde(default)]
    pub svg: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemSpec {
    SparseQuadratic {
        d: usize,
        s: usize,
        #[serde(default)]
        noise_std: f64,
        #[serde(default)]
        gamma1: f64,
        #[serde(default)]
        gamma2: f64,
        /// Symmetric box `[-r, r]^d`; unconstrained when absent.
        #[serde(default)]
        box_radius: Option<f64>,
        /// Instance seed; defaults to the run seed so every seed draws a
        /// fresh instance.
        #[serde(default)]
        instance_seed: Option<u64>,
    },
    Explain {
        /// One of the bundled classifiers, e.g. `tiny-n784`.
        model: String,
        task: TaskKind,
        #[serde(default)]
        kappa: f64,
        gamma1: f64,
        gamma2: f64,
        /// Seed of the synthetic input `x0`; defaults to the run seed.
        #[serde(default)]
        sample_seed: Option<u64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Pp,
    Pn,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EtaSpec {
    Value(f64),
    Named(NamedEta),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedEta {
    Theorem1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    pub name: String,
    pub iterations: usize,
    pub batch: usize,
    #[serde(default)]
    pub eta: Option<EtaSpec>,
    #[serde(default)]
    pub nu: Option<f64>,
}

pub fn parse_algorithm(name: &str) -> Option<Algorithm> {
    match name {
        "zo-expmd" => Some(Algorithm::ZoExpMd),
        "zo-ada-expmd" => Some(Algorithm::ZoAdaExpMd),
        "zo-psgd" => Some(Algorithm::ZoPsgd),
        _ => None,
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.to_path_buf(),
            message: e.to_string().trim_end().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text, path)
    }

    /// Replaces the seed list with a single seed from `ZOMIRROR_SEED`, if set.
    pub fn apply_seed_env(&mut self) -> Result<(), ConfigError> {
        match std::env::var(SEED_ENV) {
            Ok(v) => {
                let seed = v
                    .trim()
                    .parse()
                    .map_err(|_| bad(SEED_ENV, format!("expected an unsigned integer, got {v:?}")))?;
                self.seeds = vec![seed];
                Ok(())
            }
            Err(_) => Ok(()),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.seeds.is_empty() {
            return Err(bad("seeds", "at least one seed is required"));
        }
        if self.algorithms.is_empty() {
            return Err(bad("algorithms", "at least one algorithm is required"));
        }
        match &self.problem {
            ProblemSpec::SparseQuadratic {
                d,
                s,
                noise_std,
                gamma1,
                gamma2,
                box_radius,
                ..
            } => {
                if *d < 3 {
                    return Err(bad("problem.d", format!("must be at least 3, got {d}")));
                }
                if *s == 0 || s > d {
                    return Err(bad("problem.s", format!("must be in 1..={d}, got {s}")));
                }
                if !(*noise_std >= 0.0 && noise_std.is_finite()) {
                    return Err(bad("problem.noise_std", "must be finite and >= 0"));
                }
                check_gammas(*gamma1, *gamma2)?;
                if let Some(r) = box_radius {
                    if !(*r > 0.0 && r.is_finite()) {
                        return Err(bad("problem.box_radius", "must be positive and finite"));
                    }
                }
            }
            ProblemSpec::Explain { model, kappa, gamma1, gamma2, .. } => {
                if !zomirror_core::explain::BUNDLED.iter().any(|b| b.0 == model) {
                    let names: Vec<&str> = zomirror_core::explain::BUNDLED.iter().map(|b| b.0).collect();
                    return Err(bad("problem.model", format!("unknown model {model:?}; bundled: {names:?}")));
                }
                if !(*kappa >= 0.0 && kappa.is_finite()) {
                    return Err(bad("problem.kappa", "must be finite and >= 0"));
                }
                check_gammas(*gamma1, *gamma2)?;
            }
        }
        for (i, a) in self.algorithms.iter().enumerate() {
            let field = |f: &str| format!("algorithms[{i}].{f}");
            let algorithm = parse_algorithm(&a.name).ok_or_else(|| {
                bad(field("name"), format!("unknown algorithm {:?}; expected zo-expmd, zo-ada-expmd or zo-psgd", a.name))
            })?;
            if a.iterations == 0 {
                return Err(bad(field("iterations"), "must be at least 1"));
            }
            if a.batch == 0 {
                return Err(bad(field("batch"), "must be at least 1"));
            }
            match (algorithm, a.eta) {
                (Algorithm::ZoAdaExpMd, Some(_)) => {
                    return Err(bad(field("eta"), "the adaptive method takes no constant stepsize"))
                }
                (Algorithm::ZoExpMd | Algorithm::ZoPsgd, None) => {
                    return Err(bad(field("eta"), format!("missing; {} needs a constant stepsize", a.name)))
                }
                (_, Some(EtaSpec::Value(v))) if !(v > 0.0 && v.is_finite()) => {
                    return Err(bad(field("eta"), format!("must be positive and finite, got {v}")))
                }
                _ => {}
            }
            if let Some(nu) = a.nu {
                if !(nu > 0.0 && nu.is_finite()) {
                    return Err(bad(field("nu"), format!("must be positive and finite, got {nu}")));
                }
            }
        }
        Ok(())
    }

    /// FNV-1a hash of the canonical JSON form, as 16 hex digits.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in json.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}

fn check_gammas(gamma1: f64, gamma2: f64) -> Result<(), ConfigError> {
    if !(gamma1 >= 0.0 && gamma1.is_finite()) {
        return Err(bad("problem.gamma1", "must be finite and >= 0"));
    }
    if !(gamma2 >= 0.0 && gamma2.is_finite()) {
        return Err(bad("problem.gamma2", "must be finite and >= 0"));
    }
    Ok(())
}

impl ProblemSpec {
    pub fn dim(&self) -> usize {
        match self {
            ProblemSpec::SparseQuadratic { d, .. } => *d,
            ProblemSpec::Explain { model, .. } => zomirror_core::explain::BUNDLED
                .iter()
                .find(|b| b.0 == model)
                .map_or(0, |b| b.1),
        }
    }

    /// Problem instance for one run seed.
    pub fn build(&self, seed: u64) -> zomirror_core::Result<CompositeProblem> {
        match self {
            ProblemSpec::SparseQuadratic {
                d,
                s,
                noise_std,
                gamma1,
                gamma2,
                box_radius,
                instance_seed,
            } => {
                let mut p = make_sparse_quadratic(*d, *s, *noise_std, RngStream::new(instance_seed.unwrap_or(seed), 0))?
                    .with_regularizer(Regularizer::elastic_net(*gamma1, *gamma2)?);
                if let Some(r) = box_radius {
                    p = p.with_feasible(FeasibleSet::uniform_box(*d, -r, *r)?)?;
                }
                Ok(p)
            }
            ProblemSpec::Explain {
                model,
                task,
                kappa,
                gamma1,
                gamma2,
                sample_seed,
            } => {
                let model = Arc::new(TinyClassifier::bundled(model)?);
                let kind = match task {
                    TaskKind::Pp => ExplainKind::Pp,
                    TaskKind::Pn => ExplainKind::Pn,
                };
                let x0 = sample_input(model.n, sample_seed.unwrap_or(seed));
                let task = ExplainTask::new(&model, x0, kind, *kappa, *gamma1, *gamma2)?;
                make_explain_problem(task, model)
            }
        }
    }
}

impl AlgorithmSpec {
    pub fn algorithm(&self) -> Algorithm {
        parse_algorithm(&self.name).expect("validated")
    }

    /// Optimizer settings for `problem` and `seed`.
    pub fn optimizer_config(
        &self,
        problem: &CompositeProblem,
        seed: u64,
        record_wallclock: bool,
    ) -> zomirror_core::Result<OptimizerConfig> {
        let algorithm = self.algorithm();
        let d = problem.dim();
        let nu = match self.nu {
            Some(nu) => nu,
            None if algorithm == Algorithm::ZoPsgd => psgd_nu(d, self.batch)?,
            None => fixed_batch_nu(d, self.batch)?,
        };
        let eta_const = match self.eta {
            None => None,
            Some(EtaSpec::Value(v)) => Some(v),
            Some(EtaSpec::Named(NamedEta::Theorem1)) => Some(theorem1_eta_for(problem)?),
        };
        Ok(OptimizerConfig {
            algorithm,
            iterations: self.iterations,
            eta_const,
            estimator: EstimatorConfig::new(algorithm.scheme(), nu, self.batch)?,
            seed,
            record_wallclock,
        })
    }

    /// File-name friendly label, e.g. `zo-expmd-eta100`.
    pub fn label(&self) -> String {
        match self.eta {
            None => self.name.clone(),
            Some(EtaSpec::Value(v)) => format!("{}-eta{v}", self.name),
            Some(EtaSpec::Named(NamedEta::Theorem1)) => format!("{}-theorem1", self.name),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"
seeds = [1, 2]
output = "out"

[problem]
kind = "sparse-quadratic"
d = 20
s = 3
noise_std = 0.1
gamma1 = 0.1
gamma2 = 0.1

[[algorithms]]
name = "zo-expmd"
iterations = 10
batch = 4
eta = 10.0

[[algorithms]]
name = "zo-ada-expmd"
iterations = 10
batch = 4
"#;

    fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
        ExperimentConfig::from_toml(text, Path::new("test.toml"))
    }

    #[test]
    fn parses_a_valid_config() {
        let cfg = parse(GOOD).unwrap();
        assert_eq!(cfg.seeds, vec![1, 2]);
        assert_eq!(cfg.algorithms[0].eta, Some(EtaSpec::Value(10.0)));
        assert_eq!(cfg.algorithms[1].label(), "zo-ada-expmd");
        assert!(!cfg.record_wallclock);
    }

    #[test]
    fn empty_algorithm_list_names_the_field() {
        let text = GOOD.split("[[algorithms]]").next().unwrap().to_string() + "algorithms = []\n";
        let err = parse(&text).unwrap_err().to_string();
        assert!(err.contains("algorithms"), "{err}");
    }

    #[test]
    fn missing_field_is_named_with_its_line() {
        let err = parse("seeds = [1]\n[problem]\nkind = \"sparse-quadratic\"\nd = 5\n").unwrap_err().to_string();
        assert!(err.contains("output") || err.contains("missing field"), "{err}");
        let err = parse(&GOOD.replace("batch = 4\neta = 10.0", "eta = 10.0")).unwrap_err().to_string();
        assert!(err.contains("batch") && err.contains("line"), "{err}");
    }

    #[test]
    fn stepsize_rules() {
        let err = parse(&GOOD.replace("eta = 10.0\n", "")).unwrap_err().to_string();
        assert!(err.contains("algorithms[0].eta"), "{err}");
        let text = GOOD.to_string() + "eta = 5.0\n";
        let err = parse(&text).unwrap_err().to_string();
        assert!(err.contains("algorithms[1].eta"), "{err}");
        let ok = parse(&GOOD.replace("eta = 10.0", "eta = \"theorem1\"")).unwrap();
        assert_eq!(ok.algorithms[0].eta, Some(EtaSpec::Named(NamedEta::Theorem1)));
    }

    #[test]
    fn rejects_unknown_names() {
        assert!(parse(&GOOD.replace("zo-expmd\"", "zo-sgd\"")).is_err());
        assert!(parse(&GOOD.replace("d = 20", "d = 2")).is_err());
        assert!(parse(&GOOD.replace("noise_std", "noise")).is_err());
    }

    #[test]
    fn named_stepsize_needs_a_box() {
        let cfg = parse(&GOOD.replace("eta = 10.0", "eta = \"theorem1\"")).unwrap();
        let p = cfg.problem.build(1).unwrap();
        assert!(cfg.algorithms[0].optimizer_config(&p, 1, false).is_err());
        let boxed = GOOD.replace("eta = 10.0", "eta = \"theorem1\"").replace("gamma2 = 0.1", "gamma2 = 0.1\nbox_radius = 2.0");
        let cfg = parse(&boxed).unwrap();
        let p = cfg.problem.build(1).unwrap();
        let oc = cfg.algorithms[0].optimizer_config(&p, 1, false).unwrap();
        let l = p.smoothness.lipschitz_grad.unwrap();
        assert!((oc.eta_const.unwrap() - l * 41.0).abs() < 1e-9 * l);
    }

    #[test]
    fn hash_tracks_content() {
        let a = parse(GOOD).unwrap();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seeds.push(3);
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn explain_problem_builds() {
        let text = r#"
seeds = [0]
output = "o"
[problem]
kind = "explain"
model = "tiny-n16"
task = "pn"
gamma1 = 0.1
gamma2 = 0.1
[[algorithms]]
name = "zo-psgd"
iterations = 3
batch = 2
eta = 10
"#;
        let cfg = parse(text).unwrap();
        let p = cfg.problem.build(0).unwrap();
        assert_eq!(p.dim(), 16);
        assert_eq!(cfg.problem.dim(), 16);
    }
}
