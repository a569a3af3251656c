//! Contrastive explanations on a small black-box classifier: pertinent
//! positive (PP) and pertinent negative (PN) losses and their box-constrained
//! composite problems.

mod classifier;

pub use classifier::{argmax_excluding, TinyClassifier, BUNDLED};

use std::sync::Arc;

use rand::{Rng, RngCore};

use crate::error::{invalid, Error, Result};
use crate::problem::{CompositeProblem, DecisionVector, FeasibleSet, NoiseRealization, Regularizer, StochasticOracle};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExplainKind {
    Pp,
    Pn,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplainTask {
    pub x0: DecisionVector,
    pub kind: ExplainKind,
    /// Margin floor `kappa >= 0`.
    pub kappa: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    /// Predicted class of `x0`, frozen at construction.
    pub k0: usize,
}

impl ExplainTask {
    pub fn new(
        model: &TinyClassifier,
        x0: DecisionVector,
        kind: ExplainKind,
        kappa: f64,
        gamma1: f64,
        gamma2: f64,
    ) -> Result<Self> {
        if x0.dim() != model.n {
            return Err(Error::DimensionMismatch { expected: model.n, got: x0.dim() });
        }
        if x0.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(invalid("x0", "entries must lie in [0, 1]"));
        }
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(invalid("kappa", format!("must be finite and >= 0, got {kappa}")));
        }
        Regularizer::elastic_net(gamma1, gamma2)?;
        let k0 = model.predict(&x0)?;
        Ok(Self {
            x0,
            kind,
            kappa,
            gamma1,
            gamma2,
            k0,
        })
    }
}

fn check_class(model: &TinyClassifier, k0: usize) -> Result<()> {
    if k0 >= model.classes {
        return Err(Error::ClassOutOfRange { index: k0, classes: model.classes });
    }
    Ok(())
}

/// `max{ max_{i != k0} f(x)_i - f(x)_{k0}, -kappa }`.
pub fn pp_loss(model: &TinyClassifier, x: &[f64], k0: usize, kappa: f64) -> Result<f64> {
    check_class(model, k0)?;
    let logits = model.logits(x)?;
    let (_, other) = argmax_excluding(&logits, Some(k0));
    Ok((other - logits[k0]).max(-kappa))
}

/// `max{ f(x0 + x)_{k0} - max_{i != k0} f(x0 + x)_i, -kappa }`.
pub fn pn_loss(model: &TinyClassifier, x: &[f64], x0: &[f64], k0: usize, kappa: f64) -> Result<f64> {
    check_class(model, k0)?;
    if x.len() != x0.len() {
        return Err(Error::DimensionMismatch { expected: x0.len(), got: x.len() });
    }
    let shifted: Vec<f64> = x.iter().zip(x0).map(|(a, b)| a + b).collect();
    let logits = model.logits(&shifted)?;
    let (_, other) = argmax_excluding(&logits, Some(k0));
    Ok((logits[k0] - other).max(-kappa))
}

/// Deterministic oracle wrapping a PP or PN loss.
#[derive(Debug, Clone)]
pub struct ExplainOracle {
    model: Arc<TinyClassifier>,
    task: ExplainTask,
}

impl ExplainOracle {
    fn query_point(&self, x: &[f64]) -> Vec<f64> {
        match self.task.kind {
            ExplainKind::Pp => x.to_vec(),
            ExplainKind::Pn => x.iter().zip(self.task.x0.iter()).map(|(a, b)| a + b).collect(),
        }
    }
}

impl StochasticOracle for ExplainOracle {
    fn dim(&self) -> usize {
        self.model.n
    }

    fn draw_noise(&self, _rng: &mut dyn RngCore) -> NoiseRealization {
        NoiseRealization::none()
    }

    fn eval(&self, x: &[f64], _noise: &NoiseRealization) -> Result<f64> {
        let t = &self.task;
        match t.kind {
            ExplainKind::Pp => pp_loss(&self.model, x, t.k0, t.kappa),
            ExplainKind::Pn => pn_loss(&self.model, x, &t.x0, t.k0, t.kappa),
        }
    }

    fn exact_value(&self, x: &[f64]) -> Option<f64> {
        self.eval(x, &NoiseRealization::none()).ok()
    }

    /// Gradient of the active branch of the hinge (zero on the floor).
    fn exact_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let t = &self.task;
        let point = self.query_point(x);
        let logits = self.model.logits(&point).ok()?;
        let (j, other) = argmax_excluding(&logits, Some(t.k0));
        let margin = match t.kind {
            ExplainKind::Pp => other - logits[t.k0],
            ExplainKind::Pn => logits[t.k0] - other,
        };
        if margin < -t.kappa {
            return Some(vec![0.0; x.len()]);
        }
        let (plus, minus) = match t.kind {
            ExplainKind::Pp => (j, t.k0),
            ExplainKind::Pn => (t.k0, j),
        };
        self.model.logit_difference_gradient(&point, plus, minus).ok()
    }
}

/// Composite problem `min_{x in K} l(x) + gamma1 ||x||_1 + gamma2/2 ||x||_2^2`.
///
/// PP searches `K = [0, x0]` starting from `x0`; PN searches
/// `K = [0, 1 - x0]` starting from the box center.
pub fn make_explain_problem(task: ExplainTask, model: Arc<TinyClassifier>) -> Result<CompositeProblem> {
    if task.x0.dim() != model.n {
        return Err(Error::DimensionMismatch { expected: model.n, got: task.x0.dim() });
    }
    if task.x0.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(invalid("x0", "entries must lie in [0, 1]"));
    }
    check_class(&model, task.k0)?;
    let n = model.n;
    let (upper, kind_name) = match task.kind {
        ExplainKind::Pp => (task.x0.to_vec(), "pp"),
        ExplainKind::Pn => (task.x0.iter().map(|v| 1.0 - v).collect(), "pn"),
    };
    let feasible = FeasibleSet::boxed(vec![0.0; n], upper)?;
    let start = match task.kind {
        ExplainKind::Pp => task.x0.clone(),
        ExplainKind::Pn => DecisionVector::new(feasible.center(n))?,
    };
    let regularizer = Regularizer::elastic_net(task.gamma1, task.gamma2)?;
    let oracle = ExplainOracle { model, task };
    CompositeProblem::new(format!("explain-{kind_name}-n{n}"), Arc::new(oracle))
        .with_regularizer(regularizer)
        .with_feasible(feasible)?
        .with_start(start)
}

/// Deterministic sample in `[0, 1]^n`: a smooth blob on a dark background,
/// loosely shaped like a digit image.
pub fn sample_input(n: usize, seed: u64) -> DecisionVector {
    let mut rng = RngStream::new(seed, 7).generator();
    let side = (n as f64).sqrt().ceil().max(1.0);
    let (cx, cy) = (rng.random_range(0.3..0.7) * side, rng.random_range(0.3..0.7) * side);
    let radius = rng.random_range(0.2..0.35) * side;
    let v = (0..n)
        .map(|i| {
            let (px, py) = ((i as f64) % side, (i as f64 / side).floor());
            let r = ((px - cx).powi(2) + (py - cy).powi(2)).sqrt();
            let base = (-(r / radius).powi(2)).exp();
            (base + 0.1 * rng.random::<f64>()).clamp(0.0, 1.0)
        })
        .collect();
    DecisionVector::from_vec_unchecked(v)
}
