//! Problem model: decision vectors, the black-box stochastic oracle, the
//! elastic-net regularizer, box feasible sets and smoothness metadata.

use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use rand::RngCore;

use crate::error::{invalid, Error, Result};
use crate::linalg::{norm1, norm2_sq};

/// Dense finite real vector of dimension `d >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionVector(Vec<f64>);

impl DecisionVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(invalid("x", "dimension must be at least 1"));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("decision vector"));
        }
        Ok(Self(entries))
    }

    pub fn zeros(d: usize) -> Self {
        Self(vec![0.0; d.max(1)])
    }

    /// Wraps entries that the caller has already validated.
    pub(crate) fn from_vec_unchecked(entries: Vec<f64>) -> Self {
        debug_assert!(!entries.is_empty());
        Self(entries)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for DecisionVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for DecisionVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

/// One draw of the oracle's randomness. A realization is drawn once and may be
/// applied to any number of evaluation points. Deterministic oracles use an
/// empty realization.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NoiseRealization(pub Vec<f64>);

impl NoiseRealization {
    pub fn none() -> Self {
        Self(Vec::new())
    }
}

/// Black-box stochastic objective `f(x; xi)`.
///
/// `eval` must be deterministic in `(x, noise)`. Implementations are shared
/// across threads, so they must not hold mutable state.
pub trait StochasticOracle: Send + Sync {
    fn dim(&self) -> usize;

    fn draw_noise(&self, rng: &mut dyn RngCore) -> NoiseRealization;

    fn eval(&self, x: &[f64], noise: &NoiseRealization) -> Result<f64>;

    /// `E_xi f(x; xi)` when known in closed form.
    fn exact_value(&self, _x: &[f64]) -> Option<f64> {
        None
    }

    /// `grad f(x)` when known; diagnostics only, never used by the optimizers.
    fn exact_gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// `grad f(x; xi)` when known; used by the Monte-Carlo checks.
    fn stochastic_gradient(&self, _x: &[f64], _noise: &NoiseRealization) -> Option<Vec<f64>> {
        None
    }
}

/// `h(x) = l1 * ||x||_1 + (l2 / 2) * ||x||_2^2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Regularizer {
    #[default]
    None,
    ElasticNet { l1: f64, l2: f64 },
}

impl Regularizer {
    pub fn elastic_net(l1: f64, l2: f64) -> Result<Self> {
        if !(l1 >= 0.0 && l1.is_finite()) {
            return Err(invalid("gamma1", format!("must be finite and >= 0, got {l1}")));
        }
        if !(l2 >= 0.0 && l2.is_finite()) {
            return Err(invalid("gamma2", format!("must be finite and >= 0, got {l2}")));
        }
        Ok(Regularizer::ElasticNet { l1, l2 })
    }

    pub fn l1(&self) -> f64 {
        match *self {
            Regularizer::None => 0.0,
            Regularizer::ElasticNet { l1, .. } => l1,
        }
    }

    pub fn l2(&self) -> f64 {
        match *self {
            Regularizer::None => 0.0,
            Regularizer::ElasticNet { l2, .. } => l2,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match *self {
            Regularizer::None => 0.0,
            Regularizer::ElasticNet { l1, l2 } => l1 * norm1(x) + 0.5 * l2 * norm2_sq(x),
        }
    }
}

/// Feasible set `K`: all of `R^d`, or a coordinate box whose sides may be
/// infinite.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum FeasibleSet {
    #[default]
    All,
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

impl FeasibleSet {
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if l.is_nan() || u.is_nan() || l > u || *l == f64::INFINITY || *u == f64::NEG_INFINITY {
                return Err(invalid("box", format!("coordinate {i}: need lower <= upper, got [{l}, {u}]")));
            }
        }
        Ok(FeasibleSet::Box { lower, upper })
    }

    /// Same bounds on every coordinate.
    pub fn uniform_box(d: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::boxed(vec![lower; d], vec![upper; d])
    }

    pub fn bounds(&self, i: usize) -> (f64, f64) {
        match self {
            FeasibleSet::All => (f64::NEG_INFINITY, f64::INFINITY),
            FeasibleSet::Box { lower, upper } => (lower[i], upper[i]),
        }
    }

    pub fn check_dim(&self, d: usize) -> Result<()> {
        match self {
            FeasibleSet::Box { lower, .. } if lower.len() != d => Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: d,
            }),
            _ => Ok(()),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            FeasibleSet::All => x.iter().all(|v| v.is_finite()),
            FeasibleSet::Box { lower, upper } => {
                x.len() == lower.len()
                    && x.iter().zip(lower.iter().zip(upper)).all(|(v, (l, u))| l <= v && v <= u)
            }
        }
    }

    /// First coordinate violating the set, if any.
    pub fn violation(&self, x: &[f64]) -> Option<usize> {
        (0..x.len()).find(|&i| {
            let (l, u) = self.bounds(i);
            !(l <= x[i] && x[i] <= u)
        })
    }

    pub fn clamp_coord(&self, i: usize, v: f64) -> f64 {
        let (l, u) = self.bounds(i);
        v.max(l).min(u)
    }

    pub fn clamp(&self, x: &[f64]) -> Vec<f64> {
        x.iter().enumerate().map(|(i, &v)| self.clamp_coord(i, v)).collect()
    }

    /// Box center; coordinates with an infinite side use the point of the
    /// interval closest to zero.
    pub fn center(&self, d: usize) -> Vec<f64> {
        (0..d)
            .map(|i| {
                let (l, u) = self.bounds(i);
                if l.is_finite() && u.is_finite() {
                    0.5 * (l + u)
                } else {
                    self.clamp_coord(i, 0.0)
                }
            })
            .collect()
    }

    /// `sup_{x in K} ||x||_1`, when finite.
    pub fn l1_radius(&self) -> Option<f64> {
        match self {
            FeasibleSet::All => None,
            FeasibleSet::Box { lower, upper } => {
                let r: f64 = lower.iter().zip(upper).map(|(l, u)| l.abs().max(u.abs())).sum();
                r.is_finite().then_some(r)
            }
        }
    }
}

/// Smoothness constants of the black box; any entry may be unknown.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SmoothnessInfo {
    /// Gradient Lipschitz constant `L` w.r.t. the Euclidean norm.
    pub lipschitz_grad: Option<f64>,
    /// Function Lipschitz constant `G`.
    pub lipschitz: Option<f64>,
    /// Standard deviation `sigma` of the stochastic gradient (Euclidean).
    pub sigma: Option<f64>,
    /// Objective range bound `B`. Documentation only.
    pub range: Option<f64>,
    /// l1 radius `D` of the feasible set.
    pub l1_radius: Option<f64>,
}

/// `F(x) = f(x) + h(x)` over `K`.
#[derive(Clone)]
pub struct CompositeProblem {
    pub name: String,
    pub oracle: Arc<dyn StochasticOracle>,
    pub regularizer: Regularizer,
    pub feasible: FeasibleSet,
    pub smoothness: SmoothnessInfo,
    /// Starting point; defaults to the center of `K`.
    pub start: Option<DecisionVector>,
}

impl fmt::Debug for CompositeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CompositeProblem")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("regularizer", &self.regularizer)
            .field("feasible", &self.feasible)
            .field("smoothness", &self.smoothness)
            .finish()
    }
}

impl CompositeProblem {
    pub fn new(name: impl Into<String>, oracle: Arc<dyn StochasticOracle>) -> Self {
        Self {
            name: name.into(),
            oracle,
            regularizer: Regularizer::None,
            feasible: FeasibleSet::All,
            smoothness: SmoothnessInfo::default(),
            start: None,
        }
    }

    pub fn with_regularizer(mut self, regularizer: Regularizer) -> Self {
        self.regularizer = regularizer;
        self
    }

    pub fn with_feasible(mut self, feasible: FeasibleSet) -> Result<Self> {
        feasible.check_dim(self.dim())?;
        self.smoothness.l1_radius = feasible.l1_radius();
        self.feasible = feasible;
        Ok(self)
    }

    pub fn with_smoothness(mut self, smoothness: SmoothnessInfo) -> Self {
        self.smoothness = smoothness;
        self
    }

    pub fn with_start(mut self, start: DecisionVector) -> Result<Self> {
        self.check_dim(&start)?;
        if let Some(index) = self.feasible.violation(&start) {
            return Err(Error::Infeasible { index });
        }
        self.start = Some(start);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.oracle.dim()
    }

    pub fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn start_point(&self) -> DecisionVector {
        self.start
            .clone()
            .unwrap_or_else(|| DecisionVector::from_vec_unchecked(self.feasible.center(self.dim())))
    }

    /// `f(x; xi) + h(x)`.
    pub fn objective_value(&self, x: &[f64], noise: &NoiseRealization) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.oracle.eval(x, noise)? + self.regularizer.value(x))
    }

    /// `f(x) + h(x)` using the oracle's exact mean, falling back to a
    /// noiseless evaluation when the oracle does not publish one.
    pub fn exact_objective_value(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        let f = match self.oracle.exact_value(x) {
            Some(v) => v,
            None => self.oracle.eval(x, &NoiseRealization::none())?,
        };
        Ok(f + self.regularizer.value(x))
    }

    pub fn exact_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        self.oracle.exact_gradient(x).ok_or(Error::MissingExactGradient)
    }
}
