//! Zeroth-order optimization of nonconvex composite objectives
//! `F(x) = f(x) + h(x)` over boxes, where `f` is only available through
//! (noisy) function values.
//!
//! The main method is exponentiated mirror descent with the entropy-like
//! potential of [`mirror`], mini-batch Rademacher two-point gradient
//! estimates ([`estimator`]) and an elastic-net prox solved in closed form
//! through the Lambert W function ([`prox`]). An adaptive-stepsize variant
//! and a Euclidean proximal-SGD baseline live in [`optimizer`].

mod dd;
pub mod error;
pub mod estimator;
pub mod explain;
pub mod linalg;
pub mod mirror;
pub mod optimizer;
pub mod problem;
pub mod problems;
pub mod prox;
pub mod rng;

pub use error::{Error, Result};
pub use problem::{CompositeProblem, DecisionVector, FeasibleSet, NoiseRealization, Regularizer, SmoothnessInfo, StochasticOracle};
pub use rng::RngStream;
