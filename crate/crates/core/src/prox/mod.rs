//! Generalized projection `P_K(x, g, eta) = argmin_{y in K} <g, y> + h(y) + eta B(y; x)`
//! for the entropy-like mirror geometry and the Euclidean baseline, with an
//! elastic-net `h` and box `K`.
//!
//! Every term is coordinate-separable and each one-dimensional objective is
//! convex, so the box-constrained minimizer is the unconstrained one clamped
//! to `[lower_i, upper_i]`.

mod lambert;

pub use lambert::{lambert_w0, lambert_w0_exp};

use crate::error::{invalid, Error, Result};
use crate::linalg::{norm1, norm2_sq};
use crate::mirror::{inverse_mirror_coord, mirror_coord};
use crate::problem::{DecisionVector, FeasibleSet, Regularizer};

/// Which Bregman divergence the prox step uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Geometry {
    /// `B_phi` of the entropy-like potential; stationarity in `l1`.
    EntropyMirror,
    /// `||y - x||_2^2` (no 1/2 factor); stationarity in `l2`.
    Euclidean,
}

impl Geometry {
    /// Squared norm used for stationarity in this geometry.
    pub fn norm_sq(self, v: &[f64]) -> f64 {
        match self {
            Geometry::EntropyMirror => norm1(v).powi(2),
            Geometry::Euclidean => norm2_sq(v),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ProxRequest<'a> {
    pub anchor: &'a [f64],
    pub gradient: &'a [f64],
    pub eta: f64,
    pub regularizer: Regularizer,
    pub feasible: &'a FeasibleSet,
    pub geometry: Geometry,
}

impl ProxRequest<'_> {
    fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(invalid("eta", format!("must be positive and finite, got {}", self.eta)));
        }
        if self.anchor.len() != self.gradient.len() {
            return Err(Error::DimensionMismatch {
                expected: self.anchor.len(),
                got: self.gradient.len(),
            });
        }
        if self.anchor.is_empty() {
            return Err(invalid("anchor", "dimension must be at least 1"));
        }
        self.feasible.check_dim(self.anchor.len())?;
        if self.gradient.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("gradient"));
        }
        if let Some(index) = self.feasible.violation(self.anchor) {
            return Err(Error::Infeasible { index });
        }
        Ok(())
    }
}

/// Magnitude of the entropy prox of one coordinate, given the dual magnitude
/// `r = |theta| = ln(d|y| + 1)` of the intermediate point.
///
/// Zero when `r <= l1 / eta`; otherwise the root of
/// `r = ln(d|x| + 1) + l1/eta + (l2/eta)|x|`, in closed form through `W0`.
fn entropy_shrink(r: f64, l1: f64, l2: f64, eta: f64, d: usize, index: usize) -> Result<f64> {
    let threshold = l1 / eta;
    if r <= threshold {
        return Ok(0.0);
    }
    if l2 == 0.0 {
        return inverse_mirror_coord(r - threshold, d, index);
    }
    let a = 1.0 / d as f64;
    let b = l2 / eta;
    let c = threshold - r;
    let log_z = (a * b).ln() + a * b - c;
    let w = if log_z < 700.0 {
        lambert_w0(log_z.exp())?
    } else {
        lambert_w0_exp(log_z)?
    };
    Ok((w / b - a).max(0.0))
}

/// Elastic-net prox in the entropy geometry around the intermediate point
/// `y = grad phi*(grad phi(x_t) - g/eta)`, with `K = R^d`:
/// `argmin_x l1 |x|_1 + (l2/2)|x|_2^2 + eta B_phi(x; y)`.
pub fn entropy_prox_unconstrained(y: &[f64], l1: f64, l2: f64, eta: f64, d: usize) -> Result<DecisionVector> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(invalid("eta", format!("must be positive and finite, got {eta}")));
    }
    if y.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: y.len() });
    }
    Regularizer::elastic_net(l1, l2)?;
    let out = y
        .iter()
        .enumerate()
        .map(|(i, &yi)| {
            if !yi.is_finite() {
                return Err(Error::NonFinite("intermediate point"));
            }
            let r = mirror_coord(yi, d).abs();
            Ok(yi.signum() * entropy_shrink(r, l1, l2, eta, d, i)?)
        })
        .collect::<Result<Vec<_>>>()?;
    DecisionVector::new(out)
}

fn entropy_coord(x: f64, g: f64, req: &ProxRequest<'_>, d: usize, index: usize) -> Result<f64> {
    if g == 0.0 && req.regularizer.l1() == 0.0 && req.regularizer.l2() == 0.0 {
        // exact fixed point; the round trip through the dual would cost an ulp
        return Ok(x);
    }
    let theta = mirror_coord(x, d) - g / req.eta;
    let mag = entropy_shrink(
        theta.abs(),
        req.regularizer.l1(),
        req.regularizer.l2(),
        req.eta,
        d,
        index,
    )?;
    Ok(theta.signum() * mag)
}

fn euclidean_coord(x: f64, g: f64, req: &ProxRequest<'_>) -> f64 {
    // minimize g v + l1 |v| + (l2/2) v^2 + eta (v - x)^2
    let v = 2.0 * req.eta * x - g;
    let shrunk = (v.abs() - req.regularizer.l1()).max(0.0);
    v.signum() * shrunk / (2.0 * req.eta + req.regularizer.l2())
}

/// `P_K(anchor, gradient, eta)` in the requested geometry.
pub fn generalized_projection(req: &ProxRequest<'_>) -> Result<DecisionVector> {
    req.validate()?;
    let d = req.anchor.len();
    let mut out = Vec::with_capacity(d);
    for (i, (&x, &g)) in req.anchor.iter().zip(req.gradient).enumerate() {
        let v = match req.geometry {
            Geometry::EntropyMirror => entropy_coord(x, g, req, d, i)?,
            Geometry::Euclidean => euclidean_coord(x, g, req),
        };
        out.push(req.feasible.clamp_coord(i, v));
    }
    DecisionVector::new(out)
}

/// `G_K(x, g, eta) = eta (x - P_K(x, g, eta))`.
pub fn gradient_map(req: &ProxRequest<'_>) -> Result<Vec<f64>> {
    let p = generalized_projection(req)?;
    Ok(req
        .anchor
        .iter()
        .zip(p.iter())
        .map(|(x, p)| req.eta * (x - p))
        .collect())
}
