//! Entropy-like potential
//! `phi(x) = sum_i (|x_i| + 1/d) ln(d |x_i| + 1) - |x_i|`,
//! its gradient (the mirror map), the inverse mirror map and the Bregman
//! divergence.
//!
//! The potential depends on the dimension `d` explicitly, so every function
//! takes it from the input length.
//!
//! `MirrorPoint` keeps dual coordinates in double-double precision. Near
//! `|x_i| = 1e6` one ulp of an `f64` dual coordinate spans ~20 primal ulps,
//! so plain `f64` duals cannot round-trip to better than ~1e-9 there.

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::problem::DecisionVector;

/// Magnitudes below this are treated as exact zeros.
pub const ZERO_FLOOR: f64 = 1e-300;

#[inline]
fn sgn(v: f64) -> f64 {
    if v.abs() < ZERO_FLOOR {
        0.0
    } else {
        v.signum()
    }
}

/// `(1 + u) ln(1 + u) - u` for `u >= 0`, with a series branch near zero.
#[inline]
fn entropy_kernel(u: f64) -> f64 {
    if u < 1e-2 {
        // sum_{k>=2} (-1)^k u^k / (k (k - 1))
        let mut acc = 0.0;
        let mut pow = u * u;
        for k in 2..=12 {
            let kf = k as f64;
            let term = pow / (kf * (kf - 1.0));
            acc += if k % 2 == 0 { term } else { -term };
            pow *= u;
        }
        acc
    } else {
        (1.0 + u) * u.ln_1p() - u
    }
}

/// One coordinate of the potential: `(|x| + 1/d) ln(d|x| + 1) - |x|`.
#[inline]
pub fn potential_coord(x: f64, d: usize) -> f64 {
    let df = d as f64;
    entropy_kernel(df * x.abs()) / df
}

/// One coordinate of the mirror map: `ln(d|x| + 1) sgn(x)`.
#[inline]
pub fn mirror_coord(x: f64, d: usize) -> f64 {
    let s = sgn(x);
    if s == 0.0 {
        return 0.0;
    }
    s * (d as f64 * x.abs()).ln_1p()
}

/// Largest dual magnitude whose preimage is a finite `f64`: `ln(MAX * d)`.
pub fn dual_limit(d: usize) -> f64 {
    f64::MAX.ln() + (d as f64).ln()
}

/// One coordinate of the inverse mirror map: `(exp(|theta|) - 1) sgn(theta) / d`.
#[inline]
pub fn inverse_mirror_coord(theta: f64, d: usize, index: usize) -> Result<f64> {
    let s = sgn(theta);
    if s == 0.0 {
        return Ok(0.0);
    }
    let t = theta.abs();
    if !t.is_finite() || t > dual_limit(d) {
        return Err(Error::DualOverflow { index, value: t });
    }
    let df = d as f64;
    let mag = if t < 700.0 {
        t.exp_m1() / df
    } else {
        (t - df.ln()).exp()
    };
    if !mag.is_finite() {
        return Err(Error::DualOverflow { index, value: t });
    }
    Ok(s * mag)
}

/// Point in dual space, same length as the primal dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct MirrorPoint {
    coords: Vec<Dd>,
}

impl MirrorPoint {
    pub fn from_coords(theta: Vec<f64>) -> Result<Self> {
        if theta.is_empty() {
            return Err(crate::error::invalid("theta", "dimension must be at least 1"));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("dual point"));
        }
        Ok(Self {
            coords: theta.into_iter().map(Dd::from_f64).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Dual coordinates rounded to `f64`.
    pub fn coords(&self) -> Vec<f64> {
        self.coords.iter().map(|c| c.to_f64()).collect()
    }
}

/// `phi(x)`; nonnegative with `phi(0) = 0`.
pub fn potential(x: &[f64]) -> f64 {
    let d = x.len();
    x.iter().map(|&v| potential_coord(v, d)).sum()
}

/// `grad phi(x)_i = ln(d|x_i| + 1) sgn(x_i)`.
pub fn mirror_map(x: &DecisionVector) -> MirrorPoint {
    let d = x.dim() as f64;
    let coords = x
        .iter()
        .map(|&v| {
            if sgn(v) == 0.0 {
                return Dd::ZERO;
            }
            let t = Dd::product(d, v.abs()).ln_1p();
            if v < 0.0 {
                -t
            } else {
                t
            }
        })
        .collect();
    MirrorPoint { coords }
}

/// `grad phi*(theta)_i = (exp(|theta_i|) - 1) sgn(theta_i) / d`.
///
/// Fails with [`Error::DualOverflow`] when some `|theta_i| > ln(MAX * d)`,
/// which signals a diverged dual iterate.
pub fn inverse_mirror_map(theta: &MirrorPoint) -> Result<DecisionVector> {
    let d = theta.dim();
    let df = d as f64;
    let limit = dual_limit(d);
    let mut out = Vec::with_capacity(d);
    for (index, c) in theta.coords.iter().enumerate() {
        let s = sgn(c.hi);
        if s == 0.0 {
            out.push(0.0);
            continue;
        }
        let t = c.abs();
        if t.hi > limit {
            return Err(Error::DualOverflow { index, value: t.hi });
        }
        let mag = if t.hi < 700.0 {
            t.exp_m1().div_f64(df).to_f64()
        } else {
            (t.to_f64() - df.ln()).exp()
        };
        if !mag.is_finite() {
            return Err(Error::DualOverflow { index, value: t.hi });
        }
        out.push(s * mag);
    }
    Ok(DecisionVector::from_vec_unchecked(out))
}

/// `B_phi(x; y) = phi(x) - phi(y) - <grad phi(y), x - y>`, accumulated
/// coordinate by coordinate.
pub fn bregman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            got: x.len(),
        });
    }
    let d = x.len();
    Ok(x.iter()
        .zip(y)
        .map(|(&xi, &yi)| bregman_coord(xi, yi, d))
        .sum())
}

#[inline]
pub fn bregman_coord(x: f64, y: f64, d: usize) -> f64 {
    if x == y {
        return 0.0;
    }
    potential_coord(x, d) - potential_coord(y, d) - mirror_coord(y, d) * (x - y)
}
