//! Two-point zeroth-order gradient estimators.
//!
//! `g = 1/(m nu) sum_j (f(x + nu u_j; xi_j) - f(x; xi_j)) u_j`, with `u_j`
//! Rademacher (main method) or standard normal (baseline). Both points of a
//! pair share the realization `xi_j`.
//!
//! Directions and noise come from separate child streams of the caller's
//! [`RngStream`], so switching the direction scheme leaves the noise sequence
//! untouched. All randomness is drawn up front and the batch average uses
//! pairwise summation, so the result is a pure function of the stream.

use std::f64::consts::E;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::linalg::{norm_inf, pairwise_sum};
use crate::problem::{NoiseRealization, StochasticOracle};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Rademacher,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    pub scheme: Scheme,
    /// Smoothing radius `nu > 0`.
    pub nu: f64,
    /// Mini-batch size `m >= 1`.
    pub batch: usize,
}

impl EstimatorConfig {
    pub fn new(scheme: Scheme, nu: f64, batch: usize) -> Result<Self> {
        let cfg = Self { scheme, nu, batch };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(invalid("nu", format!("must be positive and finite, got {}", self.nu)));
        }
        if self.batch == 0 {
            return Err(invalid("batch", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    pub vector: Vec<f64>,
    /// Function evaluations consumed; `2 * batch_used`.
    pub oracle_calls: u64,
    pub nu_used: f64,
    pub batch_used: usize,
}

/// Fills `out` with i.i.d. +-1 entries.
pub fn fill_rademacher(rng: &mut dyn RngCore, out: &mut [f64]) {
    for chunk in out.chunks_mut(64) {
        let bits = rng.next_u64();
        for (k, v) in chunk.iter_mut().enumerate() {
            *v = if (bits >> k) & 1 == 1 { 1.0 } else { -1.0 };
        }
    }
}

fn fill_gaussian(rng: &mut dyn RngCore, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = StandardNormal.sample(rng);
    }
}

fn call(oracle: &dyn StochasticOracle, x: &[f64], noise: &NoiseRealization, calls: &mut u64) -> Result<f64> {
    let v = oracle.eval(x, noise).map_err(|e| Error::Oracle {
        calls: *calls,
        message: e.to_string(),
    })?;
    *calls += 1;
    if !v.is_finite() {
        return Err(Error::Oracle {
            calls: *calls,
            message: format!("non-finite oracle value {v}"),
        });
    }
    Ok(v)
}

/// Single two-point sample `(f(x + nu u; xi) - f(x; xi)) / nu * u`.
pub fn two_point_sample(
    oracle: &dyn StochasticOracle,
    x: &[f64],
    direction: &[f64],
    nu: f64,
    noise: &NoiseRealization,
) -> Result<Vec<f64>> {
    let mut calls = 0;
    let shifted: Vec<f64> = x.iter().zip(direction).map(|(a, u)| a + nu * u).collect();
    let diff = (call(oracle, &shifted, noise, &mut calls)? - call(oracle, x, noise, &mut calls)?) / nu;
    Ok(direction.iter().map(|u| diff * u).collect())
}

fn estimate_with(
    oracle: &dyn StochasticOracle,
    x: &[f64],
    cfg: &EstimatorConfig,
    rng: RngStream,
    fill: fn(&mut dyn RngCore, &mut [f64]),
) -> Result<GradientEstimate> {
    cfg.validate()?;
    let d = oracle.dim();
    if x.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x.len() });
    }
    if cfg.nu < 1e-8 * (1.0 + norm_inf(x)) {
        log::warn!(
            "smoothing radius {} is below 1e-8 (1 + |x|_inf); two-point differences may cancel catastrophically",
            cfg.nu
        );
    }
    let m = cfg.batch;

    let mut dir_rng = rng.child(0).generator();
    let mut noise_rng = rng.child(1).generator();
    let mut directions = vec![0.0; m * d];
    for u in directions.chunks_mut(d) {
        fill(&mut dir_rng, u);
    }
    let noises: Vec<NoiseRealization> = (0..m).map(|_| oracle.draw_noise(&mut noise_rng)).collect();

    let mut calls = 0u64;
    let mut diffs = Vec::with_capacity(m);
    let mut shifted = vec![0.0; d];
    for (u, xi) in directions.chunks(d).zip(&noises) {
        for ((s, a), ui) in shifted.iter_mut().zip(x).zip(u) {
            *s = a + cfg.nu * ui;
        }
        let f1 = call(oracle, &shifted, xi, &mut calls)?;
        let f0 = call(oracle, x, xi, &mut calls)?;
        diffs.push((f1 - f0) / cfg.nu);
    }

    let scale = 1.0 / m as f64;
    let mut column = vec![0.0; m];
    let vector = (0..d)
        .map(|i| {
            for (j, c) in column.iter_mut().enumerate() {
                *c = diffs[j] * directions[j * d + i];
            }
            pairwise_sum(&column) * scale
        })
        .collect();

    Ok(GradientEstimate {
        vector,
        oracle_calls: calls,
        nu_used: cfg.nu,
        batch_used: m,
    })
}

/// Mini-batch two-point estimate with Rademacher directions.
pub fn estimate_rademacher(
    oracle: &dyn StochasticOracle,
    x: &[f64],
    cfg: &EstimatorConfig,
    rng: RngStream,
) -> Result<GradientEstimate> {
    if cfg.scheme != Scheme::Rademacher {
        return Err(invalid("scheme", "estimate_rademacher needs Scheme::Rademacher"));
    }
    estimate_with(oracle, x, cfg, rng, fill_rademacher)
}

/// Mini-batch two-point estimate with standard-normal directions.
pub fn estimate_gaussian(
    oracle: &dyn StochasticOracle,
    x: &[f64],
    cfg: &EstimatorConfig,
    rng: RngStream,
) -> Result<GradientEstimate> {
    if cfg.scheme != Scheme::Gaussian {
        return Err(invalid("scheme", "estimate_gaussian needs Scheme::Gaussian"));
    }
    estimate_with(oracle, x, cfg, rng, fill_gaussian)
}

/// Dispatches on `cfg.scheme`.
pub fn estimate(
    oracle: &dyn StochasticOracle,
    x: &[f64],
    cfg: &EstimatorConfig,
    rng: RngStream,
) -> Result<GradientEstimate> {
    match cfg.scheme {
        Scheme::Rademacher => estimate_rademacher(oracle, x, cfg, rng),
        Scheme::Gaussian => estimate_gaussian(oracle, x, cfg, rng),
    }
}

/// `e (2 ln d - 1)`: the l-infinity variance inflation of mini-batch averaging.
pub fn linf_variance_factor(d: usize) -> f64 {
    E * (2.0 * (d as f64).ln() - 1.0)
}

/// Batch size and smoothing radius for a `T`-iteration budget:
/// `m = ceil(2 T e (2 ln d - 1))`, `nu = 1 / (d sqrt(T))`.
pub fn theorem1_params(d: usize, iterations: usize) -> Result<(usize, f64)> {
    if d < 3 {
        return Err(invalid("d", format!("must be at least 3, got {d}")));
    }
    if iterations == 0 {
        return Err(invalid("T", "must be at least 1"));
    }
    let t = iterations as f64;
    let m = (2.0 * t * linf_variance_factor(d)).ceil() as usize;
    Ok((m, 1.0 / (d as f64 * t.sqrt())))
}

/// Smoothing radius for a fixed batch `m` on the mirror methods:
/// `nu = m^{-1/2} (2 e (2 ln d - 1))^{1/2} / d`.
pub fn fixed_batch_nu(d: usize, batch: usize) -> Result<f64> {
    if d < 3 {
        return Err(invalid("d", format!("must be at least 3, got {d}")));
    }
    if batch == 0 {
        return Err(invalid("batch", "must be at least 1"));
    }
    Ok((2.0 * linf_variance_factor(d) / batch as f64).sqrt() / d as f64)
}

/// Smoothing radius for the Euclidean baseline: `nu = (m d)^{-1/2}`.
pub fn psgd_nu(d: usize, batch: usize) -> Result<f64> {
    if d == 0 || batch == 0 {
        return Err(invalid("d, batch", "must be at least 1"));
    }
    Ok(1.0 / ((batch * d) as f64).sqrt())
}

/// Monte-Carlo estimate of `E ||(1/m) sum X_i - mu||_inf^2` for `X_i` with
/// i.i.d. Rademacher coordinates (`mu = 0`, `||X_i - mu||_inf^2 = 1`),
/// returned with the bound `e (2 ln d - 1) / m`.
pub fn minibatch_variance_probe(d: usize, m: usize, trials: usize, rng: RngStream) -> Result<(f64, f64)> {
    if d < 3 {
        return Err(invalid("d", format!("must be at least 3, got {d}")));
    }
    if m == 0 || trials == 0 {
        return Err(invalid("m, trials", "must be at least 1"));
    }
    let mut gen = rng.generator();
    let mut acc = Vec::with_capacity(trials);
    for _ in 0..trials {
        let mut worst = 0.0f64;
        for _ in 0..d {
            // sum of m signs = 2 * (#plus) - m
            let mut plus = 0u32;
            let mut left = m;
            while left > 0 {
                let take = left.min(64);
                let bits: u64 = gen.random();
                let mask = if take == 64 { u64::MAX } else { (1u64 << take) - 1 };
                plus += (bits & mask).count_ones();
                left -= take;
            }
            let mean = (2.0 * plus as f64 - m as f64) / m as f64;
            worst = worst.max(mean * mean);
        }
        acc.push(worst);
    }
    Ok((pairwise_sum(&acc) / trials as f64, linf_variance_factor(d) / m as f64))
}
