//! Built-in black-box objectives: the planted sparse least-squares problem
//! used by the benchmarks, plus small closed-form oracles for checks.

use std::sync::Arc;

use rand::seq::index;
use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::linalg::{dot, norm2_sq};
use crate::problem::{CompositeProblem, NoiseRealization, SmoothnessInfo, StochasticOracle};
use crate::rng::RngStream;

const NNZ_PER_ROW: usize = 8;

/// Row-sparse matrix in compressed-row form.
#[derive(Debug, Clone)]
struct SparseRows {
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseRows {
    fn rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    fn row_dot(&self, r: usize, x: &[f64]) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .zip(&self.vals[span])
            .map(|(&c, v)| v * x[c])
            .sum()
    }

    fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows()).map(|r| self.row_dot(r, x)).collect()
    }

    fn matvec_t(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (r, yr) in y.iter().enumerate() {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                out[self.col_idx[k]] += self.vals[k] * yr;
            }
        }
        out
    }

    fn frobenius_sq(&self) -> f64 {
        norm2_sq(&self.vals)
    }

    /// Largest eigenvalue of `A^T A` by power iteration.
    fn spectral_norm_sq(&self) -> f64 {
        let d = self.cols;
        let mut v = vec![1.0 / (d as f64).sqrt(); d];
        let mut estimate = 0.0;
        for _ in 0..5000 {
            let w = self.matvec_t(&self.matvec(&v));
            let next = dot(&v, &w);
            let n = norm2_sq(&w).sqrt();
            if n == 0.0 {
                return 0.0;
            }
            v = w.into_iter().map(|x| x / n).collect();
            if (next - estimate).abs() <= 1e-14 * next.abs() {
                return next;
            }
            estimate = next;
        }
        estimate
    }
}

/// `f(x; xi) = 1/2 ||A x - b + eps_xi||^2` with `b = A x*` for a planted
/// sparse `x*`. `eps_xi` is a Gaussian residual shift drawn once per
/// realization, so both points of a two-point pair see the same shift.
#[derive(Debug, Clone)]
pub struct SparseQuadratic {
    a: SparseRows,
    b: Vec<f64>,
    planted: Vec<f64>,
    noise_std: f64,
}

impl SparseQuadratic {
    pub fn planted(&self) -> &[f64] {
        &self.planted
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_std
    }

    pub fn lipschitz_grad(&self) -> f64 {
        self.a.spectral_norm_sq()
    }

    /// `sqrt(E ||grad f(x; xi) - grad f(x)||_2^2) = noise_std * ||A||_F`.
    pub fn gradient_noise_std(&self) -> f64 {
        self.noise_std * self.a.frobenius_sq().sqrt()
    }

    fn residual(&self, x: &[f64], noise: &NoiseRealization) -> Vec<f64> {
        let mut r = self.a.matvec(x);
        for (i, ri) in r.iter_mut().enumerate() {
            *ri -= self.b[i];
            if let Some(e) = noise.0.get(i) {
                *ri += e;
            }
        }
        r
    }
}

impl StochasticOracle for SparseQuadratic {
    fn dim(&self) -> usize {
        self.a.cols
    }

    fn draw_noise(&self, rng: &mut dyn RngCore) -> NoiseRealization {
        if self.noise_std == 0.0 {
            return NoiseRealization::none();
        }
        NoiseRealization(
            (0..self.a.rows())
                .map(|_| {
                    let z: f64 = StandardNormal.sample(rng);
                    self.noise_std * z
                })
                .collect(),
        )
    }

    fn eval(&self, x: &[f64], noise: &NoiseRealization) -> Result<f64> {
        let n = self.a.rows();
        let mut acc = 0.0;
        for r in 0..n {
            let e = noise.0.get(r).copied().unwrap_or(0.0);
            let v = self.a.row_dot(r, x) - self.b[r] + e;
            acc += v * v;
        }
        Ok(0.5 * acc)
    }

    fn exact_value(&self, x: &[f64]) -> Option<f64> {
        let r = self.residual(x, &NoiseRealization::none());
        let rows = self.a.rows() as f64;
        Some(0.5 * norm2_sq(&r) + 0.5 * rows * self.noise_std * self.noise_std)
    }

    fn exact_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(self.a.matvec_t(&self.residual(x, &NoiseRealization::none())))
    }

    fn stochastic_gradient(&self, x: &[f64], noise: &NoiseRealization) -> Option<Vec<f64>> {
        Some(self.a.matvec_t(&self.residual(x, noise)))
    }
}

/// Builds the planted sparse least-squares oracle.
///
/// `A` is `d x d` with 8 (or `d`, if smaller) nonzeros per row drawn from
/// `N(0, 1/nnz)`; `x*` has `s` nonzeros with magnitudes in `[1, 2]` and random
/// signs.
pub fn sparse_quadratic_oracle(
    d: usize,
    s: usize,
    noise_std: f64,
    rng: RngStream,
) -> Result<SparseQuadratic> {
    if d < 3 {
        return Err(invalid("d", format!("dimension must be at least 3, got {d}")));
    }
    if s == 0 || s > d {
        return Err(invalid("s", format!("sparsity must be in 1..={d}, got {s}")));
    }
    if !(noise_std >= 0.0 && noise_std.is_finite()) {
        return Err(invalid("noise_std", format!("must be finite and >= 0, got {noise_std}")));
    }

    let nnz = NNZ_PER_ROW.min(d);
    let scale = 1.0 / (nnz as f64).sqrt();
    let mut gen = rng.child(0).generator();
    let mut row_ptr = Vec::with_capacity(d + 1);
    let mut col_idx = Vec::with_capacity(d * nnz);
    let mut vals = Vec::with_capacity(d * nnz);
    row_ptr.push(0);
    for _ in 0..d {
        let mut cols = index::sample(&mut gen, d, nnz).into_vec();
        cols.sort_unstable();
        for c in cols {
            col_idx.push(c);
            let z: f64 = StandardNormal.sample(&mut gen);
            vals.push(scale * z);
        }
        row_ptr.push(col_idx.len());
    }
    let a = SparseRows {
        cols: d,
        row_ptr,
        col_idx,
        vals,
    };

    let mut gen = rng.child(1).generator();
    let mut planted = vec![0.0; d];
    for c in index::sample(&mut gen, d, s) {
        let sign = if gen.random::<bool>() { 1.0 } else { -1.0 };
        planted[c] = sign * gen.random_range(1.0..=2.0);
    }
    let b = a.matvec(&planted);

    Ok(SparseQuadratic {
        a,
        b,
        planted,
        noise_std,
    })
}

/// Sparse quadratic wrapped as a composite problem with `h = 0` and `K = R^d`.
pub fn make_sparse_quadratic(
    d: usize,
    s: usize,
    noise_std: f64,
    rng: RngStream,
) -> Result<CompositeProblem> {
    let oracle = sparse_quadratic_oracle(d, s, noise_std, rng)?;
    let smoothness = SmoothnessInfo {
        lipschitz_grad: Some(oracle.lipschitz_grad()),
        sigma: Some(oracle.gradient_noise_std()),
        ..SmoothnessInfo::default()
    };
    Ok(CompositeProblem::new(format!("sparse-quadratic-d{d}-s{s}"), Arc::new(oracle))
        .with_smoothness(smoothness))
}

/// Sparse quadratic plus `1/2 sum max(x_i, 0)^2`. The hinge term keeps the
/// gradient Lipschitz (constant grows by 1) but breaks the symmetry that makes
/// two-point Rademacher estimates exactly unbiased on pure quadratics.
#[derive(Debug, Clone)]
pub struct KinkedQuadratic {
    pub base: SparseQuadratic,
}

impl KinkedQuadratic {
    pub fn lipschitz_grad(&self) -> f64 {
        self.base.lipschitz_grad() + 1.0
    }

    fn hinge(x: &[f64]) -> f64 {
        0.5 * x.iter().map(|v| v.max(0.0).powi(2)).sum::<f64>()
    }
}

impl StochasticOracle for KinkedQuadratic {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn draw_noise(&self, rng: &mut dyn RngCore) -> NoiseRealization {
        self.base.draw_noise(rng)
    }

    fn eval(&self, x: &[f64], noise: &NoiseRealization) -> Result<f64> {
        Ok(self.base.eval(x, noise)? + Self::hinge(x))
    }

    fn exact_value(&self, x: &[f64]) -> Option<f64> {
        Some(self.base.exact_value(x)? + Self::hinge(x))
    }

    fn exact_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let mut g = self.base.exact_gradient(x)?;
        g.iter_mut().zip(x).for_each(|(gi, xi)| *gi += xi.max(0.0));
        Some(g)
    }

    fn stochastic_gradient(&self, x: &[f64], noise: &NoiseRealization) -> Option<Vec<f64>> {
        let mut g = self.base.stochastic_gradient(x, noise)?;
        g.iter_mut().zip(x).for_each(|(gi, xi)| *gi += xi.max(0.0));
        Some(g)
    }
}

/// `f(x) = <c, x>`, noiseless.
#[derive(Debug, Clone)]
pub struct LinearOracle {
    pub c: Vec<f64>,
}

impl LinearOracle {
    pub fn new(c: Vec<f64>) -> Self {
        Self { c }
    }
}

impl StochasticOracle for LinearOracle {
    fn dim(&self) -> usize {
        self.c.len()
    }

    fn draw_noise(&self, _rng: &mut dyn RngCore) -> NoiseRealization {
        NoiseRealization::none()
    }

    fn eval(&self, x: &[f64], _noise: &NoiseRealization) -> Result<f64> {
        Ok(dot(&self.c, x))
    }

    fn exact_value(&self, x: &[f64]) -> Option<f64> {
        Some(dot(&self.c, x))
    }

    fn exact_gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        Some(self.c.clone())
    }
}

/// `f(x) = c`, noiseless.
#[derive(Debug, Clone)]
pub struct ConstantOracle {
    dim: usize,
    value: f64,
}

impl ConstantOracle {
    pub fn new(dim: usize, value: f64) -> Self {
        Self { dim, value }
    }
}

impl StochasticOracle for ConstantOracle {
    fn dim(&self) -> usize {
        self.dim
    }

    fn draw_noise(&self, _rng: &mut dyn RngCore) -> NoiseRealization {
        NoiseRealization::none()
    }

    fn eval(&self, _x: &[f64], _noise: &NoiseRealization) -> Result<f64> {
        Ok(self.value)
    }

    fn exact_value(&self, _x: &[f64]) -> Option<f64> {
        Some(self.value)
    }

    fn exact_gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        Some(vec![0.0; self.dim])
    }
}

/// `f(x) = 1/2 ||x||^2`, noiseless.
#[derive(Debug, Clone)]
pub struct HalfSquaredNorm {
    pub dim: usize,
}

impl StochasticOracle for HalfSquaredNorm {
    fn dim(&self) -> usize {
        self.dim
    }

    fn draw_noise(&self, _rng: &mut dyn RngCore) -> NoiseRealization {
        NoiseRealization::none()
    }

    fn eval(&self, x: &[f64], _noise: &NoiseRealization) -> Result<f64> {
        Ok(0.5 * norm2_sq(x))
    }

    fn exact_value(&self, x: &[f64]) -> Option<f64> {
        Some(0.5 * norm2_sq(x))
    }

    fn exact_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(x.to_vec())
    }
}

/// Oracle that fails after a fixed number of evaluations. Test helper for
/// error propagation.
#[derive(Debug)]
pub struct FailingOracle {
    pub dim: usize,
    pub fail_after: u64,
    calls: std::sync::atomic::AtomicU64,
}

impl FailingOracle {
    pub fn new(dim: usize, fail_after: u64) -> Self {
        Self {
            dim,
            fail_after,
            calls: Default::default(),
        }
    }
}

impl StochasticOracle for FailingOracle {
    fn dim(&self) -> usize {
        self.dim
    }

    fn draw_noise(&self, _rng: &mut dyn RngCore) -> NoiseRealization {
        NoiseRealization::none()
    }

    fn eval(&self, _x: &[f64], _noise: &NoiseRealization) -> Result<f64> {
        let n = self.calls.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
        if n >= self.fail_after {
            return Err(Error::Oracle {
                calls: n,
                message: "scripted failure".into(),
            });
        }
        Ok(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm_inf;

    fn fixture(noise: f64) -> SparseQuadratic {
        sparse_quadratic_oracle(16, 4, noise, RngStream::new(11, 0)).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        let r = RngStream::new(0, 0);
        assert!(sparse_quadratic_oracle(2, 1, 0.0, r).is_err());
        assert!(sparse_quadratic_oracle(5, 6, 0.0, r).is_err());
        assert!(sparse_quadratic_oracle(5, 0, 0.0, r).is_err());
        assert!(sparse_quadratic_oracle(5, 2, -1.0, r).is_err());
    }

    #[test]
    fn planted_point_is_a_zero_of_the_noiseless_objective() {
        let q = fixture(0.0);
        let mut rng = RngStream::new(3, 3).generator();
        for _ in 0..10 {
            let xi = q.draw_noise(&mut rng);
            assert_eq!(q.eval(q.planted(), &xi).unwrap(), 0.0);
        }
        assert_eq!(q.planted().iter().filter(|v| **v != 0.0).count(), 4);
    }

    #[test]
    fn exact_gradient_vanishes_at_planted_point() {
        for (d, s) in [(3, 1), (16, 4), (50, 5), (200, 10)] {
            let q = sparse_quadratic_oracle(d, s, 0.3, RngStream::new(d as u64, 1)).unwrap();
            let g = q.exact_gradient(q.planted()).unwrap();
            assert!(norm_inf(&g) < 1e-12, "d={d}: {}", norm_inf(&g));
        }
    }

    #[test]
    fn lipschitz_constant_bounds_curvature() {
        let q = fixture(0.0);
        let l = q.lipschitz_grad();
        let mut rng = RngStream::new(9, 9).generator();
        for _ in 0..100 {
            let v: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
            let av = q.a.matvec(&v);
            assert!(norm2_sq(&av) <= l * norm2_sq(&v) * (1.0 + 1e-9));
        }
    }

    #[test]
    fn oracle_is_deterministic_given_noise() {
        let q = fixture(0.5);
        let mut rng = RngStream::new(1, 2).generator();
        let xi = q.draw_noise(&mut rng);
        let x = vec![0.25; 16];
        assert_eq!(q.eval(&x, &xi).unwrap(), q.eval(&x, &xi).unwrap());
    }

    #[test]
    fn construction_is_reproducible() {
        let a = fixture(0.1);
        let b = fixture(0.1);
        assert_eq!(a.planted(), b.planted());
        assert_eq!(a.a.vals, b.a.vals);
        assert_eq!(a.lipschitz_grad(), b.lipschitz_grad());
    }

    #[test]
    fn stochastic_values_average_to_exact_value() {
        let q = fixture(0.2);
        let x = vec![0.1; 16];
        let mut rng = RngStream::new(4, 0).generator();
        let n = 20_000;
        let vals: Vec<f64> = (0..n)
            .map(|_| {
                let xi = q.draw_noise(&mut rng);
                q.eval(&x, &xi).unwrap()
            })
            .collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        let exact = q.exact_value(&x).unwrap();
        assert!((mean - exact).abs() < 4.0 * se, "{mean} vs {exact} (se {se})");
    }

    #[test]
    fn kinked_quadratic_adds_hinge() {
        let k = KinkedQuadratic { base: fixture(0.0) };
        let x = vec![1.0; 16];
        let base = k.base.exact_value(&x).unwrap();
        assert!((k.exact_value(&x).unwrap() - base - 8.0).abs() < 1e-12);
        assert_eq!(k.lipschitz_grad(), k.base.lipschitz_grad() + 1.0);
    }
}
