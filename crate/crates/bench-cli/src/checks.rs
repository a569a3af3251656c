//! The `verify` suite: Monte-Carlo and enumeration checks of the library's
//! invariants, each reported with its empirical value and the bound it is
//! held to.

use std::fmt;

use rand::Rng;
use zomirror_core::estimator::{estimate, minibatch_variance_probe, two_point_sample, EstimatorConfig, Scheme};
use zomirror_core::linalg::norm1;
use zomirror_core::mirror::{inverse_mirror_map, mirror_map};
use zomirror_core::problems::{sparse_quadratic_oracle, KinkedQuadratic, LinearOracle};
use zomirror_core::prox::{generalized_projection, lambert_w0, Geometry, ProxRequest};
use zomirror_core::{DecisionVector, FeasibleSet, NoiseRealization, Regularizer, RngStream, StochasticOracle};

use crate::oracles::{
    bisect_minimizer, bregman, entropy_derivs, entropy_objective, euclidean_derivs, euclidean_objective, golden_section,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, clap::ValueEnum)]
pub enum Group {
    Mirror,
    Prox,
    Estimator,
    Lemma4,
    Lemma5,
    Lemma6,
}

impl Group {
    pub const ALL: [Group; 6] = [
        Group::Mirror,
        Group::Prox,
        Group::Estimator,
        Group::Lemma4,
        Group::Lemma5,
        Group::Lemma6,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Relation {
    AtMost,
    AtLeast,
    Between(f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub empirical: f64,
    pub bound: f64,
    pub relation: Relation,
}

impl Check {
    pub fn at_most(name: impl Into<String>, empirical: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            empirical,
            bound,
            relation: Relation::AtMost,
        }
    }

    pub fn at_least(name: impl Into<String>, empirical: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            empirical,
            bound,
            relation: Relation::AtLeast,
        }
    }

    pub fn between(name: impl Into<String>, empirical: f64, lo: f64, hi: f64) -> Self {
        Self {
            name: name.into(),
            empirical,
            bound: hi,
            relation: Relation::Between(lo, hi),
        }
    }

    pub fn passed(&self) -> bool {
        match self.relation {
            Relation::AtMost => self.empirical <= self.bound,
            Relation::AtLeast => self.empirical >= self.bound,
            Relation::Between(lo, hi) => (lo..=hi).contains(&self.empirical),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bound = match self.relation {
            Relation::AtMost => format!("<= {:.6e}", self.bound),
            Relation::AtLeast => format!(">= {:.6e}", self.bound),
            Relation::Between(lo, hi) => format!("in [{lo}, {hi}]"),
        };
        write!(
            f,
            "{:<48} empirical {:>13.6e}  bound {:<18} {}",
            self.name,
            self.empirical,
            bound,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

pub fn run_group(group: Group) -> Vec<Check> {
    match group {
        Group::Mirror => mirror_round_trip(),
        Group::Prox => {
            let mut v = prox_against_golden_section(10_000);
            v.push(lambert_residual());
            v
        }
        Group::Estimator => vec![rademacher_enumeration()],
        Group::Lemma4 => lemma4(100_000),
        Group::Lemma5 => lemma5(100_000),
        Group::Lemma6 => lemma6(100_000),
    }
}

fn signed_magnitude(rng: &mut impl Rng) -> f64 {
    let sign = if rng.random_bool(0.5) { -1.0 } else { 1.0 };
    match rng.random_range(0..4) {
        0 => 0.0,
        1 => sign * rng.random_range(0.0..1e6),
        _ => sign * 10f64.powf(rng.random_range(-12.0..6.0)),
    }
}

/// `max |grad phi*(grad phi(x)) - x|` over 1000 points with `|x_i| <= 1e6`.
pub fn mirror_round_trip() -> Vec<Check> {
    let mut rng = RngStream::new(0x4d49_5252, 0).generator();
    [1usize, 10, 1000]
        .into_iter()
        .map(|d| {
            let mut worst = 0.0f64;
            for _ in 0..1000 {
                let x: Vec<f64> = (0..d).map(|_| signed_magnitude(&mut rng)).collect();
                let back = DecisionVector::new(x.clone())
                    .map_err(|e| e.to_string())
                    .and_then(|v| inverse_mirror_map(&mirror_map(&v)).map_err(|e| e.to_string()));
                match back {
                    Ok(b) => {
                        for (p, q) in b.iter().zip(&x) {
                            worst = worst.max((p - q).abs());
                        }
                    }
                    Err(_) => worst = f64::INFINITY,
                }
            }
            Check::at_most(format!("mirror round trip d={d}"), worst, 1e-10)
        })
        .collect()
}

/// Library prox against per-coordinate golden-section search on random
/// boxes, gradients, stepsizes and elastic-net weights.
pub fn prox_against_golden_section(cases: usize) -> Vec<Check> {
    let d = 6;
    let mut rng = RngStream::new(0x5052_4f58, 0).generator();
    let mut worst = [0.0f64; 2];
    for _ in 0..cases {
        let mut anchor = vec![0.0; d];
        let mut lower = vec![0.0; d];
        let mut upper = vec![0.0; d];
        for i in 0..d {
            anchor[i] = rng.random_range(-3.0..3.0);
            if rng.random_bool(0.3) {
                lower[i] = anchor[i] - rng.random_range(0.0..0.5);
                upper[i] = anchor[i] + rng.random_range(0.0..0.5);
            } else {
                lower[i] = -20.0;
                upper[i] = 20.0;
            }
        }
        let g: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let eta = 10f64.powf(rng.random_range(-0.5..1.0));
        let l1 = if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.0..1.0) };
        let l2 = if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..1.0) };
        let k = FeasibleSet::boxed(lower.clone(), upper.clone()).expect("valid box");
        let regularizer = Regularizer::elastic_net(l1, l2).expect("valid weights");
        for (slot, geometry) in [Geometry::EntropyMirror, Geometry::Euclidean].into_iter().enumerate() {
            let p = generalized_projection(&ProxRequest {
                anchor: &anchor,
                gradient: &g,
                eta,
                regularizer,
                feasible: &k,
                geometry,
            });
            let Ok(p) = p else {
                worst[slot] = f64::INFINITY;
                continue;
            };
            for i in 0..d {
                // golden section locates the minimizer; its f64 resolution is
                // only about sqrt(eps) on flat objectives, so the derivative
                // signs finish the job inside a small window
                let window = |v: f64| ((v - 1e-3).max(lower[i]), (v + 1e-3).min(upper[i]));
                let v = match geometry {
                    Geometry::EntropyMirror => {
                        let v = golden_section(
                            |v| entropy_objective(v, anchor[i], g[i], eta, l1, l2, d),
                            lower[i],
                            upper[i],
                            1e-12,
                        );
                        let (left, right) = entropy_derivs(anchor[i], g[i], eta, l1, l2, d);
                        let (lo, hi) = window(v);
                        bisect_minimizer(left, right, lo, hi)
                    }
                    Geometry::Euclidean => {
                        let v = golden_section(
                            |v| euclidean_objective(v, anchor[i], g[i], eta, l1, l2),
                            lower[i],
                            upper[i],
                            1e-12,
                        );
                        let (left, right) = euclidean_derivs(anchor[i], g[i], eta, l1, l2);
                        let (lo, hi) = window(v);
                        bisect_minimizer(left, right, lo, hi)
                    }
                };
                worst[slot] = worst[slot].max((v - p[i]).abs());
            }
        }
    }
    vec![
        Check::at_most(format!("entropy prox vs 1-D search ({cases} cases)"), worst[0], 1e-6),
        Check::at_most(format!("euclidean prox vs 1-D search ({cases} cases)"), worst[1], 1e-6),
    ]
}

/// `max |W(z) e^W(z) - z| / max(1, z)` on 200 log-spaced points in
/// `[1e-12, 1e12]`.
pub fn lambert_residual() -> Check {
    let mut worst = 0.0f64;
    for k in 0..200 {
        let z = 10f64.powf(-12.0 + 24.0 * k as f64 / 199.0);
        let r = match lambert_w0(z) {
            Ok(w) => (w * w.exp() - z).abs() / z.max(1.0),
            Err(_) => f64::INFINITY,
        };
        worst = worst.max(r);
    }
    Check::at_most("lambert W residual (200-point grid)", worst, 1e-10)
}

/// Per-coordinate error of the Rademacher estimator averaged over all 2^8
/// sign vectors on a linear objective.
pub fn rademacher_enumeration() -> Check {
    let c = vec![0.7, -1.3, 2.0, 0.0, -0.25, 3.5, 1.0e-3, -4.0];
    let f = LinearOracle::new(c.clone());
    let x = [0.5, -0.5, 1.0, 2.0, -3.0, 0.1, 0.0, 1.5];
    let mean = enumerate_signs(&f, &x, 0.5);
    let err = mean.iter().zip(&c).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Check::at_most("rademacher enumeration, linear f, d=8", err, 1e-12)
}

fn enumerate_signs(oracle: &dyn StochasticOracle, x: &[f64], nu: f64) -> Vec<f64> {
    let d = x.len();
    let count = 1u64 << d;
    let mut acc = vec![0.0; d];
    for mask in 0..count {
        let u: Vec<f64> = (0..d).map(|k| if (mask >> k) & 1 == 1 { 1.0 } else { -1.0 }).collect();
        match two_point_sample(oracle, x, &u, nu, &NoiseRealization::none()) {
            Ok(g) => acc.iter_mut().zip(&g).for_each(|(a, v)| *a += v),
            Err(_) => return vec![f64::NAN; d],
        }
    }
    acc.iter().map(|a| a / count as f64).collect()
}

/// Single-sample l-inf variance against `3 nu^2 d^2 L^2 / 2 + 10 |grad f|^2
/// + 8 sigma^2`, plus the bias bound `nu d L / 2` and its linear scaling.
pub fn lemma4(trials: u64) -> Vec<Check> {
    let mut out = Vec::new();
    for d in [4usize, 16] {
        let q = sparse_quadratic_oracle(d, 2, 0.1, RngStream::new(41, d as u64)).expect("valid instance");
        let l = q.lipschitz_grad();
        let sigma = q.gradient_noise_std();
        let mut rng = RngStream::new(42, d as u64).generator();
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let grad = q.exact_gradient(&x).expect("quadratic has a gradient");
        let grad_sq: f64 = grad.iter().map(|g| g * g).sum();
        for nu in [1e-2, 1e-3] {
            let cfg = EstimatorConfig::new(Scheme::Rademacher, nu, 1).expect("valid config");
            let mut acc = 0.0;
            for t in 0..trials {
                let g = match estimate(&q, &x, &cfg, RngStream::new(43, d as u64).child(t)) {
                    Ok(e) => e.vector,
                    Err(_) => vec![f64::NAN; d],
                };
                acc += g.iter().zip(&grad).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max).powi(2);
            }
            let bound = 1.5 * (nu * d as f64 * l).powi(2) + 10.0 * grad_sq + 8.0 * sigma * sigma;
            out.push(Check::at_most(
                format!("single-sample l-inf variance d={d} nu={nu:e}"),
                acc / trials as f64,
                bound,
            ));
        }

        // the pure quadratic has zero bias under symmetric directions; the
        // kinked variant has bias exactly nu/4 per coordinate at the origin
        let base = sparse_quadratic_oracle(d, 2, 0.0, RngStream::new(44, d as u64)).expect("valid instance");
        let kinked = KinkedQuadratic { base };
        let lk = kinked.lipschitz_grad();
        let origin = vec![0.0; d];
        let exact = kinked.exact_gradient(&origin).expect("has a gradient");
        let bias = |nu: f64| {
            let mean = enumerate_signs(&kinked, &origin, nu);
            mean.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        };
        let (b2, b3) = (bias(1e-2), bias(1e-3));
        out.push(Check::at_most(format!("smoothing bias d={d} nu=1e-2"), b2, 1e-2 * d as f64 * lk / 2.0));
        out.push(Check::at_most(format!("smoothing bias d={d} nu=1e-3"), b3, 1e-3 * d as f64 * lk / 2.0));
        out.push(Check::between(format!("bias ratio nu=1e-2 / nu=1e-3, d={d}"), b2 / b3, 8.0, 12.0));
    }
    out
}

/// Mini-batch l-inf variance against `e (2 ln d - 1) / m` at `d = 16`.
pub fn lemma5(trials: usize) -> Vec<Check> {
    let mut out = Vec::new();
    for m in [1usize, 4, 16, 64] {
        let (emp, bound) = minibatch_variance_probe(16, m, trials, RngStream::new(51, m as u64)).expect("valid probe");
        out.push(Check::at_most(format!("mini-batch l-inf variance d=16 m={m}"), emp, bound));
    }
    let (v4, _) = minibatch_variance_probe(16, 4, trials, RngStream::new(52, 4)).expect("valid probe");
    let (v8, _) = minibatch_variance_probe(16, 8, trials, RngStream::new(52, 8)).expect("valid probe");
    out.push(Check::between("variance ratio m=4 / m=8, d=16", v4 / v8, 1.5, 2.5));
    out
}

/// Smallest `B(y; x) / (|y - x|_1^2 / (max(|x|_1, |y|_1) + 1))` over random
/// pairs; the inequality holds when this is at least 1.
pub fn lemma6(pairs: usize) -> Vec<Check> {
    let mut rng = RngStream::new(0x4c45_4d36, 0).generator();
    [2usize, 10, 100]
        .into_iter()
        .map(|d| {
            let mut worst = f64::INFINITY;
            for _ in 0..pairs {
                let scale = 10f64.powf(rng.random_range(-3.0..3.0));
                let x: Vec<f64> = (0..d).map(|_| rng.random_range(-scale..scale)).collect();
                let y: Vec<f64> = (0..d).map(|_| rng.random_range(-scale..scale)).collect();
                let diff: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
                if diff == 0.0 {
                    continue;
                }
                let rhs = diff * diff / (norm1(&x).max(norm1(&y)) + 1.0);
                worst = worst.min(bregman(&y, &x) / rhs);
            }
            Check::at_least(format!("bregman / l1 lower bound ({pairs} pairs) d={d}"), worst, 1.0)
        })
        .collect()
}
