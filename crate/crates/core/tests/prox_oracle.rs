mod common;

use common::{entropy_objective, euclidean_objective, golden_section};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zomirror_core::prox::{
    entropy_prox_unconstrained, generalized_projection, gradient_map, lambert_w0, Geometry, ProxRequest,
};
use zomirror_core::{FeasibleSet, Regularizer};

struct Case {
    anchor: Vec<f64>,
    g: Vec<f64>,
    eta: f64,
    l1: f64,
    l2: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

fn random_case(rng: &mut ChaCha8Rng, d: usize) -> Case {
    let mut lower = Vec::with_capacity(d);
    let mut upper = Vec::with_capacity(d);
    let mut anchor = Vec::with_capacity(d);
    for _ in 0..d {
        let a = rng.random_range(-3.0..3.0);
        let (lo, hi) = if rng.random_bool(0.3) {
            (a - rng.random_range(0.0..0.5), a + rng.random_range(0.0..0.5))
        } else {
            (-20.0, 20.0)
        };
        anchor.push(a);
        lower.push(lo);
        upper.push(hi);
    }
    Case {
        anchor,
        g: (0..d).map(|_| rng.random_range(-3.0..3.0)).collect(),
        eta: 10f64.powf(rng.random_range(-0.5..1.0)),
        l1: if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.0..1.0) },
        l2: if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..1.0) },
        lower,
        upper,
    }
}

#[test]
fn entropy_prox_matches_golden_section() {
    let d = 6;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let c = random_case(&mut rng, d);
        let k = FeasibleSet::boxed(c.lower.clone(), c.upper.clone()).unwrap();
        let p = generalized_projection(&ProxRequest {
            anchor: &c.anchor,
            gradient: &c.g,
            eta: c.eta,
            regularizer: Regularizer::elastic_net(c.l1, c.l2).unwrap(),
            feasible: &k,
            geometry: Geometry::EntropyMirror,
        })
        .unwrap();
        for i in 0..d {
            let v = golden_section(
                |v| entropy_objective(v, c.anchor[i], c.g[i], c.eta, c.l1, c.l2, d),
                c.lower[i],
                c.upper[i],
                1e-12,
            );
            worst = worst.max((v - p[i]).abs());
        }
    }
    assert!(worst <= 1e-6, "worst l-inf error {worst:e}");
}

#[test]
fn euclidean_prox_matches_golden_section() {
    let d = 6;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..2_000 {
        let c = random_case(&mut rng, d);
        let k = FeasibleSet::boxed(c.lower.clone(), c.upper.clone()).unwrap();
        let p = generalized_projection(&ProxRequest {
            anchor: &c.anchor,
            gradient: &c.g,
            eta: c.eta,
            regularizer: Regularizer::elastic_net(c.l1, c.l2).unwrap(),
            feasible: &k,
            geometry: Geometry::Euclidean,
        })
        .unwrap();
        for i in 0..d {
            let v = golden_section(
                |v| euclidean_objective(v, c.anchor[i], c.g[i], c.eta, c.l1, c.l2),
                c.lower[i],
                c.upper[i],
                1e-12,
            );
            assert!((v - p[i]).abs() <= 1e-6, "{v} vs {}", p[i]);
        }
    }
}

#[test]
fn unconstrained_lambert_fixture_against_golden_section() {
    let (l1, l2, eta, d, y) = (0.1, 0.5, 1.0, 10usize, 2.0);
    // minimize l1|x| + l2/2 x^2 + eta B(x; y)
    let v = golden_section(|v| entropy_objective(v, y, 0.0, eta, l1, l2, d), 0.0, y, 1e-12);
    let mut point = vec![0.0; d];
    point[0] = y;
    let x = entropy_prox_unconstrained(&point, l1, l2, eta, d).unwrap();
    assert!((x[0] - v).abs() < 1e-7, "{} vs {v}", x[0]);
    assert!((x[0] - 1.033_411_126_392_676_2).abs() < 1e-12);
}

#[test]
fn lambert_residual_on_200_point_grid() {
    for k in 0..200 {
        let z = 10f64.powf(-12.0 + 24.0 * k as f64 / 199.0);
        let w = lambert_w0(z).unwrap();
        assert!((w * w.exp() - z).abs() <= 1e-10 * z.max(1.0), "z = {z:e}");
    }
}

fn gradient_map_pair(c: &Case, g2: &[f64], k: &FeasibleSet, geometry: Geometry) -> [(Vec<f64>, Vec<f64>); 2] {
    let run = |g: &[f64]| {
        let req = ProxRequest {
            anchor: &c.anchor,
            gradient: g,
            eta: c.eta,
            regularizer: Regularizer::elastic_net(c.l1, c.l2).unwrap(),
            feasible: k,
            geometry,
        };
        (gradient_map(&req).unwrap(), generalized_projection(&req).unwrap().into_inner())
    };
    [run(&c.g), run(g2)]
}

#[test]
fn euclidean_gradient_map_is_nonexpansive() {
    let d = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..2_000 {
        let c = random_case(&mut rng, d);
        let g2: Vec<f64> = c.g.iter().map(|v| v + rng.random_range(-1.0..1.0)).collect();
        let k = FeasibleSet::boxed(c.lower.clone(), c.upper.clone()).unwrap();
        let [(a, _), (b, _)] = gradient_map_pair(&c, &g2, &k, Geometry::Euclidean);
        let lhs: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let rhs: f64 = c.g.iter().zip(&g2).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        assert!(lhs <= rhs + 1e-9, "{lhs} > {rhs}");
    }
}

/// The potential is 1/(D+1)-strongly convex on the l1 ball of radius D, so
/// the gradient map rescaled by 1/(D+1) is 1-Lipschitz from l-inf to l1.
#[test]
fn entropy_gradient_map_is_nonexpansive_after_radius_rescaling() {
    let d = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut tightest = 0.0f64;
    for _ in 0..4_000 {
        let mut c = random_case(&mut rng, d);
        if rng.random_bool(0.5) {
            let r = 1.0 / d as f64;
            c.anchor = (0..d).map(|_| rng.random_range(-r..r)).collect();
            c.lower = vec![-r; d];
            c.upper = vec![r; d];
        }
        let g2: Vec<f64> = c.g.iter().map(|v| v + rng.random_range(-0.1..0.1)).collect();
        let k = FeasibleSet::boxed(c.lower.clone(), c.upper.clone()).unwrap();
        let [(a, pa), (b, pb)] = gradient_map_pair(&c, &g2, &k, Geometry::EntropyMirror);
        let radius = pa.iter().map(|v| v.abs()).sum::<f64>().max(pb.iter().map(|v| v.abs()).sum());
        let lhs: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() / (radius + 1.0);
        let rhs = c.g.iter().zip(&g2).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12, "{lhs} > {rhs}");
        if rhs > 0.0 {
            tightest = tightest.max(lhs / rhs);
        }
    }
    assert!(tightest > 0.2, "bound never approached: {tightest}");
}
