mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zomirror_core::linalg::norm1;
use zomirror_core::mirror::{bregman, inverse_mirror_map, mirror_map, MirrorPoint};
use zomirror_core::DecisionVector;

fn random_magnitude(rng: &mut ChaCha8Rng) -> f64 {
    // log-uniform magnitudes cover both tiny and 1e6-sized entries
    let sign = if rng.random_bool(0.5) { -1.0 } else { 1.0 };
    match rng.random_range(0..4) {
        0 => 0.0,
        1 => sign * rng.random_range(0.0..1e6),
        _ => sign * 10f64.powf(rng.random_range(-12.0..6.0)),
    }
}

#[test]
fn primal_round_trip_to_1e_minus_10() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for d in [1usize, 10, 1000] {
        let mut worst = 0.0f64;
        for _ in 0..1_000 {
            let x: Vec<f64> = (0..d).map(|_| random_magnitude(&mut rng)).collect();
            let back = inverse_mirror_map(&mirror_map(&DecisionVector::new(x.clone()).unwrap())).unwrap();
            for (a, b) in back.iter().zip(&x) {
                worst = worst.max((a - b).abs());
            }
        }
        assert!(worst <= 1e-10, "d = {d}: {worst:e}");
    }
}

#[test]
fn dual_round_trip_on_bounded_duals() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for d in [1usize, 10, 1000] {
        // duals of points with |x_i| <= 1e6
        let cap = (d as f64 * 1e6 + 1.0).ln();
        for _ in 0..200 {
            let theta: Vec<f64> = (0..d).map(|_| rng.random_range(-cap..cap)).collect();
            let x = inverse_mirror_map(&MirrorPoint::from_coords(theta.clone()).unwrap()).unwrap();
            let again = mirror_map(&x).coords();
            for (a, b) in again.iter().zip(&theta) {
                assert!((a - b).abs() <= 1e-10, "d = {d}: {a} vs {b}");
            }
        }
    }
}

fn pair(rng: &mut ChaCha8Rng, d: usize) -> (Vec<f64>, Vec<f64>) {
    let scale = 10f64.powf(rng.random_range(-3.0..3.0));
    let x = (0..d).map(|_| rng.random_range(-scale..scale)).collect();
    let y = (0..d).map(|_| rng.random_range(-scale..scale)).collect();
    (x, y)
}

/// Second-order expansion gives B >= |y - x|_1^2 / (2 (max(|x|_1, |y|_1) + 1)).
#[test]
fn bregman_dominates_half_scaled_l1_square() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for d in [2usize, 10, 100] {
        for _ in 0..100_000 / 3 {
            let (x, y) = pair(&mut rng, d);
            let b = bregman(&y, &x).unwrap();
            let diff: f64 = x.iter().zip(&y).map(|(a, c)| (a - c).abs()).sum();
            let bound = diff * diff / (2.0 * (norm1(&x).max(norm1(&y)) + 1.0));
            assert!(b >= bound * (1.0 - 1e-9), "d = {d}: {b} < {bound}");
        }
    }
}

#[test]
fn half_constant_is_sharp_near_origin() {
    // x = 0, y = (e, e): B = 2e^2 + O(e^3) while |y|_1^2 = 4e^2
    let e = 1e-4;
    let b = bregman(&[e, e], &[0.0, 0.0]).unwrap();
    let ratio = b / ((2.0 * e) * (2.0 * e) / (2.0 * e + 1.0));
    assert!((ratio - 0.5).abs() < 1e-3, "{ratio}");
}

#[test]
fn bregman_vanishes_only_on_the_diagonal() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..10_000 {
        let (x, y) = pair(&mut rng, 5);
        assert_eq!(bregman(&x, &x).unwrap(), 0.0);
        assert!(bregman(&x, &y).unwrap() > 0.0);
    }
}
