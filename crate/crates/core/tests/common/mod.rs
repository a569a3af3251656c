#![allow(dead_code)]

/// Golden-section minimization of a unimodal function on `[lo, hi]`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..400 {
        if hi - lo <= tol {
            break;
        }
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    // endpoints matter when the minimizer sits on the boundary
    let mid = 0.5 * (lo + hi);
    [lo, mid, hi]
        .into_iter()
        .min_by(|a, b| f(*a).partial_cmp(&f(*b)).unwrap())
        .unwrap()
}

/// `psi(v) = (|v| + 1/d) ln(d|v| + 1) - |v|`, written out independently.
pub fn psi(v: f64, d: usize) -> f64 {
    let a = v.abs();
    (a + 1.0 / d as f64) * (d as f64 * a + 1.0).ln() - a
}

pub fn psi_prime(v: f64, d: usize) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v.signum() * (d as f64 * v.abs() + 1.0).ln()
    }
}

/// One-dimensional prox objective in the entropy geometry.
pub fn entropy_objective(v: f64, anchor: f64, g: f64, eta: f64, l1: f64, l2: f64, d: usize) -> f64 {
    g * v + l1 * v.abs() + 0.5 * l2 * v * v + eta * (psi(v, d) - psi(anchor, d) - psi_prime(anchor, d) * (v - anchor))
}

/// One-dimensional prox objective of the Euclidean baseline (no 1/2 factor).
pub fn euclidean_objective(v: f64, anchor: f64, g: f64, eta: f64, l1: f64, l2: f64) -> f64 {
    g * v + l1 * v.abs() + 0.5 * l2 * v * v + eta * (v - anchor).powi(2)
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Minimizer on `[lo, hi]` of a 1-D convex function given by its one-sided
/// derivatives, found by bisection to full precision.
pub fn bisect_minimizer(left_deriv: impl Fn(f64) -> f64, right_deriv: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    if right_deriv(lo) >= 0.0 {
        return lo;
    }
    if left_deriv(hi) <= 0.0 {
        return hi;
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if right_deriv(mid) < 0.0 {
            lo = mid;
        } else if left_deriv(mid) > 0.0 {
            hi = mid;
        } else {
            return mid;
        }
    }
    0.5 * (lo + hi)
}

/// One-sided derivatives of the entropy prox objective.
pub fn entropy_derivs(anchor: f64, g: f64, eta: f64, l1: f64, l2: f64, d: usize) -> (impl Fn(f64) -> f64, impl Fn(f64) -> f64) {
    let smooth = move |v: f64| g + l2 * v + eta * (psi_prime(v, d) - psi_prime(anchor, d));
    let left = move |v: f64| smooth(v) + if v > 0.0 { l1 } else { -l1 };
    let right = move |v: f64| smooth(v) + if v >= 0.0 { l1 } else { -l1 };
    (left, right)
}
