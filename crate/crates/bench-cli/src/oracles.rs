//! Reference computations written independently of the library's solvers,
//! used by the `verify` checks.

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
    let mid = 0.5 * (lo + hi);
    [lo, mid, hi]
        .into_iter()
        .min_by(|a, b| f(*a).total_cmp(&f(*b)))
        .expect("three candidates")
}

/// `(|v| + 1/d) ln(d|v| + 1) - |v|`.
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

/// Separable potential and its Bregman divergence `B(y; x)`, summed naively.
pub fn bregman(y: &[f64], x: &[f64]) -> f64 {
    let d = x.len();
    x.iter()
        .zip(y)
        .map(|(&a, &b)| psi(b, d) - psi(a, d) - psi_prime(a, d) * (b - a))
        .sum()
}

/// One-dimensional prox objective in the entropy geometry.
#[allow(clippy::too_many_arguments)]
pub fn entropy_objective(v: f64, anchor: f64, g: f64, eta: f64, l1: f64, l2: f64, d: usize) -> f64 {
    g * v + l1 * v.abs() + 0.5 * l2 * v * v + eta * (psi(v, d) - psi(anchor, d) - psi_prime(anchor, d) * (v - anchor))
}

/// One-dimensional prox objective of the Euclidean baseline.
pub fn euclidean_objective(v: f64, anchor: f64, g: f64, eta: f64, l1: f64, l2: f64) -> f64 {
    g * v + l1 * v.abs() + 0.5 * l2 * v * v + eta * (v - anchor).powi(2)
}

/// Minimizer of a convex 1-D function on `[lo, hi]` by bisection on the
/// signs of its one-sided derivatives.
pub fn bisect_minimizer(left_deriv: impl Fn(f64) -> f64, right_deriv: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    if right_deriv(lo) >= 0.0 {
        return lo;
    }
    if left_deriv(hi) <= 0.0 {
        return hi;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        if right_deriv(mid) < 0.0 {
            lo = mid;
        } else if left_deriv(mid) > 0.0 {
            hi = mid;
        } else {
            return mid;
        }
    }
}

/// One-sided derivatives of a smooth part plus `l1 |v|`.
fn with_l1(smooth: impl Fn(f64) -> f64 + Copy, l1: f64) -> (impl Fn(f64) -> f64, impl Fn(f64) -> f64) {
    let left = move |v: f64| smooth(v) + if v > 0.0 { l1 } else { -l1 };
    let right = move |v: f64| smooth(v) + if v >= 0.0 { l1 } else { -l1 };
    (left, right)
}

pub fn entropy_derivs(anchor: f64, g: f64, eta: f64, l1: f64, l2: f64, d: usize) -> (impl Fn(f64) -> f64, impl Fn(f64) -> f64) {
    with_l1(move |v: f64| g + l2 * v + eta * (psi_prime(v, d) - psi_prime(anchor, d)), l1)
}

pub fn euclidean_derivs(anchor: f64, g: f64, eta: f64, l1: f64, l2: f64) -> (impl Fn(f64) -> f64, impl Fn(f64) -> f64) {
    with_l1(move |v: f64| g + l2 * v + 2.0 * eta * (v - anchor), l1)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
