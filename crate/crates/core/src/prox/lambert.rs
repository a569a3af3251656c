//! Principal branch `W0` of the Lambert W function on `[0, inf)`, by Halley
//! iteration.

use crate::error::{invalid, Result};

const MAX_ITER: usize = 50;

/// `w >= 0` with `w e^w = z`.
pub fn lambert_w0(z: f64) -> Result<f64> {
    if z.is_nan() || z < 0.0 {
        return Err(invalid("z", format!("lambert_w0 needs z >= 0, got {z}")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let mut w = if z < 1e-2 { z - z * z } else { z.ln_1p() };
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() < 1e-14 * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w)
}

/// `W0(exp(log_z))`, for arguments whose exponential would overflow.
///
/// Solves `w + ln w = log_z` by Newton's method, which is well conditioned for
/// large `log_z`.
pub fn lambert_w0_exp(log_z: f64) -> Result<f64> {
    if log_z.is_nan() {
        return Err(invalid("log_z", "NaN"));
    }
    if log_z < 1.0 {
        return lambert_w0(log_z.exp());
    }
    if log_z.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let mut w = log_z - log_z.ln();
    for _ in 0..MAX_ITER {
        let f = w + w.ln() - log_z;
        let step = f / (1.0 + 1.0 / w);
        w -= step;
        if step.abs() < 1e-15 * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w)
}
