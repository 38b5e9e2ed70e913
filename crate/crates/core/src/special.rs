//! Exponential integral `E1`.

use crate::error::{domain, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_6;

/// `E1(u) = ∫_u^∞ e^{-x}/x dx` for `u > 0`.
///
/// Power series below 1, continued fraction (modified Lentz) above.
pub fn exp_integral_e1(u: f64) -> Result<f64> {
    if !(u > 0.0) {
        return Err(domain(format!("E1 is defined for u > 0, got {u}")));
    }
    Ok(e1_unchecked(u))
}

pub(crate) fn e1_unchecked(u: f64) -> f64 {
    if u.is_infinite() {
        return 0.0;
    }
    if u <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -u / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        -EULER_GAMMA - u.ln() - sum
    } else {
        (-u).exp() * e1_scaled_cf(u)
    }
}

/// `e^u E1(u)` for `u > 1` by continued fraction.
fn e1_scaled_cf(u: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = u + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}
