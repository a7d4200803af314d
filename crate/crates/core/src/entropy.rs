//! Scalar entropy algebra on the binary alphabet.
//!
//! Everything here is in nats. `f2(x, y) = h(h⁻¹(x) ⋆ h⁻¹(y))` is the
//! minimum entropy of a sum of two independent bits with entropies `x`, `y`.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{domain, EpiError, Result};

/// Slack allowed when an entropy argument lands just outside its interval
/// through rounding. Such inputs are clamped, anything further out is an error.
pub const ENTROPY_SLACK: f64 = 1e-12;

/// Inputs this close to 0 or 1 are clamped onto the endpoint.
pub const PROB_CLAMP: f64 = 1e-15;

/// Distance from the square's edge at which `df2_dx` switches to its
/// analytic limits.
pub const DERIVATIVE_EDGE: f64 = 1e-12;

/// A Bernoulli parameter folded onto the half interval `[0, 1/2]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct BernoulliParam(f64);

impl BernoulliParam {
    pub fn new(p: f64) -> Result<Self> {
        if !(-PROB_CLAMP..=1.0 + PROB_CLAMP).contains(&p) {
            return domain(format!("probability {p} outside [0, 1]"));
        }
        let p = p.clamp(0.0, 1.0);
        Ok(Self(p.min(1.0 - p)))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// `x ln x` with the convention `0 ln 0 = 0`.
#[inline]
pub fn xlnx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

#[inline]
pub(crate) fn h_raw(p: f64) -> f64 {
    -xlnx(p) - xlnx(1.0 - p)
}

/// `ln((1 - t) / t)`, written through `atanh` so it stays accurate near 1/2.
#[inline]
pub(crate) fn logit_half(t: f64) -> f64 {
    2.0 * (1.0 - 2.0 * t).atanh()
}

/// Binary entropy `-p ln p - (1-p) ln(1-p)` in nats.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(-PROB_CLAMP..=1.0 + PROB_CLAMP).contains(&p) || p.is_nan() {
        return domain(format!("probability {p} outside [0, 1]"));
    }
    Ok(h_raw(p.clamp(0.0, 1.0)))
}

pub(crate) fn h_inv_raw(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= LN_2 {
        return 0.5;
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    // Bisect until the bracket cannot shrink any further in f64.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h_raw(mid) < x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (h_raw(lo) - x).abs() <= (h_raw(hi) - x).abs() {
        lo
    } else {
        hi
    }
}

/// Inverse of the binary entropy on `[0, 1/2]`, by bisection.
pub fn inverse_binary_entropy(x: f64) -> Result<BernoulliParam> {
    check_entropy(x, LN_2)?;
    Ok(BernoulliParam(h_inv_raw(x)))
}

/// Binary convolution `p(1-q) + q(1-p)`.
pub fn star(p: BernoulliParam, q: BernoulliParam) -> BernoulliParam {
    BernoulliParam(star_raw(p.0, q.0).min(0.5))
}

#[inline]
pub(crate) fn star_raw(p: f64, q: f64) -> f64 {
    p + q - 2.0 * p * q
}

/// Validates `x ∈ [0, max]` up to [`ENTROPY_SLACK`] and returns it clamped.
pub(crate) fn check_entropy(x: f64, max: f64) -> Result<f64> {
    if x.is_nan() || x < -ENTROPY_SLACK || x > max + ENTROPY_SLACK {
        return Err(EpiError::Domain(format!(
            "entropy {x} outside [0, {max}]"
        )));
    }
    Ok(x.clamp(0.0, max))
}

pub(crate) fn f2_raw(x: f64, y: f64) -> f64 {
    h_raw(star_raw(h_inv_raw(x), h_inv_raw(y)))
}

/// Minimum entropy of `X + Y` on Z₂ given `H(X) = x`, `H(Y) = y`.
pub fn f2(x: f64, y: f64) -> Result<f64> {
    let x = check_entropy(x, LN_2)?;
    let y = check_entropy(y, LN_2)?;
    Ok(f2_raw(x, y))
}

/// Partial derivative of `f2` in its first argument.
///
/// With `x = h(p)`, `y = h(q)` this is
/// `(1-2q) ln((1-p⋆q)/(p⋆q)) / ln((1-p)/p)`. Within [`DERIVATIVE_EDGE`] of
/// `x = 0` or `x = ln 2` the analytic limits are returned: `1` on the line
/// `y = 0`, otherwise `0` at `x = 0` and `(1-2q)²` at `x = ln 2`.
pub fn df2_dx(x: f64, y: f64) -> Result<f64> {
    let x = check_entropy(x, LN_2)?;
    let y = check_entropy(y, LN_2)?;
    Ok(df2_dx_raw(x, y))
}

pub(crate) fn df2_dx_raw(x: f64, y: f64) -> f64 {
    let q = h_inv_raw(y);
    if q == 0.0 {
        return 1.0;
    }
    if x <= DERIVATIVE_EDGE {
        return 0.0;
    }
    if x >= LN_2 - DERIVATIVE_EDGE {
        let s = 1.0 - 2.0 * q;
        return s * s;
    }
    let p = h_inv_raw(x);
    let one_minus_2k = (1.0 - 2.0 * p) * (1.0 - 2.0 * q);
    (1.0 - 2.0 * q) * 2.0 * one_minus_2k.atanh() / logit_half(p)
}

/// Gradient `(∂f2/∂x, ∂f2/∂y)`.
pub fn f2_gradient(x: f64, y: f64) -> Result<(f64, f64)> {
    Ok((df2_dx(x, y)?, df2_dx(y, x)?))
}
