//! Closed-form minimum entropy of sums on groups of order `2^n`.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::entropy::{check_entropy, f2_raw};
use crate::error::{domain, EpiError, Result};
use crate::group::FiniteAbelianGroup;

/// Index `k` of the entropy box `[k ln 2, (k+1) ln 2]` holding `x`.
///
/// A point exactly on `k ln 2` belongs to box `k - 1`; the result is clamped
/// to `0..n`.
pub fn box_index(x: f64, n: usize) -> usize {
    let mut k = (x / LN_2).floor().max(0.0) as usize;
    if k > 0 && x <= k as f64 * LN_2 {
        k -= 1;
    }
    k.min(n.saturating_sub(1))
}

/// Position of `x` inside box `k`, clamped to `[0, ln 2]`.
pub fn local_coordinate(x: f64, k: usize) -> f64 {
    (x - k as f64 * LN_2).clamp(0.0, LN_2)
}

/// A pair of target entropies on a group of order `2^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyPoint {
    pub x: f64,
    pub y: f64,
    pub n: usize,
}

impl EntropyPoint {
    pub fn new(n: usize, x: f64, y: f64) -> Result<Self> {
        if n == 0 {
            return domain("group exponent must be at least 1");
        }
        let max = n as f64 * LN_2;
        Ok(Self {
            x: check_entropy(x, max)?,
            y: check_entropy(y, max)?,
            n,
        })
    }

    /// `(box of x, box of y)`.
    pub fn boxes(&self) -> (usize, usize) {
        (box_index(self.x, self.n), box_index(self.y, self.n))
    }

    pub fn on_diagonal(&self) -> bool {
        let (a, b) = self.boxes();
        a == b
    }

    pub fn min_sum_entropy(&self) -> f64 {
        let (kx, ky) = self.boxes();
        if kx == ky {
            let shift = kx as f64 * LN_2;
            shift + f2_raw(local_coordinate(self.x, kx), local_coordinate(self.y, kx))
        } else {
            self.x.max(self.y)
        }
    }
}

/// Smallest entropy of `X + Y` on a group of order `2^n` given `H(X) = x`,
/// `H(Y) = y`: the shifted binary function on diagonal boxes, `max(x, y)`
/// elsewhere.
pub fn f_2n(n: usize, x: f64, y: f64) -> Result<f64> {
    Ok(EntropyPoint::new(n, x, y)?.min_sum_entropy())
}

/// [`f_2n`] for any abelian 2-group; other groups have no closed form here.
pub fn f_group(group: &FiniteAbelianGroup, x: f64, y: f64) -> Result<f64> {
    let n = group
        .two_exponent()
        .ok_or_else(|| EpiError::UnsupportedGroup(format!("{group} is not a 2-group")))?;
    f_2n(n as usize, x, y)
}

/// Smallest entropy of `X_1 + … + X_k`, evaluated as the right fold
/// `f(x_1, f(x_2, … f(x_{k-1}, x_k)))`.
pub fn f_gk(n: usize, xs: &[f64]) -> Result<f64> {
    let (last, rest) = xs
        .split_last()
        .ok_or_else(|| EpiError::Domain("at least one entropy is required".into()))?;
    let max = n as f64 * LN_2;
    let init = check_entropy(*last, max)?;
    rest.iter().rev().try_fold(init, |acc, &x| f_2n(n, x, acc))
}

/// [`f_gk`] for any abelian 2-group.
pub fn f_group_k(group: &FiniteAbelianGroup, xs: &[f64]) -> Result<f64> {
    let n = group
        .two_exponent()
        .ok_or_else(|| EpiError::UnsupportedGroup(format!("{group} is not a 2-group")))?;
    f_gk(n as usize, xs)
}

/// Splitting bound for `G ⊕ H` with `|H| = 2^h_exp`, `|G| = 2^g_exp`:
/// `min_{u,v} f_H(u, v) + f_G(x - u, y - v)` over
/// `max(0, x - ln|G|) ≤ u ≤ min(ln|H|, x)` and likewise for `v`.
///
/// The search uses a uniform grid with `grid_resolution` cells per axis,
/// augmented with the box breakpoints of both terms, then refines the
/// incumbent by alternating golden-section searches.
pub fn direct_sum_lower_bound(
    h_exp: usize,
    g_exp: usize,
    x: f64,
    y: f64,
    grid_resolution: usize,
) -> Result<f64> {
    if h_exp == 0 || g_exp == 0 {
        return domain("both summands need order at least 2");
    }
    let n = h_exp + g_exp;
    let max = n as f64 * LN_2;
    let (x, y) = (check_entropy(x, max)?, check_entropy(y, max)?);
    let (lh, lg) = (h_exp as f64 * LN_2, g_exp as f64 * LN_2);
    let range = |t: f64| -> Result<(f64, f64)> {
        let (lo, hi) = ((t - lg).max(0.0), lh.min(t));
        if lo > hi + 1e-12 {
            return domain(format!("no feasible split of entropy {t}"));
        }
        Ok((lo, hi.max(lo)))
    };
    let (ur, vr) = (range(x)?, range(y)?);
    let objective = |u: f64, v: f64| -> f64 {
        let u = u.clamp(ur.0, ur.1);
        let v = v.clamp(vr.0, vr.1);
        f_2n(h_exp, u, v).expect("u, v within the first summand")
            + f_2n(g_exp, (x - u).clamp(0.0, lg), (y - v).clamp(0.0, lg))
                .expect("x - u, y - v within the second summand")
    };
    let axis = |t: f64, (lo, hi): (f64, f64)| -> Vec<f64> {
        let res = grid_resolution.max(1);
        let mut pts: Vec<f64> = (0..=res)
            .map(|i| lo + (hi - lo) * i as f64 / res as f64)
            .collect();
        for j in 0..=n {
            let b = j as f64 * LN_2;
            pts.extend([b, t - b].into_iter().filter(|p| (lo..=hi).contains(p)));
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    };
    let (us, vs) = (axis(x, ur), axis(y, vr));
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for &u in &us {
        for &v in &vs {
            let val = objective(u, v);
            if val < best.0 {
                best = (val, u, v);
            }
        }
    }
    let (du, dv) = (
        (ur.1 - ur.0) / grid_resolution.max(1) as f64,
        (vr.1 - vr.0) / grid_resolution.max(1) as f64,
    );
    let (mut val, mut u, mut v) = best;
    for _ in 0..4 {
        let (nu, fu) = golden_min(|t| objective(t, v), (u - du).max(ur.0), (u + du).min(ur.1));
        if fu < val {
            (val, u) = (fu, nu);
        }
        let (nv, fv) = golden_min(|t| objective(u, t), (v - dv).max(vr.0), (v + dv).min(vr.1));
        if fv < val {
            (val, v) = (fv, nv);
        }
    }
    Ok(val)
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    if b <= a {
        return (a, f(a));
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc <= fd {
            b = d;
            (d, fd) = (c, fc);
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            (c, fc) = (d, fd);
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
