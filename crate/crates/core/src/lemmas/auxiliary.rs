use serde::{Deserialize, Serialize};

use super::poly::fifth_derivative_polys;
use crate::entropy::{h_raw, logit_half};
use crate::error::{EpiError, Result};

/// The named auxiliary functions of the ray-concavity argument.
///
/// `M`, `N` and `L` are the pieces of `A(p, k) = M(p) + N(p) L(q) / (1 − 2k)`
/// with `q = (k − p)/(1 − 2p)`; `B = ∂A/∂p`. `F` is the function whose sign
/// settles `B(p, p) ≤ 0`, `F1`..`F3`, `F5` its derivatives, and `P1`..`P3`
/// the polynomial coefficients of `F5`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AuxiliaryFunction {
    M,
    MPrime,
    N,
    NPrime,
    L,
    LPrime,
    A,
    B,
    F,
    F1,
    F2,
    F3,
    F5,
    P1,
    P2,
    P3,
}

impl AuxiliaryFunction {
    pub const ALL: [AuxiliaryFunction; 16] = [
        Self::M,
        Self::MPrime,
        Self::N,
        Self::NPrime,
        Self::L,
        Self::LPrime,
        Self::A,
        Self::B,
        Self::F,
        Self::F1,
        Self::F2,
        Self::F3,
        Self::F5,
        Self::P1,
        Self::P2,
        Self::P3,
    ];

    pub fn needs_k(self) -> bool {
        matches!(self, Self::A | Self::B)
    }
}

fn ln(p: f64) -> f64 {
    p.ln()
}

fn ln1m(p: f64) -> f64 {
    (-p).ln_1p()
}

fn m(p: f64) -> f64 {
    p * (1.0 - p) * logit_half(p) / (1.0 - 2.0 * p)
}

fn m_prime(p: f64) -> f64 {
    let s = 1.0 - 2.0 * p;
    logit_half(p) * (s * s + 2.0 * p * (1.0 - p)) / (s * s) - 1.0 / s
}

fn n(p: f64) -> f64 {
    let l = logit_half(p);
    p * (1.0 - p) * (1.0 - 2.0 * p) * l * l / h_raw(p)
}

fn n_prime(p: f64) -> f64 {
    let (l, h) = (logit_half(p), h_raw(p));
    let a = p * (1.0 - p) * (1.0 - 2.0 * p);
    let da = 1.0 - 6.0 * p + 6.0 * p * p;
    (da * l * l - 2.0 * (1.0 - 2.0 * p) * l) / h - a * l * l * l / (h * h)
}

/// `h(x) / ln((1−x)/x)`, with the limit `0` at `x = 0`.
fn l(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        h_raw(x) / logit_half(x)
    }
}

/// `1 + h(x) / (x(1−x) ln²((1−x)/x))`, with the limit `1` at `x = 0`.
fn l_prime(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let lg = logit_half(x);
    1.0 + h_raw(x) / (x * (1.0 - x) * lg * lg)
}

fn f(p: f64) -> f64 {
    if p == 0.0 {
        return 0.0;
    }
    let (lp, lq) = (ln(p), ln1m(p));
    let q = 1.0 - p;
    p * p * lp * lp - q * q * lq * lq + (1.0 - 2.0 * p) * (lp * lq + p * lp + q * lq)
}

fn f1(p: f64) -> f64 {
    if p == 0.0 {
        return -1.0;
    }
    let (lp, lq) = (ln(p), ln1m(p));
    let q = 1.0 - p;
    (2.0 * q * q * p * lq * lq - p * p * lp * (1.0 - 2.0 * p - 2.0 * q * lp)
        + q * lq * (1.0 - 3.0 * p + 2.0 * p * p - 2.0 * p * lp))
        / (q * p)
}

fn f2(p: f64) -> f64 {
    let (lp, lq) = (ln(p), ln1m(p));
    let q = 1.0 - p;
    let (p2, p3, p4) = (p * p, p * p * p, p * p * p * p);
    ((-1.0 + p2 + 2.0 * p3 - 2.0 * p4) * lq - 2.0 * q * q * p2 * lq * lq
        + p * (-1.0 + 3.0 * p - 2.0 * p2
            + p * (5.0 - 6.0 * p + 2.0 * p2) * lp
            + 2.0 * q * q * p * lp * lp))
        / (q * q * p2)
}

fn f3(p: f64) -> f64 {
    let (lp, lq) = (ln(p), ln1m(p));
    let q = 1.0 - p;
    let (p2, p3) = (p * p, p * p * p);
    2.0 * (q * q * (1.0 - p2 + 2.0 * p3) * lq
        + p * (1.0 + p - 4.0 * p2 + 2.0 * p3 + p * (2.0 - 4.0 * p + 5.0 * p2 - 2.0 * p3) * lp))
        / (q * q * q * p3)
}

fn f5(p: f64) -> f64 {
    let [p1, p2, p3] = fifth_derivative_polys();
    let q = 1.0 - p;
    2.0 * (p1.eval_f64(p) * ln(p) + p2.eval_f64(p) * ln1m(p) + p3.eval_f64(p)) / (q.powi(5) * p.powi(5))
}

/// Evaluates an auxiliary function at `p` (and `k` for `A` and `B`).
///
/// `p` must lie in `(0, 1/2)`, except where a finite value or limit exists at
/// an endpoint: the polynomials on `[0, 1/2]`, `L` and `L′` at `0`, `F` and
/// `F1` at `0`, and `F`..`F3`, `F5` at `1/2`. `A` and `B` need `p ≤ k < 1/2`.
pub fn eval_auxiliary(id: AuxiliaryFunction, p: f64, k: Option<f64>) -> Result<f64> {
    use AuxiliaryFunction::*;
    if !(0.0..=0.5).contains(&p) {
        return Err(EpiError::Domain(format!("p = {p} outside [0, 1/2]")));
    }
    let at_zero_ok = matches!(id, L | LPrime | F | F1 | P1 | P2 | P3);
    let at_half_ok = matches!(id, F | F1 | F2 | F3 | F5 | P1 | P2 | P3);
    if (p == 0.0 && !at_zero_ok) || (p == 0.5 && !at_half_ok) {
        return Err(EpiError::Boundary(format!("{id:?} is not defined at p = {p}")));
    }
    if id.needs_k() != k.is_some() {
        return Err(EpiError::Domain(if id.needs_k() {
            format!("{id:?} needs k")
        } else {
            format!("{id:?} takes no k")
        }));
    }
    let [poly1, poly2, poly3] = fifth_derivative_polys();
    Ok(match id {
        M => m(p),
        MPrime => m_prime(p),
        N => n(p),
        NPrime => n_prime(p),
        L => l(p),
        LPrime => l_prime(p),
        A | B => {
            let k = k.expect("checked above");
            if !(p..0.5).contains(&k) {
                return Err(EpiError::Domain(format!("k = {k} outside [p, 1/2)")));
            }
            let q = (k - p) / (1.0 - 2.0 * p);
            let s = 1.0 - 2.0 * k;
            if id == A {
                m(p) + n(p) * l(q) / s
            } else {
                let t = 1.0 - 2.0 * p;
                m_prime(p) + n_prime(p) * l(q) / s - n(p) / (t * t) * l_prime(q)
            }
        }
        F => f(p),
        F1 => f1(p),
        F2 => f2(p),
        F3 => f3(p),
        F5 => f5(p),
        P1 => poly1.eval_f64(p),
        P2 => poly2.eval_f64(p),
        P3 => poly3.eval_f64(p),
    })
}

#[cfg(test)]
mod tests {
    use super::AuxiliaryFunction::*;
    use super::*;

    fn ev(id: AuxiliaryFunction, p: f64) -> f64 {
        eval_auxiliary(id, p, None).unwrap()
    }

    fn central(id: AuxiliaryFunction, p: f64, step: f64) -> f64 {
        (ev(id, p + step) - ev(id, p - step)) / (2.0 * step)
    }

    #[test]
    fn endpoint_values() {
        assert!(ev(F, 0.5).abs() < 1e-15);
        assert_eq!(ev(F1, 0.0), -1.0);
        assert!((ev(F1, 1e-7) + 1.0).abs() < 1e-4);
        assert!(ev(F1, 0.5).abs() < 1e-10);
        assert!(ev(F2, 0.5).abs() < 1e-10);
        assert!(ev(F3, 0.5) > 0.0);
        assert_eq!(ev(L, 0.0), 0.0);
        assert_eq!(ev(LPrime, 0.0), 1.0);
        assert!((ev(LPrime, 1e-9) - 1.0).abs() < 0.1);
        assert!((ev(P1, 0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(eval_auxiliary(M, 0.0, None), Err(EpiError::Boundary(_))));
        assert!(matches!(eval_auxiliary(N, 0.5, None), Err(EpiError::Boundary(_))));
        assert!(matches!(eval_auxiliary(F, 0.7, None), Err(EpiError::Domain(_))));
        assert!(eval_auxiliary(A, 0.2, None).is_err());
        assert!(eval_auxiliary(M, 0.2, Some(0.3)).is_err());
        assert!(eval_auxiliary(B, 0.2, Some(0.1)).is_err());
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        for &p in &[0.05, 0.1, 0.2, 0.3, 0.4, 0.45] {
            for (id, d) in [(M, MPrime), (N, NPrime), (L, LPrime), (F, F1), (F1, F2), (F2, F3)] {
                let fd = central(id, p, 1e-6);
                let exact = ev(d, p);
                assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "{d:?} at {p}: {fd} vs {exact}");
            }
            // fifth from third: second difference of F3
            let h = 1e-4;
            let fd = (ev(F3, p + h) - 2.0 * ev(F3, p) + ev(F3, p - h)) / (h * h);
            let exact = ev(F5, p);
            assert!((fd - exact).abs() <= 1e-4 * exact.abs().max(1.0), "F5 at {p}: {fd} vs {exact}");
        }
    }

    #[test]
    fn b_is_partial_derivative_of_a() {
        for &(p, k) in &[(0.1, 0.2), (0.2, 0.45), (0.3, 0.31), (0.05, 0.4)] {
            let step = 1e-6;
            let fd = (eval_auxiliary(A, p + step, Some(k)).unwrap() - eval_auxiliary(A, p - step, Some(k)).unwrap()) / (2.0 * step);
            let exact = eval_auxiliary(B, p, Some(k)).unwrap();
            assert!((fd - exact).abs() < 1e-6, "({p}, {k}): {fd} vs {exact}");
        }
    }

    #[test]
    fn diagonal_b_simplifies() {
        for &p in &[0.01, 0.1, 0.25, 0.4, 0.49] {
            let b = eval_auxiliary(B, p, Some(p)).unwrap();
            let t = 1.0 - 2.0 * p;
            assert!((b - (ev(MPrime, p) - ev(N, p) / (t * t))).abs() < 1e-12);
            assert!(b < 0.0);
        }
    }
}
