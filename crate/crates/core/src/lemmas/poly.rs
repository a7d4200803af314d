use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{EpiError, Result};

/// Polynomial with exact rational coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    coeffs: Vec<BigRational>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| rat(c)).collect())
    }

    /// Coefficients given as `(numerator, denominator)` pairs.
    pub fn from_ratios(coeffs: &[(i64, i64)]) -> Self {
        Self::new(
            coeffs
                .iter()
                .map(|&(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
                .collect(),
        )
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Self::from_ints(&[0, 1])
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| {
            acc * x + num_traits::ToPrimitive::to_f64(c).expect("finite coefficient")
        })
    }

    /// `-1`, `0` or `1`.
    pub fn sign_at(&self, x: &BigRational) -> i8 {
        let v = self.eval(x);
        if v.is_zero() {
            0
        } else if v.is_positive() {
            1
        } else {
            -1
        }
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * rat(i as i64))
                .collect(),
        )
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = BigRational::zero();
        Self::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&zero) + other.coeffs.get(i).unwrap_or(&zero))
                .collect(),
        )
    }

    pub fn neg(&self) -> Self {
        self.scale(&rat(-1))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::constant(BigRational::one()), |acc, _| acc.mul(self))
    }

    /// Quotient and remainder of Euclidean division.
    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self)> {
        let d_deg = divisor
            .degree()
            .ok_or_else(|| EpiError::Domain("division by the zero polynomial".into()))?;
        let lead = divisor.leading().expect("nonzero divisor").clone();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![BigRational::zero(); self.coeffs.len().saturating_sub(d_deg).max(1)];
        while rem.len() > d_deg && !rem.is_empty() {
            let shift = rem.len() - 1 - d_deg;
            let factor = rem.last().expect("nonempty") / &lead;
            for (i, c) in divisor.coeffs.iter().enumerate() {
                rem[shift + i] -= &factor * c;
            }
            quot[shift] = factor;
            rem.pop();
            while rem.last().is_some_and(Zero::is_zero) {
                rem.pop();
            }
        }
        Ok((Self::new(quot), Self::new(rem)))
    }

    /// Whether `other = c · self` for some rational `c > 0`.
    pub fn is_positive_multiple_of(&self, other: &Self) -> bool {
        match (self.leading(), other.leading()) {
            (Some(a), Some(b)) if self.coeffs.len() == other.coeffs.len() => {
                let c = b / a;
                c.is_positive() && self.scale(&c) == *other
            }
            (None, None) => true,
            _ => false,
        }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => format!("{c}"),
                1 => format!("({c})*x"),
                _ => format!("({c})*x^{i}"),
            })
            .collect();
        f.write_str(&terms.join(" + "))
    }
}

/// `2 - 10x + 20x² - 11x³ + 7x⁴ - 2x⁵`.
pub fn p1_hat() -> Polynomial {
    Polynomial::from_ints(&[2, -10, 20, -11, 7, -2])
}

/// `6 - 15x + 9x² + 3x³ - 3x⁴ + 2x⁵`.
pub fn p2_hat() -> Polynomial {
    Polynomial::from_ints(&[6, -15, 9, 3, -3, 2])
}

/// The three polynomial coefficients of the fifth derivative.
pub(crate) fn fifth_derivative_polys() -> [Polynomial; 3] {
    let x = Polynomial::x();
    let one_minus_x = Polynomial::from_ints(&[1, -1]);
    let p1 = Polynomial::from_ints(&[0, 0, 2]).mul(&p1_hat());
    let p2 = one_minus_x.pow(2).scale(&rat(2)).mul(&p2_hat());
    let p3 = x.mul(&Polynomial::from_ints(&[12, -49, 70, -25, -12, 4]));
    [p1, p2, p3]
}

/// Both sides of the polynomial bound on the fifth-derivative numerator:
/// `P1·(−(1−x) − (1−x)²/2) + P2·(−x − x²/2) + P3` expanded, and the factored
/// form `−12 (1−x)² (x − 1/2)² x² (x² − x + 7/3)` expanded.
pub fn lower_bound_identity() -> (Polynomial, Polynomial) {
    let [p1, p2, p3] = fifth_derivative_polys();
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let one_minus_x = Polynomial::from_ints(&[1, -1]);
    let x = Polynomial::x();
    let log_p_bound = one_minus_x.neg().sub(&one_minus_x.pow(2).scale(&half));
    let log_1mp_bound = x.neg().sub(&x.pow(2).scale(&half));
    let lhs = p1.mul(&log_p_bound).add(&p2.mul(&log_1mp_bound)).add(&p3);
    let factored = one_minus_x
        .pow(2)
        .mul(&Polynomial::from_ratios(&[(-1, 2), (1, 1)]).pow(2))
        .mul(&x.pow(2))
        .mul(&Polynomial::from_ratios(&[(7, 3), (-1, 1), (1, 1)]))
        .scale(&rat(-12));
    (lhs, factored)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SturmSequence {
    terms: Vec<Polynomial>,
}

impl SturmSequence {
    pub fn terms(&self) -> &[Polynomial] {
        &self.terms
    }

    pub fn signs_at(&self, x: &BigRational) -> Vec<i8> {
        self.terms.iter().map(|t| t.sign_at(x)).collect()
    }

    /// Sign changes at `x`, zeros skipped.
    pub fn sign_changes(&self, x: &BigRational) -> usize {
        let nonzero: Vec<i8> = self.signs_at(x).into_iter().filter(|&s| s != 0).collect();
        nonzero.windows(2).filter(|w| w[0] != w[1]).count()
    }
}

/// `g0 = p`, `g1 = p'`, `g_{i+1} = −rem(g_{i−1}, g_i)` until the remainder vanishes.
pub fn sturm_sequence(poly: &Polynomial) -> Result<SturmSequence> {
    if poly.is_zero() {
        return Err(EpiError::Domain("the zero polynomial has no Sturm sequence".into()));
    }
    let mut terms = vec![poly.clone()];
    let mut next = poly.derivative();
    while !next.is_zero() {
        terms.push(next);
        let n = terms.len();
        let (_, rem) = terms[n - 2].div_rem(&terms[n - 1])?;
        next = rem.neg();
    }
    Ok(SturmSequence { terms })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootCount {
    /// Distinct real roots in the (possibly widened) interval.
    pub count: usize,
    /// Endpoints actually used, as exact fractions.
    pub a: String,
    pub b: String,
    /// An endpoint was a root and the interval was widened to include it.
    pub shifted: bool,
}

/// Number of distinct real roots in `[a, b]` by Sturm's theorem. An endpoint
/// that is itself a root is moved outward by an exact rational amount small
/// enough not to pick up other roots, and the shift is reported.
pub fn count_real_roots(poly: &Polynomial, a: &BigRational, b: &BigRational) -> Result<RootCount> {
    if a >= b {
        return Err(EpiError::Domain(format!("empty interval [{a}, {b}]")));
    }
    let chain = sturm_sequence(poly)?;
    let (mut lo, mut hi) = (a.clone(), b.clone());
    let (a_root, b_root) = (poly.sign_at(a) == 0, poly.sign_at(b) == 0);
    let shifted = a_root || b_root;
    if shifted {
        let v = |x: &BigRational| chain.sign_changes(x) as i64;
        let mut eps = (b - a) / rat(1 << 20);
        // shrink until (a - eps, a] holds only a and (b, b + eps] holds nothing
        loop {
            let lo2 = if a_root { a - &eps } else { a.clone() };
            let hi2 = if b_root { b + &eps } else { b.clone() };
            let near_a = if a_root { v(&lo2) - v(a) } else { 1 };
            let near_b = if b_root { v(b) - v(&hi2) } else { 0 };
            if near_a == 1 && near_b == 0 && poly.sign_at(&lo2) != 0 && poly.sign_at(&hi2) != 0 {
                (lo, hi) = (lo2, hi2);
                break;
            }
            eps /= rat(2);
        }
    }
    let count = chain.sign_changes(&lo) - chain.sign_changes(&hi);
    Ok(RootCount {
        count,
        a: lo.to_string(),
        b: hi.to_string(),
        shifted,
    })
}
