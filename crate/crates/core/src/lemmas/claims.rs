use std::f64::consts::LN_2;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::auxiliary::{eval_auxiliary, AuxiliaryFunction};
use super::poly::{count_real_roots, lower_bound_identity, p1_hat, p2_hat, sturm_sequence, Polynomial};
use crate::entropy::df2_dx_raw;
use crate::error::{EpiError, Result};

pub const MIN_GRID_SIZE: usize = 100;

/// Allowed excess for `F ≤ 0`.
pub const F_TOLERANCE: f64 = 1e-12;

/// Allowed excess for `B(p, p) ≤ 0` and `F5 ≤ 0`.
pub const DERIVED_TOLERANCE: f64 = 1e-10;

/// Expected Sturm sign patterns at `0` and `1/2`.
const P1_HAT_SIGNS: [[i8; 6]; 2] = [[1, -1, -1, 1, -1, -1], [1, 1, -1, 1, 1, -1]];
const P2_HAT_SIGNS: [[i8; 6]; 2] = [[1, -1, -1, -1, 1, 1], [1, -1, -1, -1, 1, 1]];

const RAY_SLOPES: [f64; 9] = [0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 10.0, 20.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimId {
    /// `N` strictly decreasing on `(0, 1/2)`.
    Np,
    /// `L` strictly increasing with `L′ ≥ 1`.
    Lp,
    /// `F ≤ 0`.
    Fp,
    /// `P1, P2 ≥ 0` on `[0, 1/2]`, via Sturm chains of their quintic factors.
    P1p2,
    /// `∂f2/∂x` strictly decreasing along rays from the origin.
    DfdxRay,
    /// The polynomial bound on the numerator of `F5` factors as stated.
    PolyBoundIdentity,
    /// `B(p, p) ≤ 0`.
    Bpp,
    /// `F5 ≤ 0`.
    F5,
}

impl ClaimId {
    pub const ALL: [ClaimId; 8] = [
        Self::Np,
        Self::Lp,
        Self::Fp,
        Self::P1p2,
        Self::DfdxRay,
        Self::PolyBoundIdentity,
        Self::Bpp,
        Self::F5,
    ];
}

#[derive(Debug, Clone, Serialize)]
pub struct ClaimReport {
    pub claim: ClaimId,
    pub grid_size: usize,
    pub passed: bool,
    /// Largest amount by which the claim's inequality is missed; negative
    /// means satisfied with room.
    pub max_violation: f64,
    pub details: serde_json::Value,
}

/// `p_i = i / (2(N + 1))` for `i = 1..=N`.
fn interior_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64 / (2.0 * (n + 1) as f64)).collect()
}

fn eval_on(id: AuxiliaryFunction, grid: &[f64]) -> Result<Vec<f64>> {
    grid.iter().map(|&p| eval_auxiliary(id, p, None)).collect()
}

fn max_increase(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max)
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

fn half() -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(2))
}

fn sturm_details(poly: &Polynomial, expected: &[[i8; 6]; 2]) -> Result<(bool, serde_json::Value)> {
    let chain = sturm_sequence(poly)?;
    let zero = BigRational::zero();
    let at_zero = chain.signs_at(&zero);
    let at_half = chain.signs_at(&half());
    let roots = count_real_roots(poly, &zero, &half())?;
    let ok = roots.count == 0 && at_zero == expected[0] && at_half == expected[1];
    let details = json!({
        "chain": chain.terms().iter().map(ToString::to_string).collect::<Vec<_>>(),
        "signs_at_0": at_zero,
        "signs_at_half": at_half,
        "expected_signs_at_0": expected[0],
        "expected_signs_at_half": expected[1],
        "roots_in_closed_interval": roots,
    });
    Ok((ok, details))
}

/// Checks one claim on a grid of `grid_size` interior points of `(0, 1/2)`.
pub fn verify_claim(claim: ClaimId, grid_size: usize) -> Result<ClaimReport> {
    use AuxiliaryFunction as Fun;
    if grid_size < MIN_GRID_SIZE {
        return Err(EpiError::Domain(format!(
            "grid size {grid_size} below the minimum {MIN_GRID_SIZE}"
        )));
    }
    let grid = interior_grid(grid_size);
    let (passed, max_violation, details) = match claim {
        ClaimId::Np => {
            let v = max_increase(&eval_on(Fun::N, &grid)?);
            (v < 0.0, v, json!({ "max_forward_difference": v }))
        }
        ClaimId::Lp => {
            let rise = eval_on(Fun::L, &grid)?
                .windows(2)
                .map(|w| w[1] - w[0])
                .fold(f64::INFINITY, f64::min);
            let slope_min = eval_on(Fun::LPrime, &grid)?
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            let v = (-rise).max(1.0 - slope_min);
            (
                rise > 0.0 && slope_min >= 1.0,
                v,
                json!({ "min_forward_difference": rise, "min_derivative": slope_min }),
            )
        }
        ClaimId::Fp => {
            let v = max_of(eval_on(Fun::F, &grid)?);
            (v <= F_TOLERANCE, v, json!({ "max_value": v, "tolerance": F_TOLERANCE }))
        }
        ClaimId::Bpp => {
            let v = max_of(
                grid.iter()
                    .map(|&p| eval_auxiliary(Fun::B, p, Some(p)))
                    .collect::<Result<Vec<_>>>()?,
            );
            (v <= DERIVED_TOLERANCE, v, json!({ "max_value": v, "tolerance": DERIVED_TOLERANCE }))
        }
        ClaimId::F5 => {
            let v = max_of(eval_on(Fun::F5, &grid)?);
            (v <= DERIVED_TOLERANCE, v, json!({ "max_value": v, "tolerance": DERIVED_TOLERANCE }))
        }
        ClaimId::P1p2 => {
            let (ok1, d1) = sturm_details(&p1_hat(), &P1_HAT_SIGNS)?;
            let (ok2, d2) = sturm_details(&p2_hat(), &P2_HAT_SIGNS)?;
            let min_grid = eval_on(Fun::P1, &grid)?
                .into_iter()
                .chain(eval_on(Fun::P2, &grid)?)
                .fold(f64::INFINITY, f64::min);
            (
                ok1 && ok2 && min_grid >= 0.0,
                -min_grid,
                json!({ "p1_hat": d1, "p2_hat": d2, "min_on_grid": min_grid }),
            )
        }
        ClaimId::DfdxRay => {
            let mut worst = f64::NEG_INFINITY;
            for theta in RAY_SLOPES {
                let reach = LN_2 / theta.max(1.0);
                let values: Vec<f64> = (1..=grid_size)
                    .map(|i| {
                        let x = reach * i as f64 / (grid_size + 1) as f64;
                        df2_dx_raw(x, theta * x)
                    })
                    .collect();
                worst = worst.max(max_increase(&values));
            }
            (worst < 0.0, worst, json!({ "slopes": RAY_SLOPES, "max_forward_difference": worst }))
        }
        ClaimId::PolyBoundIdentity => {
            let (lhs, rhs) = lower_bound_identity();
            let diff = lhs.sub(&rhs);
            let mismatched = diff.coeffs().iter().filter(|c| !c.is_zero()).count();
            (
                diff.is_zero(),
                mismatched as f64,
                json!({ "expanded": lhs.to_string(), "factored_expanded": rhs.to_string(), "mismatched_coefficients": mismatched }),
            )
        }
    };
    Ok(ClaimReport {
        claim,
        grid_size,
        passed,
        max_violation,
        details,
    })
}

/// Every claim in [`ClaimId::ALL`].
pub fn verify_all(grid_size: usize) -> Result<Vec<ClaimReport>> {
    ClaimId::ALL.iter().map(|&c| verify_claim(c, grid_size)).collect()
}
