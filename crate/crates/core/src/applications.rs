//! Conditional forms of the minimum-sum-entropy inequality and the rate
//! regions they characterize: the degraded broadcast channel with additive
//! `Z_{2^n}` noise and lossless source coding with a coded helper.

use std::f64::consts::LN_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::closed_form::f_group;
use crate::error::{EpiError, Result};
use crate::exec::{map_indexed, Execution};
use crate::group::{gaussian_2n, shannon, FiniteAbelianGroup, GroupDistribution, MASS_TOLERANCE};
use crate::numeric::{min_sum_entropy, MinimizationConfig};

/// Largest `|U| · |G|^k` accepted by [`vector_mgl_check`].
pub const MAX_JOINT_TABLE: usize = 4096;

/// Largest block length accepted by [`vector_mgl_check`].
pub const MAX_BLOCK_LENGTH: usize = 3;

/// Slacks at or above `-MGL_TOLERANCE` count as satisfied.
pub const MGL_TOLERANCE: f64 = 1e-9;

/// A finite auxiliary variable `U` and the conditional laws of `X` given `U`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalSource {
    u_probs: Vec<f64>,
    rows: Vec<GroupDistribution>,
}

impl ConditionalSource {
    pub fn new(u_probs: Vec<f64>, rows: Vec<GroupDistribution>) -> Result<Self> {
        if u_probs.is_empty() || u_probs.len() != rows.len() {
            return Err(EpiError::InvalidDistribution(format!(
                "{} auxiliary probabilities for {} rows",
                u_probs.len(),
                rows.len()
            )));
        }
        let total: f64 = u_probs.iter().sum();
        if u_probs.iter().any(|p| p.is_nan() || *p < 0.0) || (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(EpiError::InvalidDistribution(
                "auxiliary probabilities must be nonnegative and sum to 1".into(),
            ));
        }
        let group = rows[0].group();
        if let Some(bad) = rows.iter().find(|r| r.group() != group) {
            return Err(EpiError::GroupMismatch {
                left: group.to_string(),
                right: bad.group().to_string(),
            });
        }
        Ok(Self { u_probs, rows })
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        self.rows[0].group()
    }

    pub fn u_probs(&self) -> &[f64] {
        &self.u_probs
    }

    pub fn rows(&self) -> &[GroupDistribution] {
        &self.rows
    }

    /// The source seen through additive noise: row `u` becomes `row_u ⊛ noise`.
    pub fn through_noise(&self, noise: &GroupDistribution) -> Result<Self> {
        let rows = self
            .rows
            .iter()
            .map(|r| r.convolve(noise))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            u_probs: self.u_probs.clone(),
            rows,
        })
    }
}

/// `H(X | U) = Σ_u P(u) H(X | U = u)`.
pub fn conditional_entropy(src: &ConditionalSource) -> f64 {
    src.u_probs
        .iter()
        .zip(&src.rows)
        .map(|(&pu, row)| pu * row.entropy())
        .sum()
}

/// How the minimum sum entropy is evaluated inside the checks.
#[derive(Debug, Clone, Default)]
pub enum MinimumEvaluator {
    /// Closed form; 2-groups only.
    #[default]
    ClosedForm,
    /// Numeric minimization; any group the optimizer accepts.
    Numeric(MinimizationConfig),
}

impl MinimumEvaluator {
    fn eval(&self, group: &FiniteAbelianGroup, x: f64, y: f64) -> Result<f64> {
        match self {
            Self::ClosedForm => f_group(group, x, y),
            Self::Numeric(cfg) => Ok(min_sum_entropy(group, x, y, cfg)?.value),
        }
    }
}

/// `H(Y | U) − f_G(H(X | U), H(Z))` with `Y = X + Z`; never negative in exact
/// arithmetic.
pub fn scalar_mgl_check(src: &ConditionalSource, noise: &GroupDistribution) -> Result<f64> {
    scalar_mgl_slack(src, noise, &MinimumEvaluator::ClosedForm)
}

/// [`scalar_mgl_check`] with a choice of evaluator for the minimum.
pub fn scalar_mgl_slack(
    src: &ConditionalSource,
    noise: &GroupDistribution,
    evaluator: &MinimumEvaluator,
) -> Result<f64> {
    let output = src.through_noise(noise)?;
    let x = conditional_entropy(src);
    let bound = evaluator.eval(src.group(), x, noise.entropy())?;
    Ok(conditional_entropy(&output) - bound)
}

/// Per-letter i.i.d. noise on `G^k`.
pub fn product_noise(noise: &GroupDistribution, k: usize) -> Result<GroupDistribution> {
    let base = noise.group();
    let group = base.power(k)?;
    let m = base.order();
    let probs = (0..group.order())
        .map(|mut e| {
            let mut p = 1.0;
            for _ in 0..k {
                p *= noise.probs()[e % m];
                e /= m;
            }
            p
        })
        .collect();
    GroupDistribution::new(group, probs)
}

/// `H(Y^k | U)/k − f_G(H(X^k | U)/k, H(Z))` where the rows of `src` live on
/// `G^k` and each letter passes through an independent copy of `noise`.
pub fn vector_mgl_check(
    base: &FiniteAbelianGroup,
    k: usize,
    src: &ConditionalSource,
    noise: &GroupDistribution,
) -> Result<f64> {
    if k == 0 || k > MAX_BLOCK_LENGTH {
        return Err(EpiError::Capacity(format!(
            "block length {k} outside 1..={MAX_BLOCK_LENGTH}"
        )));
    }
    let table = base
        .order()
        .checked_pow(k as u32)
        .and_then(|s| s.checked_mul(src.u_probs().len()));
    if table.is_none_or(|t| t > MAX_JOINT_TABLE) {
        return Err(EpiError::Capacity(format!(
            "joint table |U|·|G|^k exceeds {MAX_JOINT_TABLE}"
        )));
    }
    if noise.group() != base {
        return Err(EpiError::GroupMismatch {
            left: base.to_string(),
            right: noise.group().to_string(),
        });
    }
    let block = base.power(k)?;
    if src.group() != &block {
        return Err(EpiError::GroupMismatch {
            left: block.to_string(),
            right: src.group().to_string(),
        });
    }
    let output = src.through_noise(&product_noise(noise, k)?)?;
    let kf = k as f64;
    let bound = f_group(base, conditional_entropy(src) / kf, noise.entropy())?;
    Ok(conditional_entropy(&output) / kf - bound)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub trials: usize,
    pub seed: u64,
    pub execution: Execution,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            trials: 10_000,
            seed: 1,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MglSuiteReport {
    pub kind: String,
    pub groups: Vec<String>,
    pub block_length: usize,
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub min_slack: f64,
    /// Trial index attaining the minimum slack.
    pub worst_trial: usize,
    pub violations: usize,
}

impl MglSuiteReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn dirichlet(rng: &mut ChaCha8Rng, len: usize, shape: f64) -> Vec<f64> {
    let gamma = Gamma::new(shape, 1.0).expect("positive shape");
    let mut w: Vec<f64> = (0..len).map(|_| gamma.sample(rng)).collect();
    let total: f64 = w.iter().sum();
    if total > 0.0 {
        w.iter_mut().for_each(|v| *v /= total);
    } else {
        w.iter_mut().for_each(|v| *v = 0.0);
        w[rng.random_range(0..len)] = 1.0;
    }
    w
}

const ROW_SHAPES: [f64; 5] = [0.05, 0.2, 0.5, 1.0, 3.0];

fn random_source(rng: &mut ChaCha8Rng, group: &FiniteAbelianGroup) -> ConditionalSource {
    let u = rng.random_range(1..=4);
    let u_probs = dirichlet(rng, u, 1.0);
    let shape = ROW_SHAPES[rng.random_range(0..ROW_SHAPES.len())];
    let rows = (0..u)
        .map(|_| GroupDistribution::from_raw(group.clone(), dirichlet(rng, group.order(), shape)))
        .collect();
    ConditionalSource { u_probs, rows }
}

fn random_noise(rng: &mut ChaCha8Rng, group: &FiniteAbelianGroup) -> GroupDistribution {
    let shape = ROW_SHAPES[rng.random_range(0..ROW_SHAPES.len())];
    GroupDistribution::from_raw(group.clone(), dirichlet(rng, group.order(), shape))
}

fn summarize(
    kind: &str,
    groups: &[FiniteAbelianGroup],
    block_length: usize,
    cfg: &MonteCarloConfig,
    slacks: Vec<f64>,
) -> MglSuiteReport {
    let (worst_trial, min_slack) = slacks
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, s)| if s < acc.1 { (i, s) } else { acc });
    MglSuiteReport {
        kind: kind.into(),
        groups: groups.iter().map(ToString::to_string).collect(),
        block_length,
        trials: slacks.len(),
        seed: cfg.seed,
        tolerance: MGL_TOLERANCE,
        min_slack,
        worst_trial,
        violations: slacks.iter().filter(|&&s| s < -MGL_TOLERANCE).count(),
    }
}

/// Random instances of [`scalar_mgl_check`], cycling through `groups`.
/// Trial `i` draws from its own RNG stream, so results do not depend on
/// scheduling.
pub fn scalar_mgl_suite(groups: &[FiniteAbelianGroup], cfg: &MonteCarloConfig) -> Result<MglSuiteReport> {
    if groups.is_empty() {
        return Err(EpiError::Domain("at least one group is required".into()));
    }
    let slacks = map_indexed(cfg.execution, cfg.trials, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(i as u64);
        let group = &groups[i % groups.len()];
        let src = random_source(&mut rng, group);
        let noise = random_noise(&mut rng, group);
        scalar_mgl_check(&src, &noise)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(summarize("mgl-scalar", groups, 1, cfg, slacks))
}

/// Random instances of [`vector_mgl_check`] on `G^k`.
pub fn vector_mgl_suite(group: &FiniteAbelianGroup, k: usize, cfg: &MonteCarloConfig) -> Result<MglSuiteReport> {
    let block = group.power(k)?;
    let slacks = map_indexed(cfg.execution, cfg.trials, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(i as u64);
        let src = random_source(&mut rng, &block);
        let noise = random_noise(&mut rng, group);
        vector_mgl_check(group, k, &src, &noise)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(summarize("mgl-vector", std::slice::from_ref(group), k, cfg, slacks))
}

/// `H(p_a ⊛ p_b) − f_G(H(p_a), H(p_b))`: zero exactly when the pair attains
/// the minimum.
pub fn equality_condition_check(p_a: &GroupDistribution, p_b: &GroupDistribution) -> Result<f64> {
    let sum = p_a.convolve(p_b)?;
    Ok(sum.entropy() - f_group(p_a.group(), p_a.entropy(), p_b.entropy())?)
}

/// `n ≥ 1` with the group `Z_{2^n}`.
fn cyclic_two_group(n: usize) -> Result<FiniteAbelianGroup> {
    if n == 0 || n > 12 {
        return Err(EpiError::Domain(format!("exponent {n} outside 1..=12")));
    }
    FiniteAbelianGroup::cyclic(1 << n)
}

fn require_gaussian(d: &GroupDistribution, n: usize, what: &str) -> Result<f64> {
    if d.group().cyclic_orders() != [1usize << n] {
        return Err(EpiError::Precondition(format!(
            "{what} must live on z{}, got {}",
            1usize << n,
            d.group()
        )));
    }
    d.gaussian_parameter()
        .ok_or_else(|| EpiError::Precondition(format!("{what} is not constant on the cosets of the index-2 subgroup")))
}

/// `201` evenly spaced values in `[0, 1/2]`.
pub fn default_alpha_grid() -> Vec<f64> {
    (0..=200).map(|i| 0.5 * i as f64 / 200.0).collect()
}

fn check_alpha_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(EpiError::Domain("empty alpha grid".into()));
    }
    if let Some(a) = grid.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(EpiError::Domain(format!("alpha {a} outside [0, 1]")));
    }
    Ok(())
}

/// Channel with outputs `Y_1 = X + Z_1` and `Y_2 = Y_1 + Z̃_2` on `Z_{2^n}`.
#[derive(Debug, Clone, Serialize)]
pub struct BroadcastSpec {
    n: usize,
    p_z1: GroupDistribution,
    p_z2_tilde: GroupDistribution,
}

impl BroadcastSpec {
    pub fn new(n: usize, p_z1: GroupDistribution, p_z2_tilde: GroupDistribution) -> Result<Self> {
        let group = cyclic_two_group(n)?;
        if p_z1.group() != &group {
            return Err(EpiError::GroupMismatch {
                left: group.to_string(),
                right: p_z1.group().to_string(),
            });
        }
        require_gaussian(&p_z2_tilde, n, "the degrading noise")?;
        Ok(Self { n, p_z1, p_z2_tilde })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p_z1(&self) -> &GroupDistribution {
        &self.p_z1
    }

    pub fn p_z2_tilde(&self) -> &GroupDistribution {
        &self.p_z2_tilde
    }

    /// Noise of the weaker receiver, `p_Z1 ⊛ p_Z̃2`.
    pub fn p_z2(&self) -> GroupDistribution {
        self.p_z1
            .convolve(&self.p_z2_tilde)
            .expect("both noises live on the same group")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub alpha: f64,
    pub r1: f64,
    pub r2: f64,
    /// A negative rate was raised to zero.
    pub clamped: bool,
    /// Residual of the minimum-entropy identity used by the converse at this
    /// point; zero when the inequality is tight.
    pub equality_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRegionBoundary {
    pub kind: String,
    pub n: usize,
    /// Points sorted by `alpha`.
    pub points: Vec<RatePoint>,
}

impl RateRegionBoundary {
    fn new(kind: &str, n: usize, mut points: Vec<RatePoint>) -> Self {
        points.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
        Self {
            kind: kind.into(),
            n,
            points,
        }
    }

    pub fn max_equality_residual(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.equality_residual.abs())
            .fold(0.0, f64::max)
    }
}

fn clamp_rates(r1: f64, r2: f64) -> (f64, f64, bool) {
    (r1.max(0.0), r2.max(0.0), r1 < 0.0 || r2 < 0.0)
}

/// Boundary swept by `p_α = gaussian_2n(α)`:
/// `R1 = H(p_α) − H(p_Z1)`, `R2 = n ln 2 − H(p_α ⊛ p_Z2)`.
///
/// For `n = 1` this is contained in, and in general strictly smaller than,
/// the binary symmetric broadcast region; [`broadcast_region_gaussian`]
/// gives that region exactly.
pub fn broadcast_region(spec: &BroadcastSpec, alpha_grid: &[f64]) -> Result<RateRegionBoundary> {
    check_alpha_grid(alpha_grid)?;
    let group = spec.p_z1.group();
    let full = spec.n as f64 * LN_2;
    let p_z2 = spec.p_z2();
    let h_z1 = spec.p_z1.entropy();
    let points = alpha_grid
        .iter()
        .map(|&alpha| {
            let p_alpha = gaussian_2n(group, alpha)?;
            let first = p_alpha.convolve(&spec.p_z1)?;
            let (r1, r2, clamped) = clamp_rates(
                p_alpha.entropy() - h_z1,
                full - p_alpha.convolve(&p_z2)?.entropy(),
            );
            Ok(RatePoint {
                alpha,
                r1,
                r2,
                clamped,
                equality_residual: equality_condition_check(&first, &spec.p_z2_tilde)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RateRegionBoundary::new("broadcast", spec.n, points))
}

/// Degrading parameter `t` with `a1 ⋆ t = a2`, both parameters folded into
/// `[0, 1/2]`.
pub fn degradation_parameter(a1: f64, a2: f64) -> Result<f64> {
    let fold = |a: f64| a.min(1.0 - a);
    let (a1, a2) = (fold(a1), fold(a2));
    let slack = 1e-12;
    if a2 < a1 - slack {
        return Err(EpiError::Precondition(format!(
            "noise parameter {a2} is less noisy than {a1}; the channel is not degraded"
        )));
    }
    if 0.5 - a1 <= slack {
        return if 0.5 - a2 <= slack {
            Ok(0.0)
        } else {
            Err(EpiError::Precondition("uniform first noise forces uniform second noise".into()))
        };
    }
    Ok(((a2 - a1) / (1.0 - 2.0 * a1)).clamp(0.0, 0.5))
}

/// Boundary for Gaussian noises on both receivers:
/// `R1 = H(p_α ⊛ p_Z1) − H(p_Z1)`, `R2 = n ln 2 − H(p_α ⊛ p_Z2)`.
pub fn broadcast_region_gaussian(
    n: usize,
    p_z1: &GroupDistribution,
    p_z2: &GroupDistribution,
    alpha_grid: &[f64],
) -> Result<RateRegionBoundary> {
    check_alpha_grid(alpha_grid)?;
    let group = cyclic_two_group(n)?;
    let a1 = require_gaussian(p_z1, n, "the first noise")?;
    let a2 = require_gaussian(p_z2, n, "the second noise")?;
    let t = degradation_parameter(a1, a2)?;
    let tilde = gaussian_2n(&group, t)?;
    let full = n as f64 * LN_2;
    let h_z1 = p_z1.entropy();
    let points = alpha_grid
        .iter()
        .map(|&alpha| {
            let p_alpha = gaussian_2n(&group, alpha)?;
            let first = p_alpha.convolve(p_z1)?;
            let (r1, r2, clamped) =
                clamp_rates(first.entropy() - h_z1, full - p_alpha.convolve(p_z2)?.entropy());
            Ok(RatePoint {
                alpha,
                r1,
                r2,
                clamped,
                equality_residual: equality_condition_check(&first, &tilde)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RateRegionBoundary::new("broadcast-gaussian", n, points))
}

/// Corner points of the helper region `R1 ≥ H(p_α ⊛ p_Z)`,
/// `R2 ≥ n ln 2 − H(p_α)`, for a source `X = Y + Z` with Gaussian `Z`.
pub fn helper_region(n: usize, p_z: &GroupDistribution, alpha_grid: &[f64]) -> Result<RateRegionBoundary> {
    check_alpha_grid(alpha_grid)?;
    let group = cyclic_two_group(n)?;
    require_gaussian(p_z, n, "the source noise")?;
    let full = n as f64 * LN_2;
    let points = alpha_grid
        .iter()
        .map(|&alpha| {
            let p_alpha = gaussian_2n(&group, alpha)?;
            let (r1, r2, clamped) =
                clamp_rates(p_alpha.convolve(p_z)?.entropy(), full - p_alpha.entropy());
            Ok(RatePoint {
                alpha,
                r1,
                r2,
                clamped,
                equality_residual: equality_condition_check(&p_alpha, p_z)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RateRegionBoundary::new("helper", n, points))
}

/// Joint entropy of `(U, X)` minus `H(U)`; an independent route to
/// [`conditional_entropy`].
pub fn conditional_entropy_from_joint(src: &ConditionalSource) -> f64 {
    let joint: Vec<f64> = src
        .u_probs
        .iter()
        .zip(&src.rows)
        .flat_map(|(&pu, row)| row.probs().iter().map(move |&p| pu * p))
        .collect();
    shannon(&joint) - shannon(&src.u_probs)
}
