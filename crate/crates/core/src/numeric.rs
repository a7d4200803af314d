//! Numeric minimization of `H(X_1 + … + X_k)` under fixed marginal entropies
//! on arbitrary small finite abelian groups.
//!
//! The sum entropy is concave in each marginal, so linearizing it at the
//! current iterate gives an upper bound that is tight there. Minimizing that
//! linear bound over `{p : H(p) ≥ x}` has a Gibbs solution `p ∝ exp(-β c)`
//! sitting on `H(p) = x`, which makes every update a descent step. Variables
//! are updated in turn, from several kinds of starting points, and the best
//! result wins.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::entropy::{check_entropy, xlnx};
use crate::error::{EpiError, Result};
use crate::exec::{map_indexed, Execution};
use crate::group::{
    canonical_chain, convolve_raw, extremal_tuple, shannon, two_level_on_chain,
    FiniteAbelianGroup, GroupDistribution,
};

/// Largest group accepted by the minimizer.
pub const MAX_ORDER: usize = 16;

/// Largest number of summands accepted by the minimizer.
pub const MAX_SUMMANDS: usize = 4;

/// Largest group accepted by [`convexity_scan`].
pub const MAX_SCAN_ORDER: usize = 8;

/// Groups up to this order also get the coarse simplex mesh.
pub const MESH_MAX_ORDER: usize = 5;

const LOG_FLOOR: f64 = 1e-300;
const STALL_SWEEPS: usize = 3;
const STALL_TOLERANCE: f64 = 1e-13;
const MESH_PAIR_BUDGET: usize = 10_000;

/// How far each update moves toward the Gibbs minimizer of the linear bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepSchedule {
    /// Jump straight to the minimizer.
    Majorize,
    /// Move a fixed fraction of the way, then restore the entropy constraint.
    Damped(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizationConfig {
    /// Number of random starts, on top of the structured ones.
    pub restarts: usize,
    /// Maximum number of sweeps over all variables per start.
    pub max_iterations: usize,
    /// Allowed deviation of the achieved marginal entropies from the targets.
    pub entropy_tolerance: f64,
    pub step_schedule: StepSchedule,
    pub seed: u64,
    /// Mesh resolution per coordinate for small groups; 0 disables the mesh.
    pub coarse_grid_resolution: usize,
    /// Whether to include two-level and profile starts.
    pub structured_starts: bool,
    pub execution: Execution,
}

impl Default for MinimizationConfig {
    fn default() -> Self {
        Self {
            restarts: 8,
            max_iterations: 400,
            entropy_tolerance: 1e-9,
            step_schedule: StepSchedule::Majorize,
            seed: 1,
            coarse_grid_resolution: 60,
            structured_starts: true,
            execution: Execution::default(),
        }
    }
}

impl MinimizationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(EpiError::Domain("restarts must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(EpiError::Domain("max_iterations must be at least 1".into()));
        }
        if self.entropy_tolerance.is_nan() || self.entropy_tolerance <= 0.0 {
            return Err(EpiError::Domain("entropy tolerance must be positive".into()));
        }
        if let StepSchedule::Damped(l) = self.step_schedule {
            if !(l > 0.0 && l <= 1.0) {
                return Err(EpiError::Domain(format!("damping {l} outside (0, 1]")));
            }
        }
        Ok(())
    }

    /// Same configuration with `factor` times the restarts and iterations.
    pub fn scaled(&self, factor: usize) -> Self {
        Self {
            restarts: self.restarts * factor.max(1),
            max_iterations: self.max_iterations * factor.max(1),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MinimizationResult {
    /// Entropy of the sum at the best point found.
    pub value: f64,
    /// One distribution per summand.
    pub argmin: Vec<GroupDistribution>,
    pub achieved_entropies: Vec<f64>,
    /// The best start stalled before the iteration cap and met the entropy
    /// tolerance.
    pub converged: bool,
    /// Number of descent runs performed, including structured starts.
    pub restarts_used: usize,
}

/// Minimum of `H(X + Y)` over `H(X) = x`, `H(Y) = y` on `group`.
pub fn min_sum_entropy(
    group: &FiniteAbelianGroup,
    x: f64,
    y: f64,
    config: &MinimizationConfig,
) -> Result<MinimizationResult> {
    min_sum_entropy_k(group, &[x, y], config)
}

/// Minimum of `H(X_1 + … + X_k)` over `H(X_i) = xs[i]` on `group`.
pub fn min_sum_entropy_k(
    group: &FiniteAbelianGroup,
    xs: &[f64],
    config: &MinimizationConfig,
) -> Result<MinimizationResult> {
    minimize_with_seeds(group, xs, config, &[])
}

/// Like [`min_sum_entropy_k`] but also descends from the supplied starting
/// tuples (retracted onto the targets first).
pub fn minimize_with_seeds(
    group: &FiniteAbelianGroup,
    xs: &[f64],
    config: &MinimizationConfig,
    seeds: &[Vec<Vec<f64>>],
) -> Result<MinimizationResult> {
    let problem = Problem::new(group, xs, config)?;
    let mut starts = problem.starts()?;
    starts.extend(seeds.iter().cloned().map(|s| problem.prepare(s)));
    let mesh = problem.mesh_best();
    if let Some((_, tuple)) = &mesh {
        starts.push(tuple.clone());
    }
    let runs = map_indexed(config.execution, starts.len(), |i| {
        problem.descend(starts[i].clone())
    });
    let restarts_used = runs.len();
    let mut best = runs
        .into_iter()
        .reduce(|a, b| if b.value < a.value { b } else { a })
        .expect("at least one start");
    if let Some((value, tuple)) = mesh {
        if value < best.value {
            best = Run {
                value,
                converged: false,
                ps: tuple,
            };
        }
    }
    Ok(problem.finish(best, restarts_used))
}

struct Problem<'a> {
    group: &'a FiniteAbelianGroup,
    targets: Vec<f64>,
    config: &'a MinimizationConfig,
}

struct Run {
    value: f64,
    converged: bool,
    ps: Vec<Vec<f64>>,
}

impl<'a> Problem<'a> {
    fn new(group: &'a FiniteAbelianGroup, xs: &[f64], config: &'a MinimizationConfig) -> Result<Self> {
        config.validate()?;
        if xs.is_empty() {
            return Err(EpiError::Domain("at least one entropy is required".into()));
        }
        if xs.len() > MAX_SUMMANDS || group.order() > MAX_ORDER {
            return Err(EpiError::Capacity(format!(
                "numeric minimization supports up to {MAX_SUMMANDS} summands on groups of order <= {MAX_ORDER}, got {} on {group}",
                xs.len()
            )));
        }
        let max = group.log_order();
        let targets = xs
            .iter()
            .map(|&x| check_entropy(x, max))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            group,
            targets,
            config,
        })
    }

    fn order(&self) -> usize {
        self.group.order()
    }

    fn prepare(&self, mut tuple: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
        for (p, &x) in tuple.iter_mut().zip(&self.targets) {
            normalize(p);
            retract(p, x);
        }
        tuple
    }

    fn starts(&self) -> Result<Vec<Vec<Vec<f64>>>> {
        let n = self.order();
        let k = self.targets.len();
        let mut starts = Vec::new();
        if self.config.structured_starts {
            if self.group.is_two_group() {
                let extremal: Vec<Vec<f64>> = extremal_tuple(self.group, &self.targets)?
                    .into_iter()
                    .map(GroupDistribution::into_probs)
                    .collect();
                starts.push(extremal);
                // same boxes, heavier mass on the non-identity coset
                let chain = canonical_chain(self.group)?;
                let depth = chain.depth();
                let flipped = self
                    .targets
                    .iter()
                    .map(|&x| {
                        let kx = crate::closed_form::box_index(x, depth);
                        let q = crate::entropy::h_inv_raw(crate::closed_form::local_coordinate(x, kx));
                        two_level_on_chain(&chain, kx, q, None).map(GroupDistribution::into_probs)
                    })
                    .collect::<Result<Vec<_>>>()?;
                starts.push(flipped);
            }
            let interval: Vec<Vec<f64>> = self
                .targets
                .iter()
                .map(|&x| {
                    let m = (x.exp().ceil() as usize).clamp(1, n);
                    (0..n).map(|g| if g < m { 1.0 } else { 0.0 }).collect()
                })
                .collect();
            starts.push(interval);
            let geometric: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..n).map(|g| 0.5f64.powi(g as i32)).collect())
                .collect();
            starts.push(geometric);
        }
        let shapes = [0.2, 0.5, 1.0, 3.0];
        for r in 0..self.config.restarts {
            let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
            rng.set_stream(r as u64);
            let gamma = Gamma::new(shapes[r % shapes.len()], 1.0).expect("positive shape");
            let tuple: Vec<Vec<f64>> = (0..k)
                .map(|_| {
                    let mut p: Vec<f64> = (0..n).map(|_| gamma.sample(&mut rng)).collect();
                    if p.iter().sum::<f64>() <= 0.0 {
                        p[0] = 1.0;
                    }
                    p
                })
                .collect();
            starts.push(tuple);
        }
        Ok(starts.into_iter().map(|s| self.prepare(s)).collect())
    }

    fn sum_entropy(&self, ps: &[Vec<f64>]) -> f64 {
        shannon(&convolve_all(self.group, ps, None))
    }

    fn descend(&self, mut ps: Vec<Vec<f64>>) -> Run {
        let k = ps.len();
        let mut value = self.sum_entropy(&ps);
        let mut stall = 0;
        let mut stalled = false;
        for _ in 0..self.config.max_iterations {
            let mut current = value;
            for i in 0..k {
                let others = convolve_all(self.group, &ps, Some(i));
                let r = convolve_raw(self.group, &ps[i], &others);
                let log_r: Vec<f64> = r.iter().map(|&v| v.max(LOG_FLOOR).ln()).collect();
                let mut c = vec![0.0; self.order()];
                for (g, cg) in c.iter_mut().enumerate() {
                    for (h, &oh) in others.iter().enumerate() {
                        if oh > 0.0 {
                            *cg -= oh * log_r[self.group.add(g, h)];
                        }
                    }
                }
                let Some(mut q) = gibbs(&c, self.targets[i]) else {
                    continue;
                };
                if let StepSchedule::Damped(l) = self.config.step_schedule {
                    for (qg, &pg) in q.iter_mut().zip(&ps[i]) {
                        *qg = l * *qg + (1.0 - l) * pg;
                    }
                }
                retract(&mut q, self.targets[i]);
                let candidate = shannon(&convolve_raw(self.group, &q, &others));
                if candidate <= current {
                    ps[i] = q;
                    current = candidate;
                }
            }
            if value - current <= STALL_TOLERANCE * value.abs().max(1.0) {
                stall += 1;
                if stall >= STALL_SWEEPS {
                    stalled = true;
                    value = current;
                    break;
                }
            } else {
                stall = 0;
            }
            value = current;
        }
        Run {
            value,
            converged: stalled,
            ps,
        }
    }

    /// Best tuple on the coarse simplex mesh, each mesh point first moved
    /// onto its entropy target.
    fn mesh_best(&self) -> Option<(f64, Vec<Vec<f64>>)> {
        let n = self.order();
        let res = self.config.coarse_grid_resolution;
        if n > MESH_MAX_ORDER || res == 0 {
            return None;
        }
        let mesh = simplex_mesh(n, res);
        let k = self.targets.len();
        let per_var = (MESH_PAIR_BUDGET as f64).powf(1.0 / k as f64).floor().max(1.0) as usize;
        let candidates: Vec<Vec<Vec<f64>>> = self
            .targets
            .iter()
            .map(|&x| {
                mesh.nearest(x, per_var)
                    .into_iter()
                    .map(|mut p| {
                        retract(&mut p, x);
                        p
                    })
                    .collect()
            })
            .collect();
        let sizes: Vec<usize> = candidates.iter().map(Vec::len).collect();
        let total: usize = sizes.iter().product();
        let mut best: Option<(f64, Vec<usize>)> = None;
        let mut idx = vec![0usize; k];
        for _ in 0..total {
            let tuple: Vec<Vec<f64>> = idx.iter().zip(&candidates).map(|(&j, c)| c[j].clone()).collect();
            let v = self.sum_entropy(&tuple);
            if best.as_ref().is_none_or(|(b, _)| v < *b) {
                best = Some((v, idx.clone()));
            }
            for d in (0..k).rev() {
                idx[d] += 1;
                if idx[d] < sizes[d] {
                    break;
                }
                idx[d] = 0;
            }
        }
        best.map(|(v, idx)| {
            (
                v,
                idx.iter().zip(&candidates).map(|(&j, c)| c[j].clone()).collect(),
            )
        })
    }

    fn finish(&self, best: Run, restarts_used: usize) -> MinimizationResult {
        let achieved: Vec<f64> = best.ps.iter().map(|p| shannon(p)).collect();
        let feasible = achieved
            .iter()
            .zip(&self.targets)
            .all(|(a, t)| (a - t).abs() <= self.config.entropy_tolerance);
        let value = self.sum_entropy(&best.ps);
        MinimizationResult {
            value,
            argmin: best
                .ps
                .into_iter()
                .map(|p| GroupDistribution::from_raw(self.group.clone(), p))
                .collect(),
            achieved_entropies: achieved,
            converged: best.converged && feasible,
            restarts_used,
        }
    }
}

fn normalize(p: &mut [f64]) {
    p.iter_mut().for_each(|v| *v = v.max(0.0));
    let total: f64 = p.iter().sum();
    if total > 0.0 {
        p.iter_mut().for_each(|v| *v /= total);
    } else {
        p.iter_mut().for_each(|v| *v = 0.0);
        p[0] = 1.0;
    }
}

/// Convolution of all distributions except the one at `skip`.
fn convolve_all(group: &FiniteAbelianGroup, ps: &[Vec<f64>], skip: Option<usize>) -> Vec<f64> {
    let mut acc = vec![0.0; group.order()];
    acc[0] = 1.0;
    for (i, p) in ps.iter().enumerate() {
        if Some(i) != skip {
            acc = convolve_raw(group, &acc, p);
        }
    }
    acc
}

fn gibbs_weights(shifted: &[f64], beta: f64) -> (f64, Vec<f64>) {
    let mut w: Vec<f64> = shifted.iter().map(|&c| (-beta * c).exp()).collect();
    let z: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= z);
    (shannon(&w), w)
}

/// Minimizer of `c · p` over `H(p) ≥ target`, or `None` when `c` is flat and
/// every feasible point is equally good.
fn gibbs(c: &[f64], target: f64) -> Option<Vec<f64>> {
    let n = c.len();
    let cmin = c.iter().copied().fold(f64::INFINITY, f64::min);
    let shifted: Vec<f64> = c.iter().map(|&v| v - cmin).collect();
    let spread = shifted.iter().copied().fold(0.0, f64::max);
    if spread <= 1e-15 * cmin.abs().max(1.0) {
        return None;
    }
    if target >= (n as f64).ln() {
        return Some(vec![1.0 / n as f64; n]);
    }
    if target <= 0.0 {
        let mut q = vec![0.0; n];
        q[shifted.iter().position(|&v| v == 0.0).expect("minimum attained")] = 1.0;
        return Some(q);
    }
    let mut hi = 1.0 / spread;
    let mut lo = 0.0;
    let (mut h_hi, mut q_hi) = gibbs_weights(&shifted, hi);
    while h_hi > target {
        if hi > 1e200 {
            // the target lies below the entropy of the tie set
            return Some(q_hi);
        }
        lo = hi;
        hi *= 2.0;
        (h_hi, q_hi) = gibbs_weights(&shifted, hi);
    }
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (h, q) = gibbs_weights(&shifted, mid);
        if h > target {
            lo = mid;
        } else {
            hi = mid;
            q_hi = q;
        }
    }
    Some(q_hi)
}

/// Moves `p` onto `{H = target}` along a segment: toward the uniform
/// distribution when the entropy is too low, toward the point mass at its
/// largest entry when too high. Entropy is monotone along either segment.
pub(crate) fn retract(p: &mut [f64], target: f64) {
    let n = p.len();
    let max = (n as f64).ln();
    if target >= max {
        p.iter_mut().for_each(|v| *v = 1.0 / n as f64);
        return;
    }
    let top = p
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc })
        .0;
    if target <= 0.0 {
        p.iter_mut().for_each(|v| *v = 0.0);
        p[top] = 1.0;
        return;
    }
    let h0 = shannon(p);
    if h0 == target {
        return;
    }
    let base = p.to_vec();
    let toward_uniform = h0 < target;
    let mix = |t: f64, out: &mut [f64]| {
        for (g, o) in out.iter_mut().enumerate() {
            let end = if toward_uniform {
                1.0 / n as f64
            } else if g == top {
                1.0
            } else {
                0.0
            };
            *o = (1.0 - t) * base[g] + t * end;
        }
    };
    let entropy_at = |t: f64, scratch: &mut [f64]| {
        mix(t, scratch);
        -scratch.iter().map(|&v| xlnx(v)).sum::<f64>()
    };
    let mut scratch = vec![0.0; n];
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let below = entropy_at(mid, &mut scratch) < target;
        if below == toward_uniform {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = if (entropy_at(lo, &mut scratch) - target).abs() <= (entropy_at(hi, &mut scratch) - target).abs() {
        lo
    } else {
        hi
    };
    mix(t, p);
}

struct SimplexMesh {
    dim: usize,
    res: usize,
    /// Mesh points as integer compositions of `res`, sorted by entropy.
    points: Vec<u8>,
    entropies: Vec<f64>,
}

impl SimplexMesh {
    fn build(dim: usize, res: usize) -> Self {
        let mut raw: Vec<(f64, Vec<u8>)> = Vec::new();
        let mut current = vec![0u8; dim];
        fn rec(i: usize, left: usize, cur: &mut Vec<u8>, res: usize, out: &mut Vec<(f64, Vec<u8>)>) {
            if i + 1 == cur.len() {
                cur[i] = left as u8;
                let h = -cur.iter().map(|&c| xlnx(c as f64 / res as f64)).sum::<f64>();
                out.push((h, cur.clone()));
                return;
            }
            for c in 0..=left {
                cur[i] = c as u8;
                rec(i + 1, left - c, cur, res, out);
            }
        }
        rec(0, res, &mut current, res, &mut raw);
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self {
            dim,
            res,
            entropies: raw.iter().map(|r| r.0).collect(),
            points: raw.into_iter().flat_map(|r| r.1).collect(),
        }
    }

    fn point(&self, i: usize) -> Vec<f64> {
        self.points[i * self.dim..(i + 1) * self.dim]
            .iter()
            .map(|&c| c as f64 / self.res as f64)
            .collect()
    }

    /// The `count` mesh points whose entropy is closest to `x`.
    fn nearest(&self, x: f64, count: usize) -> Vec<Vec<f64>> {
        let len = self.entropies.len();
        let split = self.entropies.partition_point(|&h| h < x);
        let (mut lo, mut hi) = (split, split);
        while hi - lo < count.min(len) {
            let take_hi = lo == 0 || (hi < len && self.entropies[hi] - x <= x - self.entropies[lo - 1]);
            if take_hi {
                hi += 1;
            } else {
                lo -= 1;
            }
        }
        (lo..hi).map(|i| self.point(i)).collect()
    }
}

type MeshCache = Mutex<HashMap<(usize, usize), Arc<SimplexMesh>>>;

fn simplex_mesh(dim: usize, res: usize) -> Arc<SimplexMesh> {
    static CACHE: OnceLock<MeshCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(m) = cache.lock().expect("mesh cache").get(&(dim, res)) {
        return m.clone();
    }
    let mesh = Arc::new(SimplexMesh::build(dim, res.min(u8::MAX as usize)));
    cache
        .lock()
        .expect("mesh cache")
        .entry((dim, res))
        .or_insert(mesh)
        .clone()
}

/// `resolution + 1` evenly spaced points on `[0, max]`.
pub fn uniform_grid(max: f64, resolution: usize) -> Vec<f64> {
    let r = resolution.max(1);
    (0..=r).map(|i| max * i as f64 / r as f64).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanConfig {
    pub minimization: MinimizationConfig,
    /// Second differences below `-tolerance` are reported.
    pub tolerance: f64,
    /// Effort multiplier for re-running flagged points.
    pub rerun_effort: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            minimization: MinimizationConfig::default(),
            tolerance: 1e-4,
            rerun_effort: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityViolation {
    pub fixed: f64,
    /// The three consecutive grid points of the offending difference.
    pub xs: [f64; 3],
    pub second_difference: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanRow {
    pub fixed: f64,
    pub values: Vec<f64>,
    pub min_second_difference: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub label: String,
    pub group: String,
    pub axis: Vec<f64>,
    pub tolerance: f64,
    pub rows: Vec<ScanRow>,
    /// Points re-optimized at higher effort after being flagged.
    pub rerun_points: usize,
    pub violations: Vec<ConvexityViolation>,
}

impl ConvexityReport {
    /// No second difference fell below `-tolerance`.
    pub fn consistent(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Second differences on a possibly uneven grid, scaled so that an even grid
/// gives `v[i-1] - 2 v[i] + v[i+1]`.
pub fn second_differences(xs: &[f64], vs: &[f64]) -> Vec<f64> {
    (1..xs.len().saturating_sub(1))
        .map(|i| {
            let (hm, hp) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
            ((vs[i + 1] - vs[i]) / hp - (vs[i] - vs[i - 1]) / hm) * 0.5 * (hm + hp)
        })
        .collect()
}

/// Numeric check that `x ↦ min H(X + Y)` is convex for each fixed `y`.
///
/// Every grid point is optimized independently, then improved by sweeping
/// along the axis in both directions with the neighbor's minimizer as an
/// extra start. Points in a triple whose second difference is below
/// `-tolerance` are re-optimized at higher effort before being reported.
pub fn convexity_scan(
    group: &FiniteAbelianGroup,
    axis_grid: &[f64],
    fixed_values: &[f64],
    config: &ScanConfig,
) -> Result<ConvexityReport> {
    if group.order() > MAX_SCAN_ORDER {
        return Err(EpiError::Capacity(format!(
            "convexity scans support groups of order <= {MAX_SCAN_ORDER}, got {group}"
        )));
    }
    config.minimization.validate()?;
    let max = group.log_order();
    let axis = axis_grid
        .iter()
        .map(|&x| check_entropy(x, max))
        .collect::<Result<Vec<_>>>()?;
    let fixed = fixed_values
        .iter()
        .map(|&y| check_entropy(y, max))
        .collect::<Result<Vec<_>>>()?;
    let exec = config.minimization.execution;
    let inner = MinimizationConfig {
        execution: Execution::Sequential,
        ..config.minimization.clone()
    };
    let width = axis.len();

    let points = map_indexed(exec, fixed.len() * width, |idx| {
        let (row, col) = (idx / width, idx % width);
        min_sum_entropy(group, axis[col], fixed[row], &inner)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<Vec<MinimizationResult>> = points
        .chunks(width)
        .map(|c| c.to_vec())
        .collect();

    rows = map_indexed(exec, rows.len(), |r| {
        continuation(group, &axis, fixed[r], rows[r].clone(), &inner)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let effort = inner.scaled(config.rerun_effort);
    let mut rerun_points = 0;
    for _ in 0..2 {
        let flagged: Vec<(usize, usize)> = rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| {
                let vals: Vec<f64> = row.iter().map(|m| m.value).collect();
                second_differences(&axis, &vals)
                    .into_iter()
                    .enumerate()
                    .filter(|(_, d)| *d < -config.tolerance)
                    .flat_map(move |(i, _)| [(r, i), (r, i + 1), (r, i + 2)])
                    .collect::<Vec<_>>()
            })
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        if flagged.is_empty() {
            break;
        }
        rerun_points += flagged.len();
        let redone = map_indexed(exec, flagged.len(), |j| {
            let (r, c) = flagged[j];
            let seeds: Vec<Vec<Vec<f64>>> = [c.checked_sub(1), Some(c + 1)]
                .into_iter()
                .flatten()
                .filter(|&nc| nc < width)
                .map(|nc| rows[r][nc].argmin.iter().map(|d| d.probs().to_vec()).collect())
                .collect();
            minimize_with_seeds(group, &[axis[c], fixed[r]], &effort, &seeds)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        for ((r, c), result) in flagged.into_iter().zip(redone) {
            if result.value < rows[r][c].value {
                rows[r][c] = result;
            }
        }
    }

    let mut violations = Vec::new();
    let report_rows = rows
        .iter()
        .zip(&fixed)
        .map(|(row, &y)| {
            let values: Vec<f64> = row.iter().map(|m| m.value).collect();
            let d2 = second_differences(&axis, &values);
            for (i, &d) in d2.iter().enumerate() {
                if d < -config.tolerance {
                    violations.push(ConvexityViolation {
                        fixed: y,
                        xs: [axis[i], axis[i + 1], axis[i + 2]],
                        second_difference: d,
                    });
                }
            }
            ScanRow {
                fixed: y,
                min_second_difference: d2.iter().copied().fold(f64::INFINITY, f64::min),
                values,
            }
        })
        .collect();
    Ok(ConvexityReport {
        label: "numerical consistency check (independent reconstruction, not a proof)".into(),
        group: group.to_string(),
        axis,
        tolerance: config.tolerance,
        rows: report_rows,
        rerun_points,
        violations,
    })
}

/// Forward and backward sweeps along one row, each point re-descended from
/// its neighbor's minimizer.
fn continuation(
    group: &FiniteAbelianGroup,
    axis: &[f64],
    y: f64,
    mut row: Vec<MinimizationResult>,
    config: &MinimizationConfig,
) -> Result<Vec<MinimizationResult>> {
    let seeded = MinimizationConfig {
        restarts: 1,
        structured_starts: false,
        coarse_grid_resolution: 0,
        ..config.clone()
    };
    let order: Vec<(usize, usize)> = (1..axis.len())
        .map(|c| (c - 1, c))
        .chain((0..axis.len().saturating_sub(1)).rev().map(|c| (c + 1, c)))
        .collect();
    for (from, to) in order {
        let seed: Vec<Vec<f64>> = row[from].argmin.iter().map(|d| d.probs().to_vec()).collect();
        let result = minimize_with_seeds(group, &[axis[to], y], &seeded, &[seed])?;
        if result.value < row[to].value {
            row[to] = result;
        }
    }
    Ok(row)
}
