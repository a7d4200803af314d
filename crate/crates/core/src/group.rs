//! Finite abelian groups as direct sums of cyclic groups, distributions over
//! them, group convolution, and the two-level ("quasi-uniform") constructors
//! that achieve the minimum entropy of a sum.

use std::f64::consts::LN_2;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::closed_form::{box_index, local_coordinate};
use crate::entropy::{check_entropy, h_inv_raw, xlnx};
use crate::error::{domain, EpiError, Result};

/// Largest group order accepted for dense distributions.
pub const MAX_ORDER: usize = 1 << 12;

/// Total-mass tolerance for a valid distribution.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Negative entries down to this value are treated as rounding and zeroed.
pub const NEGATIVE_CLAMP: f64 = 1e-15;

const ADD_TABLE_MAX: usize = 256;

/// `Z_{m_1} ⊕ … ⊕ Z_{m_r}`. Elements are mixed-radix indices with the first
/// factor most significant.
#[derive(Clone)]
pub struct FiniteAbelianGroup {
    cyclic_orders: Vec<usize>,
    strides: Vec<usize>,
    order: usize,
    add_table: Option<Arc<Vec<u16>>>,
}

impl PartialEq for FiniteAbelianGroup {
    fn eq(&self, other: &Self) -> bool {
        self.cyclic_orders == other.cyclic_orders
    }
}

impl Eq for FiniteAbelianGroup {}

impl fmt::Debug for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteAbelianGroup({self})")
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.cyclic_orders.iter().map(|m| format!("z{m}")).collect();
        f.write_str(&parts.join("x"))
    }
}

impl Serialize for FiniteAbelianGroup {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GroupDescriptor {
            cyclic_orders: self.cyclic_orders.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FiniteAbelianGroup {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let desc = GroupDescriptor::deserialize(d)?;
        FiniteAbelianGroup::new(desc.cyclic_orders).map_err(serde::de::Error::custom)
    }
}

/// JSON group descriptor, e.g. `{"cyclic_orders":[2,4]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupDescriptor {
    pub cyclic_orders: Vec<usize>,
}

impl FiniteAbelianGroup {
    pub fn new(cyclic_orders: Vec<usize>) -> Result<Self> {
        if cyclic_orders.is_empty() {
            return domain("a group needs at least one cyclic factor");
        }
        if let Some(m) = cyclic_orders.iter().find(|&&m| m < 2) {
            return domain(format!("cyclic factor of order {m}; orders must be >= 2"));
        }
        let order = cyclic_orders
            .iter()
            .try_fold(1usize, |acc, &m| acc.checked_mul(m).filter(|&o| o <= MAX_ORDER));
        let order = order.ok_or_else(|| {
            EpiError::Capacity(format!(
                "group {cyclic_orders:?} exceeds the supported order {MAX_ORDER}"
            ))
        })?;
        let mut strides = vec![1; cyclic_orders.len()];
        for i in (0..cyclic_orders.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * cyclic_orders[i + 1];
        }
        let mut group = Self {
            cyclic_orders,
            strides,
            order,
            add_table: None,
        };
        if order <= ADD_TABLE_MAX {
            let table = (0..order * order)
                .map(|ab| group.add_slow(ab / order, ab % order) as u16)
                .collect();
            group.add_table = Some(Arc::new(table));
        }
        Ok(group)
    }

    pub fn cyclic(m: usize) -> Result<Self> {
        Self::new(vec![m])
    }

    /// Parses `z8`, `z2xz4`, … (case-insensitive, `x` separated).
    pub fn parse(desc: &str) -> Result<Self> {
        let orders = desc
            .trim()
            .to_ascii_lowercase()
            .split('x')
            .map(|part| {
                part.strip_prefix('z')
                    .and_then(|m| m.parse::<usize>().ok())
                    .ok_or_else(|| EpiError::Parse(format!("bad group descriptor '{desc}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(orders)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn cyclic_orders(&self) -> &[usize] {
        &self.cyclic_orders
    }

    /// `n` when the order is `2^n` and every factor is a power of two.
    pub fn two_exponent(&self) -> Option<u32> {
        self.cyclic_orders
            .iter()
            .all(|m| m.is_power_of_two())
            .then(|| self.order.trailing_zeros())
    }

    pub fn is_two_group(&self) -> bool {
        self.two_exponent().is_some()
    }

    /// `ln |G|`.
    pub fn log_order(&self) -> f64 {
        match self.two_exponent() {
            Some(n) => n as f64 * LN_2,
            None => (self.order as f64).ln(),
        }
    }

    /// The `k`-fold direct power `G ⊕ … ⊕ G`.
    pub fn power(&self, k: usize) -> Result<Self> {
        let orders = std::iter::repeat_n(self.cyclic_orders.iter().copied(), k)
            .flatten()
            .collect();
        Self::new(orders)
    }

    pub fn decode(&self, index: usize) -> Vec<usize> {
        self.cyclic_orders
            .iter()
            .zip(&self.strides)
            .map(|(&m, &s)| (index / s) % m)
            .collect()
    }

    pub fn encode(&self, coords: &[usize]) -> Result<usize> {
        if coords.len() != self.cyclic_orders.len() {
            return domain(format!("expected {} coordinates", self.cyclic_orders.len()));
        }
        Ok(coords
            .iter()
            .zip(&self.cyclic_orders)
            .zip(&self.strides)
            .map(|((&c, &m), &s)| (c % m) * s)
            .sum())
    }

    fn add_slow(&self, a: usize, b: usize) -> usize {
        self.cyclic_orders
            .iter()
            .zip(&self.strides)
            .map(|(&m, &s)| ((a / s % m + b / s % m) % m) * s)
            .sum()
    }

    #[inline]
    pub fn add(&self, a: usize, b: usize) -> usize {
        match &self.add_table {
            Some(t) => t[a * self.order + b] as usize,
            None => self.add_slow(a, b),
        }
    }

    pub fn neg(&self, a: usize) -> usize {
        self.cyclic_orders
            .iter()
            .zip(&self.strides)
            .map(|(&m, &s)| ((m - a / s % m) % m) * s)
            .sum()
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    fn require_two_group(&self) -> Result<u32> {
        self.two_exponent()
            .ok_or_else(|| EpiError::UnsupportedGroup(self.to_string()))
    }

    /// Elements whose `i`-th coordinate lies in the order-`d_i` subgroup of `Z_{m_i}`.
    fn subgroup_elements(&self, divisors: &[usize]) -> Vec<usize> {
        (0..self.order)
            .filter(|&g| {
                self.cyclic_orders
                    .iter()
                    .zip(&self.strides)
                    .zip(divisors)
                    .all(|((&m, &s), &d)| (g / s % m) % (m / d) == 0)
            })
            .collect()
    }
}

/// A probability vector over the elements of a group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupDistribution {
    group: FiniteAbelianGroup,
    probs: Vec<f64>,
}

impl GroupDistribution {
    pub fn new(group: FiniteAbelianGroup, mut probs: Vec<f64>) -> Result<Self> {
        if probs.len() != group.order() {
            return Err(EpiError::InvalidDistribution(format!(
                "{} probabilities for a group of order {}",
                probs.len(),
                group.order()
            )));
        }
        for p in probs.iter_mut() {
            if !p.is_finite() || *p < -NEGATIVE_CLAMP {
                return Err(EpiError::InvalidDistribution(format!("entry {p} is negative")));
            }
            *p = p.max(0.0);
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(EpiError::InvalidDistribution(format!(
                "entries sum to {total}, not 1"
            )));
        }
        probs.iter_mut().for_each(|p| *p /= total);
        Ok(Self { group, probs })
    }

    /// Builds a distribution from nonnegative weights of any total.
    pub fn from_weights(group: FiniteAbelianGroup, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if total.is_nan() || total <= 0.0 || weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(EpiError::InvalidDistribution("weights must be nonnegative".into()));
        }
        Self::new(group, weights.into_iter().map(|w| w / total).collect())
    }

    pub(crate) fn from_raw(group: FiniteAbelianGroup, probs: Vec<f64>) -> Self {
        debug_assert_eq!(group.order(), probs.len());
        Self { group, probs }
    }

    pub fn point_mass(group: FiniteAbelianGroup, element: usize) -> Result<Self> {
        if element >= group.order() {
            return domain(format!("element {element} outside group {group}"));
        }
        let mut probs = vec![0.0; group.order()];
        probs[element] = 1.0;
        Ok(Self { group, probs })
    }

    pub fn uniform(group: FiniteAbelianGroup) -> Self {
        let n = group.order();
        Self {
            group,
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        shannon(&self.probs)
    }

    /// `(a ⊛ b)[g] = Σ_h a[h] b[g - h]`.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        if self.group != other.group {
            return Err(EpiError::GroupMismatch {
                left: self.group.to_string(),
                right: other.group.to_string(),
            });
        }
        Ok(Self {
            probs: convolve_raw(&self.group, &self.probs, &other.probs),
            group: self.group.clone(),
        })
    }

    /// The off-coset mass `α` if this distribution is constant on both cosets
    /// of the index-2 subgroup of a cyclic 2-group (a "2^n-ary Gaussian").
    pub fn gaussian_parameter(&self) -> Option<f64> {
        let n = self.group.two_exponent()?;
        if self.group.cyclic_orders().len() != 1 {
            return None;
        }
        if n == 0 || self.group.cyclic_orders().len() != 1 {
            return None;
        }
        let tol = 1e-12;
        let (e0, o0) = (self.probs[0], self.probs[1]);
        let flat = self.probs.chunks(2).all(|c| (c[0] - e0).abs() <= tol && (c[1] - o0).abs() <= tol);
        flat.then(|| self.probs.iter().skip(1).step_by(2).sum::<f64>().clamp(0.0, 1.0))
    }

    pub fn is_gaussian(&self) -> bool {
        self.gaussian_parameter().is_some()
    }
}

pub(crate) fn shannon(probs: &[f64]) -> f64 {
    -probs.iter().map(|&p| xlnx(p)).sum::<f64>()
}

pub(crate) fn convolve_raw(group: &FiniteAbelianGroup, a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = group.order();
    let mut out = vec![0.0; n];
    for (h, &ah) in a.iter().enumerate() {
        if ah == 0.0 {
            continue;
        }
        for (k, &bk) in b.iter().enumerate() {
            out[group.add(h, k)] += ah * bk;
        }
    }
    out
}

/// Free function form of [`GroupDistribution::convolve`].
pub fn convolve(a: &GroupDistribution, b: &GroupDistribution) -> Result<GroupDistribution> {
    a.convolve(b)
}

/// Free function form of [`GroupDistribution::entropy`].
pub fn entropy(d: &GroupDistribution) -> f64 {
    d.entropy()
}

/// Nested subgroups `{0} = L_0 ⊂ L_1 ⊂ … ⊂ L_n = G` with `|L_k| = 2^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgroupChain {
    group: FiniteAbelianGroup,
    levels: Vec<Vec<usize>>,
}

impl SubgroupChain {
    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    /// Exponent `n` of the group order.
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    /// Sorted element indices of the order-`2^k` subgroup.
    pub fn level(&self, k: usize) -> Option<&[usize]> {
        self.levels.get(k).map(Vec::as_slice)
    }

    pub fn levels(&self) -> &[Vec<usize>] {
        &self.levels
    }
}

/// Canonical maximal chain of a 2-group.
///
/// Factors are visited in decreasing order (ties keep their position) and the
/// chain doubles inside the first factor that still has room. For `Z_{2^n}`
/// level `k` is `{0, 2^{n-k}, 2·2^{n-k}, …}`.
pub fn canonical_chain(group: &FiniteAbelianGroup) -> Result<SubgroupChain> {
    let n = group.require_two_group()? as usize;
    let mut visit: Vec<usize> = (0..group.cyclic_orders.len()).collect();
    visit.sort_by_key(|&i| std::cmp::Reverse(group.cyclic_orders[i]));
    let mut divisors = vec![1usize; group.cyclic_orders.len()];
    let mut levels = Vec::with_capacity(n + 1);
    levels.push(group.subgroup_elements(&divisors));
    for _ in 0..n {
        let i = visit
            .iter()
            .copied()
            .find(|&i| divisors[i] < group.cyclic_orders[i])
            .expect("a proper subgroup always has a factor with room");
        divisors[i] *= 2;
        levels.push(group.subgroup_elements(&divisors));
    }
    Ok(SubgroupChain {
        group: group.clone(),
        levels,
    })
}

/// Mass `alpha` uniform on chain level `k` (`C_0`) and `1 - alpha` uniform on
/// the coset `C_1 = offset + C_0` inside level `k + 1`.
///
/// `offset` defaults to the smallest element of level `k + 1` outside level
/// `k`. The entropy is `k ln 2 + h(alpha)`.
pub fn two_level_distribution(
    group: &FiniteAbelianGroup,
    k: usize,
    alpha: f64,
    offset: Option<usize>,
) -> Result<GroupDistribution> {
    let chain = canonical_chain(group)?;
    two_level_on_chain(&chain, k, alpha, offset)
}

pub(crate) fn two_level_on_chain(
    chain: &SubgroupChain,
    k: usize,
    alpha: f64,
    offset: Option<usize>,
) -> Result<GroupDistribution> {
    let n = chain.depth();
    if k >= n {
        return domain(format!("level {k} has no coset above it in a chain of depth {n}"));
    }
    if !(-NEGATIVE_CLAMP..=1.0 + NEGATIVE_CLAMP).contains(&alpha) {
        return domain(format!("alpha {alpha} outside [0, 1]"));
    }
    let alpha = alpha.clamp(0.0, 1.0);
    let c0 = &chain.levels[k];
    let upper = &chain.levels[k + 1];
    let offset = match offset {
        Some(o) => {
            if !upper.contains(&o) || c0.contains(&o) {
                return domain(format!("offset {o} is not in level {} \\ level {k}", k + 1));
            }
            o
        }
        None => *upper
            .iter()
            .find(|g| c0.binary_search(g).is_err())
            .expect("level k+1 is twice level k"),
    };
    let group = chain.group();
    let size = c0.len() as f64;
    let mut probs = vec![0.0; group.order()];
    for &g in c0 {
        probs[g] = alpha / size;
        probs[group.add(offset, g)] = (1.0 - alpha) / size;
    }
    Ok(GroupDistribution::from_raw(group.clone(), probs))
}

/// The `2^n`-ary Gaussian on `Z_{2^n}`: constant on the two cosets of the
/// index-2 subgroup, with mass `alpha` on the non-identity coset. On `Z_2`
/// this is Bernoulli(`alpha`), and `gaussian(a) ⊛ gaussian(b) = gaussian(a ⋆ b)`.
pub fn gaussian_2n(group: &FiniteAbelianGroup, alpha: f64) -> Result<GroupDistribution> {
    let n = group.require_two_group()?;
    if group.cyclic_orders().len() != 1 {
        return Err(EpiError::Precondition(format!(
            "2^n-ary Gaussians are defined on cyclic groups, got {group}"
        )));
    }
    two_level_distribution(group, n as usize - 1, 1.0 - alpha, None)
}

/// Distributions with the prescribed entropies whose sum has the smallest
/// possible entropy.
///
/// Let `m` be the highest entropy box `[m ln 2, (m+1) ln 2]` occupied by any
/// target. Variables in that box are two-level on the cosets of chain level
/// `m` inside level `m + 1`; the rest are two-level at their own box level,
/// hence supported inside level `m`, and leave the top-box convolution
/// unchanged.
pub fn extremal_tuple(group: &FiniteAbelianGroup, xs: &[f64]) -> Result<Vec<GroupDistribution>> {
    let n = group.require_two_group()? as usize;
    let max = n as f64 * LN_2;
    let chain = canonical_chain(group)?;
    xs.iter()
        .map(|&x| {
            let x = check_entropy(x, max)?;
            let k = box_index(x, n);
            let crossover = h_inv_raw(local_coordinate(x, k));
            two_level_on_chain(&chain, k, 1.0 - crossover, None)
        })
        .collect()
}

/// [`extremal_tuple`] for two variables.
pub fn extremal_pair(
    group: &FiniteAbelianGroup,
    x: f64,
    y: f64,
) -> Result<(GroupDistribution, GroupDistribution)> {
    let mut v = extremal_tuple(group, &[x, y])?;
    let py = v.pop().expect("two entries");
    let px = v.pop().expect("two entries");
    Ok((px, py))
}

/// JSON distribution literal: a group descriptor plus probabilities given as
/// numbers or decimal strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistributionLiteral {
    pub group: GroupDescriptor,
    pub probs: Vec<ProbLiteral>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProbLiteral {
    Number(f64),
    Text(String),
}

impl ProbLiteral {
    pub fn value(&self) -> Result<f64> {
        match self {
            ProbLiteral::Number(v) => Ok(*v),
            ProbLiteral::Text(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|_| EpiError::Parse(format!("'{s}' is not a decimal number"))),
        }
    }
}

/// Parses a list of probability literals against a known group.
pub fn probs_from_literals(group: &FiniteAbelianGroup, probs: &[ProbLiteral]) -> Result<GroupDistribution> {
    let values = probs.iter().map(ProbLiteral::value).collect::<Result<Vec<_>>>()?;
    GroupDistribution::new(group.clone(), values)
}

impl DistributionLiteral {
    pub fn into_distribution(self) -> Result<GroupDistribution> {
        let group = FiniteAbelianGroup::new(self.group.cyclic_orders)?;
        probs_from_literals(&group, &self.probs)
    }

    pub fn from_distribution(d: &GroupDistribution) -> Self {
        Self {
            group: GroupDescriptor {
                cyclic_orders: d.group().cyclic_orders().to_vec(),
            },
            probs: d.probs().iter().map(|&p| ProbLiteral::Number(p)).collect(),
        }
    }
}
