//! Minimum entropy of sums of independent random variables on finite abelian
//! groups, with exact closed forms for groups of order `2^n`, a numeric
//! minimizer for arbitrary small groups, information-theoretic applications,
//! and exact-arithmetic verification of the supporting inequalities.

pub mod applications;
pub mod closed_form;
pub mod entropy;
pub mod error;
pub mod exec;
pub mod group;
pub mod lemmas;
pub mod numeric;

pub use closed_form::{direct_sum_lower_bound, f_2n, f_gk, f_group, f_group_k};
pub use entropy::{binary_entropy, df2_dx, f2, inverse_binary_entropy, star, BernoulliParam};
pub use error::{EpiError, Result};
pub use exec::{init_threads, map_indexed, map_slice, Execution};
pub use group::{
    canonical_chain, convolve, entropy, extremal_pair, extremal_tuple, gaussian_2n,
    two_level_distribution, FiniteAbelianGroup, GroupDistribution, SubgroupChain,
};
