//! Verification of the analytic inequalities behind the concavity of the
//! binary minimum-entropy function along rays: exact rational polynomials and
//! Sturm chains, the auxiliary transcendental functions, and grid checks of
//! each intermediate claim.

mod auxiliary;
mod claims;
mod poly;

pub use auxiliary::{eval_auxiliary, AuxiliaryFunction};
pub use claims::{verify_all, verify_claim, ClaimId, ClaimReport, MIN_GRID_SIZE};
pub use poly::{
    count_real_roots, lower_bound_identity, p1_hat, p2_hat, sturm_sequence, Polynomial,
    RootCount, SturmSequence,
};
