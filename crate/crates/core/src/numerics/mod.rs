//! Deterministic numerical primitives shared across the crate: Pareto
//! distribution utilities, bisection root finding, fixed-effects least squares
//! with robust covariance, and chi-square tail probabilities.

pub mod gamma;
pub mod pareto;
pub mod regress;
pub mod root;

pub use gamma::{chi_square_sf, ln_gamma, reg_gamma_lower, reg_gamma_upper};
pub use pareto::ParetoDist;
pub use regress::{
    fe_ols, wald_joint, CovarianceMode, Design, RegressionFit, WaldTest, RANK_TOLERANCE,
};
pub use root::{bisect, DEFAULT_BISECT_TOL};

/// Derive an independent task seed from a root seed and a task index.
///
/// SplitMix64 finalizer over root ⊕ golden-ratio stepped index; replications
/// seeded this way are mutually independent and reproducible.
pub fn derive_seed(root: u64, index: u64) -> u64 {
    let mut z = root ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
