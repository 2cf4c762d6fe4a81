//! Exact relations of the statistics: the scale-space balance, the S₀ and
//! S‖ identities, the L^p and modified 4/3 and 4/5 laws and the ζ₃
//! exponent machinery.

pub mod constants;
pub mod exponents;
pub mod identities;
pub mod profile;
pub mod range;
pub mod series;
pub mod khm;
pub mod report;

pub use report::{
    four_fifths_residual, four_thirds_residual, law_cell, law_report, modified_epsilons, modified_law_residuals,
    random_time_residual, s0_identity_residual, s_par_identity_residual, LawCell, LawOptions, LawReport,
};
