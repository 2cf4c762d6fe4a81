//! The one place where 4π-bearing coefficients are converted to the
//! normalized spherical-average convention used throughout [`crate::stats`].
//!
//! With `j`, `g` stored as normalized averages, the surface integrals are
//! `J = 4π j` and `G = 4π g`. Every law formula reads its constants here.

use std::f64::consts::PI;

/// Area of the unit sphere.
pub const SPHERE_AREA: f64 = 4.0 * PI;

/// (1/2π) J  =  J_OVER_2PI · j
pub const J_OVER_2PI: f64 = SPHERE_AREA / (2.0 * PI);
/// (1/8π) J
pub const J_OVER_8PI: f64 = SPHERE_AREA / (8.0 * PI);
/// (3/8π) J
pub const J_3_OVER_8PI: f64 = 3.0 * SPHERE_AREA / (8.0 * PI);
/// (15/8π) G
pub const G_15_OVER_8PI: f64 = 15.0 * SPHERE_AREA / (8.0 * PI);
/// (1/2π) G
pub const G_OVER_2PI: f64 = SPHERE_AREA / (2.0 * PI);

/// Coefficient of ε in the mixed third-order law.
pub const FOUR_THIRDS: f64 = 4.0 / 3.0;
/// Coefficient of ε in the longitudinal third-order law.
pub const FOUR_FIFTHS: f64 = 4.0 / 5.0;
/// Coefficients of ε̄ and ε̃ in the modified longitudinal law.
pub const FOUR_FIFTEENTHS: f64 = 4.0 / 15.0;
pub const EIGHT_FIFTEENTHS: f64 = 8.0 / 15.0;

/// Reference level of ν∫‖∇v‖² in anomalous-dissipation tables.
pub const DISSIPATION_REFERENCE: f64 = 0.25;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalized_table() {
        assert_eq!(J_OVER_2PI, 2.0);
        assert_eq!(J_OVER_8PI, 0.5);
        assert_eq!(J_3_OVER_8PI, 1.5);
        assert!((G_15_OVER_8PI - 7.5).abs() < 1e-15 * 7.5);
        assert_eq!(G_OVER_2PI, 2.0);
        assert_eq!(FOUR_FIFTEENTHS + EIGHT_FIFTEENTHS, FOUR_FIFTHS);
    }
}
