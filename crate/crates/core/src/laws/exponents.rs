//! Scaling exponents and dissipation tables.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::laws::constants::DISSIPATION_REFERENCE;
use crate::solver::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentFit {
    /// Least-squares slope of log ∫S₃ against log ℓ.
    pub zeta_fit: f64,
    pub intercept: f64,
    /// Lower end 3α of the admissible band.
    pub zeta3_lo: f64,
    /// Upper end of the admissible band.
    pub zeta3_hi: f64,
}

impl ExponentFit {
    pub fn in_band(&self) -> bool {
        self.zeta3_lo <= self.zeta_fit && self.zeta_fit <= self.zeta3_hi
    }
}

/// Band [3α, 1] that the third-order absolute exponent must lie in.
pub fn zeta3_band(alpha: f64) -> (f64, f64) {
    (3.0 * alpha, 1.0)
}

/// Fits `values ≈ c ℓ^ζ` over at least five samples.
pub fn exponent_fit(ells: &[f64], values: &[f64], alpha: f64) -> Result<ExponentFit> {
    if ells.len() != values.len() {
        return Err(Error::InvalidInput("scale and value lists differ in length".into()));
    }
    if ells.len() < 5 {
        return Err(Error::DegenerateData(format!("need at least 5 scales, got {}", ells.len())));
    }
    if let Some(v) = values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::DegenerateData(format!("structure-function integral {v} is not positive")));
    }
    if ells.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::DegenerateData("scales must be positive".into()));
    }
    let x: Vec<f64> = ells.iter().map(|l| l.ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateData("all scales coincide".into()));
    }
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let (lo, hi) = zeta3_band(alpha);
    Ok(ExponentFit {
        zeta_fit: slope,
        intercept: my - slope * mx,
        zeta3_lo: lo,
        zeta3_hi: hi,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DissipationTable {
    /// (ν, ν∫₀¹‖∇v‖²) sorted by decreasing ν
    pub rows: Vec<(f64, f64)>,
    /// True when the dissipation decreases monotonically as ν decreases.
    pub vanishing_trend: bool,
    pub reference: f64,
}

pub fn anomalous_dissipation_probe(trajectories: &[&Trajectory]) -> Result<DissipationTable> {
    let mut rows = Vec::with_capacity(trajectories.len());
    for tr in trajectories {
        rows.push((tr.nu, tr.epsilon_nu(tr.t_end())?.dissipation));
    }
    rows.sort_by(|a, b| b.0.total_cmp(&a.0));
    let vanishing_trend = rows.windows(2).all(|w| w[1].1 <= w[0].1);
    Ok(DissipationTable {
        rows,
        vanishing_trend,
        reference: DISSIPATION_REFERENCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn band_and_degenerate_inputs() {
        let (lo, hi) = zeta3_band(0.32);
        assert!((lo - 0.96).abs() < 1e-15);
        assert_eq!(hi, 1.0);
        let ells = [0.1, 0.2, 0.3, 0.4, 0.5];
        assert!(matches!(exponent_fit(&ells, &[1.0, 2.0, 0.0, 1.0, 1.0], 0.3), Err(Error::DegenerateData(_))));
        assert!(matches!(exponent_fit(&ells[..4], &[1.0; 4], 0.3), Err(Error::DegenerateData(_))));
    }

    proptest! {
        #[test]
        fn exact_power_laws_recovered(zeta in -1.0f64..4.0, c in 1e-3f64..1e3, lo in 1e-3f64..0.1) {
            let ells: Vec<f64> = (0..8).map(|i| lo * 1.5f64.powi(i)).collect();
            let vals: Vec<f64> = ells.iter().map(|l| c * l.powf(zeta)).collect();
            let fit = exponent_fit(&ells, &vals, 0.3).unwrap();
            prop_assert!((fit.zeta_fit - zeta).abs() < 1e-8);
        }
    }
}
