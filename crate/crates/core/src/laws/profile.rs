//! Radial test functions for the scale-space balance, with closed-form
//! derivatives.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialProfile {
    Zero,
    /// `amplitude · exp(−1 / (1 − s²))` with `s = (r − center) / width`,
    /// zero for |s| ≥ 1.
    Bump { center: f64, width: f64, amplitude: f64 },
}

impl RadialProfile {
    pub fn bump(center: f64, width: f64) -> Self {
        RadialProfile::Bump { center, width, amplitude: 1.0 }
    }

    /// (value, first, second) derivative in r.
    pub fn eval(&self, r: f64) -> [f64; 3] {
        match *self {
            RadialProfile::Zero => [0.0; 3],
            RadialProfile::Bump { center, width, amplitude } => {
                let s = (r - center) / width;
                if s.abs() >= 1.0 {
                    return [0.0; 3];
                }
                let u = 1.0 - s * s;
                let v = amplitude * (-1.0 / u).exp();
                let gs = -2.0 * s / (u * u);
                let gss = -2.0 / (u * u) - 8.0 * s * s / (u * u * u);
                [v, v * gs / width, v * (gs * gs + gss) / (width * width)]
            }
        }
    }

    /// Closed support interval, if any.
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            RadialProfile::Zero => None,
            RadialProfile::Bump { center, width, .. } => Some((center - width, center + width)),
        }
    }
}

/// `η(h) = φ(|h|) I + ϕ(|h|) ĥ⊗ĥ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionSpec {
    pub phi: RadialProfile,
    pub varphi: RadialProfile,
}

impl TestFunctionSpec {
    pub fn new(phi: RadialProfile, varphi: RadialProfile) -> Self {
        Self { phi, varphi }
    }

    /// Union of the supports of both profiles.
    pub fn support(&self) -> Option<(f64, f64)> {
        match (self.phi.support(), self.varphi.support()) {
            (None, None) => None,
            (Some(a), None) | (None, Some(a)) => Some(a),
            (Some(a), Some(b)) => Some((a.0.min(b.0), a.1.max(b.1))),
        }
    }

    /// Checks that the support lies in (0, π) and above the grid spacing.
    pub fn check(&self, dx: f64) -> Result<(f64, f64)> {
        let (lo, hi) = self
            .support()
            .ok_or_else(|| Error::InvalidInput("test function is identically zero".into()))?;
        for p in [self.phi, self.varphi] {
            if let RadialProfile::Bump { width, amplitude, .. } = p {
                if !(width > 0.0) || !amplitude.is_finite() {
                    return Err(Error::InvalidInput("bump needs positive width and finite amplitude".into()));
                }
            }
        }
        if !(lo > 0.0 && hi < PI) {
            return Err(Error::InvalidInput(format!("support [{lo}, {hi}] must lie inside (0, π)")));
        }
        if lo < dx {
            return Err(Error::UnresolvedSupport { lower: lo, dx });
        }
        Ok((lo, hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_match_finite_differences() {
        let p = RadialProfile::Bump { center: 1.0, width: 0.4, amplitude: 2.0 };
        let e = 1e-5;
        for &r in &[0.7, 0.95, 1.1, 1.3] {
            let [_, d1, d2] = p.eval(r);
            let fd1 = (p.eval(r + e)[0] - p.eval(r - e)[0]) / (2.0 * e);
            let fd2 = (p.eval(r + e)[0] - 2.0 * p.eval(r)[0] + p.eval(r - e)[0]) / (e * e);
            assert!((d1 - fd1).abs() < 1e-7 * (1.0 + d1.abs()));
            assert!((d2 - fd2).abs() < 1e-3 * (1.0 + d2.abs()));
        }
        assert_eq!(p.eval(0.5), [0.0; 3]);
        assert_eq!(p.eval(1.0)[0], 2.0 * (-1.0f64).exp());
    }

    #[test]
    fn support_checks() {
        let eta = TestFunctionSpec::new(RadialProfile::bump(1.0, 0.5), RadialProfile::Zero);
        assert_eq!(eta.check(0.2).unwrap(), (0.5, 1.5));
        assert!(matches!(eta.check(0.6), Err(Error::UnresolvedSupport { .. })));
        let wide = TestFunctionSpec::new(RadialProfile::bump(2.8, 0.5), RadialProfile::Zero);
        assert!(matches!(wide.check(0.1), Err(Error::InvalidInput(_))));
    }
}
