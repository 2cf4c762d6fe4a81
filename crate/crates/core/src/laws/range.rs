//! Inertial-range bookkeeping.

use serde::Serialize;

use crate::error::{Error, Result};

/// `ℓ_D = ν^{1/(2−αq) − κ}`. κ = 0 gives the limiting exponent.
pub fn dissipative_scale(nu: f64, alpha: f64, q: f64, kappa: f64) -> f64 {
    nu.powf(dissipative_exponent(alpha, q, kappa))
}

pub fn dissipative_exponent(alpha: f64, q: f64, kappa: f64) -> f64 {
    1.0 / (2.0 - alpha * q) - kappa
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InertialRange {
    pub nu: f64,
    pub alpha: f64,
    pub q: f64,
    pub kappa: f64,
    pub ell_i: f64,
    pub samples: usize,
}

impl InertialRange {
    pub fn new(nu: f64, alpha: f64, q: f64, kappa: f64, ell_i: f64, samples: usize) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::InvalidInput(format!("nu must be positive, got {nu}")));
        }
        if !(alpha > 0.0 && alpha < 1.0) || !(1.0..=2.0).contains(&q) {
            return Err(Error::InvalidInput(format!("need α in (0,1), q in [1,2]; got α={alpha}, q={q}")));
        }
        if !(kappa > 0.0) {
            return Err(Error::InvalidInput(format!("κ must be positive, got {kappa}")));
        }
        if samples < 2 {
            return Err(Error::InvalidInput("an inertial range needs at least two samples".into()));
        }
        let r = Self { nu, alpha, q, kappa, ell_i, samples };
        if !(r.ell_d() < ell_i) {
            return Err(Error::InvalidInput(format!(
                "ℓ_D = {} is not below ℓ_I = {ell_i}",
                r.ell_d()
            )));
        }
        Ok(r)
    }

    pub fn exponent(&self) -> f64 {
        dissipative_exponent(self.alpha, self.q, self.kappa)
    }

    pub fn ell_d(&self) -> f64 {
        dissipative_scale(self.nu, self.alpha, self.q, self.kappa)
    }

    /// Log-spaced samples from ℓ_D to ℓ_I inclusive.
    pub fn ells(&self) -> Vec<f64> {
        log_space(self.ell_d(), self.ell_i, self.samples)
    }
}

pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut v: Vec<f64> = (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect();
    v[0] = lo;
    v[n - 1] = hi;
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn k41_scale() {
        let l = dissipative_scale(1e-4, 1.0 / 3.0, 2.0, 0.0);
        assert!((l - 1e-3).abs() < 1e-15);
        assert!((dissipative_exponent(1.0 / 3.0, 2.0, 0.0) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn range_validation() {
        assert!(InertialRange::new(1e-3, 0.5, 2.0, 0.0, 0.5, 8).is_err());
        assert!(InertialRange::new(1e-3, 1.5, 2.0, 0.1, 0.5, 8).is_err());
        assert!(InertialRange::new(0.5, 0.5, 2.0, 0.01, 0.1, 8).is_err());
        let r = InertialRange::new(1e-3, 0.5, 2.0, 0.1, 0.5, 8).unwrap();
        let e = r.ells();
        assert_eq!(e.len(), 8);
        assert_eq!(e[0], r.ell_d());
        assert_eq!(e[7], 0.5);
        assert!(r.exponent() < 1.0 / (2.0 - r.alpha * r.q));
    }

    proptest! {
        #[test]
        fn ell_d_monotone_in_nu(
            nu in 1e-6f64..0.5, f in 1.01f64..10.0,
            alpha in 0.05f64..0.95, q in 1.0f64..2.0, kappa in 0.001f64..0.3,
        ) {
            let a = dissipative_scale(nu, alpha, q, kappa);
            let b = dissipative_scale((nu * f).min(0.99), alpha, q, kappa);
            prop_assert!(b > a);
            prop_assert!(dissipative_scale(nu * 1e-12, alpha, q, kappa) < a);
        }
    }
}
