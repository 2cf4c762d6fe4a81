//! Periodic grid on T³ = [0, 2π)³.
//!
//! Wavenumbers are integer triples with every component in `[-n/2, n/2)`.
//! Storage index `(i, j, k)` maps to `i * n² + j * n + k` in both physical
//! and spectral space, `k` fastest.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Side length of the periodic box.
pub const BOX_LENGTH: f64 = 2.0 * PI;

/// Volume of T³, the factor between Parseval sums and L² integrals.
pub const BOX_VOLUME: f64 = BOX_LENGTH * BOX_LENGTH * BOX_LENGTH;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub dealias_fraction: f64,
}

impl GridSpec {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_dealias(n, 2.0 / 3.0)
    }

    pub fn with_dealias(n: usize, dealias_fraction: f64) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "grid size must be even and >= 8, got {n}"
            )));
        }
        if !(dealias_fraction > 0.0 && dealias_fraction <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "dealias fraction must lie in (0, 1], got {dealias_fraction}"
            )));
        }
        Ok(Self { n, dealias_fraction })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        BOX_LENGTH / self.n as f64
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    #[inline]
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    /// Signed wavenumber stored at array position `m`.
    #[inline]
    pub fn wavenumber(&self, m: usize) -> i64 {
        let n = self.n as i64;
        let m = m as i64;
        if m < n / 2 {
            m
        } else {
            m - n
        }
    }

    /// Wavenumber used by odd-order operators; the Nyquist entry maps to 0 so
    /// that derivatives of real fields stay real.
    #[inline]
    pub fn odd_wavenumber(&self, m: usize) -> f64 {
        if m == self.n / 2 {
            0.0
        } else {
            self.wavenumber(m) as f64
        }
    }

    #[inline]
    pub fn is_nyquist(&self, m: usize) -> bool {
        m == self.n / 2
    }

    /// Array position of a signed wavenumber (taken modulo n).
    #[inline]
    pub fn position(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// Flat index of the mode `-k`.
    #[inline]
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let n = self.n;
        let [i, j, k] = self.unravel(idx);
        self.index((n - i) % n, (n - j) % n, (n - k) % n)
    }

    pub fn wavevector(&self, idx: usize) -> [i64; 3] {
        let [i, j, k] = self.unravel(idx);
        [self.wavenumber(i), self.wavenumber(j), self.wavenumber(k)]
    }

    pub fn k_squared(&self, idx: usize) -> f64 {
        let [a, b, c] = self.wavevector(idx);
        (a * a + b * b + c * c) as f64
    }

    /// Largest retained |k_a| is strictly below this cutoff.
    pub fn dealias_cutoff(&self) -> f64 {
        self.dealias_fraction * self.n as f64 / 2.0
    }

    pub fn is_retained(&self, idx: usize) -> bool {
        let cutoff = self.dealias_cutoff();
        self.wavevector(idx)
            .iter()
            .all(|&k| (k.abs() as f64) < cutoff)
    }

    /// Physical coordinate of grid point `(i, j, k)`.
    pub fn point(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        let dx = self.dx();
        [i as f64 * dx, j as f64 * dx, k as f64 * dx]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_and_small_grids() {
        assert!(GridSpec::new(7).is_err());
        assert!(GridSpec::new(6).is_err());
        assert!(GridSpec::new(9).is_err());
        assert!(GridSpec::with_dealias(16, 0.0).is_err());
        assert!(GridSpec::with_dealias(16, 1.5).is_err());
        assert!(GridSpec::new(16).is_ok());
    }

    #[test]
    fn wavenumbers_cover_half_open_range() {
        let g = GridSpec::new(8).unwrap();
        let ks: Vec<i64> = (0..8).map(|m| g.wavenumber(m)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        for k in -4..4 {
            assert_eq!(g.wavenumber(g.position(k)), k);
        }
        assert_eq!(g.odd_wavenumber(4), 0.0);
    }

    #[test]
    fn two_thirds_rule_cutoff() {
        let g = GridSpec::new(32).unwrap();
        let kept: Vec<i64> = (0..32)
            .filter(|&m| (g.wavenumber(m).abs() as f64) < g.dealias_cutoff())
            .map(|m| g.wavenumber(m))
            .collect();
        assert_eq!(kept.iter().max(), Some(&10));
        assert_eq!(kept.iter().min(), Some(&-10));
        let g16 = GridSpec::new(16).unwrap();
        assert!(g16.dealias_cutoff() > 5.0 && g16.dealias_cutoff() < 6.0);
    }

    #[test]
    fn conjugate_index_is_involution() {
        let g = GridSpec::new(8).unwrap();
        for idx in 0..g.len() {
            let c = g.conjugate_index(idx);
            assert_eq!(g.conjugate_index(c), idx);
            let k = g.wavevector(idx);
            let kc = g.wavevector(c);
            for a in 0..3 {
                assert_eq!(g.position(-k[a]), g.position(kc[a]));
            }
        }
    }
}
