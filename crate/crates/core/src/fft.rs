//! Three-dimensional FFT over an n³ cube, built from rustfft line transforms.
//!
//! Real fields are always transformed in pairs packed as `a + i b`, which
//! halves the number of complex transforms the solver and the statistics
//! engine need.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::GridSpec;

pub struct Fft3 {
    grid: GridSpec,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("n", &self.grid.n).finish()
    }
}

impl Fft3 {
    pub fn new(grid: GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid,
            forward: planner.plan_fft_forward(grid.n),
            inverse: planner.plan_fft_inverse(grid.n),
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// Unnormalized forward transform, sign convention e^{-ik·x}.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
    }

    /// Unnormalized inverse transform, sign convention e^{+ik·x}.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.grid.n;
        let n2 = n * n;
        assert_eq!(data.len(), n2 * n);
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        let mut buf = vec![Complex64::default(); data.len()];

        // innermost axis: contiguous lines
        plan.process_with_scratch(data, &mut scratch);

        // middle axis: transpose each slab so that j becomes contiguous
        for (slab, tmp) in data.chunks_mut(n2).zip(buf.chunks_mut(n2)) {
            for j in 0..n {
                for k in 0..n {
                    tmp[k * n + j] = slab[j * n + k];
                }
            }
            plan.process_with_scratch(tmp, &mut scratch);
            for j in 0..n {
                for k in 0..n {
                    slab[j * n + k] = tmp[k * n + j];
                }
            }
        }

        // outer axis: full transpose (i, j, k) -> (j, k, i)
        for i in 0..n {
            for jk in 0..n2 {
                buf[jk * n + i] = data[i * n2 + jk];
            }
        }
        plan.process_with_scratch(&mut buf, &mut scratch);
        for i in 0..n {
            for jk in 0..n2 {
                data[i * n2 + jk] = buf[jk * n + i];
            }
        }
    }

    /// Inverse transform of two Hermitian coefficient arrays into two real
    /// fields. Coefficients are normalized (v(x) = Σ v̂(k) e^{ik·x}).
    pub fn inverse_real_pair(
        &self,
        a: &[Complex64],
        b: Option<&[Complex64]>,
        out_a: &mut [f64],
        out_b: Option<&mut [f64]>,
    ) {
        let i = Complex64::i();
        let mut packed: Vec<Complex64> = match b {
            Some(b) => a.iter().zip(b).map(|(&x, &y)| x + i * y).collect(),
            None => a.to_vec(),
        };
        self.inverse(&mut packed);
        for (o, z) in out_a.iter_mut().zip(&packed) {
            *o = z.re;
        }
        if let Some(out_b) = out_b {
            for (o, z) in out_b.iter_mut().zip(&packed) {
                *o = z.im;
            }
        }
    }

    /// Forward transform of two real fields into normalized, exactly
    /// Hermitian coefficient arrays.
    pub fn forward_real_pair(
        &self,
        a: &[f64],
        b: Option<&[f64]>,
        out_a: &mut [Complex64],
        out_b: Option<&mut [Complex64]>,
    ) {
        let g = self.grid;
        let scale = 1.0 / g.len() as f64;
        let mut packed: Vec<Complex64> = match b {
            Some(b) => a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)).collect(),
            None => a.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        };
        self.forward(&mut packed);
        for (idx, o) in out_a.iter_mut().enumerate() {
            let z = packed[idx];
            let zc = packed[g.conjugate_index(idx)].conj();
            *o = (z + zc) * (0.5 * scale);
        }
        if let Some(out_b) = out_b {
            let half_i = Complex64::new(0.0, -0.5 * scale);
            for (idx, o) in out_b.iter_mut().enumerate() {
                let z = packed[idx];
                let zc = packed[g.conjugate_index(idx)].conj();
                *o = (z - zc) * half_i;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(g: GridSpec, data: &[Complex64], sign: f64) -> Vec<Complex64> {
        let n = g.n;
        let mut out = vec![Complex64::default(); g.len()];
        for (o_idx, o) in out.iter_mut().enumerate() {
            let [p, q, r] = g.unravel(o_idx);
            for (idx, &x) in data.iter().enumerate() {
                let [i, j, k] = g.unravel(idx);
                let phase = sign * 2.0 * std::f64::consts::PI * ((p * i + q * j + r * k) % n) as f64
                    / n as f64;
                *o += x * Complex64::from_polar(1.0, phase);
            }
        }
        out
    }

    #[test]
    fn matches_naive_dft() {
        let g = GridSpec::new(8).unwrap();
        let data: Vec<Complex64> = (0..g.len())
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let fft = Fft3::new(g);
        let mut fwd = data.clone();
        fft.forward(&mut fwd);
        let expect = naive_dft(g, &data, -1.0);
        for (a, b) in fwd.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-10);
        }
        let mut inv = data.clone();
        fft.inverse(&mut inv);
        let expect = naive_dft(g, &data, 1.0);
        for (a, b) in inv.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn packed_real_pair_round_trip() {
        let g = GridSpec::new(8).unwrap();
        let fft = Fft3::new(g);
        let a: Vec<f64> = (0..g.len()).map(|i| (i as f64 * 0.3).sin()).collect();
        let b: Vec<f64> = (0..g.len()).map(|i| (i as f64 * 0.7).cos() + 0.5).collect();
        let mut ah = vec![Complex64::default(); g.len()];
        let mut bh = vec![Complex64::default(); g.len()];
        fft.forward_real_pair(&a, Some(&b), &mut ah, Some(&mut bh));
        // exact Hermitian symmetry
        for idx in 0..g.len() {
            let c = g.conjugate_index(idx);
            assert_eq!(ah[idx], ah[c].conj());
            assert_eq!(bh[idx], bh[c].conj());
        }
        let mut a2 = vec![0.0; g.len()];
        let mut b2 = vec![0.0; g.len()];
        fft.inverse_real_pair(&ah, Some(&bh), &mut a2, Some(&mut b2));
        for i in 0..g.len() {
            assert!((a[i] - a2[i]).abs() < 1e-13);
            assert!((b[i] - b2[i]).abs() < 1e-13);
        }
    }
}
