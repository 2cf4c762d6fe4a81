//! Band-limited vector fields on T³.
//!
//! A field is stored by its normalized Fourier coefficients,
//! `v(x) = Σ_k v̂(k) e^{ik·x}`, three components laid out one after the
//! other. Real-valued fields keep exact Hermitian symmetry,
//! `v̂(-k) = conj(v̂(k))`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fft::Fft3;
use crate::grid::{GridSpec, BOX_VOLUME};

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    grid: GridSpec,
    values: Vec<f64>,
}

/// ∂_j v_i for all nine (i, j) pairs, spectral.
#[derive(Debug, Clone)]
pub struct SpectralTensor {
    grid: GridSpec,
    comps: Vec<Vec<Complex64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Norms {
    pub l2_sq: f64,
    pub h1_sq: f64,
    pub h_alpha: f64,
    pub holder_alpha: f64,
}

/// Per-axis phase factors e^{i k_a h_a} for a translation by `h`. The
/// Nyquist entry uses cos(k h) so translated real fields stay real.
#[derive(Debug, Clone)]
pub struct PhaseTable {
    axes: [Vec<Complex64>; 3],
}

impl PhaseTable {
    pub fn new(grid: GridSpec, h: [f64; 3]) -> Self {
        let axis = |ha: f64| -> Vec<Complex64> {
            (0..grid.n)
                .map(|m| {
                    let k = grid.wavenumber(m) as f64;
                    if grid.is_nyquist(m) {
                        Complex64::new((k * ha).cos(), 0.0)
                    } else {
                        Complex64::from_polar(1.0, k * ha)
                    }
                })
                .collect()
        };
        Self {
            axes: [axis(h[0]), axis(h[1]), axis(h[2])],
        }
    }

    #[inline]
    pub fn at(&self, pos: [usize; 3]) -> Complex64 {
        self.axes[0][pos[0]] * self.axes[1][pos[1]] * self.axes[2][pos[2]]
    }
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::default(); 3 * grid.len()],
        }
    }

    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != 3 * grid.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} coefficients, got {}",
                3 * grid.len(),
                coeffs.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let len = self.grid.len();
        &self.coeffs[c * len..(c + 1) * len]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let len = self.grid.len();
        &mut self.coeffs[c * len..(c + 1) * len]
    }

    /// Coefficient vector at wavevector `k`.
    pub fn mode(&self, k: [i64; 3]) -> [Complex64; 3] {
        let g = self.grid;
        let idx = g.index(g.position(k[0]), g.position(k[1]), g.position(k[2]));
        let len = g.len();
        [
            self.coeffs[idx],
            self.coeffs[len + idx],
            self.coeffs[2 * len + idx],
        ]
    }

    /// Adds `a cos(k·x) + b sin(k·x)` to component `comp`.
    pub fn add_real_mode(&mut self, k: [i64; 3], comp: usize, cos_amp: f64, sin_amp: f64) {
        let g = self.grid;
        let idx = g.index(g.position(k[0]), g.position(k[1]), g.position(k[2]));
        let conj = g.conjugate_index(idx);
        let c = self.component_mut(comp);
        if conj == idx {
            // self-conjugate mode: only the cosine part survives on the grid
            c[idx] += Complex64::new(cos_amp, 0.0);
        } else {
            c[idx] += Complex64::new(0.5 * cos_amp, -0.5 * sin_amp);
            c[conj] += Complex64::new(0.5 * cos_amp, 0.5 * sin_amp);
        }
    }

    /// `(cos x sin y, −sin x cos y, 0)`, a steady solution of the Euler
    /// equations that decays as e^{-2νt} under viscosity.
    pub fn taylor_green(grid: GridSpec) -> Self {
        let mut v = Self::zeros(grid);
        v.add_real_mode([1, 1, 0], 0, 0.0, 0.5);
        v.add_real_mode([1, -1, 0], 0, 0.0, -0.5);
        v.add_real_mode([1, 1, 0], 1, 0.0, -0.5);
        v.add_real_mode([1, -1, 0], 1, 0.0, -0.5);
        v
    }

    /// `(cos x sin y cos z, −sin x cos y cos z, 0)`.
    pub fn taylor_green_3d(grid: GridSpec) -> Self {
        let mut v = Self::zeros(grid);
        for sz in [1, -1] {
            // cos x sin y cos z = ¼ Σ sin(±x + y ± z)
            v.add_real_mode([1, 1, sz], 0, 0.0, 0.25);
            v.add_real_mode([-1, 1, sz], 0, 0.0, 0.25);
            // sin x cos y cos z = ¼ Σ sin(x ± y ± z)
            v.add_real_mode([1, 1, sz], 1, 0.0, -0.25);
            v.add_real_mode([1, -1, sz], 1, 0.0, -0.25);
        }
        v
    }

    /// Zero every coefficient below `rel_tol` times the largest one.
    pub fn chop(&mut self, rel_tol: f64) {
        let cut = rel_tol * self.max_abs();
        for z in &mut self.coeffs {
            if z.norm() <= cut {
                *z = Complex64::default();
            }
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &SpectralField, s: f64) {
        for (a, &b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * s;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest deviation from exact Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        let g = self.grid;
        let mut worst: f64 = 0.0;
        for c in 0..3 {
            let comp = self.component(c);
            for idx in 0..g.len() {
                let d = (comp[idx] - comp[g.conjugate_index(idx)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn to_physical(&self, fft: &Fft3) -> PhysicalField {
        let len = self.grid.len();
        let mut values = vec![0.0; 3 * len];
        {
            let (xy, z) = values.split_at_mut(2 * len);
            let (x, y) = xy.split_at_mut(len);
            fft.inverse_real_pair(self.component(0), Some(self.component(1)), x, Some(y));
            fft.inverse_real_pair(self.component(2), None, z, None);
        }
        PhysicalField {
            grid: self.grid,
            values,
        }
    }

    pub fn from_physical(phys: &PhysicalField, fft: &Fft3) -> Self {
        let grid = phys.grid;
        let len = grid.len();
        let mut coeffs = vec![Complex64::default(); 3 * len];
        {
            let (xy, z) = coeffs.split_at_mut(2 * len);
            let (x, y) = xy.split_at_mut(len);
            fft.forward_real_pair(phys.component(0), Some(phys.component(1)), x, Some(y));
            fft.forward_real_pair(phys.component(2), None, z, None);
        }
        Self { grid, coeffs }
    }

    /// Orthogonal projection onto divergence-free fields, v̂ ↦ (I − k̂k̂ᵀ) v̂.
    pub fn leray_project(&self) -> Self {
        let mut out = self.clone();
        out.leray_project_in_place();
        out
    }

    pub fn leray_project_in_place(&mut self) {
        let g = self.grid;
        let len = g.len();
        for idx in 0..len {
            let [i, j, k] = g.unravel(idx);
            let kv = [g.odd_wavenumber(i), g.odd_wavenumber(j), g.odd_wavenumber(k)];
            let k2 = kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2];
            if k2 == 0.0 {
                continue;
            }
            let v = [
                self.coeffs[idx],
                self.coeffs[len + idx],
                self.coeffs[2 * len + idx],
            ];
            let kdotv = (v[0] * kv[0] + v[1] * kv[1] + v[2] * kv[2]) / k2;
            for c in 0..3 {
                self.coeffs[c * len + idx] = v[c] - kdotv * kv[c];
            }
        }
    }

    /// Zero every mode outside the dealiasing cube.
    pub fn dealias_in_place(&mut self) {
        let g = self.grid;
        let len = g.len();
        for idx in 0..len {
            if !g.is_retained(idx) {
                for c in 0..3 {
                    self.coeffs[c * len + idx] = Complex64::default();
                }
            }
        }
    }

    /// Translation T_h v(x) = v(x + h); exact for band-limited fields.
    pub fn shift(&self, h: [f64; 3]) -> Self {
        let g = self.grid;
        let len = g.len();
        let table = PhaseTable::new(g, h);
        let mut out = self.clone();
        for idx in 0..len {
            let p = table.at(g.unravel(idx));
            for c in 0..3 {
                out.coeffs[c * len + idx] *= p;
            }
        }
        out
    }

    pub fn gradient(&self) -> SpectralTensor {
        let g = self.grid;
        let len = g.len();
        let mut comps = Vec::with_capacity(9);
        for i in 0..3 {
            let src = self.component(i);
            for j in 0..3 {
                let d: Vec<Complex64> = (0..len)
                    .map(|idx| {
                        let kj = g.odd_wavenumber(g.unravel(idx)[j]);
                        src[idx] * Complex64::new(0.0, kj)
                    })
                    .collect();
                comps.push(d);
            }
        }
        SpectralTensor { grid: g, comps }
    }

    pub fn laplacian(&self) -> Self {
        let g = self.grid;
        let len = g.len();
        let mut out = self.clone();
        for idx in 0..len {
            let k2 = g.k_squared(idx);
            for c in 0..3 {
                out.coeffs[c * len + idx] *= -k2;
            }
        }
        out
    }

    /// Spectral divergence i k·v̂.
    pub fn divergence(&self) -> Vec<Complex64> {
        let g = self.grid;
        let len = g.len();
        (0..len)
            .map(|idx| {
                let [i, j, k] = g.unravel(idx);
                let s = self.coeffs[idx] * g.odd_wavenumber(i)
                    + self.coeffs[len + idx] * g.odd_wavenumber(j)
                    + self.coeffs[2 * len + idx] * g.odd_wavenumber(k);
                s * Complex64::i()
            })
            .collect()
    }

    /// max |k·v̂(k)| relative to max |v̂|, with |k| normalized out.
    pub fn relative_divergence(&self) -> f64 {
        let g = self.grid;
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let div = self.divergence();
        let worst = div
            .iter()
            .enumerate()
            .map(|(idx, d)| {
                let k = g.k_squared(idx).sqrt();
                if k == 0.0 {
                    0.0
                } else {
                    d.norm() / k
                }
            })
            .fold(0.0, f64::max);
        worst / scale
    }

    /// ⟨a, b⟩ = ∫ a·b dx via Parseval.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        let s: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a.conj() * b).re)
            .sum();
        BOX_VOLUME * s
    }

    pub fn l2_sq(&self) -> f64 {
        BOX_VOLUME * self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn h1_sq(&self) -> f64 {
        self.weighted_sq(|k2| k2)
    }

    pub fn h_alpha(&self, alpha: f64) -> f64 {
        self.weighted_sq(|k2| (1.0 + k2).powf(alpha)).sqrt()
    }

    fn weighted_sq(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let g = self.grid;
        let len = g.len();
        let mut s = 0.0;
        for idx in 0..len {
            let w = weight(g.k_squared(idx));
            for c in 0..3 {
                s += w * self.coeffs[c * len + idx].norm_sqr();
            }
        }
        BOX_VOLUME * s
    }

    pub fn norms(&self, alpha: f64, fft: &Fft3) -> Norms {
        Norms {
            l2_sq: self.l2_sq(),
            h1_sq: self.h1_sq(),
            h_alpha: self.h_alpha(alpha),
            holder_alpha: self.to_physical(fft).holder_estimate(alpha),
        }
    }
}

impl SpectralTensor {
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// ∂_j v_i
    pub fn component(&self, i: usize, j: usize) -> &[Complex64] {
        &self.comps[3 * i + j]
    }

    pub fn is_zero(&self) -> bool {
        self.comps
            .iter()
            .all(|c| c.iter().all(|z| z.re == 0.0 && z.im == 0.0))
    }
}

impl PhysicalField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![0.0; 3 * grid.len()],
        }
    }

    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != 3 * grid.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} values, got {}",
                3 * grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(x)` at every grid point.
    pub fn from_fn(grid: GridSpec, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let len = grid.len();
        let mut values = vec![0.0; 3 * len];
        for idx in 0..len {
            let [i, j, k] = grid.unravel(idx);
            let v = f(grid.point(i, j, k));
            for c in 0..3 {
                values[c * len + idx] = v[c];
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let len = self.grid.len();
        &self.values[c * len..(c + 1) * len]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        let len = self.grid.len();
        &mut self.values[c * len..(c + 1) * len]
    }

    pub fn at(&self, idx: usize) -> [f64; 3] {
        let len = self.grid.len();
        [
            self.values[idx],
            self.values[len + idx],
            self.values[2 * len + idx],
        ]
    }

    /// Grid quadrature of ∫|v|² dx.
    pub fn l2_sq(&self) -> f64 {
        let cell = BOX_VOLUME / self.grid.len() as f64;
        cell * self.values.iter().map(|v| v * v).sum::<f64>()
    }

    /// Finite-offset estimate of the C^α seminorm: the maximum over
    /// dyadic axis-aligned offsets h of sup_x |δ_h v(x)| / |h|^α.
    pub fn holder_estimate(&self, alpha: f64) -> f64 {
        let g = self.grid;
        let n = g.n;
        let len = g.len();
        let mut best: f64 = 0.0;
        let mut m = 1;
        while m <= n / 2 {
            let h = m as f64 * g.dx();
            for axis in 0..3 {
                let mut sup: f64 = 0.0;
                for idx in 0..len {
                    let mut p = g.unravel(idx);
                    p[axis] = (p[axis] + m) % n;
                    let shifted = g.index(p[0], p[1], p[2]);
                    let mut d2 = 0.0;
                    for c in 0..3 {
                        let d = self.values[c * len + shifted] - self.values[c * len + idx];
                        d2 += d * d;
                    }
                    sup = sup.max(d2);
                }
                best = best.max(sup.sqrt() / h.powf(alpha));
            }
            m *= 2;
        }
        best
    }
}
