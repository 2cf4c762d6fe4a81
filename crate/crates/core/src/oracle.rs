//! Brute-force reference evaluations for the statistics engine.
//!
//! Fields are evaluated at arbitrary points by direct summation of their
//! Fourier series and integrals are plain sums over the grid, with no FFTs
//! and no phase tables. Intended for small grids and few modes.

use num_complex::Complex64;

use crate::field::SpectralField;
use crate::grid::BOX_VOLUME;
use crate::quadrature::SphericalQuadrature;
use crate::stats::{CubicMoments, SphericalAverages};

/// A field held as its list of nonzero modes.
#[derive(Debug, Clone)]
pub struct SeriesField {
    modes: Vec<([f64; 3], [Complex64; 3])>,
}

impl SeriesField {
    pub fn new(v: &SpectralField) -> Self {
        let g = v.grid();
        let len = g.len();
        let c = v.coeffs();
        let modes = (0..len)
            .filter_map(|idx| {
                let a = [c[idx], c[len + idx], c[2 * len + idx]];
                if a.iter().all(|z| *z == Complex64::default()) {
                    return None;
                }
                let k = g.wavevector(idx).map(|x| x as f64);
                Some((k, a))
            })
            .collect();
        Self { modes }
    }

    pub fn value(&self, x: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (k, a) in &self.modes {
            let e = Complex64::from_polar(1.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2]);
            for c in 0..3 {
                out[c] += (a[c] * e).re;
            }
        }
        out
    }

    /// ∂_j v_i at `x`.
    pub fn gradient(&self, x: [f64; 3]) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for (k, a) in &self.modes {
            let e = Complex64::from_polar(1.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2]);
            for i in 0..3 {
                for j in 0..3 {
                    out[i][j] += (a[i] * e * Complex64::new(0.0, k[j])).re;
                }
            }
        }
        out
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn grid_points(v: &SpectralField) -> impl Iterator<Item = [f64; 3]> {
    let g = v.grid();
    (0..g.len()).map(move |idx| {
        let [i, j, k] = g.unravel(idx);
        g.point(i, j, k)
    })
}

/// Increment moments averaged over `quad`, from a double loop over grid
/// points and directions.
pub fn cubic_moments(v: &SpectralField, ell: f64, quad: &SphericalQuadrature, ps: &[f64]) -> CubicMoments {
    let s = SeriesField::new(v);
    let cell = BOX_VOLUME / v.grid().len() as f64;
    let mut out = CubicMoments {
        s_par: 0.0,
        s_zero: 0.0,
        s_p: ps.iter().map(|&p| (p, 0.0)).collect(),
    };
    for (n, w) in quad.iter() {
        for x in grid_points(v) {
            let y = [x[0] + ell * n[0], x[1] + ell * n[1], x[2] + ell * n[2]];
            let (a, b) = (s.value(x), s.value(y));
            let d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
            let dn = dot(d, n);
            let d2 = dot(d, d);
            out.s_par += w * cell * dn.powi(3);
            out.s_zero += w * cell * d2 * dn;
            for (acc, &p) in out.s_p.iter_mut().zip(ps) {
                acc.1 += w * cell * d2.sqrt().powf(p);
            }
        }
    }
    out
}

/// Quadratic spherical averages from grid sums of pointwise products.
pub fn averages(v: &SpectralField, f: Option<&SpectralField>, ell: f64, quad: &SphericalQuadrature) -> SphericalAverages {
    let s = SeriesField::new(v);
    let sf = f.map(SeriesField::new);
    let cell = BOX_VOLUME / v.grid().len() as f64;
    let mut out = SphericalAverages::default();
    for (n, w) in quad.iter() {
        for x in grid_points(v) {
            let y = [x[0] + ell * n[0], x[1] + ell * n[1], x[2] + ell * n[2]];
            let a = s.value(x);
            let b = s.value(y);
            let gb = s.gradient(y);
            // (n·∇) T v and n⊗n : T∇v
            let mut dir = [0.0; 3];
            for i in 0..3 {
                dir[i] = dot(gb[i], n);
            }
            let fx = sf.as_ref().map_or([0.0; 3], |sf| sf.value(x));
            let c = w * cell;
            out.j += c * dot(a, b);
            out.g += c * dot(n, a) * dot(n, b);
            out.h += c * dot(n, a) * dot(n, dir);
            out.fbar += c * dot(fx, b);
            out.ftilde += c * dot(n, fx) * dot(n, b);
            out.dgamma += c * dot(a, dir);
        }
    }
    out
}
