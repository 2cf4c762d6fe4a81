//! Two-point statistics of a velocity snapshot: increments, structure
//! functions, correlators and their spherical averages.
//!
//! Quadratic quantities are exact spectral sums over the nonzero modes,
//! `⟨a, T_h b⟩ = (2π)³ Re Σ_k conj(â(k))·b̂(k) e^{ik·h}`. Cubic and
//! absolute moments need pointwise products, so they go through one
//! inverse FFT of the translated field per direction. All spherical
//! averages use the normalized weights of the quadrature (Σw = 1).

use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::fft::Fft3;
use crate::field::{PhysicalField, SpectralField};
use crate::grid::{GridSpec, BOX_VOLUME};
use crate::quadrature::SphericalQuadrature;
use crate::solver::json_num;

/// Modes below this fraction of the largest coefficient are dropped from
/// spectral sums.
pub const CHOP_TOLERANCE: f64 = 1e-14;

/// Nonzero modes of a velocity field, with the matching coefficients of an
/// optional force.
#[derive(Debug, Clone)]
pub struct SparseModes {
    modes: Vec<SparseMode>,
}

#[derive(Debug, Clone, Copy)]
struct SparseMode {
    /// signed wavenumbers, used for translation phases
    k: [f64; 3],
    /// per-axis Nyquist flags; translation uses cos(k h) on those axes
    nyquist: [bool; 3],
    /// wavenumbers for first derivatives (Nyquist entries zeroed)
    k_odd: [f64; 3],
    v: [Complex64; 3],
    f: [Complex64; 3],
}

impl SparseMode {
    #[inline]
    fn phase(&self, h: [f64; 3]) -> Complex64 {
        if self.nyquist.iter().any(|&b| b) {
            let mut p = Complex64::new(1.0, 0.0);
            for a in 0..3 {
                let x = self.k[a] * h[a];
                p *= if self.nyquist[a] {
                    Complex64::new(x.cos(), 0.0)
                } else {
                    Complex64::from_polar(1.0, x)
                };
            }
            p
        } else {
            let x = self.k[0] * h[0] + self.k[1] * h[1] + self.k[2] * h[2];
            Complex64::new(x.cos(), x.sin())
        }
    }
}

fn dotc(n: [f64; 3], v: &[Complex64; 3]) -> Complex64 {
    v[0] * n[0] + v[1] * n[1] + v[2] * n[2]
}

impl SparseModes {
    pub fn new(v: &SpectralField, f: Option<&SpectralField>) -> Self {
        let g = v.grid();
        let len = g.len();
        let vmax = v.max_abs();
        let fmax = f.map_or(0.0, |f| f.max_abs());
        let mut modes = Vec::new();
        for idx in 0..len {
            let vv = [v.coeffs()[idx], v.coeffs()[len + idx], v.coeffs()[2 * len + idx]];
            let ff = match f {
                Some(f) => [f.coeffs()[idx], f.coeffs()[len + idx], f.coeffs()[2 * len + idx]],
                None => [Complex64::default(); 3],
            };
            let big = |c: &[Complex64; 3], m: f64| c.iter().any(|z| z.norm() > CHOP_TOLERANCE * m);
            let keep_v = vmax > 0.0 && big(&vv, vmax);
            let keep_f = fmax > 0.0 && big(&ff, fmax);
            if !keep_v && !keep_f {
                continue;
            }
            let pos = g.unravel(idx);
            modes.push(SparseMode {
                k: pos.map(|m| g.wavenumber(m) as f64),
                nyquist: pos.map(|m| g.is_nyquist(m)),
                k_odd: pos.map(|m| g.odd_wavenumber(m)),
                v: if keep_v { vv } else { [Complex64::default(); 3] },
                f: if keep_f { ff } else { [Complex64::default(); 3] },
            });
        }
        Self { modes }
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Γ_ij(h) = ∫ v_i(x) v_j(x + h) dx.
    pub fn gamma(&self, h: [f64; 3]) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for m in &self.modes {
            let p = m.phase(h);
            for i in 0..3 {
                for j in 0..3 {
                    out[i][j] += (m.v[i].conj() * m.v[j] * p).re;
                }
            }
        }
        out.map(|r| r.map(|x| BOX_VOLUME * x))
    }

    /// All quadratic averages at separation ℓ.
    pub fn averages(&self, ell: f64, quad: &SphericalQuadrature) -> SphericalAverages {
        let mut acc = SphericalAverages::default();
        for (n, w) in quad.iter() {
            let h = n.map(|x| ell * x);
            let mut s = SphericalAverages::default();
            for m in &self.modes {
                let p = m.phase(h);
                let kn = m.k_odd[0] * n[0] + m.k_odd[1] * n[1] + m.k_odd[2] * n[2];
                let ikn = Complex64::new(0.0, kn);
                let vv = m.v[0].conj() * m.v[0] + m.v[1].conj() * m.v[1] + m.v[2].conj() * m.v[2];
                let nv = dotc(n, &m.v);
                let nvnv = nv.conj() * nv;
                let fv = m.f[0].conj() * m.v[0] + m.f[1].conj() * m.v[1] + m.f[2].conj() * m.v[2];
                let nf = dotc(n, &m.f);
                s.j += (vv * p).re;
                s.g += (nvnv * p).re;
                s.h += (nvnv * ikn * p).re;
                s.fbar += (fv * p).re;
                s.ftilde += (nf.conj() * nv * p).re;
                s.dgamma += (vv * ikn * p).re;
            }
            acc.j += w * s.j;
            acc.g += w * s.g;
            acc.h += w * s.h;
            acc.fbar += w * s.fbar;
            acc.ftilde += w * s.ftilde;
            acc.dgamma += w * s.dgamma;
        }
        acc.scale(BOX_VOLUME);
        acc
    }

    /// Per-direction pieces of the quadratic correlators used by the
    /// scale-space balance: `⟨v, T_h v⟩`, `∫(ĥ·v)(ĥ·T_h v)`, `⟨f, T_h v⟩`,
    /// `∫(ĥ·f)(ĥ·T_h v)` at `h = r n`.
    pub fn directional(&self, r: f64, n: [f64; 3]) -> [f64; 4] {
        let h = n.map(|x| r * x);
        let mut out = [0.0; 4];
        for m in &self.modes {
            let p = m.phase(h);
            let vv = m.v[0].conj() * m.v[0] + m.v[1].conj() * m.v[1] + m.v[2].conj() * m.v[2];
            let nv = dotc(n, &m.v);
            let fv = m.f[0].conj() * m.v[0] + m.f[1].conj() * m.v[1] + m.f[2].conj() * m.v[2];
            let nf = dotc(n, &m.f);
            out[0] += (vv * p).re;
            out[1] += (nv.conj() * nv * p).re;
            out[2] += (fv * p).re;
            out[3] += (nf.conj() * nv * p).re;
        }
        out.map(|x| BOX_VOLUME * x)
    }
}

/// Exact cubic increment integrals of a sparse band-limited field by
/// summation over wavevector triads `k₁ + k₂ + k₃ = 0`. Agrees with the
/// grid quadrature whenever the field is dealiased, at a cost of m² per
/// direction for m modes.
#[derive(Debug, Clone)]
pub struct TriadTable {
    k: Vec<[i64; 3]>,
    kf: Vec<[f64; 3]>,
    v: Vec<[Complex64; 3]>,
    lookup: std::collections::HashMap<[i64; 3], usize>,
}

impl TriadTable {
    /// `None` when the field carries Nyquist content, where translation
    /// phases are not plain exponentials.
    pub fn new(v: &SpectralField) -> Option<Self> {
        let g = v.grid();
        let len = g.len();
        let vmax = v.max_abs();
        let mut t = TriadTable { k: Vec::new(), kf: Vec::new(), v: Vec::new(), lookup: Default::default() };
        for idx in 0..len {
            let c = [v.coeffs()[idx], v.coeffs()[len + idx], v.coeffs()[2 * len + idx]];
            if vmax == 0.0 || c.iter().all(|z| z.norm() <= CHOP_TOLERANCE * vmax) {
                continue;
            }
            if g.unravel(idx).iter().any(|&m| g.is_nyquist(m)) {
                return None;
            }
            let k = g.wavevector(idx);
            t.lookup.insert(k, t.k.len());
            t.k.push(k);
            t.kf.push(k.map(|x| x as f64));
            t.v.push(c);
        }
        Some(t)
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    /// (∫ (δ·n)³, ∫ |δ|² δ·n) for δ = δ_h v.
    pub fn node(&self, h: [f64; 3], n: [f64; 3]) -> (f64, f64) {
        let one = Complex64::new(1.0, 0.0);
        let d: Vec<[Complex64; 3]> = self
            .kf
            .iter()
            .zip(&self.v)
            .map(|(k, v)| {
                let x = k[0] * h[0] + k[1] * h[1] + k[2] * h[2];
                let p = Complex64::new(x.cos(), x.sin()) - one;
                [v[0] * p, v[1] * p, v[2] * p]
            })
            .collect();
        let dn: Vec<Complex64> = d.iter().map(|x| dotc(n, x)).collect();
        let (mut par, mut zero) = (Complex64::default(), Complex64::default());
        for a in 0..self.k.len() {
            for b in 0..self.k.len() {
                let k3 = [
                    -self.k[a][0] - self.k[b][0],
                    -self.k[a][1] - self.k[b][1],
                    -self.k[a][2] - self.k[b][2],
                ];
                if let Some(&c) = self.lookup.get(&k3) {
                    par += dn[a] * dn[b] * dn[c];
                    zero += (d[a][0] * d[b][0] + d[a][1] * d[b][1] + d[a][2] * d[b][2]) * dn[c];
                }
            }
        }
        (BOX_VOLUME * par.re, BOX_VOLUME * zero.re)
    }
}

/// Picks the cheaper exact route to the cubic increment integrals.
#[derive(Debug)]
pub enum CubicPath<'a> {
    Triad(TriadTable),
    Fft(IncrementEngine<'a>),
}

impl<'a> CubicPath<'a> {
    pub fn new(v: &'a SpectralField, fft: &'a Fft3) -> Self {
        let g = v.grid();
        match TriadTable::new(v) {
            Some(t) if t.len() * t.len() <= g.len() => CubicPath::Triad(t),
            _ => CubicPath::Fft(IncrementEngine::new(v, fft)),
        }
    }

    /// (∫ (δ·n)³, ∫ |δ|² δ·n) at separation `h`.
    pub fn node(&self, h: [f64; 3], n: [f64; 3]) -> (f64, f64) {
        if h == [0.0; 3] {
            return (0.0, 0.0);
        }
        match self {
            CubicPath::Triad(t) => t.node(h, n),
            CubicPath::Fft(e) => {
                let m = e.node_moments(h, n, &[]);
                (m.par, m.zero)
            }
        }
    }

    /// Spherical averages (S‖, S₀) at scale ℓ.
    pub fn averages(&self, ell: f64, quad: &SphericalQuadrature) -> (f64, f64) {
        let (mut par, mut zero) = (0.0, 0.0);
        for (n, w) in quad.iter() {
            let (a, b) = self.node(n.map(|x| ell * x), n);
            par += w * a;
            zero += w * b;
        }
        (par, zero)
    }
}

/// Normalized spherical averages at one separation ℓ.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SphericalAverages {
    /// avg ⟨v, T_{ℓn} v⟩; also the spherical average of tr Γ
    pub j: f64,
    /// avg ∫ (n·v)(n·T_{ℓn} v)
    pub g: f64,
    /// avg ∫ (n·v)(n⊗n : T_{ℓn}∇v)
    pub h: f64,
    /// avg ⟨f, T_{ℓn} v⟩
    pub fbar: f64,
    /// avg ∫ (n·f)(n·T_{ℓn} v)
    pub ftilde: f64,
    /// ∂_ℓ of `j`
    pub dgamma: f64,
}

impl SphericalAverages {
    fn scale(&mut self, s: f64) {
        self.j *= s;
        self.g *= s;
        self.h *= s;
        self.fbar *= s;
        self.ftilde *= s;
        self.dgamma *= s;
    }
}

/// Normalized spherical averages of the cubic and absolute increment moments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CubicMoments {
    pub s_par: f64,
    pub s_zero: f64,
    /// (p, S_p) pairs
    pub s_p: Vec<(f64, f64)>,
}

/// Moments of the increment field along one direction.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMoments {
    /// ∫ (δ·n)³
    pub par: f64,
    /// ∫ |δ|² (δ·n)
    pub zero: f64,
    /// ∫ |δ|^p for each requested p
    pub abs: Vec<f64>,
}

/// Evaluates increment statistics of one snapshot through FFTs.
#[derive(Debug)]
pub struct IncrementEngine<'a> {
    fft: &'a Fft3,
    v: &'a SpectralField,
    phys: PhysicalField,
}

impl<'a> IncrementEngine<'a> {
    pub fn new(v: &'a SpectralField, fft: &'a Fft3) -> Self {
        Self {
            fft,
            v,
            phys: v.to_physical(fft),
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.v.grid()
    }

    /// δ_h v = T_h v − v on the grid.
    pub fn increment(&self, h: [f64; 3]) -> PhysicalField {
        let mut shifted = self.v.shift(h).to_physical(self.fft);
        for (s, &v) in shifted.values_mut().iter_mut().zip(self.phys.values()) {
            *s -= v;
        }
        shifted
    }

    pub fn node_moments(&self, h: [f64; 3], n: [f64; 3], ps: &[f64]) -> NodeMoments {
        let g = self.grid();
        let len = g.len();
        if h == [0.0; 3] {
            return NodeMoments { par: 0.0, zero: 0.0, abs: vec![0.0; ps.len()] };
        }
        let d = self.increment(h);
        let dv = d.values();
        let (mut par, mut zero) = (0.0, 0.0);
        let mut abs = vec![0.0; ps.len()];
        for i in 0..len {
            let a = [dv[i], dv[len + i], dv[2 * len + i]];
            let dn = a[0] * n[0] + a[1] * n[1] + a[2] * n[2];
            let d2 = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
            par += dn * dn * dn;
            zero += d2 * dn;
            for (acc, &p) in abs.iter_mut().zip(ps) {
                *acc += if p == 2.0 {
                    d2
                } else if p == 3.0 {
                    d2 * d2.sqrt()
                } else {
                    d2.powf(0.5 * p)
                };
            }
        }
        let cell = BOX_VOLUME / len as f64;
        NodeMoments {
            par: cell * par,
            zero: cell * zero,
            abs: abs.into_iter().map(|x| cell * x).collect(),
        }
    }

    pub fn cubic_moments(&self, ell: f64, quad: &SphericalQuadrature, ps: &[f64]) -> CubicMoments {
        let mut out = CubicMoments {
            s_par: 0.0,
            s_zero: 0.0,
            s_p: ps.iter().map(|&p| (p, 0.0)).collect(),
        };
        if ell == 0.0 {
            return out;
        }
        for (n, w) in quad.iter() {
            let m = self.node_moments(n.map(|x| ell * x), n, ps);
            out.s_par += w * m.par;
            out.s_zero += w * m.zero;
            for (acc, v) in out.s_p.iter_mut().zip(&m.abs) {
                acc.1 += w * v;
            }
        }
        out
    }

    /// D^k_ij(h) = ∫ δ_i δ_j δ_k.
    pub fn structure_matrix_d(&self, h: [f64; 3], k_index: usize) -> [[f64; 3]; 3] {
        let len = self.grid().len();
        let d = self.increment(h);
        let dv = d.values();
        let mut out = [[0.0; 3]; 3];
        for x in 0..len {
            let a = [dv[x], dv[len + x], dv[2 * len + x]];
            for i in 0..3 {
                for j in 0..3 {
                    out[i][j] += a[i] * a[j] * a[k_index];
                }
            }
        }
        let cell = BOX_VOLUME / len as f64;
        out.map(|r| r.map(|x| cell * x))
    }
}

pub fn increment(v: &SpectralField, h: [f64; 3], fft: &Fft3) -> PhysicalField {
    IncrementEngine::new(v, fft).increment(h)
}

pub fn s_parallel(v: &SpectralField, ell: f64, quad: &SphericalQuadrature, fft: &Fft3) -> f64 {
    IncrementEngine::new(v, fft).cubic_moments(ell, quad, &[]).s_par
}

pub fn s_zero(v: &SpectralField, ell: f64, quad: &SphericalQuadrature, fft: &Fft3) -> f64 {
    IncrementEngine::new(v, fft).cubic_moments(ell, quad, &[]).s_zero
}

pub fn s_p_abs(v: &SpectralField, ell: f64, p: f64, quad: &SphericalQuadrature, fft: &Fft3) -> f64 {
    IncrementEngine::new(v, fft).cubic_moments(ell, quad, &[p]).s_p[0].1
}

pub fn correlator_gamma(v: &SpectralField, h: [f64; 3]) -> [[f64; 3]; 3] {
    SparseModes::new(v, None).gamma(h)
}

/// Spherical average of tr Γ(ℓn).
pub fn gamma_bar(v: &SpectralField, ell: f64, quad: &SphericalQuadrature) -> f64 {
    SparseModes::new(v, None).averages(ell, quad).j
}

pub fn structure_matrix_d(v: &SpectralField, h: [f64; 3], k_index: usize, fft: &Fft3) -> [[f64; 3]; 3] {
    IncrementEngine::new(v, fft).structure_matrix_d(h, k_index)
}

pub fn spherical_averages(
    v: &SpectralField,
    f: Option<&SpectralField>,
    ell: f64,
    quad: &SphericalQuadrature,
) -> SphericalAverages {
    SparseModes::new(v, f).averages(ell, quad)
}

/// 4ν ∂_ℓΓ̄(ℓ) / ℓ.
pub fn viscous_correction(v: &SpectralField, ell: f64, quad: &SphericalQuadrature, nu: f64) -> f64 {
    4.0 * nu * SparseModes::new(v, None).averages(ell, quad).dgamma / ell
}

/// Reference scaling ν^{1/2} ℓ^{αq/2 − 1} of the viscous correction.
pub fn viscous_bound(nu: f64, ell: f64, alpha: f64, q: f64) -> f64 {
    nu.sqrt() * ell.powf(alpha * q / 2.0 - 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureRecord {
    pub t: f64,
    pub ell: f64,
    pub s_par: f64,
    pub s_zero: f64,
    pub s_p: Vec<(f64, f64)>,
    pub gamma_bar: f64,
    pub j_val: f64,
    pub g_val: f64,
    pub h_val: f64,
    pub fbar: f64,
    pub ftilde: f64,
}

impl StructureRecord {
    pub fn s_p_at(&self, p: f64) -> Option<f64> {
        self.s_p.iter().find(|(q, _)| *q == p).map(|(_, s)| *s)
    }

    pub fn to_ndjson(&self) -> String {
        let s3 = self.s_p_at(3.0).map_or("null".to_string(), json_num);
        let mut line = format!(
            "{{\"t\":{},\"ell\":{},\"s_par\":{},\"s_zero\":{},\"s3\":{},\"j\":{},\"g\":{},\"h\":{},\"fbar\":{},\"ftilde\":{},\"gamma_bar\":{}",
            json_num(self.t),
            json_num(self.ell),
            json_num(self.s_par),
            json_num(self.s_zero),
            s3,
            json_num(self.j_val),
            json_num(self.g_val),
            json_num(self.h_val),
            json_num(self.fbar),
            json_num(self.ftilde),
            json_num(self.gamma_bar),
        );
        for (p, s) in &self.s_p {
            if *p != 3.0 {
                line.push_str(&format!(",\"s_p{}\":{}", p, json_num(*s)));
            }
        }
        line.push('}');
        line
    }
}

/// Evaluates every statistic of one snapshot at each separation in `ells`.
pub fn structure_records(
    t: f64,
    v: &SpectralField,
    f: Option<&SpectralField>,
    ells: &[f64],
    quad: &SphericalQuadrature,
    ps: &[f64],
    fft: &Fft3,
) -> Vec<StructureRecord> {
    let sparse = SparseModes::new(v, f);
    let engine = IncrementEngine::new(v, fft);
    let mut ps: Vec<f64> = ps.to_vec();
    if !ps.contains(&3.0) {
        ps.push(3.0);
    }
    ells.iter()
        .map(|&ell| {
            let q = sparse.averages(ell, quad);
            let c = engine.cubic_moments(ell, quad, &ps);
            StructureRecord {
                t,
                ell,
                s_par: c.s_par,
                s_zero: c.s_zero,
                s_p: c.s_p,
                gamma_bar: q.j,
                j_val: q.j,
                g_val: q.g,
                h_val: q.h,
                fbar: q.fbar,
                ftilde: q.ftilde,
            }
        })
        .collect()
}

pub fn write_records_ndjson<W: Write>(w: &mut W, records: &[StructureRecord]) -> Result<()> {
    writeln!(w, "{{\"schema\":1}}")?;
    for r in records {
        writeln!(w, "{}", r.to_ndjson())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use approx::assert_relative_eq;

    fn grid16() -> GridSpec {
        GridSpec::new(16).unwrap()
    }

    fn single_mode(g: GridSpec) -> SpectralField {
        let mut v = SpectralField::zeros(g);
        // solenoidal: k = (1, 2, 0), direction (2, -1, 0)
        v.add_real_mode([1, 2, 0], 0, 0.6, 0.2);
        v.add_real_mode([1, 2, 0], 1, -0.3, -0.1);
        v
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn zero_field_gives_zero_everywhere() {
        let g = grid16();
        let fft = Fft3::new(g);
        let q = SphericalQuadrature::lebedev(14).unwrap();
        let v = SpectralField::zeros(g);
        let recs = structure_records(0.0, &v, None, &[0.0, 0.5], &q, &[2.0], &fft);
        for r in recs {
            assert_eq!(r.s_par, 0.0);
            assert_eq!(r.s_zero, 0.0);
            assert_eq!(r.j_val, 0.0);
            assert_eq!(r.g_val, 0.0);
            assert_eq!(r.h_val, 0.0);
            assert!(r.s_p.iter().all(|(_, s)| *s == 0.0));
        }
        assert_eq!(viscous_correction(&v, 0.3, &q, 0.1), 0.0);
    }

    #[test]
    fn increment_of_constant_and_zero_shift() {
        let g = GridSpec::new(8).unwrap();
        let fft = Fft3::new(g);
        let mut c = SpectralField::zeros(g);
        c.add_real_mode([0, 0, 0], 1, 2.5, 0.0);
        assert!(increment(&c, [0.3, 1.1, -0.2], &fft).values().iter().all(|x| x.abs() < 1e-15));
        let v = single_mode(g);
        assert!(increment(&v, [0.0; 3], &fft).values().iter().all(|x| *x == 0.0));
        let q = SphericalQuadrature::lebedev(6).unwrap();
        assert_eq!(viscous_correction(&c, 0.4, &q, 0.1), 0.0);
    }

    #[test]
    fn single_mode_increment_energy() {
        let g = grid16();
        let fft = Fft3::new(g);
        let v = single_mode(g);
        let h = [0.3, -0.2, 0.9];
        let d = increment(&v, h, &fft);
        let kh = 0.3 - 0.4;
        let expect = 2.0 * (1.0 - f64::cos(kh)) * v.l2_sq();
        assert_relative_eq!(d.l2_sq(), expect, max_relative = 1e-12);
    }

    #[test]
    fn s2_matches_fourier_identity() {
        let g = grid16();
        let fft = Fft3::new(g);
        let v = single_mode(g);
        let q = SphericalQuadrature::lebedev(26).unwrap();
        let ell = 0.7;
        let got = s_p_abs(&v, ell, 2.0, &q, &fft);
        let expect = q.average(|n| 2.0 * (1.0 - (ell * (n[0] + 2.0 * n[1])).cos())) * v.l2_sq();
        assert_relative_eq!(got, expect, max_relative = 1e-12);
    }

    #[test]
    fn fft_statistics_match_brute_force() {
        let g = grid16();
        let fft = Fft3::new(g);
        let v = single_mode(g);
        let mut f = SpectralField::zeros(g);
        f.add_real_mode([0, 1, 1], 0, 0.4, -0.3);
        let q = SphericalQuadrature::lebedev(6).unwrap();
        for &ell in &[0.3, 1.2] {
            let c = IncrementEngine::new(&v, &fft).cubic_moments(ell, &q, &[1.5, 3.0]);
            let o = oracle::cubic_moments(&v, ell, &q, &[1.5, 3.0]);
            assert!((c.s_par - o.s_par).abs() < 1e-10);
            assert!((c.s_zero - o.s_zero).abs() < 1e-10);
            for (a, b) in c.s_p.iter().zip(&o.s_p) {
                assert!(rel(a.1, b.1) < 1e-10);
            }
            let a = spherical_averages(&v, Some(&f), ell, &q);
            let b = oracle::averages(&v, Some(&f), ell, &q);
            for (x, y) in [(a.j, b.j), (a.g, b.g), (a.h, b.h), (a.fbar, b.fbar), (a.ftilde, b.ftilde), (a.dgamma, b.dgamma)] {
                assert!((x - y).abs() < 1e-10 * (1.0 + y.abs()), "{x} vs {y}");
            }
        }
    }

    #[test]
    fn odd_in_v_and_dominated_by_s3() {
        let g = grid16();
        let fft = Fft3::new(g);
        let v = SpectralField::taylor_green_3d(g);
        let mut w = v.clone();
        w.add_real_mode([0, 1, 2], 2, 0.3, 0.1);
        w.add_real_mode([0, 1, 2], 1, 0.2, 0.0);
        let q = SphericalQuadrature::fibonacci(16).unwrap();
        for &ell in &[0.3, 0.9] {
            let a = IncrementEngine::new(&w, &fft).cubic_moments(ell, &q, &[3.0]);
            let b = IncrementEngine::new(&w.scaled(-1.0), &fft).cubic_moments(ell, &q, &[3.0]);
            assert_relative_eq!(a.s_par, -b.s_par, max_relative = 1e-12);
            assert_relative_eq!(a.s_zero, -b.s_zero, max_relative = 1e-12);
            assert!(a.s_p[0].1 >= a.s_zero.abs());
            assert!(a.s_p[0].1 >= a.s_par.abs());
        }
    }

    #[test]
    fn taylor_green_cubic_terms_vanish() {
        let g = grid16();
        let fft = Fft3::new(g);
        let q = SphericalQuadrature::lebedev(14).unwrap();
        for v in [SpectralField::taylor_green(g), SpectralField::taylor_green_3d(g)] {
            let c = IncrementEngine::new(&v, &fft).cubic_moments(0.8, &q, &[]);
            assert!(c.s_par.abs() < 1e-13 && c.s_zero.abs() < 1e-13);
        }
    }

    #[test]
    fn gamma_trace_and_single_mode_modulation() {
        let g = grid16();
        let v = single_mode(g);
        let gm = correlator_gamma(&v, [0.0; 3]);
        assert_relative_eq!(gm[0][0] + gm[1][1] + gm[2][2], v.l2_sq(), max_relative = 1e-14);
        let h = [0.5, 0.25, -1.0];
        let gh = correlator_gamma(&v, h);
        let c = (0.5f64 + 0.5).cos();
        for i in 0..3 {
            for j in 0..3 {
                assert!((gh[i][j] - c * gm[i][j]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn d_contraction_reproduces_s_zero_integrand() {
        let g = grid16();
        let fft = Fft3::new(g);
        let mut v = SpectralField::taylor_green_3d(g);
        v.add_real_mode([1, 0, 2], 1, 0.3, 0.2);
        let n = [0.48, 0.6, 0.64];
        let ell = 0.9;
        let h = n.map(|x| ell * x);
        let eng = IncrementEngine::new(&v, &fft);
        let mut contraction = 0.0;
        for (k, nk) in n.iter().enumerate() {
            let d = eng.structure_matrix_d(h, k);
            contraction += nk * (d[0][0] + d[1][1] + d[2][2]);
        }
        let m = eng.node_moments(h, n, &[]);
        assert!((contraction - m.zero).abs() < 1e-12 * (1.0 + m.zero.abs()));
        assert!(eng.structure_matrix_d([0.0; 3], 0).iter().flatten().all(|x| *x == 0.0));
    }

    #[test]
    fn ell_zero_anchor_identities() {
        let g = grid16();
        let mut v = SpectralField::taylor_green_3d(g);
        v.add_real_mode([0, 1, 2], 0, 0.3, 0.1);
        let spec = crate::forcing::ForcingSpec::AlternatingShear { period: 1.0, amplitude: 0.7, modes: [[1, 0, 0], [0, 1, 1]] };
        let mut f = spec.evaluate(0.1, g);
        f.add_scaled(&v, 0.25);
        let q = SphericalQuadrature::lebedev(14).unwrap();
        let a = spherical_averages(&v, Some(&f), 0.0, &q);
        let l2 = v.l2_sq();
        let fv = f.inner(&v);
        assert!(rel(a.j, l2) < 1e-12);
        assert!(rel(a.fbar, fv) < 1e-12);
        assert!(rel(a.g, l2 / 3.0) < 1e-12);
        assert!(rel(a.ftilde, fv / 3.0) < 1e-12);
    }

    #[test]
    fn cauchy_schwarz_on_j() {
        let g = grid16();
        let mut v = SpectralField::taylor_green_3d(g);
        v.add_real_mode([2, 1, 0], 2, 0.5, 0.0);
        let q = SphericalQuadrature::fibonacci(64).unwrap();
        for i in 0..20 {
            let ell = 0.15 * i as f64;
            assert!(gamma_bar(&v, ell, &q).abs() <= v.l2_sq() * (1.0 + 1e-14));
        }
    }

    #[test]
    fn viscous_correction_matches_finite_difference() {
        let g = GridSpec::new(32).unwrap();
        let v = SpectralField::taylor_green(g);
        let q = SphericalQuadrature::gauss_product(8, 16).unwrap();
        let nu = 0.1;
        for &ell in &[0.4, 1.0] {
            let d = 1e-3;
            let fd = (gamma_bar(&v, ell + d, &q) - gamma_bar(&v, ell - d, &q)) / (2.0 * d);
            let expect = 4.0 * nu * fd / ell;
            assert!(rel(viscous_correction(&v, ell, &q, nu), expect) < 1e-4);
        }
    }

    #[test]
    fn small_ell_expansions_of_gamma_and_h() {
        let g = grid16();
        let mut v = SpectralField::taylor_green_3d(g);
        v.add_real_mode([0, 2, 1], 0, 0.3, 0.1);
        let q = SphericalQuadrature::lebedev(50).unwrap();
        let grad = v.h1_sq();
        let e = 1e-4;
        let sp = SparseModes::new(&v, None);
        // Γ̄''(0) = −‖∇v‖²/3 and H'(0) = −‖∇v‖²/15
        let second = (sp.averages(e, &q).j - 2.0 * sp.averages(0.0, &q).j + sp.averages(-e, &q).j) / (e * e);
        assert!(rel(second, -grad / 3.0) < 1e-5);
        let hp = sp.averages(e, &q).h / e;
        assert!(rel(hp, -grad / 15.0) < 1e-6);
    }

    #[test]
    fn triad_path_matches_grid_quadrature() {
        let g = grid16();
        let fft = Fft3::new(g);
        let mut v = SpectralField::taylor_green_3d(g);
        v.add_real_mode([0, 1, 2], 0, 0.3, 0.1);
        v.add_real_mode([2, 0, 1], 1, -0.2, 0.4);
        v.add_real_mode([0, 0, 0], 2, 0.5, 0.0);
        let t = TriadTable::new(&v).unwrap();
        let e = IncrementEngine::new(&v, &fft);
        let n = [0.36, 0.48, 0.8];
        for &ell in &[0.2, 0.7, 1.9] {
            let h = n.map(|x| ell * x);
            let (par, zero) = t.node(h, n);
            let m = e.node_moments(h, n, &[]);
            assert!((par - m.par).abs() < 1e-12 * (1.0 + m.par.abs()), "{par} {}", m.par);
            assert!((zero - m.zero).abs() < 1e-12 * (1.0 + m.zero.abs()));
        }
        assert!(matches!(CubicPath::new(&v, &fft), CubicPath::Triad(_)));
        let mut nyq = SpectralField::zeros(g);
        nyq.add_real_mode([8, 1, 0], 2, 1.0, 0.0);
        assert!(TriadTable::new(&nyq).is_none());
    }

    #[test]
    fn ndjson_record_keys() {
        let r = StructureRecord {
            t: 0.5,
            ell: 0.25,
            s_par: -1.0,
            s_zero: 2.0,
            s_p: vec![(2.0, 1.0), (3.0, 4.0)],
            gamma_bar: 3.0,
            j_val: 3.0,
            g_val: 1.0,
            h_val: -0.5,
            fbar: 0.0,
            ftilde: 0.0,
        };
        assert_eq!(
            r.to_ndjson(),
            "{\"t\":0.5,\"ell\":0.25,\"s_par\":-1.0,\"s_zero\":2.0,\"s3\":4.0,\"j\":3.0,\"g\":1.0,\"h\":-0.5,\"fbar\":0.0,\"ftilde\":0.0,\"gamma_bar\":3.0,\"s_p2\":1.0}"
        );
    }
}
