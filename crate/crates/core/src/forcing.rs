//! Deterministic, smooth, mean-free and divergence-free force families.
//!
//! Every family is a finite sum of real Fourier modes, so it can be
//! evaluated on any grid and its L² norm is available without one.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::{GridSpec, BOX_VOLUME};

/// Times below this are evaluated at the floor by ramped families, whose
/// envelope t^{-θ} is otherwise singular at t = 0.
pub const RAMP_FLOOR: f64 = 1e-3;

/// Resolution of the time quadrature in [`ForcingSpec::integrability`].
pub const INTEGRABILITY_DT: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ForcingSpec {
    Zero,
    /// `f(x) = 2a cos(k·x) e_c`, projected onto the plane orthogonal to k.
    FixedMode {
        k: [i64; 3],
        amplitude: f64,
        component: usize,
    },
    /// `f(t, x) = 2a [cos(2πt/T) cos(k₁·x) d₁ + sin(2πt/T) cos(k₂·x) d₂]`
    /// with d_i a fixed unit vector orthogonal to k_i.
    AlternatingShear {
        period: f64,
        amplitude: f64,
        modes: [[i64; 3]; 2],
    },
    /// `f(t) = t^{-θ} inner(t)`.
    TimeRamp {
        exponent: f64,
        inner: Box<ForcingSpec>,
    },
}

/// One real mode `cos_amp · cos(k·x) + sin_amp · sin(k·x)` along `dir`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealMode {
    pub k: [i64; 3],
    pub dir: [f64; 3],
    pub cos_amp: f64,
    pub sin_amp: f64,
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn kf(k: [i64; 3]) -> [f64; 3] {
    [k[0] as f64, k[1] as f64, k[2] as f64]
}

/// Unit vector along `e_c` with its k-component removed.
fn projected_axis(k: [i64; 3], c: usize) -> [f64; 3] {
    let kv = kf(k);
    let k2 = dot(kv, kv);
    let mut d = [0.0; 3];
    d[c] = 1.0;
    if k2 > 0.0 {
        let s = kv[c] / k2;
        for a in 0..3 {
            d[a] -= s * kv[a];
        }
    }
    let norm = dot(d, d).sqrt();
    if norm > 0.0 {
        d.map(|x| x / norm)
    } else {
        d
    }
}

/// Deterministic unit vector orthogonal to `k`: `k × e_m`, with `m` the axis
/// where |k_m| is smallest.
pub fn shear_direction(k: [i64; 3]) -> [f64; 3] {
    let m = (0..3).min_by_key(|&a| k[a].abs()).unwrap();
    let kv = kf(k);
    let mut e = [0.0; 3];
    e[m] = 1.0;
    let c = [
        kv[1] * e[2] - kv[2] * e[1],
        kv[2] * e[0] - kv[0] * e[2],
        kv[0] * e[1] - kv[1] * e[0],
    ];
    let norm = dot(c, c).sqrt();
    c.map(|x| x / norm)
}

impl ForcingSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ForcingSpec::Zero => Ok(()),
            ForcingSpec::FixedMode { k, component, amplitude } => {
                if *component > 2 {
                    return Err(Error::InvalidInput(format!("component {component} not in 0..3")));
                }
                if *k == [0, 0, 0] {
                    return Err(Error::InvalidInput("forcing mode must be nonzero".into()));
                }
                if !amplitude.is_finite() {
                    return Err(Error::InvalidInput("non-finite amplitude".into()));
                }
                if dot(projected_axis(*k, *component), projected_axis(*k, *component)) == 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "component {component} is parallel to k = {k:?}; projection vanishes"
                    )));
                }
                Ok(())
            }
            ForcingSpec::AlternatingShear { period, amplitude, modes } => {
                if !(*period > 0.0) || !amplitude.is_finite() {
                    return Err(Error::InvalidInput(
                        "alternating shear needs a positive period and finite amplitude".into(),
                    ));
                }
                if modes.iter().any(|k| *k == [0, 0, 0]) {
                    return Err(Error::InvalidInput("forcing mode must be nonzero".into()));
                }
                Ok(())
            }
            ForcingSpec::TimeRamp { exponent, inner } => {
                if !exponent.is_finite() {
                    return Err(Error::InvalidInput("non-finite ramp exponent".into()));
                }
                inner.validate()
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ForcingSpec::Zero => true,
            ForcingSpec::TimeRamp { inner, .. } => inner.is_zero(),
            _ => false,
        }
    }

    pub fn is_time_independent(&self) -> bool {
        match self {
            ForcingSpec::Zero | ForcingSpec::FixedMode { .. } => true,
            ForcingSpec::AlternatingShear { .. } => false,
            ForcingSpec::TimeRamp { exponent, inner } => *exponent == 0.0 && inner.is_time_independent(),
        }
    }

    fn envelope(&self, t: f64) -> f64 {
        match self {
            ForcingSpec::TimeRamp { exponent, inner } => {
                t.max(RAMP_FLOOR).powf(-exponent) * inner.envelope(t)
            }
            _ => 1.0,
        }
    }

    fn total_exponent(&self) -> f64 {
        match self {
            ForcingSpec::TimeRamp { exponent, inner } => exponent + inner.total_exponent(),
            _ => 0.0,
        }
    }

    fn base(&self) -> &ForcingSpec {
        match self {
            ForcingSpec::TimeRamp { inner, .. } => inner.base(),
            other => other,
        }
    }

    /// Sparse real-mode expansion of `f(t)`.
    pub fn modes(&self, t: f64) -> Vec<RealMode> {
        let env = self.envelope(t);
        let mut out = match self.base() {
            ForcingSpec::Zero => Vec::new(),
            ForcingSpec::FixedMode { k, amplitude, component } => vec![RealMode {
                k: *k,
                dir: projected_axis(*k, *component),
                cos_amp: 2.0 * amplitude,
                sin_amp: 0.0,
            }],
            ForcingSpec::AlternatingShear { period, amplitude, modes } => {
                let phase = 2.0 * PI * t / period;
                vec![
                    RealMode {
                        k: modes[0],
                        dir: shear_direction(modes[0]),
                        cos_amp: 2.0 * amplitude * phase.cos(),
                        sin_amp: 0.0,
                    },
                    RealMode {
                        k: modes[1],
                        dir: shear_direction(modes[1]),
                        cos_amp: 2.0 * amplitude * phase.sin(),
                        sin_amp: 0.0,
                    },
                ]
            }
            ForcingSpec::TimeRamp { .. } => unreachable!(),
        };
        for m in &mut out {
            m.cos_amp *= env;
            m.sin_amp *= env;
        }
        out
    }

    pub fn evaluate(&self, t: f64, grid: GridSpec) -> SpectralField {
        let mut f = SpectralField::zeros(grid);
        for m in self.modes(t) {
            for c in 0..3 {
                if m.dir[c] != 0.0 {
                    f.add_real_mode(m.k, c, m.cos_amp * m.dir[c], m.sin_amp * m.dir[c]);
                }
            }
        }
        f
    }

    /// `evaluate` restricted to the dealiasing cube, as seen by the solver.
    pub fn evaluate_dealiased(&self, t: f64, grid: GridSpec) -> SpectralField {
        let mut f = self.evaluate(t, grid);
        f.dealias_in_place();
        f
    }

    /// ‖f(t)‖_{L²}, exact and grid-free.
    pub fn l2_norm(&self, t: f64) -> f64 {
        // accumulate f̂ on the half space k > 0 (lexicographically)
        let mut half: BTreeMap<[i64; 3], [Complex64; 3]> = BTreeMap::new();
        for m in self.modes(t) {
            let neg = m.k.map(|x| -x);
            let (key, sign) = if m.k > neg { (m.k, 1.0) } else { (neg, -1.0) };
            let coef = Complex64::new(0.5 * m.cos_amp, -0.5 * sign * m.sin_amp);
            let e = half.entry(key).or_insert([Complex64::default(); 3]);
            for c in 0..3 {
                e[c] += coef * m.dir[c];
            }
        }
        let s: f64 = half.values().flat_map(|v| v.iter()).map(|z| 2.0 * z.norm_sqr()).sum();
        (BOX_VOLUME * s).sqrt()
    }

    /// ‖f‖_{L^{1+σ}(0,1;L²)}. The t^{-θ} envelope of ramped families is
    /// integrated exactly on each cell, the remaining factor at the midpoint.
    pub fn integrability(&self, sigma: f64) -> Result<f64> {
        if !(sigma >= 0.0) {
            return Err(Error::InvalidInput(format!("sigma must be >= 0, got {sigma}")));
        }
        let p = 1.0 + sigma;
        let e = self.total_exponent() * p;
        if e >= 1.0 {
            return Err(Error::InvalidInput(format!(
                "envelope t^-{} is not in L^{p}(0,1)",
                self.total_exponent()
            )));
        }
        let base = self.base();
        let steps = (1.0 / INTEGRABILITY_DT).round() as usize;
        let h = 1.0 / steps as f64;
        let mut sum = 0.0;
        for i in 0..steps {
            let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
            let weight = if e == 0.0 {
                h
            } else {
                (b.powf(1.0 - e) - a.powf(1.0 - e)) / (1.0 - e)
            };
            sum += weight * base.l2_norm(0.5 * (a + b)).powf(p);
        }
        Ok(sum.powf(1.0 / p))
    }
}
