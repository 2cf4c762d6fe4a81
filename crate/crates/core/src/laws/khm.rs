//! Scale-space energy balance tested against η(h) = φ(|h|) I + ϕ(|h|) ĥ⊗ĥ.
//!
//! Every h-integral is written as 4π ∫ r² avg_n(·) dr, with Gauss–Legendre
//! in r over the support of each profile and a spherical rule in n. Time integrals
//! use Simpson on the snapshot grid.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fft::Fft3;
use crate::forcing::ForcingSpec;
use crate::laws::constants::SPHERE_AREA;
use crate::laws::profile::TestFunctionSpec;
use crate::quadrature::{gauss_legendre, simpson, SphericalQuadrature};
use crate::solver::Trajectory;
use crate::stats::{CubicPath, SparseModes};

#[derive(Debug, Clone)]
pub struct KhmQuadrature {
    /// Gauss–Legendre nodes across the support of each profile
    pub radial_nodes: usize,
    pub quad: SphericalQuadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KhmResidual {
    pub raw: f64,
    pub normalized: f64,
    /// ∫η:Γ(t) − ∫η:Γ(0)
    pub lhs: f64,
    /// −½∫₀ᵗ∫Σ_k ∂_kη:D^k
    pub cubic: f64,
    /// 2ν∫₀ᵗ∫Δη:Γ
    pub viscous: f64,
    /// 2∫₀ᵗ∫η:(f⊗T_h v)
    pub forcing: f64,
}

/// Per-snapshot h-integrals of the four terms.
#[derive(Debug, Clone, Copy, Default)]
struct Integrands {
    corr: f64,
    cubic: f64,
    lap: f64,
    force: f64,
}

/// Radial node carrying separate Gauss weights for the φ and ϕ parts, each
/// profile integrated over its own support.
#[derive(Debug, Clone, Copy)]
struct RadialNode {
    r: f64,
    w_phi: f64,
    w_varphi: f64,
}

fn radial_nodes(eta: &TestFunctionSpec, nodes: usize) -> Vec<RadialNode> {
    let (x, w) = gauss_legendre(nodes);
    let mut out = Vec::new();
    for (which, p) in [eta.phi, eta.varphi].into_iter().enumerate() {
        if let Some((lo, hi)) = p.support() {
            for (x, w) in x.iter().zip(&w) {
                let (r, w) = (lo + (hi - lo) * 0.5 * (x + 1.0), 0.5 * (hi - lo) * w);
                out.push(if which == 0 {
                    RadialNode { r, w_phi: w, w_varphi: 0.0 }
                } else {
                    RadialNode { r, w_phi: 0.0, w_varphi: w }
                });
            }
        }
    }
    out
}

fn integrands(
    v: &crate::field::SpectralField,
    f: &crate::field::SpectralField,
    eta: &TestFunctionSpec,
    nodes: &[RadialNode],
    quad: &SphericalQuadrature,
    fft: &Fft3,
) -> Integrands {
    let sparse = SparseModes::new(v, Some(f));
    let cubic = CubicPath::new(v, fft);
    let mut out = Integrands::default();
    for node in nodes {
        let r = node.r;
        let [p0, p1, p2] = eta.phi.eval(r).map(|x| x * node.w_phi);
        let [q0, q1, q2] = eta.varphi.eval(r).map(|x| x * node.w_varphi);
        if [p0, p1, p2, q0, q1, q2].iter().all(|x| *x == 0.0) {
            continue;
        }
        let lap_i = p2 + 2.0 * p1 / r + 2.0 * q0 / (r * r);
        let lap_hh = q2 + 2.0 * q1 / r - 6.0 * q0 / (r * r);
        let mut acc = Integrands::default();
        for (n, w) in quad.iter() {
            let [j, g, fv, ft] = sparse.directional(r, n);
            let (par, zero) = cubic.node(n.map(|x| r * x), n);
            acc.corr += w * (p0 * j + q0 * g);
            acc.cubic += w * (p1 * zero + q1 * par + 2.0 * q0 / r * (zero - par));
            acc.lap += w * (lap_i * j + lap_hh * g);
            acc.force += w * (p0 * fv + q0 * ft);
        }
        let s = SPHERE_AREA * r * r;
        out.corr += s * acc.corr;
        out.cubic += s * acc.cubic;
        out.lap += s * acc.lap;
        out.force += s * acc.force;
    }
    out
}

/// Residual of the balance between times 0 and the snapshot time `t`.
pub fn khm_residual(
    traj: &Trajectory,
    forcing: &ForcingSpec,
    eta: &TestFunctionSpec,
    t: f64,
    kq: &KhmQuadrature,
    fft: &Fft3,
) -> Result<KhmResidual> {
    eta.check(traj.grid.dx())?;
    if kq.radial_nodes < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 radial nodes, got {}", kq.radial_nodes)));
    }
    let k = traj.snapshot_index(t).ok_or(Error::OutOfRange { t, start: traj.t_start(), end: traj.t_end() })?;
    let nodes = radial_nodes(eta, kq.radial_nodes);
    let rows: Vec<(f64, Integrands)> = traj.snapshots[..=k]
        .iter()
        .map(|(s, v)| {
            let f = forcing.evaluate_dealiased(*s, traj.grid);
            (*s, integrands(v, &f, eta, &nodes, &kq.quad, fft))
        })
        .collect();
    let times: Vec<f64> = rows.iter().map(|(s, _)| *s).collect();
    let in_time = |f: fn(&Integrands) -> f64| simpson(&times, &rows.iter().map(|(_, x)| f(x)).collect::<Vec<_>>());
    let lhs = rows[k].1.corr - rows[0].1.corr;
    let cubic = -0.5 * in_time(|x| x.cubic);
    let viscous = 2.0 * traj.nu * in_time(|x| x.lap);
    let force = 2.0 * in_time(|x| x.force);
    let raw = lhs - cubic - viscous - force;
    let scale = [lhs, cubic, viscous, force].iter().fold(0.0f64, |a, x| a.max(x.abs()));
    Ok(KhmResidual {
        raw,
        normalized: if scale > 0.0 { raw / scale } else { 0.0 },
        lhs,
        cubic,
        viscous,
        forcing: force,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SpectralField;
    use crate::grid::GridSpec;
    use crate::laws::profile::RadialProfile;
    use crate::solver::{Solver, SolverConfig};

    fn rule() -> KhmQuadrature {
        KhmQuadrature { radial_nodes: 48, quad: SphericalQuadrature::gauss_product(8, 16).unwrap() }
    }

    #[test]
    fn zero_trajectory() {
        let g = GridSpec::new(16).unwrap();
        let s = Solver::new(g, SolverConfig::new(0.1, 0.01, 0.2), ForcingSpec::Zero).unwrap();
        let traj = s.run(&SpectralField::zeros(g)).unwrap();
        let eta = TestFunctionSpec::new(RadialProfile::bump(1.0, 0.5), RadialProfile::Zero);
        let r = khm_residual(&traj, &ForcingSpec::Zero, &eta, 0.2, &rule(), s.fft()).unwrap();
        assert_eq!(r.raw, 0.0);
        assert_eq!(r.normalized, 0.0);
    }

    #[test]
    fn unresolved_support() {
        let g = GridSpec::new(8).unwrap();
        let s = Solver::new(g, SolverConfig::new(0.1, 0.01, 0.2), ForcingSpec::Zero).unwrap();
        let traj = s.run(&SpectralField::zeros(g)).unwrap();
        let eta = TestFunctionSpec::new(RadialProfile::bump(0.6, 0.5), RadialProfile::Zero);
        let r = khm_residual(&traj, &ForcingSpec::Zero, &eta, 0.2, &rule(), s.fft());
        assert!(matches!(r, Err(Error::UnresolvedSupport { .. })));
    }

    #[test]
    fn taylor_green_balance_with_both_profiles() {
        let g = GridSpec::new(16).unwrap();
        let mut cfg = SolverConfig::new(0.1, 2e-3, 0.4);
        cfg.snapshot_stride = 50;
        let s = Solver::new(g, cfg, ForcingSpec::Zero).unwrap();
        let traj = s.run(&SpectralField::taylor_green_3d(g)).unwrap();
        let eta = TestFunctionSpec::new(RadialProfile::bump(1.0, 0.5), RadialProfile::bump(1.2, 0.6));
        let r = khm_residual(&traj, &ForcingSpec::Zero, &eta, 0.4, &rule(), s.fft()).unwrap();
        assert!(r.normalized.abs() < 1e-3, "{r:?}");
        assert!(r.cubic.abs() > 1e-3 * r.lhs.abs());
    }
}
