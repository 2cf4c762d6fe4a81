//! Exact scale-by-scale identities for S₀ and S‖ and the term-by-term
//! decompositions of the law residuals they imply.
//!
//! A [`ScaleTable`] holds every quadratic average and both cubic averages
//! on the product of the snapshot times and a τ grid on [0, ℓ].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fft::Fft3;
use crate::forcing::ForcingSpec;
use crate::laws::constants::{FOUR_FIFTEENTHS, FOUR_THIRDS, G_OVER_2PI, J_OVER_2PI};
use crate::laws::series::{lp_norm, EndpointProfile};
use crate::quadrature::{cumulative_simpson, log_tau_grid, simpson, SphericalQuadrature};
use crate::solver::Trajectory;
use crate::stats::{CubicPath, SparseModes, SphericalAverages};

#[derive(Debug, Clone, Serialize)]
pub struct ScaleTable {
    pub nu: f64,
    pub ell: f64,
    pub taus: Vec<f64>,
    pub times: Vec<f64>,
    /// [time][τ]
    pub avg: Vec<Vec<SphericalAverages>>,
    pub s_par: Vec<Vec<f64>>,
    pub s_zero: Vec<Vec<f64>>,
    /// ε_ν at each snapshot time
    pub eps: Vec<f64>,
    /// ∫₀ᵗ⟨f, v⟩ at each snapshot time
    pub force_work: Vec<f64>,
    pub half_l2_0: f64,
    pub l2_end: f64,
}

/// A residual together with its named constituent terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityResidual {
    pub raw: f64,
    /// raw divided by the largest |term|; 0 when every term vanishes
    pub normalized: f64,
    pub terms: Vec<(&'static str, f64)>,
}

impl IdentityResidual {
    fn from_terms(terms: Vec<(&'static str, f64)>) -> Self {
        let raw: f64 = terms.iter().map(|(_, x)| x).sum();
        let scale = terms.iter().fold(0.0f64, |m, (_, x)| m.max(x.abs()));
        Self { raw, normalized: if scale > 0.0 { raw / scale } else { 0.0 }, terms }
    }
}

/// A law residual split into parts whose signed sum reproduces it; `bound`
/// is the triangle-inequality sum of their magnitudes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    pub residual: f64,
    pub parts: Vec<(&'static str, f64)>,
    pub bound: f64,
}

impl Decomposition {
    fn new(residual: f64, parts: Vec<(&'static str, f64)>) -> Self {
        let bound = parts.iter().map(|(_, x)| x.abs()).sum();
        Self { residual, parts, bound }
    }

    /// Signed sum of the parts.
    pub fn reassembled(&self) -> f64 {
        self.parts.iter().map(|(_, x)| x).sum()
    }
}

impl ScaleTable {
    pub fn compute(
        traj: &Trajectory,
        forcing: &ForcingSpec,
        ell: f64,
        quad: &SphericalQuadrature,
        tau_nodes: usize,
        fft: &Fft3,
    ) -> Result<Self> {
        if !(ell > 0.0) || traj.snapshots.is_empty() {
            return Err(Error::InvalidInput(format!("need ℓ > 0 and a non-empty trajectory, got ℓ = {ell}")));
        }
        let taus = log_tau_grid(ell, tau_nodes, 1e-2);
        let mut table = ScaleTable {
            nu: traj.nu,
            ell,
            taus,
            times: traj.snapshot_times(),
            avg: Vec::new(),
            s_par: Vec::new(),
            s_zero: Vec::new(),
            eps: Vec::new(),
            force_work: Vec::new(),
            half_l2_0: 0.5 * traj.ledger[0].l2sq,
            l2_end: traj.l2_sq_at(traj.t_end())?,
        };
        for (t, v) in &traj.snapshots {
            let f = forcing.evaluate_dealiased(*t, traj.grid);
            let sparse = SparseModes::new(v, Some(&f));
            let cubic = CubicPath::new(v, fft);
            let (mut a, mut p, mut z) = (Vec::new(), Vec::new(), Vec::new());
            for &tau in &table.taus {
                a.push(sparse.averages(tau, quad));
                let (sp, sz) = cubic.averages(tau, quad);
                p.push(sp);
                z.push(sz);
            }
            table.avg.push(a);
            table.s_par.push(p);
            table.s_zero.push(z);
            table.eps.push(traj.epsilon_nu(*t)?.eps);
            table.force_work.push(traj.force_work(*t)?);
        }
        Ok(table)
    }

    fn time_index(&self, t: f64) -> Result<usize> {
        self.times
            .iter()
            .position(|s| (s - t).abs() <= 1e-12 * t.abs().max(1.0))
            .ok_or(Error::OutOfRange { t, start: self.times[0], end: *self.times.last().unwrap() })
    }

    fn last(&self) -> usize {
        self.times.len() - 1
    }

    /// Cumulative Simpson in time of `f(i)` over the snapshot grid.
    fn in_time(&self, f: impl Fn(usize) -> f64) -> Vec<f64> {
        let y: Vec<f64> = (0..self.times.len()).map(f).collect();
        cumulative_simpson(&self.times, &y)
    }

    /// ∫₀^ℓ τ^m g(τ) dτ.
    fn in_tau(&self, m: i32, g: impl Fn(usize) -> f64) -> f64 {
        let y: Vec<f64> = self.taus.iter().enumerate().map(|(i, t)| t.powi(m) * g(i)).collect();
        simpson(&self.taus, &y)
    }

    fn top(&self) -> usize {
        self.taus.len() - 1
    }

    fn s0_terms(&self, k: usize) -> Vec<(&'static str, f64)> {
        let (l, top) = (self.ell, self.top());
        let a = self.in_time(|i| self.s_zero[i][top] / l)[k];
        let v = self.in_time(|i| 4.0 * self.nu * self.avg[i][top].dgamma / l)[k];
        let fbar_cum: Vec<Vec<f64>> = (0..self.taus.len()).map(|j| self.in_time(|i| self.avg[i][j].fbar)).collect();
        let f = 4.0 / l.powi(3) * self.in_tau(2, |j| fbar_cum[j][k]);
        let jt = J_OVER_2PI / l.powi(3) * self.in_tau(2, |j| self.avg[k][j].j - self.avg[0][j].j);
        vec![("cubic", a), ("viscous", v), ("forcing", f), ("correlation", -jt)]
    }

    /// Residual of the S₀ balance at snapshot time `t`.
    pub fn s0_identity(&self, t: f64) -> Result<IdentityResidual> {
        Ok(IdentityResidual::from_terms(self.s0_terms(self.time_index(t)?)))
    }

    /// Residual of the S‖ balance at snapshot time `t`.
    pub fn s_par_identity(&self, t: f64) -> Result<IdentityResidual> {
        let k = self.time_index(t)?;
        let (l, top) = (self.ell, self.top());
        let l5 = l.powi(5);
        let a = self.in_time(|i| self.s_par[i][top] / l)[k];
        let hh = self.in_time(|i| 4.0 * self.nu * self.avg[i][top].h / l)[k];
        let s0_cum: Vec<f64> = (0..self.taus.len()).map(|j| self.in_time(|i| self.s_zero[i][j])[k]).collect();
        let s0 = -2.0 / l5 * self.in_tau(3, |j| s0_cum[j]);
        let ft_cum: Vec<f64> = (0..self.taus.len()).map(|j| self.in_time(|i| self.avg[i][j].ftilde)[k]).collect();
        let ft = 4.0 / l5 * self.in_tau(4, |j| ft_cum[j]);
        let gt = G_OVER_2PI / l5 * self.in_tau(4, |j| self.avg[k][j].g - self.avg[0][j].g);
        Ok(IdentityResidual::from_terms(vec![
            ("cubic", a),
            ("viscous", hh),
            ("cubic_mixed", s0),
            ("forcing", ft),
            ("correlation", -gt),
        ]))
    }

    /// Final-time correlation profile over the τ grid.
    pub fn endpoint_profile(&self) -> EndpointProfile {
        let k = self.last();
        EndpointProfile {
            ell: self.ell,
            taus: self.taus.clone(),
            j1: self.avg[k].iter().map(|a| a.j).collect(),
            g1: self.avg[k].iter().map(|a| a.g).collect(),
            half_l2_0: self.half_l2_0,
            force_work: self.force_work[k],
            eps1: self.eps[k],
            l2_1: self.l2_end,
        }
    }

    /// ∫₀¹ S₀/ℓ and ∫₀¹ S‖/ℓ at τ = ℓ.
    fn law_integrals(&self) -> (f64, f64) {
        let (l, top, k) = (self.ell, self.top(), self.last());
        (
            self.in_time(|i| self.s_zero[i][top] / l)[k],
            self.in_time(|i| self.s_par[i][top] / l)[k],
        )
    }

    /// ∫₀¹S₀/ℓ + (4/3)ε^ℓ split into the S₀ identity residual, the viscous
    /// term, the forcing mismatch and the initial-correlation defect.
    pub fn modified_43_decomposition(&self) -> Decomposition {
        let k = self.last();
        let terms = self.s0_terms(k);
        let id = IdentityResidual::from_terms(terms.clone());
        let l = self.ell;
        let w = self.force_work[k];
        let eps = self.endpoint_profile().modified_epsilons();
        let residual = self.law_integrals().0 + FOUR_THIRDS * eps.eps_ell;
        let j00 = self.avg[0][0].j;
        let defect = J_OVER_2PI / l.powi(3) * self.in_tau(2, |j| j00 - self.avg[0][j].j);
        Decomposition::new(
            residual,
            vec![
                ("identity", id.raw),
                ("viscous", -terms[1].1),
                ("forcing", -(terms[2].1 - FOUR_THIRDS * w)),
                ("initial", defect),
            ],
        )
    }

    /// ∫₀¹S‖/ℓ + (4/15)ε̄^ℓ + (8/15)ε̃^ℓ split into the S‖ identity
    /// residual, the viscous term, the τ-weighted modified 4/3 residuals,
    /// the forcing mismatch and the initial-correlation defect.
    pub fn modified_45_decomposition(&self) -> Decomposition {
        let k = self.last();
        let t1 = self.times[k];
        let id = self.s_par_identity(t1).expect("last snapshot time");
        let l = self.ell;
        let l5 = l.powi(5);
        let w = self.force_work[k];
        let profile = self.endpoint_profile();
        let eps = profile.modified_epsilons();
        let residual = self.law_integrals().1 + FOUR_FIFTEENTHS * eps.eps_bar_ell + 2.0 * FOUR_FIFTEENTHS * eps.eps_tilde_ell;
        let eps_tau = profile.eps_tau();
        let m43: Vec<f64> = (0..self.taus.len())
            .map(|j| {
                let tau = self.taus[j];
                let s = if tau > 0.0 { self.in_time(|i| self.s_zero[i][j] / tau)[k] } else { 0.0 };
                s + FOUR_THIRDS * eps_tau[j]
            })
            .collect();
        let weighted = 2.0 / l5 * self.in_tau(4, |j| m43[j]);
        let initial = FOUR_FIFTEENTHS * self.half_l2_0 - G_OVER_2PI / l5 * self.in_tau(4, |j| self.avg[0][j].g);
        Decomposition::new(
            residual,
            vec![
                ("identity", id.raw),
                ("viscous", -id.terms[1].1),
                ("modified_43", weighted),
                ("forcing", -(id.terms[3].1 - FOUR_FIFTEENTHS * w)),
                ("initial", initial),
            ],
        )
    }

    /// ‖∫₀^· S₀/ℓ + (4/3)ε‖_{L^p} split, pointwise in time, into the S₀
    /// identity residual, the viscous term, the forcing mismatch and the
    /// small-τ correlation defect; parts are L^p norms so the bound is
    /// Minkowski's inequality.
    pub fn four_thirds_decomposition(&self, p: f64) -> Decomposition {
        let l = self.ell;
        let n = self.times.len();
        let top = self.top();
        let a = self.in_time(|i| self.s_zero[i][top] / l);
        let r: Vec<f64> = (0..n).map(|i| a[i] + FOUR_THIRDS * self.eps[i]).collect();
        let (mut id, mut visc, mut forc, mut corr) = (vec![], vec![], vec![], vec![]);
        for k in 0..n {
            let terms = self.s0_terms(k);
            id.push(terms.iter().map(|(_, x)| x).sum::<f64>());
            visc.push(-terms[1].1);
            forc.push(-(terms[2].1 - FOUR_THIRDS * self.force_work[k]));
            let c = J_OVER_2PI / l.powi(3)
                * self.in_tau(2, |j| (self.avg[k][j].j - self.avg[k][0].j) - (self.avg[0][j].j - self.avg[0][0].j));
            corr.push(c);
        }
        let t = &self.times;
        Decomposition::new(
            lp_norm(t, &r, p),
            vec![
                ("identity", lp_norm(t, &id, p)),
                ("viscous", lp_norm(t, &visc, p)),
                ("forcing", lp_norm(t, &forc, p)),
                ("correlation", lp_norm(t, &corr, p)),
            ],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::field::SpectralField;
    use crate::solver::{Solver, SolverConfig};

    fn tg_run(n: usize, dt: f64) -> (Trajectory, Fft3) {
        let g = GridSpec::new(n).unwrap();
        let mut cfg = SolverConfig::new(0.1, dt, 1.0);
        cfg.snapshot_stride = (0.1 / dt).round() as usize;
        let s = Solver::new(g, cfg, ForcingSpec::Zero).unwrap();
        (s.run(&SpectralField::taylor_green_3d(g)).unwrap(), Fft3::new(g))
    }

    #[test]
    fn zero_trajectory_gives_zero() {
        let g = GridSpec::new(8).unwrap();
        let s = Solver::new(g, SolverConfig::new(0.1, 0.01, 0.1), ForcingSpec::Zero).unwrap();
        let traj = s.run(&SpectralField::zeros(g)).unwrap();
        let quad = SphericalQuadrature::gauss_product(4, 8).unwrap();
        let table = ScaleTable::compute(&traj, &ForcingSpec::Zero, 0.5, &quad, 16, s.fft()).unwrap();
        assert_eq!(table.s0_identity(0.1).unwrap().raw, 0.0);
        assert_eq!(table.s_par_identity(0.1).unwrap().raw, 0.0);
        assert_eq!(table.modified_43_decomposition().residual, 0.0);
    }

    #[test]
    fn taylor_green_identities_hold() {
        let (traj, fft) = tg_run(16, 1e-3);
        let quad = SphericalQuadrature::gauss_product(8, 16).unwrap();
        let table = ScaleTable::compute(&traj, &ForcingSpec::Zero, 0.5, &quad, 64, &fft).unwrap();
        let r0 = table.s0_identity(1.0).unwrap();
        let r1 = table.s_par_identity(1.0).unwrap();
        assert!(r0.normalized.abs() < 1e-3, "{r0:?}");
        assert!(r1.normalized.abs() < 1e-3, "{r1:?}");

        let d43 = table.modified_43_decomposition();
        assert!((d43.residual - d43.reassembled()).abs() < 1e-6 * d43.bound);
        assert!(d43.residual.abs() <= d43.bound * (1.0 + 1e-12));
        let d45 = table.modified_45_decomposition();
        assert!((d45.residual - d45.reassembled()).abs() < 1e-6 * d45.bound, "{d45:?}");
        assert!(d45.residual.abs() <= d45.bound * (1.0 + 1e-12));
        let lp = table.four_thirds_decomposition(2.0);
        assert!(lp.residual <= lp.bound * (1.0 + 1e-12));
    }

    #[test]
    fn tau_refinement_reduces_residual() {
        let (traj, fft) = tg_run(16, 1e-3);
        let quad = SphericalQuadrature::gauss_product(8, 16).unwrap();
        let coarse = ScaleTable::compute(&traj, &ForcingSpec::Zero, 0.5, &quad, 8, &fft).unwrap();
        let fine = ScaleTable::compute(&traj, &ForcingSpec::Zero, 0.5, &quad, 64, &fft).unwrap();
        let (c, f) = (coarse.s0_identity(1.0).unwrap().raw, fine.s0_identity(1.0).unwrap().raw);
        assert!(f.abs() < c.abs(), "coarse {c}, fine {f}");
        let (c, f) = (coarse.s_par_identity(1.0).unwrap().raw, fine.s_par_identity(1.0).unwrap().raw);
        assert!(f.abs() < c.abs(), "coarse {c}, fine {f}");
    }
}
