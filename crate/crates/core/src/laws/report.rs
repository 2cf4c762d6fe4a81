//! Per-(ν, ℓ) law cells and the report that collects them, plus
//! trajectory-level entry points for each residual.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::fft::Fft3;
use crate::forcing::ForcingSpec;
use crate::laws::exponents::{exponent_fit, zeta3_band, ExponentFit};
use crate::laws::identities::{IdentityResidual, ScaleTable};
use crate::laws::khm::{khm_residual, KhmQuadrature};
use crate::laws::profile::{RadialProfile, TestFunctionSpec};
use crate::laws::range::InertialRange;
use crate::laws::series::{
    modified_residuals_from, CellSeries, EndpointProfile, ModifiedEpsilons, ModifiedResiduals, RandomTimeResidual,
    TimeDensity,
};
use crate::quadrature::SphericalQuadrature;
use crate::solver::Trajectory;

/// Ratio between the smallest and largest τ node of the scale grid.
pub const TAU_RATIO: f64 = 1e-2;

/// Relative slack for the ε inequalities, absorbing roundoff only.
pub const INEQUALITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct LawOptions {
    pub quad: SphericalQuadrature,
    /// L^p exponents; the first one feeds the CSV summary
    pub ps: Vec<f64>,
    pub tau_nodes: usize,
    /// Hölder exponent for the ζ₃ band
    pub alpha: f64,
    /// Scale-space balance with a bump centred at each ℓ; skipped when `None`.
    pub khm: Option<KhmQuadrature>,
}

impl LawOptions {
    pub fn new(quad: SphericalQuadrature) -> Self {
        Self { quad, ps: vec![2.0, 1.0, 4.0], tau_nodes: 64, alpha: 1.0 / 3.0, khm: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LawCell {
    pub nu: f64,
    pub ell: f64,
    /// normalized scale-space balance residual
    pub khm: Option<f64>,
    /// (p, residual)
    pub four_thirds_lp: Vec<(f64, f64)>,
    pub four_fifths_lp: Vec<(f64, f64)>,
    pub modified_43: f64,
    pub modified_45: f64,
    pub eps1: f64,
    pub eps_ell: f64,
    pub eps_bar_ell: f64,
    pub eps_tilde_ell: f64,
    pub eps_bar_lower_bound: f64,
    /// ∫₀¹ S₃(r, ℓ) dr
    pub s3_integral: f64,
}

fn at_least(x: f64, bound: f64) -> bool {
    x >= bound - INEQUALITY_SLACK * x.abs().max(bound.abs())
}

impl LawCell {
    /// ε^ℓ ≥ ε(1).
    pub fn eps_ell_ok(&self) -> bool {
        at_least(self.eps_ell, self.eps1)
    }

    pub fn eps_bar_ok(&self) -> bool {
        at_least(self.eps_bar_ell, self.eps_bar_lower_bound)
    }

    pub fn all_finite(&self) -> bool {
        let lp = self.four_thirds_lp.iter().chain(&self.four_fifths_lp).all(|(_, r)| r.is_finite());
        lp && self.khm.is_none_or(f64::is_finite)
            && [self.modified_43, self.modified_45, self.eps_ell, self.eps_bar_ell, self.eps_tilde_ell]
                .iter()
                .all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LawReport {
    pub nu: f64,
    /// (t, ε_ν(t)) on the snapshot grid
    pub eps_nu: Vec<(f64, f64)>,
    pub cells: Vec<LawCell>,
    pub zeta3_lo: f64,
    pub zeta3_hi: f64,
    pub fit: Option<ExponentFit>,
    /// why the exponent fit was not possible
    pub fit_error: Option<String>,
}

pub fn law_cell(
    traj: &Trajectory,
    forcing: &ForcingSpec,
    ell: f64,
    opts: &LawOptions,
    fft: &Fft3,
) -> Result<LawCell> {
    let series = CellSeries::from_trajectory(traj, ell, &opts.quad, fft)?;
    let profile = EndpointProfile::from_trajectory(traj, ell, &opts.quad, opts.tau_nodes, TAU_RATIO)?;
    let eps = profile.modified_epsilons();
    let (s0_int, spar_int, s3_integral) = series.time_integrals();
    let modified = modified_residuals_from(s0_int, spar_int, &eps);
    let khm = match &opts.khm {
        Some(kq) => {
            let eta = TestFunctionSpec::new(RadialProfile::bump(ell, 0.5 * ell), RadialProfile::Zero);
            match eta.check(traj.grid.dx()) {
                Ok(_) => Some(khm_residual(traj, forcing, &eta, traj.t_end(), kq, fft)?.normalized),
                Err(_) => None,
            }
        }
        None => None,
    };
    Ok(LawCell {
        nu: traj.nu,
        ell,
        khm,
        four_thirds_lp: opts.ps.iter().map(|&p| (p, series.four_thirds_residual(p))).collect(),
        four_fifths_lp: opts.ps.iter().map(|&p| (p, series.four_fifths_residual(p))).collect(),
        modified_43: modified.modified_43,
        modified_45: modified.modified_45,
        eps1: profile.eps1,
        eps_ell: eps.eps_ell,
        eps_bar_ell: eps.eps_bar_ell,
        eps_tilde_ell: eps.eps_tilde_ell,
        eps_bar_lower_bound: profile.eps_bar_lower_bound(),
        s3_integral,
    })
}

pub fn law_report(
    traj: &Trajectory,
    forcing: &ForcingSpec,
    ells: &[f64],
    opts: &LawOptions,
    fft: &Fft3,
) -> Result<LawReport> {
    let cells = ells
        .iter()
        .map(|&ell| law_cell(traj, forcing, ell, opts, fft))
        .collect::<Result<Vec<_>>>()?;
    let mut eps_nu = Vec::new();
    for t in traj.snapshot_times() {
        eps_nu.push((t, traj.epsilon_nu(t)?.eps));
    }
    let s3: Vec<f64> = cells.iter().map(|c| c.s3_integral).collect();
    let (fit, fit_error) = match exponent_fit(ells, &s3, opts.alpha) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let (zeta3_lo, zeta3_hi) = zeta3_band(opts.alpha);
    Ok(LawReport { nu: traj.nu, eps_nu, cells, zeta3_lo, zeta3_hi, fit, fit_error })
}

#[derive(Serialize)]
struct CellLine<'a> {
    kind: &'static str,
    #[serde(flatten)]
    cell: &'a LawCell,
    eps_ell_ok: bool,
    eps_bar_ok: bool,
}

#[derive(Serialize)]
struct SummaryLine<'a> {
    kind: &'static str,
    nu: f64,
    eps_nu: &'a [(f64, f64)],
    zeta3_lo: f64,
    zeta3_hi: f64,
    zeta_fit: Option<f64>,
    fit_error: &'a Option<String>,
}

impl LawReport {
    /// Descriptions of every failed hard invariant.
    pub fn invariant_failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in &self.cells {
            if !c.all_finite() {
                out.push(format!("nu={} ell={}: non-finite residual", c.nu, c.ell));
            }
            if !c.eps_ell_ok() {
                out.push(format!("nu={} ell={}: eps_ell {} < eps1 {}", c.nu, c.ell, c.eps_ell, c.eps1));
            }
            if !c.eps_bar_ok() {
                out.push(format!(
                    "nu={} ell={}: eps_bar_ell {} below its lower bound {}",
                    c.nu, c.ell, c.eps_bar_ell, c.eps_bar_lower_bound
                ));
            }
        }
        out
    }

    /// Header, one object per cell, then a summary object.
    pub fn write_ndjson<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "{{\"schema\":1}}")?;
        for cell in &self.cells {
            let line = CellLine { kind: "cell", cell, eps_ell_ok: cell.eps_ell_ok(), eps_bar_ok: cell.eps_bar_ok() };
            writeln!(w, "{}", serde_json::to_string(&line).map_err(std::io::Error::other)?)?;
        }
        let summary = SummaryLine {
            kind: "summary",
            nu: self.nu,
            eps_nu: &self.eps_nu,
            zeta3_lo: self.zeta3_lo,
            zeta3_hi: self.zeta3_hi,
            zeta_fit: self.fit.map(|f| f.zeta_fit),
            fit_error: &self.fit_error,
        };
        writeln!(w, "{}", serde_json::to_string(&summary).map_err(std::io::Error::other)?)?;
        Ok(())
    }

    /// Rows (nu, ell, r43_Lp, r45_Lp, eps1, eps_ell, slope_zeta3), using
    /// the first configured p.
    pub fn csv_rows(&self) -> Vec<[f64; 7]> {
        let slope = self.fit.map_or(f64::NAN, |f| f.zeta_fit);
        self.cells
            .iter()
            .map(|c| {
                let r43 = c.four_thirds_lp.first().map_or(f64::NAN, |x| x.1);
                let r45 = c.four_fifths_lp.first().map_or(f64::NAN, |x| x.1);
                [c.nu, c.ell, r43, r45, c.eps1, c.eps_ell, slope]
            })
            .collect()
    }
}

pub const CSV_HEADER: &str = "nu,ell,r43_Lp,r45_Lp,eps1,eps_ell,slope_zeta3";

pub fn s0_identity_residual(
    traj: &Trajectory,
    forcing: &ForcingSpec,
    ell: f64,
    t: f64,
    quad: &SphericalQuadrature,
    tau_nodes: usize,
    fft: &Fft3,
) -> Result<IdentityResidual> {
    ScaleTable::compute(traj, forcing, ell, quad, tau_nodes, fft)?.s0_identity(t)
}

pub fn s_par_identity_residual(
    traj: &Trajectory,
    forcing: &ForcingSpec,
    ell: f64,
    t: f64,
    quad: &SphericalQuadrature,
    tau_nodes: usize,
    fft: &Fft3,
) -> Result<IdentityResidual> {
    ScaleTable::compute(traj, forcing, ell, quad, tau_nodes, fft)?.s_par_identity(t)
}

/// (ℓ, ‖∫₀^· S₀/ℓ + (4/3)ε‖_{L^p}) over the range's scales.
pub fn four_thirds_residual(
    traj: &Trajectory,
    range: &InertialRange,
    p: f64,
    quad: &SphericalQuadrature,
    fft: &Fft3,
) -> Result<Vec<(f64, f64)>> {
    range
        .ells()
        .into_iter()
        .map(|ell| Ok((ell, CellSeries::from_trajectory(traj, ell, quad, fft)?.four_thirds_residual(p))))
        .collect()
}

/// (ℓ, ‖∫₀^· S‖/ℓ + (4/5)ε‖_{L^p}) over the range's scales.
pub fn four_fifths_residual(
    traj: &Trajectory,
    range: &InertialRange,
    p: f64,
    quad: &SphericalQuadrature,
    fft: &Fft3,
) -> Result<Vec<(f64, f64)>> {
    range
        .ells()
        .into_iter()
        .map(|ell| Ok((ell, CellSeries::from_trajectory(traj, ell, quad, fft)?.four_fifths_residual(p))))
        .collect()
}

#[allow(clippy::too_many_arguments)]
pub fn random_time_residual(
    traj: &Trajectory,
    range: &InertialRange,
    p: f64,
    density: &TimeDensity,
    kappa: f64,
    k_bound: f64,
    quad: &SphericalQuadrature,
    fft: &Fft3,
) -> Result<Vec<(f64, RandomTimeResidual)>> {
    density.validated(kappa, k_bound)?;
    range
        .ells()
        .into_iter()
        .map(|ell| {
            let s = CellSeries::from_trajectory(traj, ell, quad, fft)?;
            Ok((ell, s.random_time_residual(density, p, kappa, k_bound)?))
        })
        .collect()
}

pub fn modified_epsilons(traj: &Trajectory, ell: f64, quad: &SphericalQuadrature, tau_nodes: usize) -> Result<ModifiedEpsilons> {
    Ok(EndpointProfile::from_trajectory(traj, ell, quad, tau_nodes, TAU_RATIO)?.modified_epsilons())
}

/// (ℓ, modified 4/3 and 4/5 residuals) over the range's scales.
pub fn modified_law_residuals(
    traj: &Trajectory,
    range: &InertialRange,
    quad: &SphericalQuadrature,
    tau_nodes: usize,
    fft: &Fft3,
) -> Result<Vec<(f64, ModifiedResiduals)>> {
    range
        .ells()
        .into_iter()
        .map(|ell| {
            let (s0, spar, _) = CellSeries::from_trajectory(traj, ell, quad, fft)?.time_integrals();
            let eps = modified_epsilons(traj, ell, quad, tau_nodes)?;
            Ok((ell, modified_residuals_from(s0, spar, &eps)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SpectralField;
    use crate::grid::GridSpec;
    use crate::solver::{Solver, SolverConfig};

    #[test]
    fn zero_trajectory_report() {
        let g = GridSpec::new(8).unwrap();
        let s = Solver::new(g, SolverConfig::new(0.1, 0.01, 0.2), ForcingSpec::Zero).unwrap();
        let traj = s.run(&SpectralField::zeros(g)).unwrap();
        let opts = LawOptions::new(SphericalQuadrature::fibonacci(16).unwrap());
        let ells = [0.2, 0.4, 0.8];
        let r = law_report(&traj, &ForcingSpec::Zero, &ells, &opts, s.fft()).unwrap();
        assert!(r.invariant_failures().is_empty());
        for c in &r.cells {
            assert_eq!(c.modified_43, 0.0);
            assert_eq!(c.modified_45, 0.0);
            assert!(c.four_thirds_lp.iter().all(|x| x.1 == 0.0));
        }
        assert!(r.fit.is_none() && r.fit_error.is_some());
        let mut buf = Vec::new();
        r.write_ndjson(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("{\"schema\":1}\n"));
        assert_eq!(text.lines().count(), 5);
        for line in text.lines() {
            serde_json::from_str::<serde_json::Value>(line).unwrap();
        }
    }

    #[test]
    fn taylor_green_cells_obey_inequalities() {
        let g = GridSpec::new(16).unwrap();
        let mut cfg = SolverConfig::new(0.1, 2e-3, 1.0);
        cfg.snapshot_stride = 50;
        let s = Solver::new(g, cfg, ForcingSpec::Zero).unwrap();
        let traj = s.run(&SpectralField::taylor_green_3d(g)).unwrap();
        let opts = LawOptions::new(SphericalQuadrature::fibonacci(32).unwrap());
        let r = law_report(&traj, &ForcingSpec::Zero, &[0.1, 0.2, 0.4, 0.8, 1.6], &opts, s.fft()).unwrap();
        assert!(r.invariant_failures().is_empty(), "{:?}", r.invariant_failures());
        let fit = r.fit.unwrap();
        assert!(fit.zeta_fit > 1.0);
        assert_eq!(r.csv_rows().len(), 5);
    }
}
