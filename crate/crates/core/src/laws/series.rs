//! Scale-resolved time series and endpoint profiles extracted from a
//! trajectory, plus the L^p and random-time residuals built on them.
//!
//! Time integrals of statistics use cumulative Simpson on the snapshot
//! grid; L^p(0,1) norms use the trapezoid on the same grid.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fft::Fft3;
use crate::laws::constants::{
    EIGHT_FIFTEENTHS, FOUR_FIFTEENTHS, FOUR_FIFTHS, FOUR_THIRDS, G_15_OVER_8PI, J_3_OVER_8PI,
};
use crate::quadrature::{cumulative_simpson, log_tau_grid, simpson, trapezoid, SphericalQuadrature};
use crate::solver::Trajectory;
use crate::stats::{IncrementEngine, SparseModes};

/// Statistics at one scale ℓ, sampled at the snapshot times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSeries {
    pub ell: f64,
    pub times: Vec<f64>,
    pub s_par: Vec<f64>,
    pub s_zero: Vec<f64>,
    pub s3: Vec<f64>,
    /// ε_ν at each snapshot time
    pub eps: Vec<f64>,
}

impl CellSeries {
    pub fn from_trajectory(traj: &Trajectory, ell: f64, quad: &SphericalQuadrature, fft: &Fft3) -> Result<Self> {
        let mut out = CellSeries {
            ell,
            times: traj.snapshot_times(),
            s_par: Vec::new(),
            s_zero: Vec::new(),
            s3: Vec::new(),
            eps: Vec::new(),
        };
        for (t, v) in &traj.snapshots {
            let c = IncrementEngine::new(v, fft).cubic_moments(ell, quad, &[3.0]);
            out.s_par.push(c.s_par);
            out.s_zero.push(c.s_zero);
            out.s3.push(c.s_p[0].1);
            out.eps.push(traj.epsilon_nu(*t)?.eps);
        }
        Ok(out)
    }

    fn cumulative_over_ell(&self, s: &[f64]) -> Vec<f64> {
        let y: Vec<f64> = s.iter().map(|x| x / self.ell).collect();
        cumulative_simpson(&self.times, &y)
    }

    /// ∫₀ᵗ S₀/ℓ + (4/3) ε(t) at each snapshot time.
    pub fn four_thirds_pointwise(&self) -> Vec<f64> {
        let c = self.cumulative_over_ell(&self.s_zero);
        c.iter().zip(&self.eps).map(|(a, e)| a + FOUR_THIRDS * e).collect()
    }

    /// ∫₀ᵗ S‖/ℓ + (4/5) ε(t) at each snapshot time.
    pub fn four_fifths_pointwise(&self) -> Vec<f64> {
        let c = self.cumulative_over_ell(&self.s_par);
        c.iter().zip(&self.eps).map(|(a, e)| a + FOUR_FIFTHS * e).collect()
    }

    pub fn four_thirds_residual(&self, p: f64) -> f64 {
        lp_norm(&self.times, &self.four_thirds_pointwise(), p)
    }

    pub fn four_fifths_residual(&self, p: f64) -> f64 {
        lp_norm(&self.times, &self.four_fifths_pointwise(), p)
    }

    /// ∫₀¹ S₀/ℓ, ∫₀¹ S‖/ℓ and ∫₀¹ S₃.
    pub fn time_integrals(&self) -> (f64, f64, f64) {
        let last = |v: Vec<f64>| v.last().copied().unwrap_or(0.0);
        (
            last(self.cumulative_over_ell(&self.s_zero)),
            last(self.cumulative_over_ell(&self.s_par)),
            simpson(&self.times, &self.s3),
        )
    }

    /// ∫₀¹ ψ(t) |R(t)|^p dt for the longitudinal and mixed residuals R, with
    /// |R|^p interpolated linearly between snapshots.
    pub fn random_time_residual(&self, density: &TimeDensity, p: f64, kappa: f64, k_bound: f64) -> Result<RandomTimeResidual> {
        let psi = density.validated(kappa, k_bound)?;
        let pow = |v: Vec<f64>| -> Vec<f64> { v.iter().map(|x| x.abs().powf(p)).collect() };
        Ok(RandomTimeResidual {
            r45: psi.integrate_against(&self.times, &pow(self.four_fifths_pointwise())),
            r43: psi.integrate_against(&self.times, &pow(self.four_thirds_pointwise())),
        })
    }
}

/// (∫ |y|^p)^{1/p} by trapezoid.
pub fn lp_norm(t: &[f64], y: &[f64], p: f64) -> f64 {
    let a: Vec<f64> = y.iter().map(|x| x.abs().powf(p)).collect();
    trapezoid(t, &a).powf(1.0 / p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RandomTimeResidual {
    pub r45: f64,
    pub r43: f64,
}

/// Law of a random time on [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TimeDensity {
    Uniform,
    /// Normalized smooth bump on [center − width, center + width].
    Bump { center: f64, width: f64 },
    /// Values on a grid, linearly interpolated.
    Tabulated { t: Vec<f64>, psi: Vec<f64> },
}

/// Resolution of the fine grid used for density checks and integration.
const DENSITY_STEPS: usize = 200_000;

/// A density that passed its admissibility checks.
#[derive(Debug, Clone)]
pub struct CheckedDensity {
    density: TimeDensity,
    scale: f64,
}

impl TimeDensity {
    fn raw(&self, t: f64) -> f64 {
        match self {
            TimeDensity::Uniform => 1.0,
            TimeDensity::Bump { center, width } => {
                let s = (t - center) / width;
                if s.abs() >= 1.0 {
                    0.0
                } else {
                    (-1.0 / (1.0 - s * s)).exp()
                }
            }
            TimeDensity::Tabulated { t: ts, psi } => {
                if t <= ts[0] {
                    return psi[0];
                }
                let i = ts.partition_point(|x| *x <= t);
                if i >= ts.len() {
                    return *psi.last().unwrap();
                }
                let w = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
                (1.0 - w) * psi[i - 1] + w * psi[i]
            }
        }
    }

    /// Checks ψ ≥ 0, ∫ψ = 1 and ‖ψ‖_{L^{1+κ}} ≤ K.
    pub fn validated(&self, kappa: f64, k_bound: f64) -> Result<CheckedDensity> {
        match self {
            TimeDensity::Bump { center, width } => {
                if !(*width > 0.0) || center - width < 0.0 || center + width > 1.0 {
                    return Err(Error::BadDensity(format!(
                        "bump [{}, {}] must lie inside [0, 1]",
                        center - width,
                        center + width
                    )));
                }
            }
            TimeDensity::Tabulated { t, psi } => {
                if t.len() < 2 || t.len() != psi.len() || t.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::BadDensity("tabulated density needs increasing nodes".into()));
                }
                if psi.iter().any(|x| !(*x >= 0.0)) {
                    return Err(Error::BadDensity("density takes negative values".into()));
                }
            }
            TimeDensity::Uniform => {}
        }
        let h = 1.0 / DENSITY_STEPS as f64;
        let vals: Vec<f64> = (0..=DENSITY_STEPS).map(|i| self.raw(i as f64 * h)).collect();
        let trap = |f: &dyn Fn(f64) -> f64| -> f64 {
            let s: f64 = vals.iter().map(|v| f(*v)).sum();
            h * (s - 0.5 * (f(vals[0]) + f(vals[DENSITY_STEPS])))
        };
        let mass = trap(&|v| v);
        let scale = match self {
            TimeDensity::Bump { .. } => 1.0 / mass,
            _ => {
                if (mass - 1.0).abs() > 1e-6 {
                    return Err(Error::BadDensity(format!("density integrates to {mass}, not 1")));
                }
                1.0
            }
        };
        let r = 1.0 + kappa;
        let norm = (trap(&|v| (scale * v).powf(r))).powf(1.0 / r);
        if norm > k_bound {
            return Err(Error::BadDensity(format!("‖ψ‖_L^{r} = {norm} exceeds bound {k_bound}")));
        }
        Ok(CheckedDensity { density: self.clone(), scale })
    }
}

impl CheckedDensity {
    pub fn eval(&self, t: f64) -> f64 {
        self.scale * self.density.raw(t)
    }

    /// ∫₀¹ ψ ĝ, with ĝ the piecewise-linear interpolant of `g` at `t`.
    pub fn integrate_against(&self, t: &[f64], g: &[f64]) -> f64 {
        if let TimeDensity::Uniform = self.density {
            return trapezoid(t, g);
        }
        let sub = 4000;
        let mut total = 0.0;
        for i in 0..t.len().saturating_sub(1) {
            let (a, b) = (t[i], t[i + 1]);
            let h = (b - a) / sub as f64;
            let mut s = 0.0;
            for m in 0..=sub {
                let w = m as f64 / sub as f64;
                let y = self.eval(a + m as f64 * h) * ((1.0 - w) * g[i] + w * g[i + 1]);
                s += if m == 0 || m == sub { 0.5 * y } else { y };
            }
            total += h * s;
        }
        total
    }
}

/// Correlations at the final time over the τ grid of one scale ℓ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndpointProfile {
    pub ell: f64,
    pub taus: Vec<f64>,
    /// j(1, τ)
    pub j1: Vec<f64>,
    /// g(1, τ)
    pub g1: Vec<f64>,
    /// ½‖v(0)‖²
    pub half_l2_0: f64,
    /// ∫₀¹⟨f, v⟩
    pub force_work: f64,
    /// ε_ν(1)
    pub eps1: f64,
    /// ‖v(1)‖²
    pub l2_1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModifiedEpsilons {
    pub eps_ell: f64,
    pub eps_bar_ell: f64,
    pub eps_tilde_ell: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModifiedResiduals {
    pub modified_43: f64,
    pub modified_45: f64,
}

impl EndpointProfile {
    pub fn from_trajectory(
        traj: &Trajectory,
        ell: f64,
        quad: &SphericalQuadrature,
        tau_nodes: usize,
        tau_ratio: f64,
    ) -> Result<Self> {
        let (t1, v1) = traj
            .snapshots
            .last()
            .ok_or_else(|| Error::InvalidInput("empty trajectory".into()))?;
        let taus = log_tau_grid(ell, tau_nodes, tau_ratio);
        let sparse = SparseModes::new(v1, None);
        let (mut j1, mut g1) = (Vec::new(), Vec::new());
        for &tau in &taus {
            let a = sparse.averages(tau, quad);
            j1.push(a.j);
            g1.push(a.g);
        }
        Ok(Self {
            ell,
            taus,
            j1,
            g1,
            half_l2_0: 0.5 * traj.ledger[0].l2sq,
            force_work: traj.force_work(*t1)?,
            eps1: traj.epsilon_nu(*t1)?.eps,
            l2_1: traj.l2_sq_at(*t1)?,
        })
    }

    /// ε^τ for every τ on the grid, the τ = 0 entry taken as the limit.
    pub fn eps_tau(&self) -> Vec<f64> {
        let base = self.half_l2_0 + self.force_work;
        let y: Vec<f64> = self.taus.iter().zip(&self.j1).map(|(t, j)| t * t * j).collect();
        let c = cumulative_simpson(&self.taus, &y);
        self.taus
            .iter()
            .zip(&c)
            .enumerate()
            .map(|(i, (t, ci))| {
                if *t == 0.0 {
                    // (3/(2τ³))∫₀^τ σ² j dσ → j(1, 0)/2
                    base - 0.5 * self.j1[i]
                } else {
                    base - J_3_OVER_8PI * ci / (t * t * t)
                }
            })
            .collect()
    }

    pub fn modified_epsilons(&self) -> ModifiedEpsilons {
        let l = self.ell;
        let base = self.half_l2_0 + self.force_work;
        let eps_tau = self.eps_tau();
        let g4: Vec<f64> = self.taus.iter().zip(&self.g1).map(|(t, g)| t.powi(4) * g).collect();
        let e4: Vec<f64> = self.taus.iter().zip(&eps_tau).map(|(t, e)| t.powi(4) * e).collect();
        ModifiedEpsilons {
            eps_ell: *eps_tau.last().unwrap(),
            eps_bar_ell: base - G_15_OVER_8PI * simpson(&self.taus, &g4) / l.powi(5),
            eps_tilde_ell: 5.0 * simpson(&self.taus, &e4) / l.powi(5),
        }
    }

    /// ½‖v(0)‖² − (3/2)‖v(1)‖² + ∫⟨f, v⟩.
    pub fn eps_bar_lower_bound(&self) -> f64 {
        self.half_l2_0 - 1.5 * self.l2_1 + self.force_work
    }
}

/// |∫₀¹S₀/ℓ + (4/3)ε^ℓ| and |∫₀¹S‖/ℓ + (4/15)ε̄^ℓ + (8/15)ε̃^ℓ|.
pub fn modified_residuals_from(s0_int: f64, spar_int: f64, eps: &ModifiedEpsilons) -> ModifiedResiduals {
    ModifiedResiduals {
        modified_43: (s0_int + FOUR_THIRDS * eps.eps_ell).abs(),
        modified_45: (spar_int + FOUR_FIFTEENTHS * eps.eps_bar_ell + EIGHT_FIFTEENTHS * eps.eps_tilde_ell).abs(),
    }
}
