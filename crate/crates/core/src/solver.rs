//! Integrating-factor Runge–Kutta time stepping of the forced
//! Navier–Stokes equations, with a per-step energy ledger.
//!
//! The state is kept spectral, dealiased and solenoidal. The viscous term
//! is absorbed into the factor `e^{-ν|k|²t}`; the advection term
//! `-P div(u⊗u)` is formed pseudo-spectrally.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::Fft3;
use crate::field::{PhysicalField, SpectralField};
use crate::forcing::ForcingSpec;
use crate::grid::GridSpec;
use crate::quadrature::cumulative_trapezoid;

/// Courant number enforced on every step.
pub const CFL_NUMBER: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    IfRk4,
    IfRk2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub nu: f64,
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_stride: usize,
    pub integrator: Integrator,
    /// Turning this off leaves the forced Stokes equations.
    pub advection: bool,
}

impl SolverConfig {
    pub fn new(nu: f64, dt: f64, t_end: f64) -> Self {
        Self {
            nu,
            dt,
            t_end,
            snapshot_stride: 100,
            integrator: Integrator::IfRk4,
            advection: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::InvalidInput(format!("nu must be positive, got {}", self.nu)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidInput(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end <= 1.0) {
            return Err(Error::InvalidInput(format!("t_end must lie in (0, 1], got {}", self.t_end)));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::InvalidInput("snapshot_stride must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub t: f64,
    pub l2sq: f64,
    pub h1sq: f64,
    pub fv: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: GridSpec,
    pub nu: f64,
    pub snapshots: Vec<(f64, SpectralField)>,
    pub ledger: Vec<LedgerEntry>,
}

pub struct Solver {
    grid: GridSpec,
    fft: Fft3,
    config: SolverConfig,
    forcing: ForcingSpec,
    constant_force: Option<SpectralField>,
}

impl std::fmt::Debug for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Solver")
            .field("grid", &self.grid)
            .field("config", &self.config)
            .field("forcing", &self.forcing)
            .finish()
    }
}

struct Factors {
    half: Vec<f64>,
    full: Vec<f64>,
}

impl Solver {
    pub fn new(grid: GridSpec, config: SolverConfig, forcing: ForcingSpec) -> Result<Self> {
        config.validate()?;
        forcing.validate()?;
        let constant_force = forcing
            .is_time_independent()
            .then(|| forcing.evaluate_dealiased(0.0, grid));
        Ok(Self {
            grid,
            fft: Fft3::new(grid),
            config,
            forcing,
            constant_force,
        })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn fft(&self) -> &Fft3 {
        &self.fft
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn forcing(&self) -> &ForcingSpec {
        &self.forcing
    }

    pub fn force_at(&self, t: f64) -> SpectralField {
        match &self.constant_force {
            Some(f) => f.clone(),
            None => self.forcing.evaluate_dealiased(t, self.grid),
        }
    }

    fn factors(&self, dt: f64) -> Factors {
        let g = self.grid;
        let nu = self.config.nu;
        let half = (0..g.len()).map(|i| (-0.5 * nu * g.k_squared(i) * dt).exp()).collect();
        let full = (0..g.len()).map(|i| (-nu * g.k_squared(i) * dt).exp()).collect();
        Factors { half, full }
    }

    /// `-P div(u⊗u)`, dealiased, together with max |u| on the grid.
    pub fn advection_term(&self, u: &SpectralField) -> (SpectralField, f64) {
        let g = self.grid;
        let len = g.len();
        let phys = u.to_physical(&self.fft);
        let (u0, u1, u2) = (phys.component(0), phys.component(1), phys.component(2));
        let mut speed2: f64 = 0.0;
        for i in 0..len {
            speed2 = speed2.max(u0[i] * u0[i] + u1[i] * u1[i] + u2[i] * u2[i]);
        }

        let prod = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x * y).collect() };
        let pairs = [
            (prod(u0, u0), prod(u0, u1)),
            (prod(u0, u2), prod(u1, u1)),
            (prod(u1, u2), prod(u2, u2)),
        ];
        let mut hats: Vec<Vec<Complex64>> = Vec::with_capacity(6);
        for (a, b) in &pairs {
            let mut ha = vec![Complex64::default(); len];
            let mut hb = vec![Complex64::default(); len];
            self.fft.forward_real_pair(a, Some(b), &mut ha, Some(&mut hb));
            hats.push(ha);
            hats.push(hb);
        }
        // symmetric tensor slots: 00 01 02 11 12 22
        let slot = |i: usize, j: usize| -> usize {
            match (i.min(j), i.max(j)) {
                (0, 0) => 0,
                (0, 1) => 1,
                (0, 2) => 2,
                (1, 1) => 3,
                (1, 2) => 4,
                _ => 5,
            }
        };

        let mut out = SpectralField::zeros(g);
        let coeffs = out.coeffs_mut();
        for idx in 0..len {
            if !g.is_retained(idx) {
                continue;
            }
            let [a, b, c] = g.unravel(idx);
            let k = [g.odd_wavenumber(a), g.odd_wavenumber(b), g.odd_wavenumber(c)];
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            if k2 == 0.0 {
                continue;
            }
            let mut d = [Complex64::default(); 3];
            for (i, di) in d.iter_mut().enumerate() {
                for (j, kj) in k.iter().enumerate() {
                    *di += hats[slot(i, j)][idx] * *kj;
                }
                *di *= Complex64::i();
            }
            let kd = (d[0] * k[0] + d[1] * k[1] + d[2] * k[2]) / k2;
            for i in 0..3 {
                coeffs[i * len + idx] = -(d[i] - kd * k[i]);
            }
        }
        (out, speed2.sqrt())
    }

    fn rhs(&self, u: &SpectralField, t: f64) -> (SpectralField, f64) {
        let (mut n, speed) = if self.config.advection {
            self.advection_term(u)
        } else {
            (SpectralField::zeros(self.grid), 0.0)
        };
        if !self.forcing.is_zero() {
            n.add_scaled(&self.force_at(t), 1.0);
        }
        (n, speed)
    }

    fn check_cfl(&self, speed: f64, dt: f64, step: usize, t: f64) -> Result<()> {
        if speed > 0.0 {
            let limit = CFL_NUMBER * self.grid.dx() / speed;
            if dt > limit {
                return Err(Error::CflViolation { step, t, dt, limit });
            }
        }
        Ok(())
    }

    /// One step of size `dt` from time `t`.
    pub fn step(&self, u: &SpectralField, t: f64, dt: f64) -> Result<SpectralField> {
        self.step_inner(u, t, dt, &self.factors(dt), 0)
    }

    fn step_inner(&self, u: &SpectralField, t: f64, dt: f64, e: &Factors, step: usize) -> Result<SpectralField> {
        let apply = |f: &[f64], v: &SpectralField| -> SpectralField {
            let mut out = v.clone();
            let len = self.grid.len();
            for (i, z) in out.coeffs_mut().iter_mut().enumerate() {
                *z *= f[i % len];
            }
            out
        };
        let (a, speed) = self.rhs(u, t);
        self.check_cfl(speed, dt, step, t)?;
        let next = match self.config.integrator {
            Integrator::IfRk4 => {
                let mut s = u.clone();
                s.add_scaled(&a, 0.5 * dt);
                let u1 = apply(&e.half, &s);
                let (b, _) = self.rhs(&u1, t + 0.5 * dt);
                let mut u2 = apply(&e.half, u);
                u2.add_scaled(&b, 0.5 * dt);
                let (c, _) = self.rhs(&u2, t + 0.5 * dt);
                let eu = apply(&e.full, u);
                let mut u3 = eu.clone();
                u3.add_scaled(&apply(&e.half, &c), dt);
                let (d, _) = self.rhs(&u3, t + dt);
                let mut bc = b;
                bc.add_scaled(&c, 1.0);
                let mut next = eu;
                next.add_scaled(&apply(&e.full, &a), dt / 6.0);
                next.add_scaled(&apply(&e.half, &bc), dt / 3.0);
                next.add_scaled(&d, dt / 6.0);
                next
            }
            Integrator::IfRk2 => {
                let mut s = u.clone();
                s.add_scaled(&a, dt);
                let u1 = apply(&e.full, &s);
                let (b, _) = self.rhs(&u1, t + dt);
                let mut next = apply(&e.full, u);
                next.add_scaled(&apply(&e.full, &a), 0.5 * dt);
                next.add_scaled(&b, 0.5 * dt);
                next
            }
        };
        if !next.is_finite() {
            return Err(Error::NonFinite { t: t + dt });
        }
        Ok(next)
    }

    fn ledger_entry(&self, u: &SpectralField, t: f64) -> LedgerEntry {
        let fv = if self.forcing.is_zero() {
            0.0
        } else {
            self.force_at(t).inner(u)
        };
        LedgerEntry {
            t,
            l2sq: u.l2_sq(),
            h1sq: u.h1_sq(),
            fv,
        }
    }

    pub fn run(&self, initial: &SpectralField) -> Result<Trajectory> {
        self.run_from(initial, 0.0)
    }

    /// Integrates from `t_start` to `t_end`, e.g. to restart from a snapshot.
    /// The step is adjusted so that an integer number of steps lands on
    /// `t_end` exactly.
    pub fn run_from(&self, initial: &SpectralField, t_start: f64) -> Result<Trajectory> {
        if initial.grid() != self.grid {
            return Err(Error::InvalidInput("initial datum lives on a different grid".into()));
        }
        let span = self.config.t_end - t_start;
        if !(span > 0.0) {
            return Err(Error::InvalidInput(format!(
                "start time {t_start} not before t_end {}",
                self.config.t_end
            )));
        }
        let steps = ((span / self.config.dt).round() as usize).max(1);
        let dt = span / steps as f64;
        let factors = self.factors(dt);

        let mut u = initial.clone();
        let mut snapshots = vec![(t_start, u.clone())];
        let mut ledger = Vec::with_capacity(steps + 1);
        ledger.push(self.ledger_entry(&u, t_start));
        for s in 0..steps {
            let t = t_start + s as f64 * dt;
            u = self.step_inner(&u, t, dt, &factors, s)?;
            let t_next = if s + 1 == steps {
                self.config.t_end
            } else {
                t_start + (s + 1) as f64 * dt
            };
            ledger.push(self.ledger_entry(&u, t_next));
            if (s + 1) % self.config.snapshot_stride == 0 || s + 1 == steps {
                snapshots.push((t_next, u.clone()));
            }
        }
        Ok(Trajectory {
            grid: self.grid,
            nu: self.config.nu,
            snapshots,
            ledger,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Epsilon {
    /// ½‖v(0)‖² − ½‖v(t)‖² + ∫₀ᵗ⟨f, v⟩
    pub eps: f64,
    /// ν∫₀ᵗ‖∇v‖²
    pub dissipation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub sup_l2: f64,
    pub lq_halpha: f64,
    pub l1sigma_force: f64,
}

impl Trajectory {
    pub fn t_start(&self) -> f64 {
        self.ledger.first().map_or(0.0, |e| e.t)
    }

    pub fn t_end(&self) -> f64 {
        self.ledger.last().map_or(0.0, |e| e.t)
    }

    pub fn snapshot_times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|(t, _)| *t).collect()
    }

    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let (start, end) = (self.t_start(), self.t_end());
        let tol = 1e-12 * end.abs().max(1.0);
        if self.ledger.is_empty() || t < start - tol || t > end + tol {
            return Err(Error::OutOfRange { t, start, end });
        }
        let t = t.clamp(start, end);
        let i = self.ledger.partition_point(|e| e.t <= t).saturating_sub(1);
        if i + 1 >= self.ledger.len() {
            return Ok((self.ledger.len() - 1, 0.0));
        }
        let (a, b) = (self.ledger[i].t, self.ledger[i + 1].t);
        Ok((i, (t - a) / (b - a)))
    }

    fn interp(&self, values: &[f64], t: f64) -> Result<f64> {
        let (i, w) = self.locate(t)?;
        Ok(if w == 0.0 {
            values[i]
        } else {
            (1.0 - w) * values[i] + w * values[i + 1]
        })
    }

    fn ledger_column(&self, f: impl Fn(&LedgerEntry) -> f64) -> Vec<f64> {
        self.ledger.iter().map(f).collect()
    }

    fn cumulative(&self, f: impl Fn(&LedgerEntry) -> f64) -> Vec<f64> {
        cumulative_trapezoid(&self.ledger_column(|e| e.t), &self.ledger_column(f))
    }

    pub fn epsilon_nu(&self, t: f64) -> Result<Epsilon> {
        let l2 = self.interp(&self.ledger_column(|e| e.l2sq), t)?;
        let fv = self.interp(&self.cumulative(|e| e.fv), t)?;
        let diss = self.interp(&self.cumulative(|e| e.h1sq), t)?;
        Ok(Epsilon {
            eps: 0.5 * self.ledger[0].l2sq - 0.5 * l2 + fv,
            dissipation: self.nu * diss,
        })
    }

    /// ∫₀ᵗ⟨f, v⟩ by trapezoid on the ledger.
    pub fn force_work(&self, t: f64) -> Result<f64> {
        self.interp(&self.cumulative(|e| e.fv), t)
    }

    /// ‖v(t)‖² by linear interpolation of the ledger.
    pub fn l2_sq_at(&self, t: f64) -> Result<f64> {
        self.interp(&self.ledger_column(|e| e.l2sq), t)
    }

    /// ‖v(t)‖² + 2ν∫‖∇v‖² − ‖v(0)‖² − 2∫⟨f, v⟩.
    pub fn energy_balance_residual(&self, t: f64) -> Result<f64> {
        let l2 = self.interp(&self.ledger_column(|e| e.l2sq), t)?;
        let fv = self.interp(&self.cumulative(|e| e.fv), t)?;
        let diss = self.interp(&self.cumulative(|e| e.h1sq), t)?;
        Ok(l2 + 2.0 * self.nu * diss - self.ledger[0].l2sq - 2.0 * fv)
    }

    /// Norms entering the standing integrability hypothesis: sup_t ‖v‖_{L²}
    /// from the ledger, ‖v‖_{L^q(H^α)} by trapezoid on the snapshot grid,
    /// and ‖f‖_{L^{1+σ}(L²)}.
    pub fn hypothesis_h_report(&self, forcing: &ForcingSpec, alpha: f64, q: f64, sigma: f64) -> Result<HypothesisReport> {
        if !(alpha > 0.0 && alpha < 1.0) || !(q >= 1.0) {
            return Err(Error::InvalidInput(format!("need α in (0,1) and q >= 1, got α={alpha}, q={q}")));
        }
        let sup_l2 = self.ledger.iter().map(|e| e.l2sq).fold(0.0, f64::max).sqrt();
        let times = self.snapshot_times();
        let vals: Vec<f64> = self.snapshots.iter().map(|(_, v)| v.h_alpha(alpha).powf(q)).collect();
        let integral = cumulative_trapezoid(&times, &vals).last().copied().unwrap_or(0.0);
        Ok(HypothesisReport {
            sup_l2,
            lq_halpha: integral.powf(1.0 / q),
            l1sigma_force: forcing.integrability(sigma)?,
        })
    }

    /// Index of the snapshot recorded at time `t`, if any.
    pub fn snapshot_index(&self, t: f64) -> Option<usize> {
        self.snapshots.iter().position(|(s, _)| (s - t).abs() <= 1e-12)
    }

    pub fn write_ledger_ndjson<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "{{\"schema\":1}}")?;
        for e in &self.ledger {
            writeln!(
                w,
                "{{\"t\":{},\"l2sq\":{},\"h1sq\":{},\"fv\":{}}}",
                json_num(e.t),
                json_num(e.l2sq),
                json_num(e.h1sq),
                json_num(e.fv)
            )?;
        }
        Ok(())
    }

    /// Physical snapshot fields, for writing to disk.
    pub fn physical_snapshots(&self, fft: &Fft3) -> Vec<(f64, PhysicalField)> {
        self.snapshots.iter().map(|(t, v)| (*t, v.to_physical(fft))).collect()
    }
}

/// Shortest round-trip representation; non-finite values become `null`.
pub fn json_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else {
        "null".into()
    }
}
