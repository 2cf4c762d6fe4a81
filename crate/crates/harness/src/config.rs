//! Flat `section.key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Every key must be
//! known and may appear once.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use khm_core::forcing::ForcingSpec;
use khm_core::quadrature::QuadratureKind;
use khm_core::solver::{Integrator, SolverConfig};
use khm_core::{GridSpec, SpectralField};

use crate::error::{HarnessError, Result};

const KEYS: &[&str] = &[
    "grid.n",
    "grid.dealias",
    "solver.nu",
    "solver.dt",
    "solver.t_end",
    "solver.stride",
    "solver.integrator",
    "solver.advection",
    "initial.kind",
    "range.alpha",
    "range.q",
    "range.kappa",
    "range.sigma",
    "range.ell_i",
    "range.samples",
    "range.p",
    "stats.quadrature",
    "sweep.nus",
    "sweep.workers",
    "output.dir",
];

const FORCING_KEYS: &[&str] = &["kind", "k", "k2", "amplitude", "component", "period", "exponent"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialKind {
    Zero,
    TaylorGreen,
    TaylorGreen3d,
}

impl InitialKind {
    pub fn build(self, grid: GridSpec) -> SpectralField {
        match self {
            InitialKind::Zero => SpectralField::zeros(grid),
            InitialKind::TaylorGreen => SpectralField::taylor_green(grid),
            InitialKind::TaylorGreen3d => SpectralField::taylor_green_3d(grid),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RangeParams {
    pub alpha: f64,
    pub q: f64,
    pub kappa: f64,
    pub sigma: f64,
    pub ell_i: f64,
    pub samples: usize,
    pub ps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub grid: GridSpec,
    pub solver: SolverConfig,
    pub initial: InitialKind,
    pub forcing: ForcingSpec,
    pub range: RangeParams,
    pub quadrature: QuadratureKind,
    pub nus: Vec<f64>,
    pub workers: usize,
    pub output_dir: Option<PathBuf>,
}

fn err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

/// Key-value pairs with per-key access tracking.
struct Table(BTreeMap<String, String>);

impl Table {
    fn get<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| err(format!("{key}: cannot parse '{v}'"))),
        }
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.0.get(key).map(|v| parse_list(v).map_err(|_| err(format!("{key}: bad list '{v}'")))).transpose()
    }

    fn triple(&self, key: &str) -> Result<[i64; 3]> {
        let v: Vec<i64> = self.list(key)?.ok_or_else(|| err(format!("{key} is required")))?;
        v.try_into().map_err(|_| err(format!("{key} needs three integers")))
    }
}

/// Comma-separated list.
pub fn parse_list<T: std::str::FromStr>(s: &str) -> std::result::Result<Vec<T>, T::Err> {
    s.split(',').map(|x| x.trim()).filter(|x| !x.is_empty()).map(str::parse).collect()
}

fn forcing(t: &Table, prefix: &str) -> Result<ForcingSpec> {
    let key = |k: &str| format!("{prefix}{k}");
    let kind: String = t.get(&key("kind"), "zero".to_string())?;
    Ok(match kind.as_str() {
        "zero" => ForcingSpec::Zero,
        "fixed_mode" => ForcingSpec::FixedMode {
            k: t.triple(&key("k"))?,
            amplitude: t.get(&key("amplitude"), 1.0)?,
            component: t.get(&key("component"), 0)?,
        },
        "alternating_shear" => ForcingSpec::AlternatingShear {
            period: t.get(&key("period"), 1.0)?,
            amplitude: t.get(&key("amplitude"), 1.0)?,
            modes: [t.triple(&key("k"))?, t.triple(&key("k2"))?],
        },
        "time_ramp" => ForcingSpec::TimeRamp {
            exponent: t.get(&key("exponent"), 0.0)?,
            inner: Box::new(forcing(t, &format!("{prefix}inner."))?),
        },
        other => return Err(err(format!("{} '{other}' is not a forcing family", key("kind")))),
    })
}

fn is_forcing_key(key: &str) -> bool {
    let mut rest = match key.strip_prefix("forcing.") {
        Some(r) => r,
        None => return false,
    };
    while let Some(r) = rest.strip_prefix("inner.") {
        rest = r;
    }
    FORCING_KEYS.contains(&rest)
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(format!("line {}: expected key = value", no + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) && !is_forcing_key(k) {
                return Err(err(format!("line {}: unknown key '{k}'", no + 1)));
            }
            if map.insert(k.to_string(), v.to_string()).is_some() {
                return Err(err(format!("line {}: duplicate key '{k}'", no + 1)));
            }
        }
        let t = Table(map);

        let grid = GridSpec::with_dealias(t.get("grid.n", 16)?, t.get("grid.dealias", 2.0 / 3.0)?)?;
        let mut solver = SolverConfig::new(t.get("solver.nu", 0.1)?, t.get("solver.dt", 1e-3)?, t.get("solver.t_end", 1.0)?);
        solver.snapshot_stride = t.get("solver.stride", 100)?;
        solver.advection = t.get("solver.advection", true)?;
        solver.integrator = match t.get("solver.integrator", "rk4".to_string())?.as_str() {
            "rk4" => Integrator::IfRk4,
            "rk2" => Integrator::IfRk2,
            other => return Err(err(format!("solver.integrator '{other}' is not rk4 or rk2"))),
        };
        solver.validate()?;
        let initial = match t.get("initial.kind", "taylor_green".to_string())?.as_str() {
            "zero" => InitialKind::Zero,
            "taylor_green" => InitialKind::TaylorGreen,
            "taylor_green_3d" => InitialKind::TaylorGreen3d,
            other => return Err(err(format!("initial.kind '{other}' is not zero, taylor_green or taylor_green_3d"))),
        };
        let forcing = forcing(&t, "forcing.")?;
        forcing.validate()?;
        let range = RangeParams {
            alpha: t.get("range.alpha", 1.0 / 3.0)?,
            q: t.get("range.q", 2.0)?,
            kappa: t.get("range.kappa", 0.05)?,
            sigma: t.get("range.sigma", 0.5)?,
            ell_i: t.get("range.ell_i", 1.0)?,
            samples: t.get("range.samples", 8)?,
            ps: t.list("range.p")?.unwrap_or_else(|| vec![2.0]),
        };
        if range.ps.is_empty() || range.ps.iter().any(|p| !(*p >= 1.0)) {
            return Err(err("range.p entries must be >= 1"));
        }
        if !(range.sigma > 0.0) {
            return Err(err("range.sigma must be positive"));
        }
        let quadrature = QuadratureKind::parse(&t.get("stats.quadrature", "fibonacci:64".to_string())?)?;
        quadrature.build()?;
        let nus = t.list("sweep.nus")?.unwrap_or_else(|| vec![solver.nu]);
        if nus.is_empty() || nus.iter().any(|n: &f64| !(*n > 0.0)) {
            return Err(err("sweep.nus must be a non-empty list of positive viscosities"));
        }
        let workers = t.get("sweep.workers", 1)?;
        if workers == 0 {
            return Err(err("sweep.workers must be >= 1"));
        }
        let output_dir = t.0.get("output.dir").map(PathBuf::from);
        Ok(Config { grid, solver, initial, forcing, range, quadrature, nus, workers, output_dir })
    }

    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        Ok((Self::parse(&text)?, text))
    }

    /// Solver settings with the viscosity replaced.
    pub fn solver_at(&self, nu: f64) -> SolverConfig {
        SolverConfig { nu, ..self.solver.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let c = Config::parse("# comment\n\ngrid.n = 32\nsolver.nu=0.05\nrange.p = 1, 2,4\n").unwrap();
        assert_eq!(c.grid.n, 32);
        assert_eq!(c.solver.nu, 0.05);
        assert_eq!(c.nus, vec![0.05]);
        assert_eq!(c.range.ps, vec![1.0, 2.0, 4.0]);
        assert_eq!(c.forcing, ForcingSpec::Zero);
        assert_eq!(c.initial, InitialKind::TaylorGreen);
    }

    #[test]
    fn forcing_families() {
        let c = Config::parse("forcing.kind = fixed_mode\nforcing.k = 1,0,0\nforcing.component = 1\nforcing.amplitude = 0.5\n").unwrap();
        assert_eq!(c.forcing, ForcingSpec::FixedMode { k: [1, 0, 0], amplitude: 0.5, component: 1 });
        let c = Config::parse(
            "forcing.kind = time_ramp\nforcing.exponent = 0.3\nforcing.inner.kind = alternating_shear\n\
             forcing.inner.k = 1,0,0\nforcing.inner.k2 = 0,1,0\nforcing.inner.period = 0.5\n",
        )
        .unwrap();
        match c.forcing {
            ForcingSpec::TimeRamp { exponent, inner } => {
                assert_eq!(exponent, 0.3);
                assert!(matches!(*inner, ForcingSpec::AlternatingShear { period, .. } if period == 0.5));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "grid.size = 16",
            "grid.n = 16\ngrid.n = 32",
            "solver.nu",
            "solver.nu = abc",
            "grid.n = 15",
            "forcing.kind = vortex",
            "forcing.kind = fixed_mode",
            "forcing.inner.colour = 1",
            "stats.quadrature = lebedev:7",
            "sweep.nus = 0.1, -1",
            "solver.integrator = euler",
        ] {
            assert!(matches!(Config::parse(text), Err(HarnessError::Config(_))), "{text}");
        }
    }
}
