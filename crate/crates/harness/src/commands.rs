//! Subcommand implementations. Every output file starts with the schema
//! header and is written by exactly one cell.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};

use khm_core::forcing::ForcingSpec;
use khm_core::laws::exponents::{exponent_fit, ExponentFit};
use khm_core::laws::khm::KhmQuadrature;
use khm_core::laws::range::InertialRange;
use khm_core::laws::report::CSV_HEADER;
use khm_core::laws::{law_report, LawOptions, LawReport};
use khm_core::quadrature::{simpson, SphericalQuadrature};
use khm_core::snapshot;
use khm_core::solver::{json_num, LedgerEntry, Solver, Trajectory};
use khm_core::stats::{structure_records, write_records_ndjson};
use khm_core::{Fft3, SpectralField};

use crate::config::Config;
use crate::error::{HarnessError, Result};

pub const CONFIG_COPY: &str = "config.txt";
pub const LEDGER_FILE: &str = "ledger.ndjson";
pub const RECORDS_FILE: &str = "records.ndjson";
pub const LAWS_FILE: &str = "laws.ndjson";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const TRENDS_FILE: &str = "trends.ndjson";
pub const SNAPSHOT_DIR: &str = "snapshots";

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Io(format!("{}: {e}", path.display()))
}

/// Scales from an explicit list, else the configured inertial range at `nu`.
pub fn scales(cfg: &Config, nu: f64, ells: Option<&[f64]>) -> Result<Vec<f64>> {
    if let Some(e) = ells {
        if e.is_empty() || e.iter().any(|l| !(*l > 0.0)) {
            return Err(HarnessError::Config("--ell-list needs positive scales".into()));
        }
        return Ok(e.to_vec());
    }
    let r = &cfg.range;
    Ok(InertialRange::new(nu, r.alpha, r.q, r.kappa, r.ell_i, r.samples)?.ells())
}

pub fn law_options(cfg: &Config, ps: Option<&[f64]>, khm: bool) -> Result<LawOptions> {
    let mut opts = LawOptions::new(cfg.quadrature.build()?);
    opts.ps = ps.map_or_else(|| cfg.range.ps.clone(), <[f64]>::to_vec);
    if opts.ps.is_empty() || opts.ps.iter().any(|p| !(*p >= 1.0)) {
        return Err(HarnessError::Config("p values must be >= 1".into()));
    }
    opts.alpha = cfg.range.alpha;
    if khm {
        opts.khm = Some(KhmQuadrature { radial_nodes: 48, quad: SphericalQuadrature::gauss_product(8, 16)? });
    }
    Ok(opts)
}

fn simulate(cfg: &Config, nu: f64) -> Result<(Trajectory, Solver)> {
    let solver = Solver::new(cfg.grid, cfg.solver_at(nu), cfg.forcing.clone())?;
    let traj = solver.run(&cfg.initial.build(cfg.grid))?;
    Ok((traj, solver))
}

fn write_ledger(traj: &Trajectory, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    traj.write_ledger_ndjson(&mut w)?;
    w.flush()?;
    Ok(())
}

fn write_report(report: &LawReport, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    report.write_ndjson(&mut w)?;
    w.flush()?;
    Ok(())
}

fn write_summary(rows: &[[f64; 7]], path: &Path) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        let cols: Vec<String> = r.iter().map(|x| json_num(*x)).collect();
        writeln!(w, "{}", cols.join(","))?;
    }
    w.flush()?;
    Ok(())
}

fn records_for(traj: &Trajectory, forcing: &ForcingSpec, ells: &[f64], cfg: &Config, fft: &Fft3) -> Result<Vec<khm_core::stats::StructureRecord>> {
    let quad = cfg.quadrature.build()?;
    let mut out = Vec::new();
    for (t, v) in &traj.snapshots {
        let f = forcing.evaluate_dealiased(*t, traj.grid);
        out.extend(structure_records(*t, v, Some(&f), ells, &quad, &cfg.range.ps, fft));
    }
    Ok(out)
}

/// Simulates one configuration and writes the config copy, ledger,
/// snapshots and structure records under `out`.
pub fn run(cfg: &Config, text: &str, out: &Path, ells: Option<&[f64]>) -> Result<Trajectory> {
    let (traj, solver) = simulate(cfg, cfg.solver.nu)?;
    fs::create_dir_all(out.join(SNAPSHOT_DIR))?;
    fs::write(out.join(CONFIG_COPY), text)?;
    write_ledger(&traj, &out.join(LEDGER_FILE))?;
    for (i, (t, phys)) in traj.physical_snapshots(solver.fft()).iter().enumerate() {
        snapshot::write_file(out.join(SNAPSHOT_DIR).join(format!("snap_{i:05}.khm")), phys, traj.nu, *t)?;
    }
    let ells = scales(cfg, traj.nu, ells)?;
    let records = records_for(&traj, &cfg.forcing, &ells, cfg, solver.fft())?;
    let mut w = create(&out.join(RECORDS_FILE))?;
    write_records_ndjson(&mut w, &records)?;
    w.flush()?;
    Ok(traj)
}

/// Structure records for standalone snapshot files.
pub fn stats(files: &[PathBuf], cfg: &Config, ells: &[f64], out: &mut dyn Write) -> Result<()> {
    let mut records = Vec::new();
    for path in files {
        let snap = snapshot::read_file(path).map_err(|e| io_err(path, e))?;
        let grid = snap.field.grid();
        let fft = Fft3::new(grid);
        let v = SpectralField::from_physical(&snap.field, &fft);
        let f = cfg.forcing.evaluate_dealiased(snap.t, grid);
        records.extend(structure_records(snap.t, &v, Some(&f), ells, &cfg.quadrature.build()?, &cfg.range.ps, &fft));
    }
    let mut out = out;
    write_records_ndjson(&mut out, &records)?;
    Ok(())
}

fn read_ledger(path: &Path) -> Result<Vec<LedgerEntry>> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| io_err(path, e))?);
    }
    Ok(out)
}

/// Rebuilds a trajectory from a run directory.
pub fn load_run(dir: &Path) -> Result<(Config, Trajectory)> {
    let (cfg, _) = Config::load(&dir.join(CONFIG_COPY))?;
    let ledger = read_ledger(&dir.join(LEDGER_FILE))?;
    let snap_dir = dir.join(SNAPSHOT_DIR);
    let mut paths: Vec<PathBuf> = fs::read_dir(&snap_dir)
        .map_err(|e| io_err(&snap_dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "khm"))
        .collect();
    paths.sort();
    let fft = Fft3::new(cfg.grid);
    let mut snapshots = Vec::new();
    let mut nu = cfg.solver.nu;
    for p in &paths {
        let s = snapshot::read_file(p).map_err(|e| io_err(p, e))?;
        nu = s.nu;
        snapshots.push((s.t, SpectralField::from_physical(&s.field, &fft)));
    }
    if snapshots.is_empty() || ledger.is_empty() {
        return Err(HarnessError::Io(format!("{}: no snapshots or empty ledger", dir.display())));
    }
    Ok((cfg.clone(), Trajectory { grid: cfg.grid, nu, snapshots, ledger }))
}

/// Law report for a stored run; invariant failures are returned after the
/// report has been written.
pub fn verify(dir: &Path, out: &Path, ells: Option<&[f64]>, ps: Option<&[f64]>, khm: bool) -> Result<LawReport> {
    let (cfg, traj) = load_run(dir)?;
    let ells = scales(&cfg, traj.nu, ells)?;
    let opts = law_options(&cfg, ps, khm)?;
    let report = law_report(&traj, &cfg.forcing, &ells, &opts, &Fft3::new(cfg.grid))?;
    write_report(&report, &out.join(LAWS_FILE))?;
    write_summary(&report.csv_rows(), &out.join(SUMMARY_FILE))?;
    let failures = report.invariant_failures();
    if failures.is_empty() {
        Ok(report)
    } else {
        Err(HarnessError::Invariant(failures))
    }
}

fn cell_dir(out: &Path, i: usize, nu: f64) -> PathBuf {
    out.join(format!("cell_{i:03}_nu_{nu:e}"))
}

fn sweep_cell(cfg: &Config, i: usize, nu: f64, out: &Path, ells: Option<&[f64]>, opts: &LawOptions) -> Result<LawReport> {
    let (traj, solver) = simulate(cfg, nu)?;
    let ells = scales(cfg, nu, ells)?;
    let report = law_report(&traj, &cfg.forcing, &ells, opts, solver.fft())?;
    let dir = cell_dir(out, i, nu);
    write_ledger(&traj, &dir.join(LEDGER_FILE))?;
    write_report(&report, &dir.join(LAWS_FILE))?;
    Ok(report)
}

fn monotone(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0]) || v.windows(2).all(|w| w[1] >= w[0])
}

/// Runs every viscosity on its own worker, then assembles the summary
/// table and the residual trends.
pub fn sweep(cfg: &Config, out: &Path, workers: usize, ells: Option<&[f64]>, ps: Option<&[f64]>, khm: bool) -> Result<Vec<LawReport>> {
    let opts = law_options(cfg, ps, khm)?;
    fs::create_dir_all(out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let results: Vec<Result<LawReport>> = pool.install(|| {
        cfg.nus
            .par_iter()
            .enumerate()
            .map(|(i, &nu)| sweep_cell(cfg, i, nu, out, ells, &opts))
            .collect()
    });
    let reports = results.into_iter().collect::<Result<Vec<_>>>()?;

    let rows: Vec<[f64; 7]> = reports.iter().flat_map(|r| r.csv_rows()).collect();
    write_summary(&rows, &out.join(SUMMARY_FILE))?;

    let mut w = create(&out.join(TRENDS_FILE))?;
    writeln!(w, "{{\"schema\":1}}")?;
    let r43 = |c: &khm_core::laws::LawCell| c.four_thirds_lp.first().map_or(f64::NAN, |x| x.1);
    let columns = reports.iter().map(|r| r.cells.len()).min().unwrap_or(0);
    for j in 0..columns {
        let nus: Vec<f64> = reports.iter().map(|r| r.nu).collect();
        let vals: Vec<f64> = reports.iter().map(|r| r43(&r.cells[j])).collect();
        let line = json!({"kind": "ell_column", "ell_index": j, "nu": nus, "r43_Lp": vals, "monotone": monotone(&vals)});
        writeln!(w, "{line}")?;
    }
    for r in &reports {
        let ells: Vec<f64> = r.cells.iter().map(|c| c.ell).collect();
        let vals: Vec<f64> = r.cells.iter().map(r43).collect();
        let line = json!({"kind": "nu_row", "nu": r.nu, "ell": ells, "r43_Lp": vals, "monotone": monotone(&vals)});
        writeln!(w, "{line}")?;
    }
    w.flush()?;

    let failures: Vec<String> = reports.iter().flat_map(|r| r.invariant_failures()).collect();
    if failures.is_empty() {
        Ok(reports)
    } else {
        Err(HarnessError::Invariant(failures))
    }
}

/// Collects (ℓ, ∫₀¹S₃) from law reports or structure records; records are
/// integrated in time by Simpson per scale.
pub fn fit_inputs(files: &[PathBuf]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut records: Vec<(f64, f64, f64)> = Vec::new();
    for path in files {
        let file = File::open(path).map_err(|e| io_err(path, e))?;
        for line in BufReader::new(file).lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let v: Value = serde_json::from_str(&line).map_err(|e| io_err(path, e))?;
            let num = |k: &str| v.get(k).and_then(Value::as_f64);
            if let (Some(ell), Some(s3)) = (num("ell"), num("s3_integral")) {
                cells.push((ell, s3));
            } else if let (Some(t), Some(ell), Some(s3)) = (num("t"), num("ell"), num("s3")) {
                records.push((t, ell, s3));
            }
        }
    }
    if cells.is_empty() {
        let mut ells: Vec<f64> = records.iter().map(|r| r.1).collect();
        ells.sort_by(f64::total_cmp);
        ells.dedup();
        for ell in ells {
            let mut pts: Vec<(f64, f64)> = records.iter().filter(|r| r.1 == ell).map(|r| (r.0, r.2)).collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let (t, s): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            cells.push((ell, simpson(&t, &s)));
        }
    }
    Ok(cells.into_iter().unzip())
}

pub fn fit(files: &[PathBuf], alpha: f64) -> Result<ExponentFit> {
    let (ells, vals) = fit_inputs(files)?;
    Ok(exponent_fit(&ells, &vals, alpha)?)
}
