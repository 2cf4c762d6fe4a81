use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use khm_core::quadrature::SphericalQuadrature;
use khm_core::snapshot;
use khm_core::stats::structure_records;
use khm_core::{Fft3, SpectralField};
use khm_harness::config::Config;

const SMALL: &str = "grid.n = 16\n\
solver.dt = 2e-3\n\
solver.t_end = 0.2\n\
solver.stride = 50\n\
initial.kind = taylor_green_3d\n\
forcing.kind = fixed_mode\n\
forcing.k = 1,1,0\n\
forcing.amplitude = 0.5\n\
forcing.component = 2\n\
range.ell_i = 0.8\n\
range.samples = 5\n\
range.p = 2,3\n\
stats.quadrature = fibonacci:16\n";

fn khm(args: &[&str], extra: &[&Path]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_khm"))
        .args(args)
        .args(extra)
        .output()
        .expect("spawn khm")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.cfg");
    fs::write(&p, text).unwrap();
    p
}

fn run_into(cfg: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_khm"))
        .arg("run")
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .output()
        .expect("spawn khm")
}

fn ndjson_lines(path: &Path) -> Vec<serde_json::Value> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn snapshots(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir.join("snapshots")).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

#[test]
fn zero_configuration_produces_valid_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "grid.n = 16\nsolver.t_end = 0.1\nsolver.stride = 50\ninitial.kind = zero\nrange.samples = 5\nstats.quadrature = fibonacci:8\n");
    let out = tmp.path().join("out");
    let o = run_into(&cfg, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ledger = ndjson_lines(&out.join("ledger.ndjson"));
    assert_eq!(ledger[0]["schema"], 1);
    assert!(ledger[1..].iter().all(|e| e["l2sq"] == 0.0));
    assert_eq!(snapshots(&out).len(), 3);
    let records = ndjson_lines(&out.join("records.ndjson"));
    assert!(records.len() > 1);

    let o = khm(&["verify"], &[&out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let laws = ndjson_lines(&out.join("laws.ndjson"));
    let cells: Vec<_> = laws.iter().filter(|l| l["kind"] == "cell").collect();
    assert_eq!(cells.len(), 5);
    assert!(cells.iter().all(|c| c["four_thirds_lp"].is_array()));
    let csv = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(csv.starts_with("nu,ell,r43_Lp,r45_Lp,eps1,eps_ell,slope_zeta3\n"));
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run_into(&cfg, &a).status.success());
    assert!(run_into(&cfg, &b).status.success());
    for name in ["ledger.ndjson", "records.ndjson", "config.txt"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    for (x, y) in snapshots(&a).iter().zip(snapshots(&b)) {
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap());
    }
}

#[test]
fn configuration_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    for text in ["grid.n = 16\nsolver.bogus = 1\n", "grid.n = 15\n", "forcing.kind = fixed_mode\n", "solver.nu = 0.1\nsolver.nu = 0.2\n"] {
        let cfg = write_config(tmp.path(), text);
        let o = run_into(&cfg, &tmp.path().join("x"));
        assert_eq!(o.status.code(), Some(2), "{text}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn missing_inputs_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_into(&tmp.path().join("absent.cfg"), &tmp.path().join("x"));
    assert_eq!(o.status.code(), Some(1));
    let o = khm(&["stats", "--ell-list", "0.5"], &[&tmp.path().join("absent.khm")]);
    assert_eq!(o.status.code(), Some(1));
    let o = khm(&["verify"], &[tmp.path()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn stats_matches_in_process_records() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("run");
    assert!(run_into(&cfg_path, &out).status.success());
    let snap = snapshots(&out).pop().unwrap();
    let o = khm(&["stats", "--ell-list", "0.3,0.6", "--config"], &[&cfg_path, &snap]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let cli_text = String::from_utf8(o.stdout).unwrap();

    let cfg = Config::parse(SMALL).unwrap();
    let s = snapshot::read_file(&snap).unwrap();
    let fft = Fft3::new(cfg.grid);
    let v = SpectralField::from_physical(&s.field, &fft);
    let f = cfg.forcing.evaluate_dealiased(s.t, cfg.grid);
    let quad = SphericalQuadrature::fibonacci(16).unwrap();
    let records = structure_records(s.t, &v, Some(&f), &[0.3, 0.6], &quad, &cfg.range.ps, &fft);
    let mut buf = Vec::new();
    khm_core::stats::write_records_ndjson(&mut buf, &records).unwrap();
    assert_eq!(cli_text, String::from_utf8(buf).unwrap());
}

#[test]
fn verify_and_fit_on_a_stored_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("run");
    assert!(run_into(&cfg, &out).status.success());
    let o = khm(&["verify", "--khm", "--p-list", "2", "--out"], &[&out.join("report"), &out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let laws = ndjson_lines(&out.join("report/laws.ndjson"));
    let summary = laws.iter().find(|l| l["kind"] == "summary").unwrap();
    assert_eq!(summary["zeta3_lo"], 1.0);
    let cells: Vec<_> = laws.iter().filter(|l| l["kind"] == "cell").collect();
    assert!(cells.iter().all(|c| c["eps_ell_ok"] == true));
    assert!(cells.iter().any(|c| c["khm"].is_number()));

    let o = khm(&["fit", "--out"], &[&out, &out.join("report/laws.ndjson")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let fit: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("fit.json")).unwrap()).unwrap();
    assert!(fit["zeta_fit"].as_f64().unwrap().is_finite());
    assert_eq!(fit["zeta3_hi"], 1.0);

    let o = khm(&["fit"], &[&out.join("records.ndjson")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let fit: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(fit["in_band"].is_boolean());
}
