use std::path::Path;
use std::process::{Command, Output};

use qfp_core::csvio::{parse_diagnostics, parse_field, parse_sweep, SweepStatus};

fn qfp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfp")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|rest| rest.trim().strip_prefix('=')))
        .unwrap_or_else(|| panic!("{key} missing from {text}"))
        .trim()
        .parse()
        .unwrap()
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn classical_equilibrium_constant() {
    let o = qfp(&["equilibrium", "--k", "0", "--n", "3", "--vol", "1", "--rho", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let c = value(&stdout(&o), "C_k");
    assert!((c - 0.063494).abs() < 5e-7);
    assert!((c - (2.0 * std::f64::consts::PI).powf(-1.5)).abs() < 1e-16);
}

#[test]
fn fermion_energy_exceeds_classical() {
    let o = qfp(&["equilibrium", "--k", "-1", "--n", "3", "--vol", "1", "--rho", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(value(&out, "E_q") > 1.5);
    let energy_line = out.lines().find(|l| l.trim_start().starts_with("energy")).unwrap();
    assert!(energy_line.contains("fermion > classical") && energy_line.ends_with("holds"));
}

#[test]
fn supercritical_boson_exits_two() {
    let o = qfp(&["equilibrium", "--k", "100", "--n", "3", "--vol", "1", "--rho", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("supercritical density") && err.contains("kC = 1"), "{err}");
    assert!(err.contains("41.14"), "{err}");
}

#[test]
fn equilibrium_row_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("eq.csv");
    let o = qfp(&["equilibrium", "--k", "0.1", "--n", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let rows = parse_sweep(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    let v = rows[0].values.unwrap();
    assert!(v.entropy < v.entropy_classical);
}

#[test]
fn fermion_sweep_has_no_violations() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let o = qfp(&[
        "sweep", "--k-min", "-0.5", "--k-max", "0", "--steps", "11", "--n", "1", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("11 rows, 0 supercritical, 0 failed, 0 violations"), "{}", stderr(&o));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# n = 1\n"));
    let rows = parse_sweep(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| r.status == SweepStatus::Ok && r.violations == 0));
    assert_eq!(rows[0].k, -0.5);
    assert_eq!(rows[10].k, 0.0);
}

#[test]
fn degenerate_sweep_range_gives_one_row() {
    let o = qfp(&["sweep", "--k-min", "0.2", "--k-max", "0.2", "--steps", "7"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(parse_sweep(o.stdout.as_slice()).unwrap().len(), 1);
}

#[test]
fn sweep_into_supercritical_region_flags_rows() {
    let o = qfp(&["sweep", "--k-min", "0", "--k-max", "80", "--steps", "9", "--n", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = parse_sweep(o.stdout.as_slice()).unwrap();
    let flagged: Vec<f64> = rows.iter().filter(|r| r.status == SweepStatus::Supercritical).map(|r| r.k).collect();
    // Threshold (2π)^{3/2} ζ(3/2) ≈ 41.14.
    assert_eq!(flagged, vec![50.0, 60.0, 70.0, 80.0]);
    assert!(rows.iter().filter(|r| r.status == SweepStatus::Supercritical).all(|r| r.values.is_none()));
}

#[test]
fn unwritable_output_exits_three() {
    let o = qfp(&["sweep", "--k-min", "0", "--k-max", "0", "--out", "/nonexistent-dir/x/sweep.csv"]);
    assert_eq!(o.status.code(), Some(3));
    let o = qfp(&["simulate", "/nonexistent-dir/run.toml"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_sixty_four() {
    assert_eq!(qfp(&["sweep", "--k-min", "1", "--k-max", "0"]).status.code(), Some(64));
    assert_eq!(qfp(&["equilibrium", "--k", "0", "--rho", "-1"]).status.code(), Some(64));
    assert_eq!(qfp(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(qfp(&["--help"]).status.code(), Some(0));
}

const SMALL_GRID: &str = "[grid]\nx_nodes = 16\nv_nodes = 48\nlength = 1.0\nv_max = 8.0\n";

#[test]
fn maxwellian_simulation_stays_at_equilibrium() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!("[model]\nk = -0.5\n{SMALL_GRID}[time]\nt_end = 0.5\noutput_interval = 0.05\n"),
    );
    let diag = dir.path().join("d.csv");
    let o = qfp(&["simulate", cfg.to_str().unwrap(), "--out", diag.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&diag).unwrap();
    for default in ["# v_max = 8", "# dt = stability limit", "# boundary = bounce_back", "# grid = 16 x 48"] {
        assert!(text.contains(default), "missing {default:?}");
    }
    let rows = parse_diagnostics(text.as_bytes()).unwrap();
    assert!(rows.len() >= 11);
    assert!(rows.iter().all(|r| r.g_tilde.abs() <= 1e-8));
}

#[test]
fn modulated_bounce_back_run_is_monotone_and_conservative() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!(
            "[model]\nk = -0.5\n{SMALL_GRID}[time]\nt_end = 2.0\noutput_interval = 0.1\n\
             [initial]\nkind = \"modulated\"\namplitude = 0.3\n"
        ),
    );
    let diag = dir.path().join("d.csv");
    let field = dir.path().join("f.csv");
    let o = qfp(&[
        "simulate",
        cfg.to_str().unwrap(),
        "--out",
        diag.to_str().unwrap(),
        "--field",
        field.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("monotonicity violations = 0"));
    assert!(out.contains("classification = conservative"));
    let rows = parse_diagnostics(std::fs::File::open(&diag).unwrap()).unwrap();
    assert!(rows.windows(2).all(|w| w[1].g_tilde <= w[0].g_tilde + 1e-8));
    assert!(rows.last().unwrap().g_tilde < rows[0].g_tilde);
    let matrix = parse_field(std::fs::File::open(&field).unwrap()).unwrap();
    assert_eq!((matrix.len(), matrix[0].len()), (16, 48));
}

#[test]
fn oversized_step_exits_four_with_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("[model]\nk = 0\n{SMALL_GRID}[time]\ndt = 0.5\nt_end = 2.0\n"));
    let diag = dir.path().join("d.csv");
    let o = qfp(&["simulate", cfg.to_str().unwrap(), "--out", diag.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("stability limit"));
    let rows = parse_diagnostics(std::fs::File::open(&diag).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].t, 0.0);
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[model]\nk = 0\nbogus = 1\n");
    assert_eq!(qfp(&["simulate", cfg.to_str().unwrap()]).status.code(), Some(64));
}

#[test]
fn quick_verify_passes() {
    let o = qfp(&["verify", "--quick"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("2.612") && out.contains("1.645") && out.contains("1.341") && out.contains("1.202"));
    assert!(out.contains("[SKIP]  9"));
    assert_eq!(out.matches("[PASS]").count(), 10);
}

#[test]
fn tampered_kernel_fails_verify() {
    let o = qfp(&["verify", "--quick", "--tamper-polylog", "0.01"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("1 (zeta values)"), "{}", stderr(&o));
}
