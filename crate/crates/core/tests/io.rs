use std::path::PathBuf;

use qfp_core::config::{BoundaryKind, RunConfig};
use qfp_core::csvio::{
    format_float, parse_diagnostics, parse_field, parse_sweep, write_diagnostics, write_field, write_sweep,
    DiagnosticRow, SweepRecord, SweepStatus,
};
use qfp_core::equilibrium::{sweep, ModelParams};
use qfp_core::kinetics::{run, BoundaryCondition, InitialCondition, PhaseGrid, RunOptions};

fn bits(x: f64) -> u64 {
    x.to_bits()
}

#[test]
fn sweep_round_trip_is_bit_exact() {
    let base = ModelParams::new(0.0, 3, 1.0, 1.0).unwrap();
    let critical = base.critical_k_density();
    let ks = [-2.0, -0.1, 0.0, 1.0 / 3.0, 0.5 * critical, critical, 2.0 * critical];
    let records: Vec<SweepRecord> = sweep(&base, &ks).iter().map(|r| SweepRecord::from_row(r, &base)).collect();
    assert_eq!(records.iter().filter(|r| r.status == SweepStatus::Supercritical).count(), 2);

    let mut buf = Vec::new();
    write_sweep(&mut buf, &["n = 3".to_string()], &records).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("# n = 3\nk,n,volume,rho,status,C,kC,"));
    assert!(text.contains(",supercritical,NaN,"));

    let parsed = parse_sweep(buf.as_slice()).unwrap();
    assert_eq!(parsed.len(), records.len());
    for (a, b) in parsed.iter().zip(&records) {
        assert_eq!(bits(a.k), bits(b.k));
        assert_eq!((a.n, a.status, a.violations), (b.n, b.status, b.violations));
        match (&a.values, &b.values) {
            (Some(x), Some(y)) => {
                for (p, q) in [
                    (x.c, y.c),
                    (x.kc, y.kc),
                    (x.energy, y.energy),
                    (x.entropy, y.entropy),
                    (x.free_energy, y.free_energy),
                    (x.residual, y.residual),
                ] {
                    assert_eq!(bits(p), bits(q));
                }
                assert_eq!(x.energy_order, y.energy_order);
            }
            (None, None) => assert_eq!(a.message, b.message),
            _ => panic!("status mismatch at k = {}", a.k),
        }
    }
}

#[test]
fn diagnostics_round_trip_from_a_run() {
    let grid = PhaseGrid::new(8, 1.0, 32, 8.0).unwrap();
    let f = InitialCondition::Modulated { amplitude: 0.2, mode: 1 }.build(&grid, -0.5, 1.0).unwrap();
    let opts = RunOptions {
        boundary: BoundaryCondition::Absorbing,
        dt: None,
        t_end: 0.2,
        output_interval: Some(0.05),
    };
    let report = run(f, &grid, &opts).unwrap();
    let rows: Vec<DiagnosticRow> = report.records.iter().map(DiagnosticRow::from).collect();
    assert!(rows.iter().any(|r| r.g.is_none()));

    let mut buf = Vec::new();
    write_diagnostics(&mut buf, &[], &rows).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,rho,E,S,F,G,Gtilde,A,B,U,mass_error");
    let parsed = parse_diagnostics(buf.as_slice()).unwrap();
    assert_eq!(parsed.len(), rows.len());
    for (a, b) in parsed.iter().zip(&rows) {
        assert_eq!(bits(a.t), bits(b.t));
        assert_eq!(bits(a.g_tilde), bits(b.g_tilde));
        assert_eq!(a.g.map(bits), b.g.map(bits));
        assert_eq!(bits(a.mass_error), bits(b.mass_error));
    }

    let mut buf = Vec::new();
    write_field(&mut buf, &["t = 0.2".to_string()], &report.final_field).unwrap();
    let table = parse_field(buf.as_slice()).unwrap();
    assert_eq!(table.len(), grid.x_nodes);
    assert_eq!(table[3].len(), grid.v_nodes);
    assert_eq!(bits(table[3][7]), bits(report.final_field.get(3, 7)));
}

#[test]
fn float_format_keeps_every_bit() {
    for x in [0.1, -1.0 / 3.0, 5e-324, f64::MAX, 1e300, -0.0] {
        assert_eq!(bits(format_float(x).parse::<f64>().unwrap()), bits(x));
    }
    assert_eq!(format_float(f64::NAN), "NaN");
}

#[test]
fn malformed_csv_is_reported() {
    assert!(parse_sweep("k,n\n1,2\n".as_bytes()).is_err());
    assert!(parse_diagnostics("t,rho,E,S,F,G,Gtilde,A,B,U,mass_error\n0,1,x,0,0,0,0,0,0,0,0\n".as_bytes()).is_err());
    assert!(parse_field("1,2\n3\n".as_bytes()).is_err());
}

#[test]
fn sample_configuration_parses() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/lyapunov.toml");
    let config = RunConfig::parse(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(config.model.k, -0.5);
    assert_eq!(config.boundary.kind, BoundaryKind::BounceBack);
    assert_eq!(config.initial_condition(), InitialCondition::Modulated { amplitude: 0.3, mode: 1 });
    let grid = config.phase_grid().unwrap();
    assert_eq!((grid.x_nodes, grid.v_nodes), (128, 128));
    let opts = config.run_options();
    assert_eq!((opts.t_end, opts.output_interval), (20.0, Some(0.1)));
    assert!(config.describe().iter().any(|l| l == "boundary = bounce_back"));
}

#[test]
fn configuration_errors() {
    assert!(RunConfig::parse("[model]\nk = 0.1\nspin = 2\n").is_err());
    assert!(RunConfig::parse("[model]\nk = 0.1\n[initial]\nkind = \"square\"\n").is_err());
    assert!(RunConfig::parse("[model]\nk = 0.1\n[grid]\nv_max = 2.0\n").is_err());
    let minimal = RunConfig::parse("[model]\nk = 0.1\n").unwrap();
    assert_eq!(minimal.model.rho, 1.0);
    assert_eq!(minimal.initial_condition(), InitialCondition::Maxwellian);
}

#[test]
fn fuzz_seeds_parse() {
    let corpus = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus");
    let seeds = |target: &str| {
        let mut files: Vec<PathBuf> = std::fs::read_dir(corpus.join(target))
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        files.sort();
        assert!(!files.is_empty(), "no seeds for {target}");
        files.into_iter().map(|p| std::fs::read(p).unwrap())
    };
    for seed in seeds("config") {
        RunConfig::parse(std::str::from_utf8(&seed).unwrap()).unwrap();
    }
    for seed in seeds("sweep_csv") {
        assert!(!parse_sweep(seed.as_slice()).unwrap().is_empty());
    }
    for seed in seeds("diagnostics_csv") {
        assert!(!parse_diagnostics(seed.as_slice()).unwrap().is_empty());
    }
    for seed in seeds("field_csv") {
        assert!(!parse_field(seed.as_slice()).unwrap().is_empty());
    }
}
