use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use qfp_core::config::{ConfigError, RunConfig};
use qfp_core::csvio::{self, CsvError, DiagnosticRow, SweepRecord};
use qfp_core::equilibrium::{solve_normalization, sweep as sweep_rows, EquilibriumError, ModelParams, Verdicts};
use qfp_core::kinetics::{classify, run, KineticsError, FLUX_TOL};
use qfp_core::verify::{self, VerifyOptions};

use crate::ModelArgs;

pub const EXIT_VERIFY: u8 = 1;
pub const EXIT_SUPERCRITICAL: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_SOLVER: u8 = 4;
pub const EXIT_USAGE: u8 = 64;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Self::new(EXIT_IO, format!("{}: {e}", path.display()))
    }
}

impl From<EquilibriumError> for Failure {
    fn from(e: EquilibriumError) -> Self {
        let code = match e {
            EquilibriumError::Supercritical { .. } => EXIT_SUPERCRITICAL,
            EquilibriumError::InvalidParams(_) => EXIT_USAGE,
            _ => EXIT_SOLVER,
        };
        Self::new(code, e.to_string())
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn params(model: &ModelArgs, k: f64) -> Result<ModelParams> {
    Ok(ModelParams::new(k, model.n, model.vol, model.rho)?)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Failure::io(path, e))
}

fn csv_failure(path: Option<&Path>, e: CsvError) -> Failure {
    let place = path.map_or_else(|| "standard output".to_string(), |p| p.display().to_string());
    Failure::new(EXIT_IO, format!("{place}: {e}"))
}

fn verdict_line(label: &str, relation: &str, holds: bool) -> String {
    format!("  {label:<13} {relation:<40} {}", if holds { "holds" } else { "VIOLATED" })
}

pub fn equilibrium(model: &ModelArgs, k: f64, out: Option<&Path>) -> Result<()> {
    let p = params(model, k)?;
    let sol = solve_normalization(&p)?;
    let v = Verdicts::evaluate(&sol);
    let cl = &sol.classical;
    let fmt = csvio::format_float;
    println!("k     = {}", fmt(k));
    println!("n     = {}", p.n);
    println!("V     = {}", fmt(p.volume));
    println!("rho   = {}", fmt(p.density));
    println!("C_k   = {}", fmt(sol.c));
    println!("kC_k  = {}", fmt(sol.kc));
    println!("E_q   = {}", fmt(sol.energy));
    println!("S_q   = {}", fmt(sol.entropy));
    println!("F_q   = {}", fmt(sol.free_energy));
    println!("C_0   = {}", fmt(cl.c0));
    println!("E_c   = {}", fmt(cl.energy));
    println!("S_c   = {}", fmt(cl.entropy));
    println!("F_c   = {}", fmt(cl.free_energy));
    println!("residual = {:.3e}", sol.residual);
    println!("verdicts:");
    let (energy, entropy, free) = if k > 0.0 {
        ("E_q < E_c (boson < classical)", "S_q < S_c (boson < classical)", "F_q > F_c (boson > classical)")
    } else if k < 0.0 {
        ("E_q > E_c (fermion > classical)", "S_q > S_c (fermion > classical)", "F_q < F_c (fermion < classical)")
    } else {
        ("E_q = E_c (classical)", "S_q = S_c (classical)", "F_q = F_c (classical)")
    };
    println!("{}", verdict_line("energy", energy, v.energy_order));
    println!("{}", verdict_line("entropy", entropy, v.entropy_order));
    println!("{}", verdict_line("free energy", free, v.free_energy_order));
    println!("{}", verdict_line("constant", "C_0 bounds on C_k", v.constant_bounds));
    if !v.in_window {
        println!("  note: kC_k = {:.6} lies outside [-1, 1), where the energy ordering is not claimed", sol.kc);
    }
    if let Some(path) = out {
        let rows = sweep_rows(&p, &[k]);
        let records: Vec<SweepRecord> = rows.iter().map(|r| SweepRecord::from_row(r, &p)).collect();
        let w = create(path)?;
        csvio::write_sweep(w, &[], &records).map_err(|e| csv_failure(Some(path), e))?;
    }
    Ok(())
}

pub fn sweep(model: &ModelArgs, k_min: f64, k_max: f64, steps: usize, out: Option<&Path>) -> Result<()> {
    if !(k_min.is_finite() && k_max.is_finite()) || k_min > k_max {
        return Err(Failure::new(EXIT_USAGE, format!("need finite k_min <= k_max, got [{k_min}, {k_max}]")));
    }
    if steps == 0 {
        return Err(Failure::new(EXIT_USAGE, "steps must be at least 1"));
    }
    let base = params(model, 0.0)?;
    let k_grid: Vec<f64> = if k_min == k_max || steps == 1 {
        vec![k_min]
    } else {
        (0..steps)
            .map(|i| k_min + (k_max - k_min) * i as f64 / (steps - 1) as f64)
            .collect()
    };
    let rows = sweep_rows(&base, &k_grid);
    let records: Vec<SweepRecord> = rows.iter().map(|r| SweepRecord::from_row(r, &base)).collect();
    let comments = vec![
        format!("n = {}", base.n),
        format!("volume = {}", base.volume),
        format!("rho = {}", base.density),
        format!("k range = [{k_min}, {k_max}], {} rows", k_grid.len()),
    ];
    match out {
        Some(path) => {
            let w = create(path)?;
            csvio::write_sweep(w, &comments, &records).map_err(|e| csv_failure(Some(path), e))?;
        }
        None => csvio::write_sweep(io::stdout().lock(), &comments, &records).map_err(|e| csv_failure(None, e))?,
    }
    let supercritical = rows.iter().filter(|r| r.is_supercritical()).count();
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count() - supercritical;
    let violations: usize = rows.iter().map(|r| r.violations()).sum();
    eprintln!(
        "{} rows, {supercritical} supercritical, {failed} failed, {violations} violations",
        rows.len()
    );
    Ok(())
}

fn config_failure(path: &Path, e: ConfigError) -> Failure {
    Failure::new(EXIT_USAGE, format!("{}: {e}", path.display()))
}

fn kinetics_failure(e: KineticsError) -> Failure {
    match e {
        KineticsError::InvalidGrid(_) | KineticsError::InvalidArgument(_) | KineticsError::Inadmissible(_) => {
            Failure::new(EXIT_USAGE, e.to_string())
        }
        KineticsError::Equilibrium(inner) => inner.into(),
        other => Failure::new(EXIT_SOLVER, other.to_string()),
    }
}

pub fn simulate(config_path: &Path, out: Option<&Path>, field_out: Option<&Path>) -> Result<()> {
    let text = std::fs::read_to_string(config_path).map_err(|e| Failure::io(config_path, e))?;
    let config = RunConfig::parse(&text).map_err(|e| config_failure(config_path, e))?;
    let grid = config.phase_grid().map_err(|e| config_failure(config_path, e))?;
    let initial = config
        .initial_condition()
        .build(&grid, config.model.k, config.model.rho)
        .map_err(kinetics_failure)?;
    let report = run(initial, &grid, &config.run_options()).map_err(kinetics_failure)?;

    let mut comments = config.describe();
    comments.push(format!("dt used = {}", csvio::format_float(report.dt)));
    comments.push(format!("steps = {}", report.steps));
    comments.push(format!("reference C = {}", csvio::format_float(report.reference.maxwellian.c)));
    comments.push(format!("reference free energy = {}", csvio::format_float(report.reference.free_energy)));
    let rows: Vec<DiagnosticRow> = report.records.iter().map(DiagnosticRow::from).collect();
    let diagnostics = out.or(config.output.diagnostics.as_deref());
    match diagnostics {
        Some(path) => {
            let w = create(path)?;
            csvio::write_diagnostics(w, &comments, &rows).map_err(|e| csv_failure(Some(path), e))?;
        }
        None => csvio::write_diagnostics(io::stdout().lock(), &comments, &rows).map_err(|e| csv_failure(None, e))?,
    }
    if let Some(path) = field_out.or(config.output.field.as_deref()) {
        let mut field_comments = comments.clone();
        field_comments.push(format!("t = {}", csvio::format_float(report.records.last().map_or(0.0, |r| r.t))));
        field_comments.push("rows: x index, columns: v index".to_string());
        let w = create(path)?;
        csvio::write_field(w, &field_comments, &report.final_field).map_err(|e| csv_failure(Some(path), e))?;
    }

    let last = report.records.last().expect("run records the initial state");
    let verdict = classify(report.records.iter().map(|r| r.fluxes.energy), FLUX_TOL).expect("nonempty series");
    let class = if verdict.conservative {
        "conservative"
    } else if verdict.dissipative {
        "dissipative"
    } else {
        "neither dissipative nor conservative"
    };
    let mut summary: Box<dyn Write> = if diagnostics.is_some() {
        Box::new(io::stdout().lock())
    } else {
        Box::new(io::stderr().lock())
    };
    let lines = [
        format!("t = {}", last.t),
        format!("final Gtilde = {:.6e}", last.g_tilde),
        format!("monotonicity violations = {}", report.violations.len()),
        format!("classification = {class}"),
        format!("mass error = {:.3e}", last.mass_error),
    ];
    for line in lines {
        let _ = writeln!(summary, "{line}");
    }
    if let Some(e) = report.failure {
        return Err(Failure::new(
            EXIT_SOLVER,
            format!("step {} failed: {e}; diagnostics up to t = {} were written", report.steps + 1, last.t),
        ));
    }
    Ok(())
}

pub fn verify(quick: bool, polylog_bias: f64) -> Result<()> {
    let report = verify::run_all(&VerifyOptions { quick, polylog_bias });
    print!("{}", verify::render(&report));
    let failed: Vec<String> = report.failures().map(|o| format!("{} ({})", o.id, o.name)).collect();
    if failed.is_empty() {
        println!("all criteria passed");
        Ok(())
    } else {
        Err(Failure::new(EXIT_VERIFY, format!("failed criteria: {}", failed.join(", "))))
    }
}
