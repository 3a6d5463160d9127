//! Time integration with per-step Lyapunov bookkeeping.

use super::functionals::{boundary_fluxes_with, distance_g, free_energy, moments, total_density, BoundaryFluxes};
use super::scheme::{cfl_limit, StepOutcome, Stepper};
use super::{BoundaryCondition, DistributionField, KineticsError, PhaseGrid, Result};
use crate::equilibrium::{MaxwellianSpec, BOSON_BRACKET_GAP};
use crate::roots::{find_root, RootError, RootOptions};

/// Slack allowed in `ΔG̃/Δt ≤ U - A` before a step is flagged.
pub const MONOTONICITY_TOL: f64 = 1e-8;

/// The Maxwellian whose discrete total density matches a given field, and
/// its free energy `C̃ = F(M)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reference {
    pub maxwellian: MaxwellianSpec,
    pub free_energy: f64,
    pub mass: f64,
}

/// Solves for the constant `C` whose grid-sampled Maxwellian has the same
/// discrete total density as `f`.
pub fn discrete_reference(f: &DistributionField, grid: &PhaseGrid) -> Result<Reference> {
    let k = f.k();
    let mass = total_density(f, grid);
    if !(mass > 0.0) {
        return Err(KineticsError::InvalidArgument("reference needs positive total density".into()));
    }
    let vs = grid.velocities();
    let sampled_mass = |c: f64| -> f64 {
        let sum: f64 = vs
            .iter()
            .map(|v| {
                let g = c * (-0.5 * v * v).exp();
                g / (1.0 - k * g)
            })
            .sum();
        sum * grid.dv * grid.length
    };
    let mut hi = if k > 0.0 {
        (1.0 - BOSON_BRACKET_GAP) / k
    } else {
        mass / (grid.length * grid.dv * vs.len() as f64).max(f64::MIN_POSITIVE) + 1.0
    };
    if k > 0.0 {
        if sampled_mass(hi) < mass {
            return Err(KineticsError::InvalidArgument(format!(
                "total density {mass} exceeds what a sampled Maxwellian with k = {k} can carry"
            )));
        }
    } else {
        while sampled_mass(hi) < mass {
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(KineticsError::InvalidArgument("reference bracket diverged".into()));
            }
        }
    }
    let opts = RootOptions {
        f_tol: 1e-15 * mass,
        ..RootOptions::default()
    };
    let root = find_root(|c| Ok::<_, ()>(sampled_mass(c) - mass), 0.0, hi, opts).map_err(|e| match e {
        RootError::NotBracketed { .. } | RootError::Function(()) => {
            KineticsError::InvalidArgument("reference constant could not be bracketed".into())
        }
    })?;
    let maxwellian = MaxwellianSpec::new(root.x, k)?;
    let m = DistributionField::maxwellian(grid, &maxwellian);
    Ok(Reference {
        maxwellian,
        free_energy: free_energy(&m, grid),
        mass: total_density(&m, grid),
    })
}

/// Totals recorded at one output time.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticRecord {
    pub t: f64,
    pub rho: f64,
    pub energy: f64,
    pub entropy: f64,
    pub free_energy: f64,
    /// `F(M) - F(f)`, absent when the current density no longer matches the reference.
    pub g: Option<f64>,
    pub g_tilde: f64,
    pub fluxes: BoundaryFluxes,
    /// `ρ(t) - ρ(0)`, including any mass removed by clamping or by the boundary.
    pub mass_error: f64,
    pub u_profile: Vec<Option<f64>>,
}

/// A step at which `(G̃_new - G̃_old)/Δt > U - A + tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityViolation {
    pub step: usize,
    pub t: f64,
    pub rate: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub boundary: BoundaryCondition,
    /// Upper bound on the step; `None` picks a stable step from the initial field.
    pub dt: Option<f64>,
    pub t_end: f64,
    /// Time between diagnostic records; `None` records every step.
    pub output_interval: Option<f64>,
}

impl RunOptions {
    /// Default step: the stability limit evaluated at the largest value the
    /// field can reach (`1/|k|` for fermions, twice the initial maximum otherwise).
    pub fn default_dt(grid: &PhaseGrid, f: &DistributionField) -> f64 {
        let k = f.k();
        let f_bound = if k < 0.0 { 1.0 / k.abs() } else { 2.0 * f.max_value() };
        cfl_limit(grid, k, f_bound)
    }
}

/// A field being advanced in time.
#[derive(Debug, Clone)]
pub struct Simulation {
    field: DistributionField,
    stepper: Stepper,
    reference: Reference,
    initial_mass: f64,
    t: f64,
    steps: usize,
    g_tilde: f64,
    violations: Vec<MonotonicityViolation>,
}

impl Simulation {
    pub fn new(field: DistributionField, grid: &PhaseGrid, boundary: BoundaryCondition, dt: f64) -> Result<Self> {
        let reference = discrete_reference(&field, grid)?;
        Self::with_reference(field, grid, boundary, dt, reference)
    }

    pub fn with_reference(
        field: DistributionField,
        grid: &PhaseGrid,
        boundary: BoundaryCondition,
        dt: f64,
        reference: Reference,
    ) -> Result<Self> {
        if field.x_nodes() != grid.x_nodes || field.v_nodes() != grid.v_nodes {
            return Err(KineticsError::InvalidArgument("field does not match grid".into()));
        }
        if reference.maxwellian.k != field.k() {
            return Err(KineticsError::InvalidArgument("reference and field have different k".into()));
        }
        let stepper = Stepper::new(grid, boundary, dt)?;
        let g_tilde = reference.free_energy - free_energy(&field, grid);
        Ok(Self {
            initial_mass: total_density(&field, grid),
            field,
            stepper,
            reference,
            t: 0.0,
            steps: 0,
            g_tilde,
            violations: Vec::new(),
        })
    }

    pub fn field(&self) -> &DistributionField {
        &self.field
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn reference(&self) -> &Reference {
        &self.reference
    }

    pub fn violations(&self) -> &[MonotonicityViolation] {
        &self.violations
    }

    /// Advances one step, checking the discrete Lyapunov inequality.
    /// The field is left untouched if the step fails.
    pub fn step(&mut self) -> Result<StepOutcome> {
        let grid = *self.stepper.grid();
        let dt = self.stepper.dt();
        let fluxes = boundary_fluxes_with(&self.field, &grid, self.stepper.boundary());
        let mut next = self.field.clone();
        let outcome = self.stepper.advance(&mut next)?;
        self.field = next;
        self.t += dt;
        self.steps += 1;
        let g_tilde = self.reference.free_energy - free_energy(&self.field, &grid);
        let rate = (g_tilde - self.g_tilde) / dt;
        let bound = fluxes.entropy - fluxes.energy;
        if rate > bound + MONOTONICITY_TOL {
            self.violations.push(MonotonicityViolation {
                step: self.steps,
                t: self.t,
                rate,
                bound,
            });
        }
        self.g_tilde = g_tilde;
        Ok(outcome)
    }

    pub fn record(&self) -> DiagnosticRecord {
        let grid = self.stepper.grid();
        let m = moments(&self.field, grid);
        let free = free_energy(&self.field, grid);
        DiagnosticRecord {
            t: self.t,
            rho: m.total_density,
            energy: m.total_energy,
            entropy: free + m.total_energy,
            free_energy: free,
            g: distance_g(&self.field, &self.reference.maxwellian, grid).ok(),
            g_tilde: self.reference.free_energy - free,
            fluxes: boundary_fluxes_with(&self.field, grid, self.stepper.boundary()),
            mass_error: m.total_density - self.initial_mass,
            u_profile: m.velocity,
        }
    }

    pub fn into_field(self) -> DistributionField {
        self.field
    }
}

/// Everything produced by [`run`]. When a step fails, `records` holds the
/// series up to the failure and `failure` the error.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub records: Vec<DiagnosticRecord>,
    pub violations: Vec<MonotonicityViolation>,
    pub failure: Option<KineticsError>,
    pub reference: Reference,
    pub dt: f64,
    pub steps: usize,
    pub final_field: DistributionField,
}

/// Integrates from `initial` to `t_end` with a uniform step no larger than
/// the requested one, recording diagnostics at the start, at every output
/// interval and at the end.
pub fn run(initial: DistributionField, grid: &PhaseGrid, opts: &RunOptions) -> Result<RunReport> {
    if !(opts.t_end >= 0.0 && opts.t_end.is_finite()) {
        return Err(KineticsError::InvalidArgument(format!("end time must be nonnegative, got {}", opts.t_end)));
    }
    let dt_max = opts.dt.unwrap_or_else(|| RunOptions::default_dt(grid, &initial));
    if !(dt_max > 0.0) {
        return Err(KineticsError::InvalidArgument(format!("dt must be positive, got {dt_max}")));
    }
    let total_steps = (opts.t_end / dt_max - 1e-9).ceil().max(0.0) as usize;
    let dt = if total_steps == 0 { dt_max } else { opts.t_end / total_steps as f64 };
    let every = match opts.output_interval {
        Some(interval) if interval > 0.0 => ((interval / dt).round() as usize).max(1),
        Some(interval) => {
            return Err(KineticsError::InvalidArgument(format!("output interval must be positive, got {interval}")))
        }
        None => 1,
    };

    let mut sim = Simulation::new(initial, grid, opts.boundary, dt)?;
    let mut records = vec![sim.record()];
    let mut failure = None;
    for n in 1..=total_steps {
        if let Err(e) = sim.step() {
            failure = Some(e);
            break;
        }
        if n % every == 0 || n == total_steps {
            records.push(sim.record());
        }
    }
    Ok(RunReport {
        records,
        violations: sim.violations.clone(),
        failure,
        reference: sim.reference,
        dt,
        steps: sim.steps,
        final_field: sim.into_field(),
    })
}
