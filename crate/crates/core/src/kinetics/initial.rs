//! Families of initial data built around the global Maxwellian.

use super::functionals::total_density;
use super::{DistributionField, KineticsError, PhaseGrid, Result};
use crate::equilibrium::{maxwellian_value, solve_normalization, MaxwellianSpec, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition {
    /// `M_k(v)`.
    Maxwellian,
    /// `M_k(v) (1 + amplitude · cos(2π · mode · x / L))`.
    Modulated { amplitude: f64, mode: u32 },
    /// `M_k(v - shift)`.
    ShiftedGaussian { shift: f64 },
}

impl InitialCondition {
    /// Samples the initial field for quantum parameter `k` and rescales it
    /// so the discrete total density equals `density`. The underlying
    /// Maxwellian is the one-dimensional equilibrium with that density on
    /// a domain of volume `L`.
    pub fn build(&self, grid: &PhaseGrid, k: f64, density: f64) -> Result<DistributionField> {
        let params = ModelParams::new(k, 1, grid.length, density)?;
        let solution = solve_normalization(&params)?;
        let spec = solution.maxwellian();
        let raw = self.sample(grid, &spec)?;
        let mass = total_density(&raw, grid);
        if !(mass > 0.0) {
            return Err(KineticsError::InvalidArgument("initial condition has zero mass".into()));
        }
        raw.scaled(density / mass)
    }

    fn sample(&self, grid: &PhaseGrid, spec: &MaxwellianSpec) -> Result<DistributionField> {
        match *self {
            InitialCondition::Maxwellian => Ok(DistributionField::maxwellian(grid, spec)),
            InitialCondition::Modulated { amplitude, mode } => {
                if !(amplitude.abs() <= 1.0) {
                    return Err(KineticsError::InvalidArgument(format!(
                        "modulation amplitude must lie in [-1, 1], got {amplitude}"
                    )));
                }
                let wavenumber = 2.0 * std::f64::consts::PI * mode as f64 / grid.length;
                DistributionField::from_fn(grid, spec.k, |x, v| {
                    maxwellian_value(spec, &[v]) * (1.0 + amplitude * (wavenumber * x).cos())
                })
            }
            InitialCondition::ShiftedGaussian { shift } => {
                if !shift.is_finite() {
                    return Err(KineticsError::InvalidArgument(format!("shift must be finite, got {shift}")));
                }
                DistributionField::from_fn(grid, spec.k, |_, v| maxwellian_value(spec, &[v - shift]))
            }
        }
    }
}
