//! Phase-space solver for the one-dimensional (x, v) nonlinear Fokker–Planck
//! equation
//!
//! ```text
//! ∂_t f = ∂_v² f - v ∂_x f + ∂_v (v f (1 + k f))
//! ```
//!
//! on `Ω = [0, L]`, together with the integral functionals (moments, entropy,
//! free energy, the distance to a Maxwellian and the Lyapunov functional) and
//! the boundary fluxes that govern their evolution.
//!
//! The grid is cell-centred in both directions: `x_i = (i + ½) dx` and
//! `v_j = -V_max + (j + ½) dv`, so the velocity nodes are symmetric about
//! zero. All integrals use the same uniform-weight rule `Σ f dv dx`.

mod functionals;
mod initial;
mod run;
mod scheme;

pub use functionals::{
    boundary_fluxes, boundary_fluxes_with, classify, distance_g, entropy, entropy_density,
    fermion_bound_check, fermion_bound_slack, free_energy, lyapunov, moments, phi,
    BoundaryFluxes, Classification, Moments, FLUX_TOL,
};
pub use initial::InitialCondition;
pub use run::{
    discrete_reference, run, DiagnosticRecord, MonotonicityViolation, Reference, RunOptions,
    RunReport, Simulation, MONOTONICITY_TOL,
};
pub use scheme::{cfl_limit, step, StepOutcome, Stepper, CLAMP_MARGIN};

use thiserror::Error;

use crate::equilibrium::EquilibriumError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KineticsError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("inadmissible distribution: {0}")]
    Inadmissible(String),
    #[error("time step {dt:e} exceeds the stability limit {limit:e}")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("total density mismatch: field has {field}, reference has {reference}")]
    MassMismatch { field: f64, reference: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
}

pub type Result<T> = std::result::Result<T, KineticsError>;

/// Boundary rule at `x = 0` and `x = L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryCondition {
    /// Specular reflection `f(t, y, v) = f(t, y, -v)`.
    #[default]
    BounceBack,
    Periodic,
    /// No incoming particles. Not conservative; used to produce runs with
    /// positive boundary entropy flow.
    Absorbing,
}

/// Minimum `V_max` so that `e^{-V_max²/2} < 1e-12`.
pub fn min_velocity_cutoff() -> f64 {
    (2.0 * 1e12f64.ln()).sqrt()
}

/// Tensor grid over `[0, L] × [-V_max, V_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseGrid {
    pub x_nodes: usize,
    pub length: f64,
    pub v_nodes: usize,
    pub v_max: f64,
    pub dx: f64,
    pub dv: f64,
}

impl PhaseGrid {
    pub fn new(x_nodes: usize, length: f64, v_nodes: usize, v_max: f64) -> Result<Self> {
        if x_nodes < 1 || v_nodes < 2 {
            return Err(KineticsError::InvalidGrid(format!(
                "need at least 1 x cell and 2 v cells, got {x_nodes} x {v_nodes}"
            )));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(KineticsError::InvalidGrid(format!("length must be positive, got {length}")));
        }
        if !(v_max.is_finite() && v_max >= min_velocity_cutoff()) {
            return Err(KineticsError::InvalidGrid(format!(
                "V_max = {v_max} is too small: e^(-V_max^2/2) must be below 1e-12 (V_max >= {:.4})",
                min_velocity_cutoff()
            )));
        }
        Ok(Self {
            x_nodes,
            length,
            v_nodes,
            v_max,
            dx: length / x_nodes as f64,
            dv: 2.0 * v_max / v_nodes as f64,
        })
    }

    pub fn x(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx
    }

    pub fn v(&self, j: usize) -> f64 {
        -self.v_max + (j as f64 + 0.5) * self.dv
    }

    /// Index of the node at `-v_j`.
    pub fn mirror(&self, j: usize) -> usize {
        self.v_nodes - 1 - j
    }

    pub fn velocities(&self) -> Vec<f64> {
        (0..self.v_nodes).map(|j| self.v(j)).collect()
    }

    pub fn cells(&self) -> usize {
        self.x_nodes * self.v_nodes
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dv
    }
}

/// Grid samples `f(x_i, v_j)` stored row-major by `x`, with the quantum parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionField {
    values: Vec<f64>,
    x_nodes: usize,
    v_nodes: usize,
    k: f64,
}

impl DistributionField {
    /// Wraps samples after checking `f ≥ 0`, `1 + kf ≥ 0` and finiteness.
    pub fn new(grid: &PhaseGrid, k: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cells() {
            return Err(KineticsError::Inadmissible(format!(
                "expected {} samples, got {}",
                grid.cells(),
                values.len()
            )));
        }
        if !k.is_finite() {
            return Err(KineticsError::InvalidArgument(format!("k must be finite, got {k}")));
        }
        let field = Self {
            values,
            x_nodes: grid.x_nodes,
            v_nodes: grid.v_nodes,
            k,
        };
        field.check_admissible()?;
        Ok(field)
    }

    pub fn from_fn(grid: &PhaseGrid, k: f64, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.cells());
        for i in 0..grid.x_nodes {
            let x = grid.x(i);
            for j in 0..grid.v_nodes {
                values.push(f(x, grid.v(j)));
            }
        }
        Self::new(grid, k, values)
    }

    pub fn zeros(grid: &PhaseGrid, k: f64) -> Self {
        Self {
            values: vec![0.0; grid.cells()],
            x_nodes: grid.x_nodes,
            v_nodes: grid.v_nodes,
            k,
        }
    }

    pub(crate) fn from_raw(values: Vec<f64>, x_nodes: usize, v_nodes: usize, k: f64) -> Self {
        Self { values, x_nodes, v_nodes, k }
    }

    fn check_admissible(&self) -> Result<()> {
        for (idx, &f) in self.values.iter().enumerate() {
            let (i, j) = (idx / self.v_nodes, idx % self.v_nodes);
            if !f.is_finite() {
                return Err(KineticsError::Inadmissible(format!("non-finite value at ({i}, {j})")));
            }
            if f < 0.0 {
                return Err(KineticsError::Inadmissible(format!("f = {f} < 0 at ({i}, {j})")));
            }
            if 1.0 + self.k * f < 0.0 {
                return Err(KineticsError::Inadmissible(format!(
                    "1 + k f = {} < 0 at ({i}, {j})",
                    1.0 + self.k * f
                )));
            }
        }
        Ok(())
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn x_nodes(&self) -> usize {
        self.x_nodes
    }

    pub fn v_nodes(&self) -> usize {
        self.v_nodes
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.v_nodes + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.v_nodes..(i + 1) * self.v_nodes]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// `Σ |f - g| dx dv`.
    pub fn l1_distance(&self, other: &Self, grid: &PhaseGrid) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * grid.cell_area()
    }

    pub fn l1_norm(&self, grid: &PhaseGrid) -> f64 {
        self.values.iter().map(|f| f.abs()).sum::<f64>() * grid.cell_area()
    }

    /// Multiplies every sample by `factor`, rechecking admissibility.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let field = Self {
            values: self.values.iter().map(|f| f * factor).collect(),
            ..*self
        };
        field.check_admissible()?;
        Ok(field)
    }

    /// Samples the x-independent Maxwellian with constant `c`.
    pub fn maxwellian(grid: &PhaseGrid, spec: &crate::equilibrium::MaxwellianSpec) -> Self {
        let column: Vec<f64> = (0..grid.v_nodes).map(|j| spec.at_speed_sq(grid.v(j).powi(2))).collect();
        let mut values = Vec::with_capacity(grid.cells());
        for _ in 0..grid.x_nodes {
            values.extend_from_slice(&column);
        }
        Self::from_raw(values, grid.x_nodes, grid.v_nodes, spec.k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_geometry() {
        let g = PhaseGrid::new(4, 2.0, 6, 8.0).unwrap();
        assert_eq!(g.dx, 0.5);
        assert!((g.dv - 16.0 / 6.0).abs() < 1e-15);
        assert_eq!(g.x(0), 0.25);
        for j in 0..6 {
            assert!((g.v(j) + g.v(g.mirror(j))).abs() < 1e-14);
        }
    }

    #[test]
    fn grid_rejects_small_velocity_box() {
        assert!(PhaseGrid::new(4, 1.0, 8, 7.0).is_err());
        assert!(PhaseGrid::new(0, 1.0, 8, 8.0).is_err());
        assert!(PhaseGrid::new(4, -1.0, 8, 8.0).is_err());
    }

    #[test]
    fn admissibility_is_enforced() {
        let g = PhaseGrid::new(2, 1.0, 4, 8.0).unwrap();
        assert!(DistributionField::new(&g, 0.0, vec![0.0; 7]).is_err());
        let mut v = vec![0.1; 8];
        v[3] = -1e-3;
        assert!(DistributionField::new(&g, 0.0, v).is_err());
        // 1 + k f = 0 is allowed, below is not.
        assert!(DistributionField::new(&g, -1.0, vec![1.0; 8]).is_ok());
        assert!(DistributionField::new(&g, -1.0, vec![1.0 + 1e-9; 8]).is_err());
        assert!(DistributionField::new(&g, 0.0, vec![f64::NAN; 8]).is_err());
    }
}
