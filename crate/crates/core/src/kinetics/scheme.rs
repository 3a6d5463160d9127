//! Strang-split time step: upwind transport in x, linearly implicit
//! exponentially fitted collision operator in v.
//!
//! With `w = f / (1 + kf)` the collision flux is
//! `∂_v f + v f (1 + kf) = (1 + kf)² (∂_v w + v w)`. Two-point fluxes use the
//! Scharfetter–Gummel weights `B(x) = x / (e^x - 1)`, which vanish exactly on
//! `w ∝ e^{-v²/2}`, so grid-sampled Maxwellians are discrete steady states.
//! The factor `1 + kf` is frozen at the start of the step, leaving one
//! tridiagonal M-matrix solve per x-row. That matrix has unit column sums,
//! so the collision step conserves mass exactly and preserves positivity.

use super::{BoundaryCondition, DistributionField, KineticsError, PhaseGrid, Result};

/// Fermion samples are clamped to `1/|k| - CLAMP_MARGIN`.
pub const CLAMP_MARGIN: f64 = 1e-14;

// Overshoots past 1/|k| larger than this are reported, not clamped.
const OVERSHOOT_TOL: f64 = 1e-10;

// Safety factor applied to every stability bound.
const CFL_SAFETY: f64 = 0.9;

/// Largest admissible `dt` for a field whose maximum is `f_max`:
/// `0.9 · min(dx / V_max, dv² / 2, dv / (V_max (1 + |k| f_max)))`.
pub fn cfl_limit(grid: &PhaseGrid, k: f64, f_max: f64) -> f64 {
    let transport = grid.dx / grid.v_max;
    let diffusion = 0.5 * grid.dv * grid.dv;
    let drift = grid.dv / (grid.v_max * (1.0 + k.abs() * f_max));
    CFL_SAFETY * transport.min(diffusion).min(drift)
}

/// `x / (e^x - 1)`, with the removable singularity at 0 filled in.
fn bernoulli_weight(x: f64) -> f64 {
    if x.abs() < 1e-10 {
        1.0 - 0.5 * x
    } else {
        x / x.exp_m1()
    }
}

/// Bookkeeping from one step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepOutcome {
    /// Mass `Σ Δf dx dv` removed (positive) or added (negative) by clamping.
    pub clamped_mass: f64,
    /// Number of samples that were clamped.
    pub clamped_cells: usize,
}

/// Reusable stepping workspace for a fixed grid, boundary rule and `dt`.
#[derive(Debug, Clone)]
pub struct Stepper {
    grid: PhaseGrid,
    bc: BoundaryCondition,
    dt: f64,
    // B(δ_{j+½}) and B(-δ_{j+½}) for the v_nodes - 1 interior faces.
    weight_plus: Vec<f64>,
    weight_minus: Vec<f64>,
    scratch: Vec<f64>,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    q: Vec<f64>,
}

impl Stepper {
    pub fn new(grid: &PhaseGrid, bc: BoundaryCondition, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(KineticsError::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        let faces = grid.v_nodes - 1;
        let mut weight_plus = Vec::with_capacity(faces);
        let mut weight_minus = Vec::with_capacity(faces);
        for j in 0..faces {
            let delta = (-grid.v_max + (j + 1) as f64 * grid.dv) * grid.dv;
            weight_plus.push(bernoulli_weight(delta));
            weight_minus.push(bernoulli_weight(-delta));
        }
        let n = grid.v_nodes;
        Ok(Self {
            grid: *grid,
            bc,
            dt,
            weight_plus,
            weight_minus,
            scratch: vec![0.0; grid.cells()],
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
            q: vec![0.0; n],
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn boundary(&self) -> BoundaryCondition {
        self.bc
    }

    /// Advances `f` by one step in place.
    pub fn advance(&mut self, f: &mut DistributionField) -> Result<StepOutcome> {
        if f.x_nodes() != self.grid.x_nodes || f.v_nodes() != self.grid.v_nodes {
            return Err(KineticsError::InvalidArgument(format!(
                "field is {}x{}, grid is {}x{}",
                f.x_nodes(),
                f.v_nodes(),
                self.grid.x_nodes,
                self.grid.v_nodes
            )));
        }
        let k = f.k();
        let limit = cfl_limit(&self.grid, k, f.max_value());
        if self.dt > limit {
            return Err(KineticsError::StepTooLarge { dt: self.dt, limit });
        }
        let values = &mut f.values;
        transport(&self.grid, self.bc, 0.5 * self.dt, values, &mut self.scratch);
        for i in 0..self.grid.x_nodes {
            let row = &mut values[i * self.grid.v_nodes..(i + 1) * self.grid.v_nodes];
            self.collide_row(row, k);
        }
        transport(&self.grid, self.bc, 0.5 * self.dt, values, &mut self.scratch);
        clamp(values, k, self.grid.cell_area())
    }

    fn collide_row(&mut self, row: &mut [f64], k: f64) {
        let n = row.len();
        // Floor keeps the frozen factor positive on saturated fermion cells.
        for (q, &f) in self.q.iter_mut().zip(row.iter()) {
            *q = (1.0 + k * f).max(CLAMP_MARGIN);
        }
        let scale = self.dt / (self.grid.dv * self.grid.dv);
        self.diag.fill(1.0);
        self.lower[0] = 0.0;
        self.upper[n - 1] = 0.0;
        // Face j+½ couples cells j and j+1 with weight dt q_j q_{j+1} / dv².
        for j in 0..n - 1 {
            let (qa, qb) = (self.q[j], self.q[j + 1]);
            self.diag[j] += scale * qb * self.weight_plus[j];
            self.upper[j] = -scale * qa * self.weight_minus[j];
            self.diag[j + 1] += scale * qa * self.weight_minus[j];
            self.lower[j + 1] = -scale * qb * self.weight_plus[j];
        }
        solve_tridiagonal(&self.lower, &mut self.diag, &self.upper, row);
    }
}

/// Thomas algorithm; `diag` is overwritten and `rhs` receives the solution.
fn solve_tridiagonal(lower: &[f64], diag: &mut [f64], upper: &[f64], rhs: &mut [f64]) {
    let n = rhs.len();
    for j in 1..n {
        let m = lower[j] / diag[j - 1];
        diag[j] -= m * upper[j - 1];
        rhs[j] -= m * rhs[j - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for j in (0..n - 1).rev() {
        rhs[j] = (rhs[j] - upper[j] * rhs[j + 1]) / diag[j];
    }
}

/// First-order upwind update of `-v ∂_x f` over `tau`.
fn transport(grid: &PhaseGrid, bc: BoundaryCondition, tau: f64, values: &mut [f64], scratch: &mut [f64]) {
    scratch.copy_from_slice(values);
    let (nx, nv) = (grid.x_nodes, grid.v_nodes);
    let courant: Vec<f64> = (0..nv).map(|j| grid.v(j).abs() * tau / grid.dx).collect();
    // Velocities are symmetric about zero, so v_j > 0 exactly for j >= nv / 2.
    let split = nv / 2;
    let row = |i: usize| &scratch[i * nv..(i + 1) * nv];
    for i in 0..nx {
        let cur = row(i);
        let out = &mut values[i * nv..(i + 1) * nv];
        for j in 0..split {
            let upstream = if i + 1 < nx {
                row(i + 1)[j]
            } else {
                match bc {
                    BoundaryCondition::Periodic => row(0)[j],
                    BoundaryCondition::BounceBack => cur[nv - 1 - j],
                    BoundaryCondition::Absorbing => 0.0,
                }
            };
            out[j] = (1.0 - courant[j]) * cur[j] + courant[j] * upstream;
        }
        for j in split..nv {
            let upstream = if i > 0 {
                row(i - 1)[j]
            } else {
                match bc {
                    BoundaryCondition::Periodic => row(nx - 1)[j],
                    BoundaryCondition::BounceBack => cur[nv - 1 - j],
                    BoundaryCondition::Absorbing => 0.0,
                }
            };
            out[j] = (1.0 - courant[j]) * cur[j] + courant[j] * upstream;
        }
    }
}

fn clamp(values: &mut [f64], k: f64, cell_area: f64) -> Result<StepOutcome> {
    let upper = if k < 0.0 { 1.0 / k.abs() - CLAMP_MARGIN } else { f64::INFINITY };
    let mut outcome = StepOutcome::default();
    for (idx, f) in values.iter_mut().enumerate() {
        if !f.is_finite() {
            return Err(KineticsError::Inadmissible(format!("non-finite value in cell {idx} after step")));
        }
        if k < 0.0 && *f > 1.0 / k.abs() + OVERSHOOT_TOL {
            return Err(KineticsError::Inadmissible(format!(
                "f = {} exceeds 1/|k| = {} in cell {idx}",
                *f,
                1.0 / k.abs()
            )));
        }
        let clamped = f.clamp(0.0, upper);
        if clamped != *f {
            outcome.clamped_mass += (*f - clamped) * cell_area;
            outcome.clamped_cells += 1;
            *f = clamped;
        }
    }
    Ok(outcome)
}

/// One step of size `dt` from `f`, returning the new field.
pub fn step(f: &DistributionField, grid: &PhaseGrid, dt: f64, bc: BoundaryCondition) -> Result<DistributionField> {
    let mut stepper = Stepper::new(grid, bc, dt)?;
    let mut next = f.clone();
    stepper.advance(&mut next)?;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::MaxwellianSpec;
    use crate::kinetics::functionals::total_density;

    fn grid() -> PhaseGrid {
        PhaseGrid::new(16, 1.0, 48, 8.0).unwrap()
    }

    #[test]
    fn bernoulli_weight_is_continuous() {
        for &x in &[1e-12, -1e-12, 1e-9, -1e-9] {
            let smooth = 1.0 - 0.5 * x + x * x / 12.0;
            assert!((bernoulli_weight(x) - smooth).abs() < 1e-15);
        }
        assert_eq!(bernoulli_weight(0.0), 1.0);
        assert!((bernoulli_weight(-2.0) - bernoulli_weight(2.0) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn thomas_matches_dense_solve() {
        let lower = [0.0, -1.0, -0.5];
        let mut diag = [4.0, 5.0, 3.0];
        let upper = [-1.0, -2.0, 0.0];
        let mut rhs = [1.0, 2.0, 3.0];
        solve_tridiagonal(&lower, &mut diag, &upper, &mut rhs);
        let residual = [
            4.0 * rhs[0] - rhs[1] - 1.0,
            -rhs[0] + 5.0 * rhs[1] - 2.0 * rhs[2] - 2.0,
            -0.5 * rhs[1] + 3.0 * rhs[2] - 3.0,
        ];
        assert!(residual.iter().all(|r| r.abs() < 1e-14));
    }

    #[test]
    fn maxwellian_is_stationary() {
        let g = grid();
        let dt = cfl_limit(&g, -1.0, 1.0);
        for &(c, k) in &[(0.4, 0.0), (0.9, -1.0), (0.3, 2.0)] {
            let m = DistributionField::maxwellian(&g, &MaxwellianSpec::new(c, k).unwrap());
            let next = step(&m, &g, dt, BoundaryCondition::BounceBack).unwrap();
            assert!(next.l1_distance(&m, &g) < 1e-13 * m.l1_norm(&g));
        }
    }

    #[test]
    fn periodic_step_conserves_mass() {
        let g = grid();
        let f = DistributionField::from_fn(&g, 0.0, |x, v| {
            (1.0 + 0.5 * (6.28 * x).sin()) * (-(v - 1.0).powi(2)).exp()
        })
        .unwrap();
        let dt = cfl_limit(&g, 0.0, f.max_value());
        let before = total_density(&f, &g);
        let after = total_density(&step(&f, &g, dt, BoundaryCondition::Periodic).unwrap(), &g);
        assert!((after - before).abs() <= 1e-13 * before);
    }

    #[test]
    fn absorbing_boundary_loses_mass() {
        let g = grid();
        let f = DistributionField::from_fn(&g, 0.0, |_, v| (-(v * v)).exp()).unwrap();
        let dt = cfl_limit(&g, 0.0, 1.0);
        let after = step(&f, &g, dt, BoundaryCondition::Absorbing).unwrap();
        assert!(total_density(&after, &g) < total_density(&f, &g));
    }

    #[test]
    fn oversized_step_is_rejected() {
        let g = grid();
        let f = DistributionField::zeros(&g, 0.0);
        let limit = cfl_limit(&g, 0.0, 0.0);
        let err = step(&f, &g, 1.01 * limit, BoundaryCondition::BounceBack).unwrap_err();
        assert!(matches!(err, KineticsError::StepTooLarge { .. }));
    }

    #[test]
    fn saturated_fermion_cells_are_clamped() {
        let g = grid();
        let f = DistributionField::from_fn(&g, -1.0, |_, v| if v.abs() < 1.0 { 1.0 } else { 0.0 }).unwrap();
        let mut stepper = Stepper::new(&g, BoundaryCondition::BounceBack, cfl_limit(&g, -1.0, 1.0)).unwrap();
        let mut next = f.clone();
        stepper.advance(&mut next).unwrap();
        assert!(next.values().iter().all(|&v| (0.0..1.0).contains(&v)));
    }
}
