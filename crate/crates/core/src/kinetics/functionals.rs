//! Integral functionals of a distribution: moments, entropy, free energy,
//! distances to equilibrium and boundary fluxes.

use super::{BoundaryCondition, DistributionField, KineticsError, PhaseGrid, Result};
use crate::equilibrium::MaxwellianSpec;

/// `|A|` (and `-A`) threshold used by [`classify`].
pub const FLUX_TOL: f64 = 1e-10;

// Values below this are treated as exact zeros in `x log x`.
const LOG_GUARD: f64 = 1e-300;

/// `(1 + x) ln(1 + x) - x`, accurate for small `|x|` and equal to 1 at `x = -1`.
fn one_plus_x_log_minus_x(x: f64) -> f64 {
    if 1.0 + x < LOG_GUARD {
        return -x;
    }
    if x.abs() < 1e-3 {
        // x²/2 - x³/6 + x⁴/12 - x⁵/20 + x⁶/30
        x * x * (0.5 - x * (1.0 / 6.0 - x * (1.0 / 12.0 - x * (1.0 / 20.0 - x / 30.0))))
    } else {
        (1.0 + x) * x.ln_1p() - x
    }
}

fn x_log_x(x: f64) -> f64 {
    if x < LOG_GUARD {
        0.0
    } else {
        x * x.ln()
    }
}

/// Entropy integrand:
/// `Φ(f) = f ln f` for `k = 0`, and
/// `Φ(f) = f ln f - (1/k)(1 + kf) ln(1 + kf) + f` otherwise,
/// with `0 ln 0 = 0` applied to both logarithmic terms.
pub fn phi(f: f64, k: f64) -> f64 {
    if k == 0.0 {
        x_log_x(f)
    } else {
        x_log_x(f) - one_plus_x_log_minus_x(k * f) / k
    }
}

/// `s(r) = r ln r - (1/k)(1 + kr) ln(1 + kr)`, convex on the admissible range.
pub fn entropy_density(r: f64, k: f64) -> f64 {
    if k == 0.0 {
        x_log_x(r) - r
    } else {
        phi(r, k) - r
    }
}

/// Velocity moments of a field.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    /// `ρ(x_i) = ∫ f dv`.
    pub density: Vec<f64>,
    pub total_density: f64,
    /// `u(x_i) = ∫ v f dv / ρ(x_i)`; `None` where `ρ ≤ 1e-14`.
    pub velocity: Vec<Option<f64>>,
    /// `E(x_i) = ∫ v²/2 f dv`.
    pub energy: Vec<f64>,
    pub total_energy: f64,
}

pub fn moments(f: &DistributionField, grid: &PhaseGrid) -> Moments {
    let vs = grid.velocities();
    let mut density = Vec::with_capacity(grid.x_nodes);
    let mut velocity = Vec::with_capacity(grid.x_nodes);
    let mut energy = Vec::with_capacity(grid.x_nodes);
    for i in 0..grid.x_nodes {
        let (mut rho, mut mom, mut en) = (0.0, 0.0, 0.0);
        for (&fv, &v) in f.row(i).iter().zip(&vs) {
            rho += fv;
            mom += v * fv;
            en += 0.5 * v * v * fv;
        }
        let rho = rho * grid.dv;
        density.push(rho);
        velocity.push((rho > 1e-14).then(|| mom * grid.dv / rho));
        energy.push(en * grid.dv);
    }
    Moments {
        total_density: density.iter().sum::<f64>() * grid.dx,
        total_energy: energy.iter().sum::<f64>() * grid.dx,
        density,
        velocity,
        energy,
    }
}

pub(crate) fn total_density(f: &DistributionField, grid: &PhaseGrid) -> f64 {
    f.values().iter().sum::<f64>() * grid.cell_area()
}

/// `S = -∫∫ Φ(f) dv dx`.
pub fn entropy(f: &DistributionField, grid: &PhaseGrid) -> f64 {
    let k = f.k();
    -f.values().iter().map(|&v| phi(v, k)).sum::<f64>() * grid.cell_area()
}

/// `F = S - E`, evaluated in a single pass as `∫∫ (-|v|²f/2 - Φ(f))`.
pub fn free_energy(f: &DistributionField, grid: &PhaseGrid) -> f64 {
    let k = f.k();
    let half_v2: Vec<f64> = grid.velocities().iter().map(|v| 0.5 * v * v).collect();
    let mut total = 0.0;
    for i in 0..grid.x_nodes {
        let mut row_sum = 0.0;
        for (&fv, &e) in f.row(i).iter().zip(&half_v2) {
            row_sum -= e * fv + phi(fv, k);
        }
        total += row_sum;
    }
    total * grid.cell_area()
}

/// `G(f) = F(M) - F(f)` for a Maxwellian `M` with the same total density.
pub fn distance_g(f: &DistributionField, reference: &MaxwellianSpec, grid: &PhaseGrid) -> Result<f64> {
    if reference.k != f.k() {
        return Err(KineticsError::InvalidArgument(format!(
            "reference has k = {}, field has k = {}",
            reference.k,
            f.k()
        )));
    }
    let m = DistributionField::maxwellian(grid, reference);
    let (mass_f, mass_m) = (total_density(f, grid), total_density(&m, grid));
    if (mass_f - mass_m).abs() > 1e-6 * mass_m {
        return Err(KineticsError::MassMismatch {
            field: mass_f,
            reference: mass_m,
        });
    }
    Ok(free_energy(&m, grid) - free_energy(f, grid))
}

/// `G̃(f) = C̃ - F(f)`.
pub fn lyapunov(f: &DistributionField, c_tilde: f64, grid: &PhaseGrid) -> f64 {
    c_tilde - free_energy(f, grid)
}

/// Energy (`A`), density (`B`) and entropy (`U`) flux through `∂Ω`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoundaryFluxes {
    pub energy: f64,
    pub density: f64,
    pub entropy: f64,
}

fn fluxes_from_traces(left: &[f64], right: &[f64], grid: &PhaseGrid, k: f64) -> BoundaryFluxes {
    let mut out = BoundaryFluxes::default();
    for j in 0..grid.v_nodes {
        let v = grid.v(j);
        let jump = right[j] - left[j];
        out.energy += 0.5 * v * v * v * jump;
        out.density += v * jump;
        out.entropy -= v * (phi(right[j], k) - phi(left[j], k));
    }
    out.energy *= grid.dv;
    out.density *= grid.dv;
    out.entropy *= grid.dv;
    out
}

/// Fluxes with the boundary values `f(0, v)`, `f(L, v)` taken from the
/// first and last x-cell.
pub fn boundary_fluxes(f: &DistributionField, grid: &PhaseGrid) -> BoundaryFluxes {
    fluxes_from_traces(f.row(0), f.row(grid.x_nodes - 1), grid, f.k())
}

/// Upwind boundary traces of the transport scheme under `bc`: outgoing
/// velocities carry the adjacent cell value, incoming ones the value
/// supplied by the boundary rule.
pub(crate) fn upwind_traces(f: &DistributionField, grid: &PhaseGrid, bc: BoundaryCondition) -> (Vec<f64>, Vec<f64>) {
    let first = f.row(0);
    let last = f.row(grid.x_nodes - 1);
    let mut left = Vec::with_capacity(grid.v_nodes);
    let mut right = Vec::with_capacity(grid.v_nodes);
    for j in 0..grid.v_nodes {
        let v = grid.v(j);
        let m = grid.mirror(j);
        let (ghost_left, ghost_right) = match bc {
            BoundaryCondition::Periodic => (last[j], first[j]),
            BoundaryCondition::BounceBack => (first[m], last[m]),
            BoundaryCondition::Absorbing => (0.0, 0.0),
        };
        left.push(if v > 0.0 { ghost_left } else { first[j] });
        right.push(if v < 0.0 { ghost_right } else { last[j] });
    }
    (left, right)
}

/// Fluxes evaluated on the boundary traces implied by `bc`. These are the
/// fluxes that enter the discrete mass, energy and free-energy balances.
pub fn boundary_fluxes_with(f: &DistributionField, grid: &PhaseGrid, bc: BoundaryCondition) -> BoundaryFluxes {
    let (left, right) = upwind_traces(f, grid, bc);
    fluxes_from_traces(&left, &right, grid, f.k())
}

/// Pointwise `e^{-|v|²/2} - (-|v|² f/2 - s(f))`; nonnegative for admissible `f` when `k < 0`.
pub fn fermion_bound_slack(f: f64, v: f64, k: f64) -> f64 {
    let half_v2 = 0.5 * v * v;
    (-half_v2).exp() + half_v2 * f + entropy_density(f, k)
}

/// Minimum of [`fermion_bound_slack`] over the grid.
pub fn fermion_bound_check(f: &DistributionField, grid: &PhaseGrid) -> Result<f64> {
    let k = f.k();
    if !(k < 0.0) {
        return Err(KineticsError::InvalidArgument(format!(
            "the fermion bound needs k < 0, got {k}"
        )));
    }
    let vs = grid.velocities();
    let mut worst = f64::INFINITY;
    for i in 0..grid.x_nodes {
        for (&fv, &v) in f.row(i).iter().zip(&vs) {
            worst = worst.min(fermion_bound_slack(fv, v, k));
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    /// `A ≥ -tol` at every record.
    pub dissipative: bool,
    /// `|A| ≤ tol` at every record.
    pub conservative: bool,
}

/// Classifies a series of boundary energy fluxes `A(t)`.
pub fn classify(energy_fluxes: impl IntoIterator<Item = f64>, tol: f64) -> Option<Classification> {
    let mut seen = false;
    let mut dissipative = true;
    let mut conservative = true;
    for a in energy_fluxes {
        seen = true;
        dissipative &= a >= -tol;
        conservative &= a.abs() <= tol;
    }
    seen.then_some(Classification {
        dissipative,
        conservative,
    })
}
