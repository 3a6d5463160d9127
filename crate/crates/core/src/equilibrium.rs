//! Global Maxwellian equilibria and their classical/quantum thermodynamics.
//!
//! For a quantum parameter `k` (bosons `k > 0`, fermions `k < 0`, classical
//! `k = 0`) the free-energy maximiser at fixed total density `ρ̃` is
//!
//! ```text
//! M_k(v) = C e^{-|v|²/2} / (1 - k C e^{-|v|²/2})
//! ```
//!
//! where `C = C_k` is the unique root of the normalization
//! `(2π)^{n/2} V C L_{n/2}(kC) = ρ̃` with `C > 0` and `1 - kC > 0`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::roots::{find_root, RootError, RootOptions};
use crate::specfun::{self, lfun, SpecFunError};

/// Relative residual guaranteed for every returned root.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Gap kept below the boson critical point `kC = 1` when bracketing.
pub const BOSON_BRACKET_GAP: f64 = 1e-12;
/// `|k|` up to which the small-`k` entropy and free-energy orderings are asserted.
pub const SMALL_K: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquilibriumError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error(
        "supercritical density: k*rho = {k_rho} must stay below (2pi)^(n/2) V zeta(n/2) = {threshold} \
         (the boson critical point kC = 1 cannot be reached)"
    )]
    Supercritical { k_rho: f64, threshold: f64 },
    #[error("normalization root out of numerical reach: {0}")]
    Unreachable(String),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

pub type Result<T> = std::result::Result<T, EquilibriumError>;

/// Quantum parameter, velocity dimension, domain volume and total density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub k: f64,
    pub n: u32,
    pub volume: f64,
    pub density: f64,
}

impl ModelParams {
    pub fn new(k: f64, n: u32, volume: f64, density: f64) -> Result<Self> {
        let p = Self { k, n, volume, density };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.k.is_finite() {
            return Err(EquilibriumError::InvalidParams(format!("k must be finite, got {}", self.k)));
        }
        if self.n < 1 {
            return Err(EquilibriumError::InvalidParams("velocity dimension must be >= 1".into()));
        }
        if !(self.volume > 0.0 && self.volume.is_finite()) {
            return Err(EquilibriumError::InvalidParams(format!(
                "domain volume must be positive, got {}",
                self.volume
            )));
        }
        if !(self.density > 0.0 && self.density.is_finite()) {
            return Err(EquilibriumError::InvalidParams(format!(
                "total density must be positive, got {}",
                self.density
            )));
        }
        Ok(())
    }

    pub fn with_k(self, k: f64) -> Self {
        Self { k, ..self }
    }

    fn half_n(&self) -> f64 {
        self.n as f64 / 2.0
    }

    /// `(2π)^{n/2} V`.
    fn phase_volume(&self) -> f64 {
        (2.0 * PI).powf(self.half_n()) * self.volume
    }

    /// Left side of the normalization equation minus `ρ̃`.
    pub fn normalization_residual(&self, c: f64) -> Result<f64> {
        Ok(self.phase_volume() * c * lfun(self.half_n(), self.k * c)? - self.density)
    }

    /// Largest `k ρ̃` for which a boson root exists, `(2π)^{n/2} V ζ(n/2)`;
    /// infinite for `n ≤ 2`.
    pub fn critical_k_density(&self) -> f64 {
        if self.n <= 2 {
            f64::INFINITY
        } else {
            self.phase_volume() * specfun::zeta(self.half_n())
        }
    }
}

/// Classical (`k = 0`) constant, energy, entropy and free energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalReference {
    pub c0: f64,
    pub energy: f64,
    pub entropy: f64,
    pub free_energy: f64,
}

pub fn classical_reference(params: &ModelParams) -> ClassicalReference {
    let c0 = params.density / params.phase_volume();
    let energy = params.half_n() * params.density;
    let entropy = energy - params.density * c0.ln();
    ClassicalReference {
        c0,
        energy,
        entropy,
        free_energy: entropy - energy,
    }
}

/// Parameters of a global Maxwellian `C e^{-|v|²/2} / (1 - kC e^{-|v|²/2})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxwellianSpec {
    pub c: f64,
    pub k: f64,
}

impl MaxwellianSpec {
    pub fn new(c: f64, k: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) || !k.is_finite() {
            return Err(EquilibriumError::InvalidParams(format!(
                "Maxwellian needs C > 0 and finite k, got C = {c}, k = {k}"
            )));
        }
        if !(1.0 - k * c > 0.0) {
            return Err(EquilibriumError::InvalidParams(format!(
                "Maxwellian needs 1 - kC > 0, got kC = {}",
                k * c
            )));
        }
        Ok(Self { c, k })
    }

    /// Value at squared speed `|v|²`.
    pub fn at_speed_sq(&self, v2: f64) -> f64 {
        let g = self.c * (-0.5 * v2).exp();
        g / (1.0 - self.k * g)
    }
}

/// `M_k(v)` for a velocity vector of any dimension.
pub fn maxwellian_value(spec: &MaxwellianSpec, v: &[f64]) -> f64 {
    spec.at_speed_sq(v.iter().map(|x| x * x).sum())
}

/// Solved equilibrium together with its classical reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumSolution {
    pub params: ModelParams,
    /// `C_k`.
    pub c: f64,
    /// `k C_k`.
    pub kc: f64,
    pub energy: f64,
    pub entropy: f64,
    pub free_energy: f64,
    pub classical: ClassicalReference,
    /// `|(2π)^{n/2} V C_k L_{n/2}(kC_k) - ρ̃|`.
    pub residual: f64,
}

impl EquilibriumSolution {
    pub fn maxwellian(&self) -> MaxwellianSpec {
        MaxwellianSpec { c: self.c, k: self.params.k }
    }

    /// `-1 ≤ kC_k < 1`, where the energy ordering is claimed.
    pub fn in_ordering_window(&self) -> bool {
        (-1.0..1.0).contains(&self.kc)
    }
}

fn solve_constant(params: &ModelParams, classical: &ClassicalReference) -> Result<f64> {
    let k = params.k;
    let c0 = classical.c0;
    if k == 0.0 {
        return Ok(c0);
    }
    let residual = |c: f64| params.normalization_residual(c);

    let (lo, hi) = if k > 0.0 {
        let k_rho = k * params.density;
        let threshold = params.critical_k_density();
        if !(k_rho < threshold) {
            return Err(EquilibriumError::Supercritical { k_rho, threshold });
        }
        // C_k < C_0 for bosons, and kC must stay below 1.
        let hi = c0.min((1.0 - BOSON_BRACKET_GAP) / k);
        if residual(hi)? < 0.0 {
            return Err(EquilibriumError::Unreachable(format!(
                "normalization at kC = 1 - {BOSON_BRACKET_GAP:e} is still below the target density"
            )));
        }
        (0.0, hi)
    } else {
        // C_k > C_0 for fermions; grow the upper end until it overshoots.
        let mut hi = 2.0 * c0;
        let mut doublings = 0;
        while residual(hi)? <= 0.0 {
            hi *= 2.0;
            doublings += 1;
            if doublings > 1000 || !hi.is_finite() {
                return Err(EquilibriumError::Unreachable("fermion bracket did not close".into()));
            }
        }
        (c0, hi)
    };

    let opts = RootOptions {
        f_tol: 1e-14 * params.density,
        ..RootOptions::default()
    };
    match find_root(residual, lo, hi, opts) {
        Ok(root) => Ok(root.x),
        Err(RootError::Function(e)) => Err(e),
        Err(RootError::NotBracketed { lo, hi, f_lo, f_hi }) => Err(EquilibriumError::Unreachable(format!(
            "root not bracketed on [{lo}, {hi}] (residuals {f_lo}, {f_hi})"
        ))),
    }
}

/// Solves the normalization for `C_k` and fills in energy, entropy and free energy.
pub fn solve_normalization(params: &ModelParams) -> Result<EquilibriumSolution> {
    params.validate()?;
    let classical = classical_reference(params);
    let c = solve_constant(params, &classical)?;
    let residual = params.normalization_residual(c)?.abs();
    if residual > RESIDUAL_TOL * params.density {
        return Err(EquilibriumError::Unreachable(format!(
            "normalization residual {residual:e} exceeds {RESIDUAL_TOL:e} * rho"
        )));
    }
    let mut sol = EquilibriumSolution {
        params: *params,
        c,
        kc: params.k * c,
        energy: 0.0,
        entropy: 0.0,
        free_energy: 0.0,
        classical,
        residual,
    };
    sol.energy = equilibrium_energy(&sol)?;
    sol.entropy = equilibrium_entropy(&sol);
    sol.free_energy = equilibrium_free_energy(&sol);
    Ok(sol)
}

/// `E_q = (n ρ̃ / 2) L_{n/2+1}(kC_k) / L_{n/2}(kC_k)`; exactly `E_c` at `k = 0`.
pub fn equilibrium_energy(sol: &EquilibriumSolution) -> Result<f64> {
    let p = &sol.params;
    if p.k == 0.0 {
        return Ok(sol.classical.energy);
    }
    let s = p.half_n();
    Ok(s * p.density * lfun(s + 1.0, sol.kc)? / lfun(s, sol.kc)?)
}

/// `S_q = (1 + 2/n) E_q - (1 + ln C_k) ρ̃`, or `E_c - ρ̃ ln C_0` at `k = 0`.
pub fn equilibrium_entropy(sol: &EquilibriumSolution) -> f64 {
    let p = &sol.params;
    if p.k == 0.0 {
        return sol.classical.entropy;
    }
    (1.0 + 2.0 / p.n as f64) * sol.energy - (1.0 + sol.c.ln()) * p.density
}

pub fn equilibrium_free_energy(sol: &EquilibriumSolution) -> f64 {
    sol.entropy - sol.energy
}

/// First-order coefficients of `X_q - X_c = k ΔX₁ + O(k²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticCoefficients {
    pub energy: f64,
    pub entropy: f64,
    pub free_energy: f64,
}

pub fn asymptotic_predictions(params: &ModelParams) -> AsymptoticCoefficients {
    let c0 = classical_reference(params).c0;
    let n = params.n as f64;
    let scale = params.density * c0 / 2f64.powf(n / 2.0);
    AsymptoticCoefficients {
        energy: -n * scale / 4.0,
        entropy: -(n - 2.0) * scale / 4.0,
        free_energy: scale / 2.0,
    }
}

/// Per-row inequality verdicts. `true` means the inequality holds (or is vacuous).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdicts {
    /// `-1 ≤ kC_k < 1`.
    pub in_window: bool,
    /// `E_{q,B} < E_c < E_{q,F}`.
    pub energy_order: bool,
    /// `S_{q,B} < S_c < S_{q,F}`; only meaningful for `n > 2`.
    pub entropy_order: bool,
    /// `F_{q,F} < F_c < F_{q,B}`.
    pub free_energy_order: bool,
    /// `C_k > C_0` (k<0), `C_k < 2C_0` (-1 < 2kC_0 < 0), `C_k < C_0` (0 < kC_0 < 1).
    pub constant_bounds: bool,
}

impl Verdicts {
    pub fn evaluate(sol: &EquilibriumSolution) -> Self {
        let k = sol.params.k;
        let cl = &sol.classical;
        let by_sign = |quantum: f64, classical: f64, boson_below: bool| -> bool {
            if k == 0.0 {
                true
            } else if (k > 0.0) == boson_below {
                quantum < classical
            } else {
                quantum > classical
            }
        };
        let k_c0 = k * cl.c0;
        let mut bounds = true;
        if k < 0.0 {
            bounds &= sol.c > cl.c0;
        }
        if -1.0 < 2.0 * k_c0 && 2.0 * k_c0 < 0.0 {
            bounds &= sol.c < 2.0 * cl.c0;
        }
        if 0.0 < k_c0 && k_c0 < 1.0 {
            bounds &= sol.c < cl.c0;
        }
        Self {
            in_window: sol.in_ordering_window(),
            energy_order: by_sign(sol.energy, cl.energy, true),
            entropy_order: by_sign(sol.entropy, cl.entropy, true),
            free_energy_order: by_sign(sol.free_energy, cl.free_energy, false),
            constant_bounds: bounds,
        }
    }

    /// Number of claimed inequalities that fail for this row: the energy
    /// ordering inside the window, the constant bounds always, and the
    /// entropy (`n > 2`) and free-energy orderings for `|k| ≤ SMALL_K`.
    pub fn violations(&self, params: &ModelParams) -> usize {
        let small = params.k.abs() <= SMALL_K;
        let mut count = 0;
        count += usize::from(self.in_window && !self.energy_order);
        count += usize::from(!self.constant_bounds);
        count += usize::from(small && params.n > 2 && !self.entropy_order);
        count += usize::from(small && !self.free_energy_order);
        count
    }
}

/// One row of a k-sweep. Failed solves keep their error message.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub k: f64,
    pub outcome: std::result::Result<(EquilibriumSolution, Verdicts), String>,
}

impl SweepRow {
    pub fn violations(&self) -> usize {
        match &self.outcome {
            Ok((sol, v)) => v.violations(&sol.params),
            Err(_) => 0,
        }
    }

    pub fn is_supercritical(&self) -> bool {
        matches!(&self.outcome, Err(msg) if msg.starts_with("supercritical"))
    }
}

/// Solves the equilibrium for every `k` in `k_grid`, keeping `n`, `V`, `ρ̃` from `base`.
pub fn sweep(base: &ModelParams, k_grid: &[f64]) -> Vec<SweepRow> {
    k_grid
        .iter()
        .map(|&k| SweepRow {
            k,
            outcome: solve_normalization(&base.with_k(k))
                .map(|sol| (sol, Verdicts::evaluate(&sol)))
                .map_err(|e| e.to_string()),
        })
        .collect()
}

/// The `k` at which the equilibrium has `kC_k = z`, for `z < 1`.
///
/// Inverts the normalization explicitly: `C = ρ̃ / ((2π)^{n/2} V L_{n/2}(z))`.
pub fn k_for_critical_fraction(base: &ModelParams, z: f64) -> Result<f64> {
    let c = base.density / (base.phase_volume() * lfun(base.half_n(), z)?);
    Ok(z / c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(k: f64, n: u32) -> ModelParams {
        ModelParams::new(k, n, 1.0, 1.0).unwrap()
    }

    #[test]
    fn classical_constants() {
        let c = classical_reference(&params(0.0, 1));
        assert_relative_eq!(c.c0, (2.0 * PI).powf(-0.5), max_relative = 1e-15);
        let c = classical_reference(&ModelParams::new(0.0, 3, 1.0, 2.0).unwrap());
        assert_eq!(c.energy, 3.0);
        let c = classical_reference(&params(0.0, 2));
        assert_relative_eq!(c.entropy, 1.0 + (2.0 * PI).ln(), max_relative = 1e-14);
        assert_relative_eq!(c.free_energy, c.entropy - c.energy);
    }

    #[test]
    fn classical_solution_is_exact() {
        let p = ModelParams::new(0.0, 3, 2.5, 0.7).unwrap();
        let sol = solve_normalization(&p).unwrap();
        assert_eq!(sol.c, sol.classical.c0);
        assert_eq!(sol.energy, 1.5 * 0.7);
        assert_eq!(sol.entropy, sol.classical.entropy);
    }

    #[test]
    fn invalid_params() {
        assert!(ModelParams::new(0.0, 0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(0.0, 1, 0.0, 1.0).is_err());
        assert!(ModelParams::new(0.0, 1, 1.0, -1.0).is_err());
        assert!(ModelParams::new(f64::NAN, 1, 1.0, 1.0).is_err());
    }

    #[test]
    fn supercritical_boson_rejected_at_threshold() {
        let base = params(0.0, 3);
        let k = (2.0 * PI).powf(1.5) * specfun::zeta(1.5);
        let err = solve_normalization(&base.with_k(k)).unwrap_err();
        assert!(matches!(err, EquilibriumError::Supercritical { .. }));
        assert!(err.to_string().contains("supercritical density"));
        assert!(err.to_string().contains("kC = 1"));
        // Just below threshold is solvable and close to the critical point.
        let sol = solve_normalization(&base.with_k(0.999 * k)).unwrap();
        assert!(sol.kc < 1.0 && sol.kc > 0.5);
    }

    #[test]
    fn one_dimensional_bosons_always_solvable() {
        for k in [1.0, 10.0, 1000.0] {
            let sol = solve_normalization(&params(k, 1)).unwrap();
            assert!(sol.kc < 1.0);
            assert!(sol.residual <= RESIDUAL_TOL);
        }
    }

    #[test]
    fn maxwellian_values() {
        let m = MaxwellianSpec::new(1.0, 0.0).unwrap();
        assert_eq!(maxwellian_value(&m, &[0.0]), 1.0);
        let m = MaxwellianSpec::new(1.0, -1.0).unwrap();
        assert_eq!(maxwellian_value(&m, &[0.0, 0.0]), 0.5);
        let m = MaxwellianSpec::new(0.3, 2.0).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..200 {
            let v = maxwellian_value(&m, &[0.1 * i as f64, 0.05 * i as f64]);
            assert!(v < prev && v >= 0.0 && 1.0 + 2.0 * v > 0.0);
            prev = v;
        }
        assert!(prev < 1e-50);
        assert!(MaxwellianSpec::new(1.0, 1.0).is_err());
        assert!(MaxwellianSpec::new(0.0, 0.0).is_err());
    }

    #[test]
    fn energy_ordering_sign_for_fermions() {
        let sol = solve_normalization(&params(-1.0, 1)).unwrap();
        assert!(sol.energy > 0.5);
        assert!(sol.c > sol.classical.c0);
    }

    #[test]
    fn free_energy_direction_small_k() {
        let p = params(0.0, 3);
        let f = solve_normalization(&p.with_k(-0.01)).unwrap();
        let b = solve_normalization(&p.with_k(0.01)).unwrap();
        assert!(f.free_energy < f.classical.free_energy);
        assert!(b.free_energy > b.classical.free_energy);
        assert!(b.entropy < b.classical.entropy);
    }

    #[test]
    fn asymptotic_coefficients() {
        let a = asymptotic_predictions(&params(0.0, 2));
        assert_eq!(a.entropy, 0.0);
        let a = asymptotic_predictions(&params(0.0, 3));
        let c0 = (2.0 * PI).powf(-1.5);
        assert_relative_eq!(a.free_energy, c0 / (2.0 * 2f64.powf(1.5)), max_relative = 1e-14);
    }

    #[test]
    fn critical_fraction_inverse() {
        let base = params(0.0, 3);
        for z in [-1.0, -0.4, 0.3, 0.95] {
            let k = k_for_critical_fraction(&base, z).unwrap();
            let sol = solve_normalization(&base.with_k(k)).unwrap();
            assert_relative_eq!(sol.kc, z, max_relative = 1e-10);
        }
    }

    #[test]
    fn sweep_classical_row() {
        let rows = sweep(&params(0.0, 2), &[0.0]);
        assert_eq!(rows.len(), 1);
        let (_, v) = rows[0].outcome.as_ref().unwrap();
        assert!(v.energy_order && v.entropy_order && v.free_energy_order && v.constant_bounds);
        assert_eq!(rows[0].violations(), 0);
    }

    #[test]
    fn sweep_flags_supercritical_rows() {
        let rows = sweep(&params(0.0, 3), &[0.0, 10.0, 1e4]);
        assert!(rows[0].outcome.is_ok() && rows[1].outcome.is_ok());
        assert!(rows[2].is_supercritical());
        assert_eq!(rows[2].violations(), 0);
    }
}
