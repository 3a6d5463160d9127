//! Special functions used by the equilibrium formulas.
//!
//! The central object is the L-function
//!
//! ```text
//! L_s(z) = 2^{1-s}/Γ(s) ∫₀^∞ e^{-r²/2} r^{2s-1} / (1 - z e^{-r²/2}) dr
//!        = Σ_{m≥1} z^{m-1} / m^s            (|z| ≤ 1)
//! ```
//!
//! which is the density (s = n/2) and energy (s = n/2 + 1) kernel of a
//! Bose–Einstein / Fermi–Dirac type Maxwellian in n velocity dimensions.
//! It is finite and strictly increasing on z < 1, and L_s(1) = ζ(s) for s > 1.

mod quad;

pub use quad::{integrate, Integral};

use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecFunError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("L_{s}({z}) diverges (requires z < 1, or z = 1 with s > 1)")]
    Divergent { s: f64, z: f64 },
    #[error("the power series for L_s(z) is invalid for |z| > 1 (z = {z})")]
    SeriesInvalid { z: f64 },
    #[error("power series for L_{s}({z}) did not converge within {terms} terms")]
    SeriesNotConverged { s: f64, z: f64, terms: usize },
    #[error("quadrature for L_{s}({z}) missed tolerance (error estimate {error:e})")]
    QuadratureFailed { s: f64, z: f64, error: f64 },
}

pub type Result<T> = std::result::Result<T, SpecFunError>;

/// Gamma function.
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Surface area of the unit (n-1)-sphere, `2 π^{n/2} / Γ(n/2)`.
pub fn sphere_surface_area(n: u32) -> Result<f64> {
    if n < 1 {
        return Err(SpecFunError::Domain(format!(
            "sphere dimension must be at least 1, got {n}"
        )));
    }
    let half = n as f64 / 2.0;
    Ok(2.0 * PI.powf(half) / gamma(half))
}

/// `∫₀^∞ e^{-a r²} r^{n-1} dr = a^{-n/2} Γ(n/2) / 2`.
pub fn gaussian_radial_moment(a: f64, n: u32) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(SpecFunError::Domain(format!(
            "Gaussian rate must be positive and finite, got {a}"
        )));
    }
    if n < 1 {
        return Err(SpecFunError::Domain(format!(
            "radial power index must be at least 1, got {n}"
        )));
    }
    let half = n as f64 / 2.0;
    Ok(0.5 * a.powf(-half) * gamma(half))
}

/// Order `s > 0` of an L-function.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PolylogOrder(f64);

impl PolylogOrder {
    pub fn new(s: f64) -> Result<Self> {
        if s > 0.0 && s.is_finite() {
            Ok(Self(s))
        } else {
            Err(SpecFunError::Domain(format!(
                "L-function order must be positive and finite, got {s}"
            )))
        }
    }

    /// Order `n/2` belonging to velocity dimension `n`.
    pub fn half_dimension(n: u32) -> Result<Self> {
        Self::new(n as f64 / 2.0)
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Argument of an L-function: `z < 1`, or `z = 1` when the order exceeds one.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PolylogArgument(f64);

impl PolylogArgument {
    pub fn new(z: f64, order: PolylogOrder) -> Result<Self> {
        if z.is_nan() || z == f64::INFINITY {
            return Err(SpecFunError::Domain(format!("invalid L-function argument {z}")));
        }
        if z > 1.0 || (z == 1.0 && order.0 <= 1.0) {
            return Err(SpecFunError::Divergent { s: order.0, z });
        }
        Ok(Self(z))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Evaluation route for [`polylog`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PolylogMethod {
    /// Series for |z| ≤ 0.9, quadrature otherwise.
    #[default]
    Auto,
    Series,
    Quadrature,
}

/// Crossover between the series and the integral representation in `Auto` mode.
pub const AUTO_SERIES_RADIUS: f64 = 0.9;

const SERIES_REL_TOL: f64 = 1e-15;
const SERIES_MAX_TERMS: usize = 1_000_000;
const QUAD_REL_TOL: f64 = 1e-13;
const QUAD_MAX_INTERVALS: usize = 4000;
// Integrand cut-off: e^{-R²/2} r^{2s-1} below this is dropped.
const QUAD_TAIL: f64 = 1e-18;

/// Evaluates `L_s(z)`.
///
/// `z = 1` (only admissible for `s > 1`) is always evaluated as `ζ(s)`,
/// whichever method is requested.
pub fn polylog(s: f64, z: f64, method: PolylogMethod) -> Result<f64> {
    let order = PolylogOrder::new(s)?;
    let arg = PolylogArgument::new(z, order)?;
    polylog_checked(order, arg, method)
}

/// [`polylog`] with the `Auto` method.
pub fn lfun(s: f64, z: f64) -> Result<f64> {
    polylog(s, z, PolylogMethod::Auto)
}

pub fn polylog_checked(s: PolylogOrder, z: PolylogArgument, method: PolylogMethod) -> Result<f64> {
    let (s, z) = (s.0, z.0);
    if z == 1.0 {
        return Ok(zeta(s));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    match method {
        PolylogMethod::Series => series(s, z),
        PolylogMethod::Quadrature => quadrature(s, z),
        PolylogMethod::Auto => {
            if z.abs() <= AUTO_SERIES_RADIUS {
                series(s, z)
            } else {
                quadrature(s, z)
            }
        }
    }
}

/// `Σ_{m=1}^{terms} z^{m-1}/m^s`. Used for bracketing checks on alternating series.
pub fn series_partial_sum(s: f64, z: f64, terms: usize) -> f64 {
    let mut sum = 0.0;
    let mut power = 1.0;
    for m in 1..=terms {
        sum += power / (m as f64).powf(s);
        power *= z;
    }
    sum
}

fn series(s: f64, z: f64) -> Result<f64> {
    if z.abs() > 1.0 {
        return Err(SpecFunError::SeriesInvalid { z });
    }
    if z == -1.0 {
        return Ok(alternating_zeta(s));
    }
    let mut sum: f64 = 1.0;
    let mut power = 1.0;
    for m in 2..=SERIES_MAX_TERMS {
        power *= z;
        let term = power / (m as f64).powf(s);
        if term.abs() < SERIES_REL_TOL * sum.abs() {
            return Ok(sum);
        }
        sum += term;
    }
    Err(SpecFunError::SeriesNotConverged {
        s,
        z,
        terms: SERIES_MAX_TERMS,
    })
}

/// `Σ_{m≥1} (-1)^{m-1}/m^s` by the Cohen–Rodriguez Villegas–Zagier
/// acceleration of the alternating series (error ≈ 5.8^{-terms}).
fn alternating_zeta(s: f64) -> f64 {
    const TERMS: usize = 32;
    let n = TERMS as f64;
    let mut d = (3.0 + 8f64.sqrt()).powf(n);
    d = 0.5 * (d + 1.0 / d);
    let mut b = -1.0;
    let mut c = -d;
    let mut sum = 0.0;
    for k in 0..TERMS {
        let kf = k as f64;
        c = b - c;
        sum += c / (kf + 1.0).powf(s);
        b *= (kf + n) * (kf - n) / ((kf + 0.5) * (kf + 1.0));
    }
    sum / d
}

/// Riemann zeta for `s > 1`: direct sum of the first terms plus an
/// Euler–Maclaurin tail.
pub fn zeta(s: f64) -> f64 {
    // B_{2j} / (2j)!
    const BERNOULLI_OVER_FACT: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30_240.0,
        -1.0 / 1_209_600.0,
        1.0 / 47_900_160.0,
        -691.0 / 1_307_674_368_000.0,
        1.0 / 74_724_249_600.0,
        -3617.0 / 10_670_622_842_880_000.0,
    ];
    const N: usize = 32;
    let n = N as f64;
    let mut sum: f64 = (1..N).map(|m| (m as f64).powf(-s)).sum();
    sum += n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    // Rising factorial s (s+1) ... (s+2j-2) times N^{-s-2j+1}.
    let mut rising = s;
    let mut npow = n.powf(-s - 1.0);
    for (j, coeff) in BERNOULLI_OVER_FACT.iter().enumerate() {
        sum += coeff * rising * npow;
        let a = s + (2 * j + 1) as f64;
        rising *= a * (a + 1.0);
        npow /= n * n;
    }
    sum
}

fn quadrature_cutoff(s: f64) -> f64 {
    let target = QUAD_TAIL.ln();
    let mut r: f64 = (-2.0 * target).sqrt();
    while (2.0 * s - 1.0) * r.ln() - 0.5 * r * r > target {
        r += 0.5;
    }
    r
}

fn quadrature(s: f64, z: f64) -> Result<f64> {
    let r_max = quadrature_cutoff(s);
    // 1 - z e^{-x} written to keep full precision as z → 1⁻.
    let denom = move |x: f64| (1.0 - z) - z * (-x).exp_m1();
    let integral = if s < 1.0 {
        // r = u²: removes the r^{2s-1} endpoint singularity.
        let kernel = move |u: f64| {
            let r = u * u;
            let x = 0.5 * r * r;
            2.0 * u.powf(4.0 * s - 1.0) * (-x).exp() / denom(x)
        };
        integrate(kernel, 0.0, r_max.sqrt(), 0.0, QUAD_REL_TOL, QUAD_MAX_INTERVALS)
    } else {
        let kernel = move |r: f64| {
            let x = 0.5 * r * r;
            r.powf(2.0 * s - 1.0) * (-x).exp() / denom(x)
        };
        integrate(kernel, 0.0, r_max, 0.0, QUAD_REL_TOL, QUAD_MAX_INTERVALS)
    };
    if !(integral.abs_error <= 1e-10 * integral.value.abs()) {
        return Err(SpecFunError::QuadratureFailed {
            s,
            z,
            error: integral.abs_error,
        });
    }
    Ok(2f64.powf(1.0 - s) / gamma(s) * integral.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(sphere_surface_area(1).unwrap(), 2.0, max_relative = 1e-14);
        assert_relative_eq!(sphere_surface_area(2).unwrap(), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_surface_area(3).unwrap(), 4.0 * PI, max_relative = 1e-14);
        assert!(matches!(sphere_surface_area(0), Err(SpecFunError::Domain(_))));
    }

    #[test]
    fn radial_moments() {
        let half_gauss = (PI / 2.0).sqrt();
        assert_relative_eq!(gaussian_radial_moment(0.5, 1).unwrap(), half_gauss, max_relative = 1e-14);
        assert_relative_eq!(gaussian_radial_moment(1.0, 2).unwrap(), 0.5, max_relative = 1e-14);
        assert!(gaussian_radial_moment(0.0, 1).is_err());
        assert!(gaussian_radial_moment(-1.0, 3).is_err());
    }

    #[test]
    fn radial_moment_matches_quadrature() {
        // Independent route: integrate the moment directly.
        let q = integrate(|r: f64| (-0.5 * r * r).exp() * r * r, 0.0, 40.0, 0.0, 1e-14, 200);
        assert_relative_eq!(gaussian_radial_moment(0.5, 3).unwrap(), q.value, max_relative = 1e-12);
        assert_relative_eq!(q.value, (PI / 2.0).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn value_at_zero_is_one() {
        for s in [0.5, 1.0, 1.5, 2.0, 7.3] {
            for m in [PolylogMethod::Auto, PolylogMethod::Series, PolylogMethod::Quadrature] {
                assert_eq!(polylog(s, 0.0, m).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn quadrature_branch_is_accurate_at_zero_argument() {
        // Bypass the z = 0 shortcut.
        for s in [0.5, 1.0, 1.5, 3.0] {
            let v = quadrature(s, 1e-300).unwrap();
            assert_relative_eq!(v, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn divergence_and_domain_errors() {
        assert!(matches!(polylog(0.5, 1.0, PolylogMethod::Auto), Err(SpecFunError::Divergent { .. })));
        assert!(matches!(polylog(1.0, 1.0, PolylogMethod::Auto), Err(SpecFunError::Divergent { .. })));
        assert!(matches!(polylog(1.5, 1.0001, PolylogMethod::Auto), Err(SpecFunError::Divergent { .. })));
        assert!(matches!(polylog(0.0, 0.5, PolylogMethod::Auto), Err(SpecFunError::Domain(_))));
        assert!(matches!(polylog(1.5, f64::NAN, PolylogMethod::Auto), Err(SpecFunError::Domain(_))));
        assert!(matches!(polylog(0.5, -3.0, PolylogMethod::Series), Err(SpecFunError::SeriesInvalid { .. })));
    }

    #[test]
    fn zeta_values() {
        assert_relative_eq!(zeta(2.0), PI * PI / 6.0, max_relative = 1e-15);
        assert_relative_eq!(zeta(4.0), PI.powi(4) / 90.0, max_relative = 1e-15);
        assert_relative_eq!(zeta(1.5), 2.612_375_348_685_488, max_relative = 1e-14);
        assert_relative_eq!(zeta(3.0), 1.202_056_903_159_594_3, max_relative = 1e-14);
    }

    #[test]
    fn alternating_closed_forms() {
        // L_1(-1) = ln 2, L_2(-1) = π²/12.
        assert_relative_eq!(alternating_zeta(1.0), 2f64.ln(), max_relative = 1e-15);
        assert_relative_eq!(alternating_zeta(2.0), PI * PI / 12.0, max_relative = 1e-15);
        let q = quadrature(1.5, -1.0).unwrap();
        assert_relative_eq!(alternating_zeta(1.5), q, max_relative = 1e-12);
    }

    #[test]
    fn order_one_closed_form() {
        // L_1(z) = -ln(1 - z)/z, including very close to the critical point.
        for z in [-50.0, -1.0, -0.3, 0.4, 0.95, 0.999_999, 1.0 - 1e-12] {
            let exact = -(-z as f64).ln_1p() / z;
            let v = polylog(1.0, z, PolylogMethod::Auto).unwrap();
            assert_relative_eq!(v, exact, max_relative = 1e-11);
        }
    }

    #[test]
    fn half_order_near_critical_point() {
        // L_{1/2}(1 - ε) = sqrt(π/ε) + ζ(1/2) + O(sqrt(ε)).
        let z = 1.0 - 1e-10;
        let eps = 1.0 - z;
        let v = polylog(0.5, z, PolylogMethod::Auto).unwrap();
        let expansion = (PI / eps).sqrt() - 1.460_354_508_809_586_8;
        assert_relative_eq!(v, expansion, max_relative = 1e-9);
    }

    #[test]
    fn large_negative_argument_is_finite_and_ordered() {
        let a = polylog(0.5, -1e6, PolylogMethod::Auto).unwrap();
        let b = polylog(0.5, -1e3, PolylogMethod::Auto).unwrap();
        assert!(a > 0.0 && a < b);
    }
}
