//! Bracketed scalar root finding for monotone maps.

/// Stopping rules for [`find_root`].
#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Stop once `|f(x)| <= f_tol`.
    pub f_tol: f64,
    /// Stop once the bracket is narrower than `x_rel_tol * |x|`.
    pub x_rel_tol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            f_tol: 0.0,
            x_rel_tol: 4.0 * f64::EPSILON,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RootError<E> {
    /// `f(lo)` and `f(hi)` do not have opposite signs.
    NotBracketed { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    Function(E),
}

/// Hybrid Illinois/bisection on `[lo, hi]`.
///
/// Secant steps (with the Illinois down-weighting of a stale endpoint) are
/// taken while they shrink the bracket by at least half every two
/// iterations; otherwise the step is a plain bisection. Convergence is
/// therefore never slower than bisection.
pub fn find_root<E, F>(mut f: F, lo: f64, hi: f64, opts: RootOptions) -> Result<Root, RootError<E>>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut fa = f(a).map_err(RootError::Function)?;
    if fa == 0.0 {
        return Ok(Root { x: a, fx: fa, iterations: 0 });
    }
    let mut fb = f(b).map_err(RootError::Function)?;
    if fb == 0.0 {
        return Ok(Root { x: b, fx: fb, iterations: 0 });
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NotBracketed { lo: a, hi: b, f_lo: fa, f_hi: fb });
    }

    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    let mut width_two_ago = b - a;
    // Which endpoint was retained last step: -1 = a, +1 = b.
    let mut last_kept = 0i8;

    for iter in 1..=opts.max_iter {
        let width = b - a;
        let bisect = iter % 2 == 0 && width > 0.5 * width_two_ago;
        if iter % 2 == 0 {
            width_two_ago = width;
        }
        let mut x = if bisect {
            0.5 * (a + b)
        } else {
            (a * fb - b * fa) / (fb - fa)
        };
        if !(x > a && x < b) {
            x = 0.5 * (a + b);
        }
        if x <= a || x >= b {
            // Bracket exhausted in floating point.
            break;
        }
        let fx = f(x).map_err(RootError::Function)?;
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx == 0.0 || fx.abs() <= opts.f_tol {
            return Ok(Root { x, fx, iterations: iter });
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
            if last_kept == 1 {
                fb *= 0.5;
            }
            last_kept = 1;
        } else {
            b = x;
            fb = fx;
            if last_kept == -1 {
                fa *= 0.5;
            }
            last_kept = -1;
        }
        if b - a <= opts.x_rel_tol * a.abs().max(b.abs()) {
            return Ok(Root { x: best.0, fx: best.1, iterations: iter });
        }
    }
    Ok(Root { x: best.0, fx: best.1, iterations: opts.max_iter })
}
