//! Safeguarded scalar root finding.
//!
//! Every level solve in the crate (axis inversion, the implicit level
//! equation, radial contour points) reduces to a monotone scalar equation on a
//! known bracket. [`newton_bisect`] takes Newton steps while they stay inside
//! the bracket and make progress, and bisects otherwise, so it always
//! terminates on a sign-changing bracket.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions {
    pub x_tol_abs: f64,
    pub x_tol_rel: f64,
    /// Accept immediately once `|f(x)| <= f_tol`.
    pub f_tol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            x_tol_abs: 0.0,
            x_tol_rel: 4.0 * f64::EPSILON,
            f_tol: 0.0,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub iterations: usize,
}

/// Doubles `hi` until `f(hi)` has the sign `target_positive` asks for.
///
/// Returns the last value that failed the test (a valid lower end) together
/// with the first value that passed.
pub fn grow_bracket<F>(mut f: F, lo: f64, hi: f64, target_positive: bool) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let mut lo = lo;
    let mut hi = hi;
    for _ in 0..2100 {
        let fh = f(hi);
        if fh == 0.0 || (fh > 0.0) == target_positive {
            return Ok((lo, hi));
        }
        if !hi.is_finite() {
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    Err(Error::NoBracket)
}

/// Finds a root of `f` on `[lo, hi]`, where `f` returns `(value, derivative)`.
///
/// `f(lo)` and `f(hi)` must not share a strict sign. `start` seeds the first
/// Newton step and defaults to the bracket midpoint.
pub fn newton_bisect<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    start: Option<f64>,
    opts: &RootOptions,
) -> Result<Root>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let fa = f(a).0;
    if fa == 0.0 {
        return Ok(Root { x: a, iterations: 0 });
    }
    let fb = f(b).0;
    if fb == 0.0 {
        return Ok(Root { x: b, iterations: 0 });
    }
    if fa.is_nan() || fb.is_nan() || (fa > 0.0) == (fb > 0.0) {
        return Err(Error::NoBracket);
    }
    let increasing = fb > 0.0;

    let mut x = match start {
        Some(s) if s >= a && s <= b => s,
        _ => 0.5 * (a + b),
    };
    let mut prev_abs = f64::INFINITY;
    for iteration in 1..=opts.max_iter {
        let (fx, dfx) = f(x);
        if fx == 0.0 || fx.abs() <= opts.f_tol {
            return Ok(Root { x, iterations: iteration });
        }
        if fx.is_nan() {
            return Err(Error::NoBracket);
        }
        if (fx > 0.0) == increasing {
            b = x;
        } else {
            a = x;
        }

        let newton = x - fx / dfx;
        let stalled = fx.abs() > 0.5 * prev_abs;
        let next = if newton.is_finite() && newton > a && newton < b && !stalled {
            newton
        } else {
            0.5 * (a + b)
        };
        prev_abs = fx.abs();

        let tol = opts.x_tol_abs.max(opts.x_tol_rel * next.abs());
        if (next - x).abs() <= tol || b - a <= tol {
            return Ok(Root { x: next, iterations: iteration });
        }
        x = next;
    }
    Err(Error::MaxIterExceeded(opts.max_iter))
}

/// Golden-section maximisation of a unimodal function on `[lo, hi]`.
///
/// Returns `(argmax, max)`; the endpoints are included in the final
/// comparison so a maximum at the boundary is located exactly.
pub fn golden_max<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d)?;
        }
    }
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    for x in [lo, hi] {
        let fx = f(x)?;
        if fx > best.1 {
            best = (x, fx);
        }
    }
    Ok(best)
}
