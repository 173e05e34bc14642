//! Safeguarded root finding for increasing scalar functions.
//!
//! Illinois-modified regula falsi with a bisection fallback whenever the
//! bracket fails to halve over two steps. Every evaluation is also checked
//! against the bracket ends, so a function that is not increasing is caught
//! instead of silently converging to something meaningless.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError<E> {
    #[error("root not bracketed: f({lo}) = {f_lo}, f({hi}) = {f_hi}")]
    NotBracketed { lo: f64, f_lo: f64, hi: f64, f_hi: f64 },
    #[error("function is not increasing: f({x}) = {fx} lies outside [{f_lo}, {f_hi}]")]
    NotIncreasing { x: f64, fx: f64, f_lo: f64, f_hi: f64 },
    #[error("no convergence after {iterations} iterations (best x = {x}, f = {fx})")]
    MaxIterations { iterations: usize, x: f64, fx: f64 },
    #[error(transparent)]
    Eval(E),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Stop once `|f(x)| <= rel_tol * max(1, |x|)`.
    pub rel_tol: f64,
    pub max_iter: usize,
    /// Evaluation noise tolerated by the monotonicity check.
    pub noise: f64,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions { rel_tol: 1e-12, max_iter: 500, noise: 0.0 }
    }
}

/// Finds the root of an increasing `f` on `[lo, hi]`, given `f(lo) < 0 < f(hi)`
/// (values already evaluated are passed in to avoid recomputation).
pub fn solve_increasing<E, F>(
    mut f: F,
    (mut lo, mut f_lo): (f64, f64),
    (mut hi, mut f_hi): (f64, f64),
    opts: RootOptions,
) -> Result<Root, RootError<E>>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let tol = |x: f64| opts.rel_tol * x.abs().max(1.0);
    if f_lo.abs() <= tol(lo) {
        return Ok(Root { x: lo, fx: f_lo, iterations: 0 });
    }
    if f_hi.abs() <= tol(hi) {
        return Ok(Root { x: hi, fx: f_hi, iterations: 0 });
    }
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(RootError::NotBracketed { lo, f_lo, hi, f_hi });
    }

    // Illinois working copies of the endpoint values.
    let (mut w_lo, mut w_hi) = (f_lo, f_hi);
    let mut last_side = 0i8;
    let mut widths = [hi - lo, hi - lo];
    let mut bisect = false;

    for iteration in 1..=opts.max_iter {
        let mid = lo + 0.5 * (hi - lo);
        let mut x = if bisect { mid } else { (lo * w_hi - hi * w_lo) / (w_hi - w_lo) };
        if !(x > lo && x < hi) {
            x = mid;
        }
        if x <= lo || x >= hi {
            // bracket is down to adjacent floats
            let (x, fx) = if f_lo.abs() <= f_hi.abs() { (lo, f_lo) } else { (hi, f_hi) };
            return Ok(Root { x, fx, iterations: iteration });
        }
        let fx = f(x).map_err(RootError::Eval)?;
        if !(fx >= f_lo - opts.noise && fx <= f_hi + opts.noise) {
            return Err(RootError::NotIncreasing { x, fx, f_lo, f_hi });
        }
        if fx.abs() <= tol(x) {
            return Ok(Root { x, fx, iterations: iteration });
        }
        if fx < 0.0 {
            lo = x;
            f_lo = fx;
            w_lo = fx;
            if last_side == -1 {
                w_hi *= 0.5;
            }
            last_side = -1;
        } else {
            hi = x;
            f_hi = fx;
            w_hi = fx;
            if last_side == 1 {
                w_lo *= 0.5;
            }
            last_side = 1;
        }
        let width = hi - lo;
        bisect = width > 0.5 * widths[0];
        widths = [widths[1], width];
    }
    let (x, fx) = if f_lo.abs() <= f_hi.abs() { (lo, f_lo) } else { (hi, f_hi) };
    Err(RootError::MaxIterations { iterations: opts.max_iter, x, fx })
}
