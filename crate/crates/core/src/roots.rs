//! Scalar root finding for increasing functions on an interval.

use crate::error::{Error, Result};
use crate::surface::Interval;

const MAX_EXPANSIONS: usize = 1100;
const MAX_ITERATIONS: usize = 500;

/// A reference point inside `domain` to start a bracket search from.
pub fn reference_point(domain: &Interval) -> f64 {
    match (domain.lo.is_finite(), domain.hi.is_finite()) {
        (true, true) => 0.5 * (domain.lo + domain.hi),
        (true, false) => domain.lo + 1.0,
        (false, true) => domain.hi - 1.0,
        (false, false) => 0.0,
    }
}

fn eval<F>(f: &F, x: f64) -> Option<(f64, f64)>
where
    F: Fn(f64) -> Result<(f64, f64)>,
{
    match f(x) {
        Ok((g, dg)) if g.is_finite() => Some((g, dg)),
        _ => None,
    }
}

/// Walk from `start` toward one end of `domain` until `g` crosses `target`.
fn expand<F>(f: &F, target: f64, domain: &Interval, start: f64, upward: bool) -> Result<f64>
where
    F: Fn(f64) -> Result<(f64, f64)>,
{
    let (end, closed) = if upward {
        (domain.hi, domain.hi_closed)
    } else {
        (domain.lo, domain.lo_closed)
    };
    let crosses = |g: f64| if upward { g >= target } else { g <= target };
    if end.is_finite() && closed {
        if let Some((g, _)) = eval(f, end) {
            if !crosses(g) {
                return Err(Error::Root(format!(
                    "target {target} lies outside the range of the function on {domain}"
                )));
            }
        }
    }
    let sign = if upward { 1.0 } else { -1.0 };
    let mut best = None;
    for k in 1..=MAX_EXPANSIONS {
        let x = if end.is_finite() {
            end - (end - start) * 0.5f64.powi(k as i32)
        } else {
            start + sign * (2f64.powi(k as i32 - 1)) * start.abs().max(1.0)
        };
        if !x.is_finite() || x == best.unwrap_or(f64::NAN) {
            break;
        }
        best = Some(x);
        if let Some((g, _)) = eval(f, x) {
            if crosses(g) {
                return Ok(x);
            }
        }
    }
    if end.is_finite() && closed {
        return Ok(end);
    }
    Err(Error::Root(format!(
        "could not bracket target {target} on {domain} starting from {start}"
    )))
}

/// Solve `g(x) = target` for an increasing `g` on `domain`.
///
/// `f` returns `(g(x), g'(x))`. A bracket is grown from `start`, then
/// Newton steps are taken inside it, falling back to bisection whenever a
/// step leaves the bracket.
pub fn solve_increasing<F>(f: F, target: f64, domain: &Interval, start: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<(f64, f64)>,
{
    let start = if domain.contains(start) {
        start
    } else {
        reference_point(domain)
    };
    let (g0, _) = eval(&f, start).ok_or_else(|| {
        Error::Root(format!(
            "function is not finite at the starting point {start}"
        ))
    })?;
    if g0 == target {
        return Ok(start);
    }
    for (end, closed) in [(domain.lo, domain.lo_closed), (domain.hi, domain.hi_closed)] {
        if closed && end.is_finite() {
            if let Some((g, _)) = eval(&f, end) {
                if g == target {
                    return Ok(end);
                }
            }
        }
    }
    let (mut lo, mut hi) = if g0 < target {
        (start, expand(&f, target, domain, start, true)?)
    } else {
        (expand(&f, target, domain, start, false)?, start)
    };
    let tol = 1e-15 * target.abs().max(1.0);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..MAX_ITERATIONS {
        let (g, dg) = match eval(&f, x) {
            Some(v) => v,
            None => {
                return Err(Error::Root(format!("function is not finite at {x}")));
            }
        };
        let r = g - target;
        if r.abs() <= tol {
            return Ok(x);
        }
        if r < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            return Ok(x);
        }
        let newton = x - r / dg;
        let next = if dg > 0.0 && dg.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if next == x {
            return Ok(x);
        }
        x = next;
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITERATIONS,
        residual: f(x).map(|(g, _)| (g - target).abs()).unwrap_or(f64::NAN),
    })
}
