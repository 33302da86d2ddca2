//! Bracketed scalar root finding: bisection safeguarding secant steps.

use crate::error::{Error, Result};

/// Tolerance used for intermediate states.
pub const ROOT_TOL: f64 = 1e-11;

/// Root of `f` in `[lo, hi]`; requires a sign change.
pub fn bracketed<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return Err(Error::NoIntersection(format!("no sign change on [{lo}, {hi}]: f = ({flo}, {fhi})")));
    }
    for _ in 0..400 {
        let width = hi - lo;
        if width.abs() <= tol * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        let mut x = hi - fhi * width / (fhi - flo);
        let mid = 0.5 * (lo + hi);
        // keep secant steps well inside the bracket, otherwise bisect
        let margin = 0.05 * width.abs();
        if !x.is_finite() || x <= lo.min(hi) + margin || x >= lo.max(hi) - margin {
            x = mid;
        }
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if !fx.is_finite() {
            // fall back to the midpoint when the secant lands on a singular spot
            let fm = f(mid);
            if !fm.is_finite() {
                return Err(Error::NoIntersection(format!("non-finite residual near {mid}")));
            }
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
                fhi = fm;
            }
            continue;
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
        // force bisection when one end stalls
        let fm = f(0.5 * (lo + hi));
        if fm.is_finite() && fm != 0.0 {
            let mid = 0.5 * (lo + hi);
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
                fhi = fm;
            }
        }
    }
    Ok(if flo.abs() < fhi.abs() { lo } else { hi })
}

/// Scans `n` log- or linearly spaced points of `[lo, hi]` and returns every bracketed root.
pub fn all_roots<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, n: usize, log: bool, tol: f64) -> Vec<f64> {
    let pt = |i: usize| -> f64 {
        let t = i as f64 / n as f64;
        if log {
            (lo.ln() + t * (hi.ln() - lo.ln())).exp()
        } else {
            lo + t * (hi - lo)
        }
    };
    let mut out = Vec::new();
    let mut x0 = pt(0);
    let mut f0 = f(x0);
    for i in 1..=n {
        let x1 = pt(i);
        let f1 = f(x1);
        if f0.is_finite() && f1.is_finite() {
            if f0 == 0.0 {
                out.push(x0);
            } else if f0.signum() != f1.signum() && f1 != 0.0 {
                if let Ok(r) = bracketed(&mut f, x0, x1, tol) {
                    out.push(r);
                }
            }
        }
        x0 = x1;
        f0 = f1;
    }
    if f0 == 0.0 {
        out.push(x0);
    }
    out
}
