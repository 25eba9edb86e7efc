//! Bisection root finding for monotone objectives.

use crate::error::{Error, Result};

/// Default absolute tolerance on the argument.
pub const DEFAULT_BISECT_TOL: f64 = 1e-12;

/// Find a root of `f` on `[lo, hi]` by bisection.
///
/// Requires a sign change on the bracket and `tol > 0`; converges for any
/// continuous `f`, and to the unique root when `f` is monotone. Stops once the
/// bracket width is at most `tol` and returns the bracket midpoint.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!(
            "bisection tolerance must be positive, got {tol}"
        )));
    }
    if !(lo < hi) {
        return Err(Error::invalid(format!(
            "bisection bracket must satisfy lo < hi, got [{lo}, {hi}]"
        )));
    }
    let flo = f(lo);
    let fhi = f(hi);
    if !flo.is_finite() {
        return Err(Error::NonFinite { at: lo });
    }
    if !fhi.is_finite() {
        return Err(Error::NonFinite { at: hi });
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoSignChange { lo, hi });
    }

    let (mut lo, mut hi) = (lo, hi);
    let mut flo = flo;
    // Width halves every step; cap generously for very tight tolerances.
    for _ in 0..4096 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fmid = f(mid);
        if !fmid.is_finite() {
            return Err(Error::NonFinite { at: mid });
        }
        if fmid == 0.0 {
            return Ok(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
