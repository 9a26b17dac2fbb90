//! Adaptive Simpson quadrature.
//!
//! Used as the independent oracle for the closed-form elliptic integral and
//! for the ground-state energy integral of the transverse-field Ising chain.

use crate::error::{Error, Result};

/// Default refinement depth limit.
pub const DEFAULT_MAX_DEPTH: u32 = 60;

/// Integrates `f` over `[a, b]` with estimated absolute error ≤ `tol`.
///
/// Each panel is accepted once `|S(left) + S(right) − S(whole)| ≤ 15·tol_panel`;
/// the accepted value carries the Richardson correction `(S₂ − S₁)/15`.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64, max_depth: u32) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(tol > 0.0) {
        return Err(Error::domain("adaptive_simpson", format!("tol must be > 0, got {tol}")));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::domain("adaptive_simpson", "interval endpoints must be finite"));
    }
    if a == b {
        return Ok(0.0);
    }
    // Seed with a few uniform panels so that symmetric integrands cannot fool
    // the very first error estimate.
    let panels = 8;
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let hi = if p + 1 == panels { b } else { lo + h };
        let flo = f(lo);
        let fhi = f(hi);
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        let s = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        total += refine(&f, lo, hi, flo, fmid, fhi, s, tol / panels as f64, max_depth)?;
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn refine<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return Err(Error::no_convergence(
            "adaptive_simpson",
            format!("non-finite integrand on [{a}, {b}]"),
        ));
    }
    // Panels narrower than a few ulps cannot be split further.
    let tiny = (b - a).abs() <= 4.0 * f64::EPSILON * m.abs().max(1.0);
    if delta.abs() <= 15.0 * tol || tiny {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::no_convergence(
            "adaptive_simpson",
            format!("depth limit reached on [{a}, {b}], local error {:e}", delta.abs() / 15.0),
        ));
    }
    let l = refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok(l + r)
}
