//! Complete elliptic integrals in the parameter convention
//! `E(m) = ∫₀^{π/2} √(1 − m sin²θ) dθ`, valid for every `m ≤ 1`.
//!
//! The closed forms use Carlson's symmetric integrals `R_F` and `R_D`
//! evaluated by the duplication theorem:
//!
//! ```text
//! K(m) = R_F(0, 1 − m, 1)
//! E(m) = R_F(0, 1 − m, 1) − (m/3)·R_D(0, 1 − m, 1)
//! ```
//!
//! No modulus transformation is needed for negative `m`, so arbitrarily
//! large negative parameters are handled directly.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_simpson, DEFAULT_MAX_DEPTH};

const RF_ERRTOL: f64 = 0.0025;
const RD_ERRTOL: f64 = 0.0015;
const MAX_DUPLICATIONS: usize = 200;

/// Complete elliptic integral of the second kind, `E(m)` for `m ≤ 1`.
pub fn ell_e(m: f64) -> Result<f64> {
    check_parameter("ell_e", m)?;
    if m == 1.0 {
        return Ok(1.0);
    }
    if m == 0.0 {
        return Ok(FRAC_PI_2);
    }
    let y = 1.0 - m;
    Ok(carlson_rf(0.0, y, 1.0) - m / 3.0 * carlson_rd(0.0, y, 1.0))
}

/// Complete elliptic integral of the first kind, `K(m)` for `m < 1`.
pub fn ell_k(m: f64) -> Result<f64> {
    check_parameter("ell_k", m)?;
    if m == 1.0 {
        return Err(Error::singular("ell_k", "K(m) diverges at m = 1"));
    }
    Ok(carlson_rf(0.0, 1.0 - m, 1.0))
}

/// `E(m)` by adaptive Simpson quadrature of the defining integral, with
/// absolute error ≤ `tol`. Independent of the Carlson route.
pub fn ell_e_quadrature(m: f64, tol: f64) -> Result<f64> {
    check_parameter("ell_e_quadrature", m)?;
    adaptive_simpson(
        |t: f64| {
            let s = t.sin();
            (1.0 - m * s * s).max(0.0).sqrt()
        },
        0.0,
        FRAC_PI_2,
        tol,
        DEFAULT_MAX_DEPTH,
    )
}

fn check_parameter(op: &'static str, m: f64) -> Result<()> {
    if m.is_nan() || m > 1.0 {
        return Err(Error::domain(op, format!("parameter m = {m} must satisfy m ≤ 1")));
    }
    if m == f64::NEG_INFINITY {
        return Err(Error::domain(op, "parameter m must be finite"));
    }
    Ok(())
}

/// Carlson's `R_F(x, y, z)`; at most one argument may be zero.
pub(crate) fn carlson_rf(x: f64, y: f64, z: f64) -> f64 {
    const C1: f64 = 1.0 / 24.0;
    const C2: f64 = 0.1;
    const C3: f64 = 3.0 / 44.0;
    const C4: f64 = 1.0 / 14.0;
    let (mut xt, mut yt, mut zt) = (x, y, z);
    let mut ave;
    let (mut dx, mut dy, mut dz);
    let mut iterations = 0;
    loop {
        let (sx, sy, sz) = (xt.sqrt(), yt.sqrt(), zt.sqrt());
        let lambda = sx * (sy + sz) + sy * sz;
        xt = 0.25 * (xt + lambda);
        yt = 0.25 * (yt + lambda);
        zt = 0.25 * (zt + lambda);
        ave = (xt + yt + zt) / 3.0;
        dx = (ave - xt) / ave;
        dy = (ave - yt) / ave;
        dz = (ave - zt) / ave;
        iterations += 1;
        if dx.abs().max(dy.abs()).max(dz.abs()) <= RF_ERRTOL || iterations >= MAX_DUPLICATIONS {
            break;
        }
    }
    let e2 = dx * dy - dz * dz;
    let e3 = dx * dy * dz;
    (1.0 + (C1 * e2 - C2 - C3 * e3) * e2 + C4 * e3) / ave.sqrt()
}

/// Carlson's `R_D(x, y, z)`; `x`, `y` non-negative with at most one zero, `z > 0`.
pub(crate) fn carlson_rd(x: f64, y: f64, z: f64) -> f64 {
    const C1: f64 = 3.0 / 14.0;
    const C2: f64 = 1.0 / 6.0;
    const C3: f64 = 9.0 / 22.0;
    const C4: f64 = 3.0 / 26.0;
    const C5: f64 = 0.25 * C3;
    const C6: f64 = 1.5 * C4;
    let (mut xt, mut yt, mut zt) = (x, y, z);
    let mut sum = 0.0;
    let mut fac = 1.0;
    let mut ave;
    let (mut dx, mut dy, mut dz);
    let mut iterations = 0;
    loop {
        let (sx, sy, sz) = (xt.sqrt(), yt.sqrt(), zt.sqrt());
        let lambda = sx * (sy + sz) + sy * sz;
        sum += fac / (sz * (zt + lambda));
        fac *= 0.25;
        xt = 0.25 * (xt + lambda);
        yt = 0.25 * (yt + lambda);
        zt = 0.25 * (zt + lambda);
        ave = 0.2 * (xt + yt + 3.0 * zt);
        dx = (ave - xt) / ave;
        dy = (ave - yt) / ave;
        dz = (ave - zt) / ave;
        iterations += 1;
        if dx.abs().max(dy.abs()).max(dz.abs()) <= RD_ERRTOL || iterations >= MAX_DUPLICATIONS {
            break;
        }
    }
    let ea = dx * dy;
    let eb = dz * dz;
    let ec = ea - eb;
    let ed = ea - 6.0 * eb;
    let ee = ed + ec + ec;
    3.0 * sum
        + fac * (1.0 + ed * (-C1 + C5 * ed - C6 * dz * ee) + dz * (C2 * ee + dz * (-C3 * ec + dz * C4 * ea)))
            / (ave * ave.sqrt())
}
