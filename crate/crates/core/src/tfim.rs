//! Transverse-field Ising chain, `H = −B Σ σˣᵢ − J Σ σᶻᵢ σᶻᵢ₊₁`.
//!
//! Thermodynamic-limit quantities use `λ = J/B`, the dispersion
//! `Λ_k = 2√(1 + λ² − 2λ cos k)` and the ground-state energy per site
//!
//! ```text
//! E₀ = −(B/π) ∫₀^π Λ_k dk = −(4B/π)·|λ − 1|·E(−4λ/(λ − 1)²)
//! ```
//!
//! which is twice the per-site energy of the Pauli-matrix Hamiltonian above:
//! the finite-chain solution and exact diagonalization satisfy
//! `e0_total / n → e0_per_site / 2`.
//!
//! Since `E₀(B, J) = B·f(λ)`, every second derivative reduces to `f″`:
//! `∂²E₀/∂J∂B = −(λ/B)·f″(λ)` and `∂²E₀/∂B² = (λ²/B)·f″(λ)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::elliptic::{carlson_rd, carlson_rf, ell_e};
use crate::error::{Error, Result};
use crate::gamma::{mixed_partial, second_partial, TwoParamModel};
use crate::linalg::tridiagonal_eigenvalues;
use crate::quadrature::{adaptive_simpson, DEFAULT_MAX_DEPTH};

/// Below this distance from λ = 1 the closed form returns its limit −8B/π.
pub const QCP_VALUE_WINDOW: f64 = 1e-10;
/// Derivatives are refused within this distance from λ = 1.
pub const QCP_DERIVATIVE_WINDOW: f64 = 1e-6;

/// Field `B` and coupling `J` of the chain; `λ = J/B` is always derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TfimParams {
    b: f64,
    j: f64,
}

impl TfimParams {
    /// Requires finite `B ≥ 0` and `J ≥ 0`. The analytic routines further
    /// require `B > 0`; `B = 0` (the classical Ising limit) is only
    /// meaningful for the finite-chain solvers.
    pub fn new(b: f64, j: f64) -> Result<Self> {
        if !(b.is_finite() && j.is_finite()) || b < 0.0 || j < 0.0 {
            return Err(Error::domain(
                "TfimParams::new",
                format!("need finite B ≥ 0 and J ≥ 0, got B = {b}, J = {j}"),
            ));
        }
        Ok(TfimParams { b, j })
    }

    /// `B = 1`, `J = λ`.
    pub fn from_lambda(lambda: f64) -> Result<Self> {
        Self::new(1.0, lambda)
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn j(&self) -> f64 {
        self.j
    }

    pub fn lambda(&self) -> f64 {
        self.j / self.b
    }

    fn require_field(&self, op: &'static str) -> Result<f64> {
        if self.b > 0.0 {
            Ok(self.lambda())
        } else {
            Err(Error::domain(op, "the analytic solution needs B > 0"))
        }
    }
}

/// Quasi-particle dispersion `Λ_k = 2√(1 + λ² − 2λ cos k)` for `k ∈ [0, π]`.
pub fn dispersion(k: f64, lambda: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&k) {
        return Err(Error::domain("dispersion", format!("k = {k} outside [0, π]")));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::domain("dispersion", format!("λ = {lambda} must be ≥ 0")));
    }
    // (1 − λ)² + 4λ sin²(k/2) avoids cancellation at the gap closing.
    let s = (0.5 * k).sin();
    Ok(2.0 * ((1.0 - lambda).powi(2) + 4.0 * lambda * s * s).sqrt())
}

/// Ground-state energy per site from the elliptic closed form.
pub fn e0_per_site(p: &TfimParams) -> Result<f64> {
    let lambda = p.require_field("e0_per_site")?;
    Ok(p.b * reduced_energy(lambda)?)
}

/// `f(λ) = E₀(B = 1, J = λ)`.
fn reduced_energy(lambda: f64) -> Result<f64> {
    let d = (lambda - 1.0).abs();
    if d < QCP_VALUE_WINDOW {
        return Ok(-8.0 / PI);
    }
    let m = -4.0 * lambda / (d * d);
    Ok(-4.0 / PI * d * ell_e(m)?)
}

/// Ground-state energy per site by adaptive quadrature of the dispersion.
pub fn e0_quadrature(p: &TfimParams, tol: f64) -> Result<f64> {
    let lambda = p.require_field("e0_quadrature")?;
    // the integral is scaled by B/π afterwards
    let scaled_tol = tol * PI / p.b;
    let integral = adaptive_simpson(
        |k| dispersion(k.clamp(0.0, PI), lambda).unwrap_or(f64::NAN),
        0.0,
        PI,
        scaled_tol,
        DEFAULT_MAX_DEPTH,
    )?;
    Ok(-p.b / PI * integral)
}

/// `f″(λ)`, the curvature of the reduced ground-state energy.
///
/// With `n = 4λ/(1 + λ)²`,
/// `f″(λ) = 2[(1 + λ)² E(n) − (1 + λ²) K(n)] / (π λ² (1 + λ))`.
/// Duality `f(λ) = λ f(1/λ)` maps λ > 1 onto λ < 1 via
/// `f″(λ) = f″(1/λ)/λ³`; small λ uses the hypergeometric series.
pub fn curvature(lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::domain("curvature", format!("λ = {lambda} must be ≥ 0")));
    }
    // A small slack lets 1 ± 1e-6 itself pass despite representation error.
    if (lambda - 1.0).abs() < QCP_DERIVATIVE_WINDOW * (1.0 - 1e-6) {
        return Err(Error::singular(
            "curvature",
            format!("|λ − 1| = {:e} inside the critical window", (lambda - 1.0).abs()),
        ));
    }
    if lambda > 1.0 {
        let inv = 1.0 / lambda;
        return Ok(curvature_below_one(inv) * inv * inv * inv);
    }
    Ok(curvature_below_one(lambda))
}

fn curvature_below_one(lambda: f64) -> f64 {
    if lambda < 0.1 {
        return curvature_series(lambda);
    }
    let onep = 1.0 + lambda;
    // 1 − n = ((1 − λ)/(1 + λ))², formed without cancellation
    let kc = (1.0 - lambda) / onep;
    let y = kc * kc;
    let n = 4.0 * lambda / (onep * onep);
    let k = carlson_rf(0.0, y, 1.0);
    let e = k - n / 3.0 * carlson_rd(0.0, y, 1.0);
    2.0 * (onep * onep * e - (1.0 + lambda * lambda) * k) / (PI * lambda * lambda * onep)
}

/// `f(λ) = −2 Σ c_j λ^{2j}` with `c_j = binom(1/2, j)²`, differentiated twice.
fn curvature_series(lambda: f64) -> f64 {
    let x2 = lambda * lambda;
    let mut binom = 1.0_f64;
    let mut power = 1.0; // λ^{2j−2}
    let mut sum = 0.0;
    for j in 1..40 {
        binom *= (0.5 - (j as f64 - 1.0)) / j as f64;
        let jj = 2.0 * j as f64;
        let term = binom * binom * jj * (jj - 1.0) * power;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        power *= x2;
    }
    -2.0 * sum
}

/// Which route [`derivatives`] takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Closed-form `f″` through the scaling identities.
    Analytic,
    /// Generic stencils applied to [`e0_per_site`].
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TfimDerivatives {
    /// `∂²E₀/∂J∂B`
    pub cross: f64,
    /// `∂²E₀/∂B²`
    pub second: f64,
    /// Error estimates (zero for the analytic scheme beyond round-off).
    pub err_cross: f64,
    pub err_second: f64,
}

/// Cross and second derivatives of the per-site ground-state energy.
pub fn derivatives(p: &TfimParams, scheme: Scheme) -> Result<TfimDerivatives> {
    let lambda = p.require_field("derivatives")?;
    if (lambda - 1.0).abs() < QCP_DERIVATIVE_WINDOW * (1.0 - 1e-6) {
        return Err(Error::singular(
            "derivatives",
            format!("λ = {lambda} is within {QCP_DERIVATIVE_WINDOW:e} of the critical point"),
        ));
    }
    match scheme {
        Scheme::Analytic => {
            let fpp = curvature(lambda)?;
            let cross = -lambda / p.b * fpp;
            let second = lambda * lambda / p.b * fpp;
            Ok(TfimDerivatives {
                cross,
                second,
                err_cross: 1e-13 * cross.abs(),
                err_second: 1e-13 * second.abs(),
            })
        }
        Scheme::FiniteDifference => {
            let model = energy_model();
            let c = mixed_partial(&model, p.b, p.j)?;
            let s = second_partial(&model, p.b, p.j)?;
            Ok(TfimDerivatives {
                cross: c.value,
                second: s.value,
                err_cross: c.err,
                err_second: s.err,
            })
        }
    }
}

/// `E₀(h = B, g = J)` per site as a two-parameter model. `E₀` is even in
/// `J`, so stencils may reach `J < 0`. The critical line `|J| = B` is
/// declared singular, so no stencil straddles it.
pub fn energy_model() -> TwoParamModel {
    TwoParamModel::new("tfim", "B", "J", |b, j| {
        let p = TfimParams::new(b, j.abs())?;
        e0_per_site(&p)
    })
    .with_domain((f64::MIN_POSITIVE, f64::INFINITY), (f64::NEG_INFINITY, f64::INFINITY))
    .with_singular_locus(|b, j| j.abs() - b)
}

/// Exact free-fermion solution of an open chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteChainSolution {
    pub n_sites: usize,
    /// Quasi-particle energies, ascending, all ≥ 0.
    pub single_particle_energies: Vec<f64>,
    pub e0_total: f64,
}

pub const FINITE_CHAIN_MAX_SITES: usize = 24;

/// Solves the open Pauli chain after a Jordan–Wigner transformation.
///
/// In Majorana form the Hamiltonian couples neighbours through the
/// amplitudes `B, J, B, J, …, B`; the quasi-particle energies are twice the
/// singular values of the bidiagonal matrix with diagonal `B` and
/// super-diagonal `J`. They are read off as the positive eigenvalues of the
/// zero-diagonal tridiagonal (Golub–Kahan) form, which keeps tiny singular
/// values accurate in the ordered phase.
pub fn finite_chain_e0(n_sites: usize, p: &TfimParams) -> Result<FiniteChainSolution> {
    if !(2..=FINITE_CHAIN_MAX_SITES).contains(&n_sites) {
        return Err(Error::size(
            "finite_chain_e0",
            format!("n_sites = {n_sites} outside 2..={FINITE_CHAIN_MAX_SITES}"),
        ));
    }
    let diag = vec![0.0; 2 * n_sites];
    let off: Vec<f64> = (0..2 * n_sites - 1)
        .map(|i| if i % 2 == 0 { p.b } else { p.j })
        .collect();
    let vals = tridiagonal_eigenvalues(&diag, &off)?;
    let single: Vec<f64> = vals[n_sites..].iter().map(|s| 2.0 * s.abs()).collect();
    let mut single = single;
    single.sort_by(f64::total_cmp);
    let e0_total = -0.5 * single.iter().sum::<f64>();
    Ok(FiniteChainSolution {
        n_sites,
        single_particle_energies: single,
        e0_total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dispersion_examples() {
        for k in [0.0, 0.3, 2.0, PI] {
            assert!((dispersion(k, 0.0).unwrap() - 2.0).abs() < 1e-15);
        }
        assert_eq!(dispersion(0.0, 1.0).unwrap(), 0.0);
        assert!((dispersion(PI, 1.0).unwrap() - 4.0).abs() < 1e-15);
        assert!(dispersion(-0.1, 0.5).is_err());
        assert!(dispersion(0.1, -0.5).is_err());
        // gap 2|1 − λ|
        assert!((dispersion(0.0, 0.3).unwrap() - 1.4).abs() < 1e-15);
    }

    #[test]
    fn energy_anchors() {
        let p = TfimParams::new(1.0, 0.0).unwrap();
        assert!((e0_per_site(&p).unwrap() + 2.0).abs() < 1e-12);
        let p = TfimParams::new(1.0, 1.0).unwrap();
        assert!((e0_per_site(&p).unwrap() + 8.0 / PI).abs() < 1e-10);
        let q = e0_quadrature(&p, 1e-12).unwrap();
        assert!((q + 8.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn half_coupling_matches_frozen_quadrature() {
        // Frozen from e0_quadrature(B = 1, J = 0.5, tol = 1e-13).
        let frozen = -2.127_088_819_946_73;
        let p = TfimParams::new(1.0, 0.5).unwrap();
        assert!((e0_quadrature(&p, 1e-13).unwrap() - frozen).abs() < 1e-12);
        assert!((e0_per_site(&p).unwrap() - frozen).abs() < 1e-12);
        let p2 = TfimParams::new(2.0, 1.0).unwrap();
        let q2 = e0_quadrature(&p2, 1e-12).unwrap();
        assert!((q2 - 2.0 * e0_quadrature(&p, 1e-12).unwrap()).abs() < 2e-12);
    }

    #[test]
    fn closed_form_continuous_through_critical_window() {
        let at = e0_per_site(&TfimParams::from_lambda(1.0).unwrap()).unwrap();
        for d in [1e-9, 1e-8, -1e-9] {
            let v = e0_per_site(&TfimParams::from_lambda(1.0 + d).unwrap()).unwrap();
            assert!((v - at).abs() < 1e-7);
        }
    }

    #[test]
    fn zero_field_rejected_by_analytics() {
        let p = TfimParams::new(0.0, 1.0).unwrap();
        assert!(matches!(e0_per_site(&p), Err(Error::Domain { .. })));
        assert!(TfimParams::new(-1.0, 1.0).is_err());
        assert!(TfimParams::new(1.0, f64::NAN).is_err());
    }

    #[test]
    fn curvature_limits() {
        assert!((curvature(0.0).unwrap() + 1.0).abs() < 1e-15);
        // series and closed form agree at the switch-over
        let below = curvature_series(0.1);
        let above = curvature_below_one(0.1);
        assert!((below - above).abs() < 1e-12 * below.abs());
        assert!(matches!(curvature(1.0), Err(Error::Singular { .. })));
        assert!(curvature(1.0 + 1e-6).is_ok());
        assert!(curvature(1.0 - 1e-6).is_ok());
    }

    #[test]
    fn derivatives_at_zero_coupling() {
        let p = TfimParams::new(1.0, 0.0).unwrap();
        let d = derivatives(&p, Scheme::Analytic).unwrap();
        assert_eq!(d.cross, 0.0);
        assert_eq!(d.second, 0.0);
        let fd = derivatives(&p, Scheme::FiniteDifference).unwrap();
        assert!(fd.cross.abs() < 1e-8 && fd.second.abs() < 1e-8);
    }

    #[test]
    fn derivatives_refuse_the_critical_point() {
        let p = TfimParams::new(1.0, 1.0 + 1e-7).unwrap();
        assert!(matches!(derivatives(&p, Scheme::Analytic), Err(Error::Singular { .. })));
    }

    #[test]
    fn cross_grows_towards_critical_point() {
        for sign in [-1.0, 1.0] {
            let near = TfimParams::new(1.0, 1.0 + sign * 1e-4).unwrap();
            let far = TfimParams::new(1.0, 1.0 + sign * 1e-2).unwrap();
            let a = derivatives(&near, Scheme::Analytic).unwrap().cross.abs();
            let b = derivatives(&far, Scheme::Analytic).unwrap().cross.abs();
            assert!(a > b);
        }
    }

    #[test]
    fn two_site_chain() {
        let s = finite_chain_e0(2, &TfimParams::new(1.0, 1.0).unwrap()).unwrap();
        assert!((s.e0_total + 5f64.sqrt()).abs() < 1e-13);
        let s = finite_chain_e0(2, &TfimParams::new(1.0, 0.0).unwrap()).unwrap();
        assert!((s.e0_total + 2.0).abs() < 1e-14);
        assert!(s.single_particle_energies.iter().all(|e| (e - 2.0).abs() < 1e-14));
    }

    #[test]
    fn chain_size_limits() {
        let p = TfimParams::new(1.0, 0.5).unwrap();
        assert!(matches!(finite_chain_e0(1, &p), Err(Error::Size { .. })));
        assert!(matches!(finite_chain_e0(25, &p), Err(Error::Size { .. })));
        let s = finite_chain_e0(24, &p).unwrap();
        assert!(s.single_particle_energies.iter().all(|e| *e >= 0.0));
        let sum: f64 = s.single_particle_energies.iter().sum();
        assert!((s.e0_total + 0.5 * sum).abs() < 1e-12);
    }
}
