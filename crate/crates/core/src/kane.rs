//! Nuclear-spin exchange splitting of the two-donor (Kane) qubit pair.
//!
//! Units: μ_B = 1, so the field enters only as the Zeeman energy `muBB`.
//! The second-order splitting
//!
//! ```text
//! E = 2A² (1/(muBB − 2J′) − 1/muBB)
//! ```
//!
//! is singular on `muBB = 2J′`, where both of its second derivatives change
//! sign.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ed::{build_kane, ground_state_full, kane_qubits};
use crate::error::{Error, Result};
use crate::gamma::TwoParamModel;

/// Minimum overlap for labelling an eigenstate as one of the nuclear
/// exchange states.
pub const IDENTIFICATION_THRESHOLD: f64 = 0.9;
/// Relative spacing below which ED levels count as one degenerate level.
const CLUSTER_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KaneParams {
    a: f64,
    jp: f64,
    mu_b_b: f64,
}

impl KaneParams {
    /// `A ≥ 0`, `J′ ≥ 0`, `muBB > 0`, all finite.
    pub fn new(a: f64, jp: f64, mu_b_b: f64) -> Result<Self> {
        if !(a.is_finite() && a >= 0.0) {
            return Err(Error::domain("KaneParams::new", format!("A = {a} must be finite and ≥ 0")));
        }
        if !(jp.is_finite() && jp >= 0.0) {
            return Err(Error::domain("KaneParams::new", format!("Jp = {jp} must be finite and ≥ 0")));
        }
        if !(mu_b_b.is_finite() && mu_b_b > 0.0) {
            return Err(Error::domain(
                "KaneParams::new",
                format!("muBB = {mu_b_b} must be finite and > 0"),
            ));
        }
        Ok(KaneParams { a, jp, mu_b_b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn jp(&self) -> f64 {
        self.jp
    }

    pub fn mu_b_b(&self) -> f64 {
        self.mu_b_b
    }

    /// `2J′/muBB`; the locus sits at 1.
    pub fn exchange_ratio(&self) -> f64 {
        2.0 * self.jp / self.mu_b_b
    }

    fn detuning(&self, op: &'static str) -> Result<f64> {
        let d = self.mu_b_b - 2.0 * self.jp;
        if d == 0.0 {
            return Err(Error::singular(op, format!("muBB = 2Jp = {}", self.mu_b_b)));
        }
        Ok(d)
    }
}

/// Second-order nuclear exchange splitting.
pub fn splitting(p: &KaneParams) -> Result<f64> {
    let d = p.detuning("kane::splitting")?;
    Ok(2.0 * p.a * p.a * (1.0 / d - 1.0 / p.mu_b_b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KaneDerivatives {
    /// `∂²E/∂J′∂B = −8A²(muBB − 2J′)⁻³`
    pub cross: f64,
    /// `∂²E/∂J′² = 16A²(muBB − 2J′)⁻³`
    pub second: f64,
    /// `−J′·∂²E/∂J′²`
    pub second_term: f64,
}

pub fn derivatives(p: &KaneParams) -> Result<KaneDerivatives> {
    let d = p.detuning("kane::derivatives")?;
    let inv3 = 1.0 / (d * d * d);
    let a2 = p.a * p.a;
    let second = 16.0 * a2 * inv3;
    Ok(KaneDerivatives {
        cross: -8.0 * a2 * inv3,
        second,
        second_term: -p.jp * second,
    })
}

/// `Γ = −(∂²E/∂J′∂B)/(J′·∂²E/∂J′²)`, which the closed forms reduce to `1/(2J′)`.
pub fn gamma0k_kane(p: &KaneParams) -> Result<f64> {
    if p.jp == 0.0 {
        return Err(Error::singular("gamma0k_kane", "Jp = 0"));
    }
    if p.a == 0.0 {
        return Err(Error::singular("gamma0k_kane", "A = 0: both derivatives vanish identically"));
    }
    let d = derivatives(p)?;
    Ok(-d.cross / (p.jp * d.second))
}

/// Splitting read off the 16-level spectrum with `A₁ = A₂ = A`.
///
/// The two levels with the largest weight on
/// `(|↑↓⟩ ± |↓↑⟩)_n/√2 ⊗ |↓↓⟩_e` are identified, and `E(+) − E(−)` is
/// returned. Degenerate levels are handled as one level whose weight is the
/// summed overlap, so exact nuclear degeneracy gives 0.
pub fn ed_splitting(p: &KaneParams) -> Result<f64> {
    let h = build_kane(p.a, p.a, p.jp, p.mu_b_b, 0.0)?;
    let spec = ground_state_full(&h)?;

    let scale = spec.values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let mut clusters: Vec<(f64, Vec<usize>)> = Vec::new();
    for (k, &e) in spec.values.iter().enumerate() {
        match clusters.last_mut() {
            Some((e0, members)) if e - *e0 <= CLUSTER_TOL * scale => members.push(k),
            _ => clusters.push((e, vec![k])),
        }
    }

    let identify = |sign: f64| -> Result<f64> {
        let target = reference_state(sign);
        let (mut best, mut energy) = (0.0, 0.0);
        for (e, members) in &clusters {
            let weight: f64 = members
                .iter()
                .map(|&k| {
                    let v = &spec.vectors[k];
                    target.iter().zip(v).map(|(t, x)| t.re * x).sum::<f64>().powi(2)
                })
                .sum();
            if weight > best {
                best = weight;
                energy = *e;
            }
        }
        if best < IDENTIFICATION_THRESHOLD {
            return Err(Error::Identification {
                op: "ed_splitting",
                overlap: best,
                threshold: IDENTIFICATION_THRESHOLD,
            });
        }
        Ok(energy)
    };
    Ok(identify(1.0)? - identify(-1.0)?)
}

/// Splitting as a model in `(h, g) = (J′, muBB)` with the locus
/// `muBB = 2J′` declared.
pub fn energy_model(a: f64) -> TwoParamModel {
    TwoParamModel::new("kane", "Jp", "muBB", move |jp, mu_b_b| splitting(&KaneParams::new(a, jp, mu_b_b)?))
        .with_domain((0.0, f64::INFINITY), (f64::MIN_POSITIVE, f64::INFINITY))
        .with_singular_locus(|jp, mu_b_b| mu_b_b - 2.0 * jp)
}

/// Nuclear exchange reference state `(|↑↓⟩ ± |↓↑⟩)_n/√2 ⊗ |↓↓⟩_e`.
pub fn reference_state(sign: f64) -> Vec<Complex64> {
    use kane_qubits::*;
    let mut v = vec![Complex64::new(0.0, 0.0); 16];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let electrons_down = (1 << E1) | (1 << E2);
    v[electrons_down | (1 << N2)] = Complex64::new(s, 0.0);
    v[electrons_down | (1 << N1)] = Complex64::new(sign * s, 0.0);
    v
}
