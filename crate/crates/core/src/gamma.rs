//! Zero-temperature Grüneisen engine.
//!
//! A [`TwoParamModel`] wraps any scalar function of two tuning parameters
//! `(h, g)` (a ground-state energy or an entanglement entropy). The engine
//! differentiates it numerically, forms
//!
//! ```text
//! Γ = −(∂²f/∂h∂g) / (h · ∂²f/∂h²)
//! ```
//!
//! and scans one-dimensional grids for divergences and sign changes of the
//! two derivative components.
//!
//! Divergence is reported as a classification, never as an infinite value.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Initial stencil step relative to `max(1, |x|)`.
pub const BASE_STEP: f64 = 1e-2;
/// Number of step levels tried, each a factor 4 below the previous one.
pub const DEFAULT_LEVELS: usize = 6;
/// Relative floor below which `|h · ∂f/∂h|`-type denominators count as zero.
pub const DENOMINATOR_FLOOR: f64 = 1e-9;
/// Growth ratio under one step halving that flags a diverging component.
pub const DIVERGENCE_GROWTH: f64 = 4.0;

type EvalFn = dyn Fn(f64, f64) -> Result<f64> + Send + Sync;
type LocusFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// Scalar model `f(h, g)` of two tuning parameters.
#[derive(Clone)]
pub struct TwoParamModel {
    name: String,
    h_name: String,
    g_name: String,
    eval: Arc<EvalFn>,
    h_range: (f64, f64),
    g_range: (f64, f64),
    locus: Option<Arc<LocusFn>>,
}

impl fmt::Debug for TwoParamModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TwoParamModel")
            .field("name", &self.name)
            .field("h_name", &self.h_name)
            .field("g_name", &self.g_name)
            .field("h_range", &self.h_range)
            .field("g_range", &self.g_range)
            .field("has_singular_locus", &self.locus.is_some())
            .finish()
    }
}

impl TwoParamModel {
    /// Model over the whole plane with no excluded locus.
    pub fn new<F>(name: &str, h_name: &str, g_name: &str, eval: F) -> Self
    where
        F: Fn(f64, f64) -> Result<f64> + Send + Sync + 'static,
    {
        TwoParamModel {
            name: name.to_string(),
            h_name: h_name.to_string(),
            g_name: g_name.to_string(),
            eval: Arc::new(eval),
            h_range: (f64::NEG_INFINITY, f64::INFINITY),
            g_range: (f64::NEG_INFINITY, f64::INFINITY),
            locus: None,
        }
    }

    /// Restricts the valid domain to a closed rectangle.
    pub fn with_domain(mut self, h_range: (f64, f64), g_range: (f64, f64)) -> Self {
        self.h_range = h_range;
        self.g_range = g_range;
        self
    }

    /// Declares a singular locus as the zero set of `locus(h, g)`. Stencils
    /// whose footprint touches or straddles it are never evaluated.
    pub fn with_singular_locus<L>(mut self, locus: L) -> Self
    where
        L: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        self.locus = Some(Arc::new(locus));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn h_name(&self) -> &str {
        &self.h_name
    }

    pub fn g_name(&self) -> &str {
        &self.g_name
    }

    pub fn eval(&self, h: f64, g: f64) -> Result<f64> {
        if !self.in_domain(h, g) {
            return Err(Error::domain(
                "TwoParamModel::eval",
                format!("({h}, {g}) outside the valid domain of {}", self.name),
            ));
        }
        if let Some(locus) = &self.locus {
            if locus(h, g) == 0.0 {
                return Err(Error::singular(
                    "TwoParamModel::eval",
                    format!("({h}, {g}) lies on the singular locus of {}", self.name),
                ));
            }
        }
        (self.eval)(h, g)
    }

    fn in_domain(&self, h: f64, g: f64) -> bool {
        h >= self.h_range.0 && h <= self.h_range.1 && g >= self.g_range.0 && g <= self.g_range.1
    }

    /// True when the locus function vanishes at, or changes sign across, the
    /// given points.
    fn touches_locus(&self, points: &[(f64, f64)]) -> bool {
        let Some(locus) = &self.locus else {
            return false;
        };
        let values: Vec<f64> = points.iter().map(|&(h, g)| locus(h, g)).collect();
        let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        values.iter().any(|v| v.abs() <= 1e-14 * scale || v.is_nan())
            || values.iter().any(|v| *v > 0.0) && values.iter().any(|v| *v < 0.0)
    }
}

/// Step-size policy for the finite-difference stencils.
///
/// Starting from `BASE_STEP·max(1, |x|)` (or the explicit steps), up to
/// `levels` step sizes are tried, each 4× smaller; the level with the
/// smallest Richardson error estimate wins. Levels whose stencil would leave
/// the domain or touch the singular locus are skipped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPolicy {
    pub step_h: Option<f64>,
    pub step_g: Option<f64>,
    pub levels: usize,
    pub max_step: Option<f64>,
}

impl Default for StepPolicy {
    fn default() -> Self {
        StepPolicy {
            step_h: None,
            step_g: None,
            levels: DEFAULT_LEVELS,
            max_step: None,
        }
    }
}

impl StepPolicy {
    /// Fixed steps, single level.
    pub fn fixed(step_h: f64, step_g: f64) -> Self {
        StepPolicy {
            step_h: Some(step_h),
            step_g: Some(step_g),
            levels: 1,
            max_step: None,
        }
    }

    /// Caps both steps.
    pub fn capped(max_step: f64) -> Self {
        StepPolicy {
            max_step: Some(max_step),
            ..Self::default()
        }
    }

    fn initial(&self, h: f64, g: f64) -> (f64, f64) {
        let mut sh = self.step_h.unwrap_or(BASE_STEP * h.abs().max(1.0));
        let mut sg = self.step_g.unwrap_or(BASE_STEP * g.abs().max(1.0));
        if let Some(cap) = self.max_step {
            sh = sh.min(cap);
            sg = sg.min(cap);
        }
        (sh, sg)
    }
}

/// A numerical partial derivative with its Richardson error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Derivative {
    pub value: f64,
    pub err: f64,
    pub step_h: f64,
    pub step_g: f64,
    /// Raw stencil value at the chosen step.
    pub coarse: f64,
    /// Raw stencil value at half the chosen step.
    pub fine: f64,
}

impl Derivative {
    /// The raw stencil grew by more than [`DIVERGENCE_GROWTH`] under halving.
    pub fn growth_suspected(&self) -> bool {
        self.coarse.abs() > 0.0 && self.fine.abs() > DIVERGENCE_GROWTH * self.coarse.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stencil {
    Mixed,
    SecondH,
    FirstH,
    FirstG,
}

impl Stencil {
    /// Richardson denominator `2^p − 1` for the leading error order `p`.
    fn richardson(self) -> f64 {
        match self {
            Stencil::Mixed => 3.0,
            _ => 15.0,
        }
    }

    fn footprint(self, h: f64, g: f64, dh: f64, dg: f64) -> Vec<(f64, f64)> {
        match self {
            Stencil::Mixed => vec![
                (h, g),
                (h + dh, g + dg),
                (h + dh, g - dg),
                (h - dh, g + dg),
                (h - dh, g - dg),
            ],
            Stencil::SecondH | Stencil::FirstH => {
                vec![(h - 2.0 * dh, g), (h, g), (h + 2.0 * dh, g)]
            }
            Stencil::FirstG => vec![(h, g - 2.0 * dg), (h, g), (h, g + 2.0 * dg)],
        }
    }

    fn raw(self, f: &TwoParamModel, h: f64, g: f64, dh: f64, dg: f64) -> Result<f64> {
        let e = |x: f64, y: f64| f.eval(x, y);
        Ok(match self {
            Stencil::Mixed => {
                (e(h + dh, g + dg)? - e(h + dh, g - dg)? - e(h - dh, g + dg)? + e(h - dh, g - dg)?)
                    / (4.0 * dh * dg)
            }
            Stencil::SecondH => {
                (-e(h + 2.0 * dh, g)? + 16.0 * e(h + dh, g)? - 30.0 * e(h, g)? + 16.0 * e(h - dh, g)?
                    - e(h - 2.0 * dh, g)?)
                    / (12.0 * dh * dh)
            }
            Stencil::FirstH => {
                (-e(h + 2.0 * dh, g)? + 8.0 * e(h + dh, g)? - 8.0 * e(h - dh, g)? + e(h - 2.0 * dh, g)?)
                    / (12.0 * dh)
            }
            Stencil::FirstG => {
                (-e(h, g + 2.0 * dg)? + 8.0 * e(h, g + dg)? - 8.0 * e(h, g - dg)? + e(h, g - 2.0 * dg)?)
                    / (12.0 * dg)
            }
        })
    }
}

fn differentiate(
    kind: Stencil,
    f: &TwoParamModel,
    h: f64,
    g: f64,
    policy: &StepPolicy,
    op: &'static str,
) -> Result<Derivative> {
    let (mut dh, mut dg) = policy.initial(h, g);
    let mut best: Option<Derivative> = None;
    let mut previous_err: Option<f64> = None;
    let mut valid_levels = 0;
    let mut last_err: Option<Error> = None;
    for _ in 0..policy.levels.max(1) {
        let footprint = kind.footprint(h, g, dh, dg);
        if !footprint.iter().all(|&(x, y)| f.in_domain(x, y)) {
            last_err = Some(Error::domain(
                op,
                format!("stencil at ({h}, {g}) with steps ({dh:e}, {dg:e}) leaves the domain of {}", f.name),
            ));
        } else if f.touches_locus(&footprint) {
            last_err = Some(Error::singular(
                op,
                format!("stencil at ({h}, {g}) with steps ({dh:e}, {dg:e}) touches the singular locus of {}", f.name),
            ));
        } else {
            match evaluate_level(kind, f, h, g, dh, dg) {
                Ok(d) => {
                    valid_levels += 1;
                    let improved = best.is_none_or(|b| d.err < b.err);
                    if improved {
                        best = Some(d);
                    }
                    if d.err == 0.0 {
                        break;
                    }
                    if let Some(prev) = previous_err {
                        if valid_levels >= 2 && d.err > prev && !improved {
                            break;
                        }
                    }
                    previous_err = Some(d.err);
                }
                Err(e @ (Error::Singular { .. } | Error::Domain { .. })) => last_err = Some(e),
                Err(e) => return Err(e),
            }
        }
        dh *= 0.25;
        dg *= 0.25;
    }
    best.ok_or_else(|| last_err.unwrap_or_else(|| Error::domain(op, "no admissible stencil")))
}

fn evaluate_level(kind: Stencil, f: &TwoParamModel, h: f64, g: f64, dh: f64, dg: f64) -> Result<Derivative> {
    let coarse = kind.raw(f, h, g, dh, dg)?;
    let fine = kind.raw(f, h, g, 0.5 * dh, 0.5 * dg)?;
    let denom = kind.richardson();
    let (value, err) = if kind == Stencil::Mixed {
        // The cross stencil also carries a δ²ε² term; a second stage at a
        // quarter step removes it.
        let finer = kind.raw(f, h, g, 0.25 * dh, 0.25 * dg)?;
        let r1 = fine + (fine - coarse) / denom;
        let r2 = finer + (finer - fine) / denom;
        (r2 + (r2 - r1) / 15.0, (r2 - r1).abs() / 15.0)
    } else {
        (fine + (fine - coarse) / denom, (fine - coarse).abs() / denom)
    };
    if !value.is_finite() {
        return Err(Error::singular(
            "differentiate",
            format!("non-finite stencil value at ({h}, {g})"),
        ));
    }
    Ok(Derivative {
        value,
        err,
        step_h: dh,
        step_g: dg,
        coarse,
        fine,
    })
}

/// `∂²f/∂h∂g` by the four-point cross stencil, extrapolated over two step halvings.
pub fn mixed_partial(f: &TwoParamModel, h: f64, g: f64) -> Result<Derivative> {
    mixed_partial_with(f, h, g, &StepPolicy::default())
}

pub fn mixed_partial_with(f: &TwoParamModel, h: f64, g: f64, policy: &StepPolicy) -> Result<Derivative> {
    differentiate(Stencil::Mixed, f, h, g, policy, "mixed_partial")
}

/// `∂²f/∂h²` by the five-point central stencil with one Richardson halving.
pub fn second_partial(f: &TwoParamModel, h: f64, g: f64) -> Result<Derivative> {
    second_partial_with(f, h, g, &StepPolicy::default())
}

pub fn second_partial_with(f: &TwoParamModel, h: f64, g: f64, policy: &StepPolicy) -> Result<Derivative> {
    differentiate(Stencil::SecondH, f, h, g, policy, "second_partial")
}

/// `∂f/∂h` by the five-point central stencil with one Richardson halving.
pub fn first_partial_h(f: &TwoParamModel, h: f64, g: f64, policy: &StepPolicy) -> Result<Derivative> {
    differentiate(Stencil::FirstH, f, h, g, policy, "first_partial_h")
}

/// `∂f/∂g` by the five-point central stencil with one Richardson halving.
pub fn first_partial_g(f: &TwoParamModel, h: f64, g: f64, policy: &StepPolicy) -> Result<Derivative> {
    differentiate(Stencil::FirstG, f, h, g, policy, "first_partial_g")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaStatus {
    Ok,
    ComponentDivergenceSuspected,
    DenominatorNearZero,
}

impl GammaStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            GammaStatus::Ok => "ok",
            GammaStatus::ComponentDivergenceSuspected => "component_divergence_suspected",
            GammaStatus::DenominatorNearZero => "denominator_near_zero",
        }
    }
}

/// Γ together with its two components.
///
/// For the energy form, `mixed = ∂²f/∂h∂g` and `second = ∂²f/∂h²`. For the
/// entropy form the same slots hold `∂S/∂g` and `∂S/∂h`. `gamma` is present
/// exactly when `status` is `Ok`; its unit is `1/[g]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaEstimate {
    pub mixed: f64,
    pub second: f64,
    pub gamma: Option<f64>,
    pub step_h: f64,
    pub step_g: f64,
    pub err_mixed: f64,
    pub err_second: f64,
    pub status: GammaStatus,
}

fn assemble(h: f64, value: f64, numerator: Derivative, denominator: Derivative) -> GammaEstimate {
    let floor = (10.0 * denominator.err).max(DENOMINATOR_FLOOR * value.abs());
    let status = if numerator.growth_suspected() || denominator.growth_suspected() {
        GammaStatus::ComponentDivergenceSuspected
    } else if (h * denominator.value).abs() <= floor {
        GammaStatus::DenominatorNearZero
    } else {
        GammaStatus::Ok
    };
    let gamma = (status == GammaStatus::Ok).then(|| -numerator.value / (h * denominator.value));
    GammaEstimate {
        mixed: numerator.value,
        second: denominator.value,
        gamma,
        step_h: denominator.step_h,
        step_g: numerator.step_g,
        err_mixed: numerator.err,
        err_second: denominator.err,
        status,
    }
}

/// Default `flatness` for [`gamma0k_entropy`], in bits: below this
/// `|h·∂S/∂h|` the entropy is treated as insensitive to the tuning
/// parameters.
pub const ENTROPY_FLATNESS_BITS: f64 = 1e-3;

/// Energy form: `Γ = −(∂²E₀/∂h∂g) / (h·∂²E₀/∂h²)`.
pub fn gamma0k(f: &TwoParamModel, h: f64, g: f64) -> Result<GammaEstimate> {
    gamma0k_with(f, h, g, &StepPolicy::default())
}

pub fn gamma0k_with(f: &TwoParamModel, h: f64, g: f64, policy: &StepPolicy) -> Result<GammaEstimate> {
    if h == 0.0 {
        return Err(Error::domain("gamma0k", "h must be non-zero"));
    }
    let value = f.eval(h, g)?;
    let mixed = mixed_partial_with(f, h, g, policy)?;
    let second = second_partial_with(f, h, g, policy)?;
    Ok(assemble(h, value, mixed, second))
}

/// Entropy form: `Γ = −(∂S/∂g)_h / (h·(∂S/∂h)_g)`.
///
/// Flat entropy (the GHZ plateau, a constant model) yields
/// `DenominatorNearZero`. `flatness` is an absolute tolerance on
/// `|h·∂S/∂h|` in the model's entropy unit, on top of the usual error-based
/// floor.
pub fn gamma0k_entropy(s: &TwoParamModel, h: f64, g: f64, flatness: f64) -> Result<GammaEstimate> {
    gamma0k_entropy_with(s, h, g, flatness, &StepPolicy::default())
}

pub fn gamma0k_entropy_with(
    s: &TwoParamModel,
    h: f64,
    g: f64,
    flatness: f64,
    policy: &StepPolicy,
) -> Result<GammaEstimate> {
    if h == 0.0 {
        return Err(Error::domain("gamma0k_entropy", "h must be non-zero"));
    }
    let value = s.eval(h, g)?;
    let dg = first_partial_g(s, h, g, policy)?;
    let dh = first_partial_h(s, h, g, policy)?;
    let mut est = assemble(h, value, dg, dh);
    if est.status == GammaStatus::Ok && (h * dh.value).abs() <= flatness {
        est.status = GammaStatus::DenominatorNearZero;
        est.gamma = None;
    }
    Ok(est)
}

/// Single spin in a tilted field, `E₀(h, g) = −√(h² + g²)`: smooth away from
/// the origin, used as the no-transition control.
pub fn tilted_field_model() -> TwoParamModel {
    TwoParamModel::new("tilted", "h", "g", |h, g| {
        if h == 0.0 && g == 0.0 {
            return Err(Error::singular("tilted_field_model", "h = g = 0"));
        }
        Ok(-h.hypot(g))
    })
}

/// Closed-form `(∂²E₀/∂h∂g, ∂²E₀/∂h², Γ)` of the tilted-field control.
pub fn tilted_field_exact(h: f64, g: f64) -> Result<(f64, f64, f64)> {
    if h == 0.0 && g == 0.0 {
        return Err(Error::singular("tilted_field_exact", "h = g = 0"));
    }
    let r2 = h * h + g * g;
    let r3 = r2 * r2.sqrt();
    let mixed = h * g / r3;
    let second = -g * g / r3;
    if g == 0.0 {
        return Err(Error::singular("tilted_field_exact", "Γ = 1/g diverges at g = 0"));
    }
    Ok((mixed, second, 1.0 / g))
}

/// Which coordinate a scan sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanAxis {
    H,
    G,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Mixed,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateReason {
    /// A grid node whose stencil touches the declared singular locus.
    SingularLocus,
    /// Component magnitude keeps growing under local refinement.
    RefinementGrowth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub x: f64,
    pub h: f64,
    pub g: f64,
    pub estimate: Option<GammaEstimate>,
    /// Set when the point was not evaluated.
    pub skipped: Option<String>,
}

impl ScanPoint {
    pub fn component(&self, c: Component) -> Option<f64> {
        self.estimate.map(|e| match c {
            Component::Mixed => e.mixed,
            Component::Second => e.second,
        })
    }

    /// Error estimate of a component.
    pub fn component_err(&self, c: Component) -> Option<f64> {
        self.estimate.map(|e| match c {
            Component::Mixed => e.err_mixed,
            Component::Second => e.err_second,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceCandidate {
    pub lo: f64,
    pub hi: f64,
    pub components: Vec<Component>,
    pub reasons: Vec<CandidateReason>,
    /// Component magnitudes along the refinement, for `RefinementGrowth`.
    pub refinement: Vec<f64>,
}

impl DivergenceCandidate {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignChange {
    pub component: Component,
    pub lo: f64,
    pub hi: f64,
    pub value_lo: f64,
    pub value_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub model: String,
    pub h_name: String,
    pub g_name: String,
    pub axis: ScanAxis,
    pub fixed: f64,
    pub grid: Vec<f64>,
    pub points: Vec<ScanPoint>,
    pub divergence_candidates: Vec<DivergenceCandidate>,
    pub sign_changes: Vec<SignChange>,
}

/// Probe distances (halvings of the grid spacing) used to confirm a
/// divergence candidate.
pub const REFINEMENT_ROUNDS: usize = 6;
/// A local maximum is refined only if it exceeds its error estimate by this factor.
pub const SIGNIFICANCE: f64 = 10.0;
/// Rounding noise of a second difference, in units of `ε·|f|/(δ₁δ₂)`.
const ROUNDING_ULPS: f64 = 100.0;
/// Total growth under refinement that marks a pole outright.
pub const POLE_GROWTH: f64 = 4.0;

/// Evaluates both Γ components along a grid and classifies divergences and
/// sign changes.
///
/// A local maximum of `|component|` is refined in two steps. A
/// golden-section search over the neighbouring grid interval locates the
/// peak `x*`; then `|component|` is probed at `x* ± spacing·2⁻ᵏ` for
/// `k = 1..=REFINEMENT_ROUNDS`. At a genuine singularity the probes keep
/// growing by a non-shrinking increment (constant for a logarithm, geometric
/// for a pole), or by more than [`POLE_GROWTH`] overall; at a smooth maximum
/// the increments decay by ~4× per halving. Increments below the stencil
/// noise never count as growth, and maxima below it are not refined.
pub fn scan(f: &TwoParamModel, axis: ScanAxis, fixed: f64, grid: &[f64]) -> Result<ScanReport> {
    if grid.len() < 8 {
        return Err(Error::domain("scan", format!("grid needs ≥ 8 points, got {}", grid.len())));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("scan", "grid must be strictly increasing"));
    }
    let coords = |x: f64| match axis {
        ScanAxis::H => (x, fixed),
        ScanAxis::G => (fixed, x),
    };

    let points: Vec<ScanPoint> = grid
        .par_iter()
        .map(|&x| {
            let (h, g) = coords(x);
            match gamma0k(f, h, g) {
                Ok(est) => Ok(ScanPoint {
                    x,
                    h,
                    g,
                    estimate: Some(est),
                    skipped: None,
                }),
                Err(e @ Error::Singular { .. }) => Ok(ScanPoint {
                    x,
                    h,
                    g,
                    estimate: None,
                    skipped: Some(e.to_string()),
                }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut candidates: Vec<DivergenceCandidate> = Vec::new();
    let n = points.len();
    for (i, p) in points.iter().enumerate() {
        if p.estimate.is_none() {
            candidates.push(DivergenceCandidate {
                lo: grid[i.saturating_sub(1)],
                hi: grid[(i + 1).min(n - 1)],
                components: vec![Component::Mixed, Component::Second],
                reasons: vec![CandidateReason::SingularLocus],
                refinement: Vec::new(),
            });
        }
    }

    let mut sign_changes = Vec::new();
    for c in [Component::Mixed, Component::Second] {
        let values: Vec<Option<f64>> = points.iter().map(|p| p.component(c)).collect();
        let global = values.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
        for i in 1..n.saturating_sub(1) {
            let (Some(left), Some(mid), Some(right)) = (values[i - 1], values[i], values[i + 1]) else {
                continue;
            };
            let m = mid.abs();
            if !(m >= left.abs() && m > right.abs()) || m <= 1e-12 * global {
                continue;
            }
            // a peak inside the stencil noise is not a peak
            let est = points[i].estimate.expect("evaluated point");
            let step_c = match c {
                Component::Mixed => est.step_g,
                Component::Second => est.step_h,
            };
            let rounding = f64::EPSILON * f.eval(points[i].h, points[i].g)?.abs() / (est.step_h * step_c);
            let err = points[i].component_err(c).unwrap_or(0.0);
            if m <= SIGNIFICANCE * err.max(ROUNDING_ULPS * rounding) {
                continue;
            }
            let spacing = (grid[i + 1] - grid[i]).min(grid[i] - grid[i - 1]);
            let trail = refine_peak(f, axis, fixed, grid[i], spacing, c)?;
            if trail.diverges {
                candidates.push(DivergenceCandidate {
                    lo: grid[i - 1],
                    hi: grid[i + 1],
                    components: vec![c],
                    reasons: vec![CandidateReason::RefinementGrowth],
                    refinement: trail.magnitudes,
                });
            }
        }
        sign_changes.extend(bracket_sign_changes(grid, &values, c));
    }

    Ok(ScanReport {
        model: f.name.clone(),
        h_name: f.h_name.clone(),
        g_name: f.g_name.clone(),
        axis,
        fixed,
        grid: grid.to_vec(),
        points,
        divergence_candidates: merge_candidates(candidates),
        sign_changes,
    })
}

struct RefinementTrail {
    magnitudes: Vec<f64>,
    diverges: bool,
}

fn refine_peak(
    f: &TwoParamModel,
    axis: ScanAxis,
    fixed: f64,
    x0: f64,
    spacing: f64,
    c: Component,
) -> Result<RefinementTrail> {
    let finest = spacing * 0.5f64.powi(REFINEMENT_ROUNDS as i32);
    let policy = StepPolicy::capped(0.25 * finest);
    // |component| and its noise level (Richardson error or rounding floor);
    // `None` on the singular locus.
    let magnitude = |x: f64| -> Result<Option<(f64, f64)>> {
        let (h, g) = match axis {
            ScanAxis::H => (x, fixed),
            ScanAxis::G => (fixed, x),
        };
        let d = match c {
            Component::Mixed => mixed_partial_with(f, h, g, &policy),
            Component::Second => second_partial_with(f, h, g, &policy),
        };
        let d = match d {
            Ok(d) => d,
            Err(Error::Singular { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let value = match f.eval(h, g) {
            Ok(v) => v,
            Err(Error::Singular { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let step_c = match c {
            Component::Mixed => d.step_g,
            Component::Second => d.step_h,
        };
        let rounding = ROUNDING_ULPS * f64::EPSILON * value.abs() / (d.step_h * step_c);
        Ok(Some((d.value.abs(), d.err.max(rounding))))
    };
    let singular = |magnitudes: Vec<f64>| {
        Ok(RefinementTrail {
            magnitudes,
            diverges: true,
        })
    };

    let Some((m0, n0)) = magnitude(x0)? else {
        return singular(Vec::new());
    };

    // Golden-section maximization on [x0 − spacing, x0 + spacing].
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (x0 - spacing, x0 + spacing);
    let mut p = b - ratio * (b - a);
    let mut q = a + ratio * (b - a);
    let (Some((mut fp, _)), Some((mut fq, _))) = (magnitude(p)?, magnitude(q)?) else {
        return singular(vec![m0]);
    };
    while b - a > 0.25 * finest {
        if fp >= fq {
            b = q;
            q = p;
            fq = fp;
            p = b - ratio * (b - a);
            match magnitude(p)? {
                Some((m, _)) => fp = m,
                None => return singular(vec![m0]),
            }
        } else {
            a = p;
            p = q;
            fp = fq;
            q = a + ratio * (b - a);
            match magnitude(q)? {
                Some((m, _)) => fq = m,
                None => return singular(vec![m0]),
            }
        }
    }
    let peak_at = if fp >= fq { p } else { q };

    let mut magnitudes = vec![m0];
    let mut noise = vec![n0];
    for k in 1..=REFINEMENT_ROUNDS {
        let delta = spacing * 0.5f64.powi(k as i32);
        let mut best = (0.0_f64, 0.0_f64);
        for x in [peak_at - delta, peak_at + delta] {
            match magnitude(x)? {
                Some((m, n)) if m > best.0 => best = (m, n),
                Some(_) => {}
                None => return singular(magnitudes),
            }
        }
        magnitudes.push(best.0);
        noise.push(best.1);
    }
    let inc: Vec<f64> = magnitudes.windows(2).map(|w| w[1] - w[0]).collect();
    let k = inc.len();
    let scale = magnitudes[0].max(f64::MIN_POSITIVE);
    let significant = (k - 3..k).all(|i| inc[i] > (1e-9 * scale).max(SIGNIFICANCE * noise[i].max(noise[i + 1])));
    let steady = significant && inc[k - 1] >= 0.5 * inc[k - 2] && inc[k - 2] >= 0.5 * inc[k - 3];
    let peak = magnitudes.iter().copied().fold(0.0, f64::max);
    let diverges = steady || peak >= POLE_GROWTH * magnitudes[0];
    Ok(RefinementTrail { magnitudes, diverges })
}

/// Brackets between consecutive evaluated points of opposite sign. A value
/// of exactly zero on a node belongs to the bracket on its left.
fn bracket_sign_changes(grid: &[f64], values: &[Option<f64>], c: Component) -> Vec<SignChange> {
    let evaluated: Vec<(f64, f64)> = grid
        .iter()
        .zip(values)
        .filter_map(|(&x, v)| v.map(|v| (x, v)))
        .collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i + 1 < evaluated.len() {
        let (xl, vl) = evaluated[i];
        let (xr, vr) = evaluated[i + 1];
        if vl != 0.0 && vr == 0.0 {
            // Zero on the node: look past it for the next non-zero value.
            if let Some(&(_, vn)) = evaluated[i + 1..].iter().find(|(_, v)| *v != 0.0) {
                if vn.signum() != vl.signum() {
                    out.push(SignChange {
                        component: c,
                        lo: xl,
                        hi: xr,
                        value_lo: vl,
                        value_hi: vr,
                    });
                }
            }
        } else if vl * vr < 0.0 {
            out.push(SignChange {
                component: c,
                lo: xl,
                hi: xr,
                value_lo: vl,
                value_hi: vr,
            });
        }
        i += 1;
    }
    out
}

fn merge_candidates(mut cands: Vec<DivergenceCandidate>) -> Vec<DivergenceCandidate> {
    cands.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut out: Vec<DivergenceCandidate> = Vec::new();
    for c in cands {
        if let Some(last) = out.last_mut() {
            if c.lo <= last.hi {
                last.hi = last.hi.max(c.hi);
                for comp in c.components {
                    if !last.components.contains(&comp) {
                        last.components.push(comp);
                    }
                }
                for r in c.reasons {
                    if !last.reasons.contains(&r) {
                        last.reasons.push(r);
                    }
                }
                if last.refinement.is_empty() {
                    last.refinement = c.refinement;
                }
                last.components.sort();
                continue;
            }
        }
        out.push(c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(name: &str, f: fn(f64, f64) -> f64) -> TwoParamModel {
        TwoParamModel::new(name, "h", "g", move |h, g| Ok(f(h, g)))
    }

    #[test]
    fn trivial_stencil_examples() {
        let hg = poly("hg", |h, g| h * g);
        let sq = poly("sq", |h, g| h * h + g * g);
        for (h, g) in [(0.3, -1.2), (2.0, 5.0), (-7.0, 0.1)] {
            assert!((mixed_partial(&hg, h, g).unwrap().value - 1.0).abs() < 1e-9);
            assert!(mixed_partial(&sq, h, g).unwrap().value.abs() < 1e-9);
        }
        let cube = poly("cube", |h, _| h * h * h);
        assert!((second_partial(&cube, 2.0, 0.0).unwrap().value - 12.0).abs() < 1e-6);
        let c = poly("const", |_, _| 3.5);
        assert_eq!(second_partial(&c, 1.0, 1.0).unwrap().value, 0.0);
    }

    #[test]
    fn tilted_control_examples() {
        let m = tilted_field_model();
        assert_eq!(m.eval(3.0, 4.0).unwrap(), -5.0);
        let est = gamma0k(&m, 1.0, 1.0).unwrap();
        assert_eq!(est.status, GammaStatus::Ok);
        assert!((est.gamma.unwrap() - 1.0).abs() < 1e-6);
        // Γ = 1/g grows without bound as g → 0⁺
        let mut last = 0.0;
        for g in [0.5, 0.1, 0.02] {
            let gam = gamma0k(&m, 1.0, g).unwrap().gamma.unwrap();
            assert!(gam > last);
            assert!((gam * g - 1.0).abs() < 1e-5);
            last = gam;
        }
        assert!(matches!(m.eval(0.0, 0.0), Err(Error::Singular { .. })));
    }

    #[test]
    fn constant_entropy_is_flat() {
        let s = poly("flat", |_, _| 0.7);
        let est = gamma0k_entropy(&s, 1.0, 0.5, 0.0).unwrap();
        assert_eq!(est.status, GammaStatus::DenominatorNearZero);
        assert!(est.gamma.is_none());
    }

    #[test]
    fn zero_h_rejected() {
        let m = tilted_field_model();
        assert!(matches!(gamma0k(&m, 0.0, 1.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn stencil_leaving_domain_is_an_error() {
        let m = poly("box", |h, g| h * g).with_domain((0.0, 1.0), (0.0, 1.0));
        assert!(matches!(mixed_partial(&m, 0.0, 0.5), Err(Error::Domain { .. })));
        // close to the edge a smaller level is admissible
        assert!(mixed_partial(&m, 0.001, 0.5).is_ok());
    }

    #[test]
    fn stencils_avoid_the_locus() {
        let m = TwoParamModel::new("pole", "h", "g", |h, _| Ok(1.0 / (h - 1.0)))
            .with_singular_locus(|h, _| h - 1.0);
        assert!(matches!(second_partial(&m, 1.0, 0.0), Err(Error::Singular { .. })));
        let d = second_partial(&m, 1.01, 0.0).unwrap();
        let exact = 2.0 / 0.01_f64.powi(3);
        assert!((d.value / exact - 1.0).abs() < 1e-6, "{}", d.value / exact);
    }

    #[test]
    fn sign_change_on_zero_node_goes_left() {
        let grid = [0.0, 1.0, 2.0, 3.0];
        let values = [Some(1.0), Some(0.0), Some(-1.0), Some(-2.0)];
        let br = bracket_sign_changes(&grid, &values, Component::Mixed);
        assert_eq!(br.len(), 1);
        assert_eq!((br[0].lo, br[0].hi), (0.0, 1.0));
    }

    #[test]
    fn scan_rejects_bad_grids() {
        let m = tilted_field_model();
        assert!(scan(&m, ScanAxis::G, 1.0, &[0.1, 0.2, 0.3]).is_err());
        let g: Vec<f64> = (0..10).map(|i| 1.0 - 0.1 * i as f64).collect();
        assert!(scan(&m, ScanAxis::G, 1.0, &g).is_err());
    }

    #[test]
    fn tilted_scan_is_clean() {
        let m = tilted_field_model();
        let grid: Vec<f64> = (0..20).map(|i| 0.1 + 0.1 * i as f64).collect();
        let r = scan(&m, ScanAxis::G, 1.0, &grid).unwrap();
        assert!(r.divergence_candidates.is_empty(), "{:?}", r.divergence_candidates);
        assert!(r.sign_changes.is_empty());
    }

    #[test]
    fn pole_is_found_by_refinement() {
        // pole between grid nodes, no declared locus
        let m = TwoParamModel::new("pole", "h", "g", |h, g| Ok(h * g / (g - 0.537).powi(2)));
        let grid: Vec<f64> = (0..12).map(|i| 0.1 * (i + 1) as f64).collect();
        let r = scan(&m, ScanAxis::G, 1.0, &grid).unwrap();
        assert_eq!(r.divergence_candidates.len(), 1, "{:?}", r.divergence_candidates);
        assert!(r.divergence_candidates[0].contains(0.537));
    }
}
