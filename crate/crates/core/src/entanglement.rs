//! Partial traces, von Neumann entropy and Wootters concurrence.
//!
//! Qubit `i` is bit `i` of a basis index, as in [`crate::ed`]. A reduced
//! state keeps the order of the kept qubits: the lowest kept index becomes
//! bit 0 of the reduced basis.

use std::f64::consts::LN_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ed::{build_tfim_signed, ground_state, TFIM_MAX_SITES};
use crate::error::{Error, Result};
use crate::gamma::TwoParamModel;
use crate::linalg::{hermitian_eigen, hermitian_eigenvalues};
use crate::tfim::TfimParams;

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
/// Eigenvalues down to `−PSD_TOL` are round-off and clamp to zero.
pub const PSD_TOL: f64 = 1e-10;
/// Allowed deviation of `‖ψ‖²` from 1 for pure-state input.
pub const NORM_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    elements: Vec<Complex64>,
    eigenvalues: Vec<f64>,
}

impl DensityMatrix {
    /// Validates a row-major `dim × dim` matrix.
    pub fn new(dim: usize, elements: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || elements.len() != dim * dim {
            return Err(Error::dimension(
                "DensityMatrix::new",
                format!("{} elements for dim {dim}", elements.len()),
            ));
        }
        if elements.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invariant("DensityMatrix::new", "non-finite element"));
        }
        let mut asym = 0.0_f64;
        for i in 0..dim {
            for j in i..dim {
                asym = asym.max((elements[i * dim + j] - elements[j * dim + i].conj()).norm());
            }
        }
        if asym > HERMITICITY_TOL {
            return Err(Error::invariant(
                "DensityMatrix::new",
                format!("not Hermitian: max |ρᵢⱼ − ρ̄ⱼᵢ| = {asym:e}"),
            ));
        }
        let trace: f64 = (0..dim).map(|i| elements[i * dim + i].re).sum();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::invariant(
                "DensityMatrix::new",
                format!("trace {trace} differs from 1"),
            ));
        }
        let eigenvalues = hermitian_eigenvalues(&elements, dim)?;
        if eigenvalues[0] < -PSD_TOL {
            return Err(Error::invariant(
                "DensityMatrix::new",
                format!("negative eigenvalue {:e}", eigenvalues[0]),
            ));
        }
        Ok(DensityMatrix {
            dim,
            elements,
            eigenvalues,
        })
    }

    /// `|ψ⟩⟨ψ|` for a unit vector.
    pub fn from_pure(psi: &[Complex64]) -> Result<Self> {
        let norm2 = check_norm("DensityMatrix::from_pure", psi)?;
        let dim = psi.len();
        let mut el = vec![ZERO; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                el[i * dim + j] = psi[i] * psi[j].conj() / norm2;
            }
        }
        Self::new(dim, el)
    }

    /// `I/dim`.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        let mut el = vec![ZERO; dim * dim];
        for i in 0..dim {
            el[i * dim + i] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        Self::new(dim, el)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[Complex64] {
        &self.elements
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.elements[i * self.dim + j]
    }

    /// Ascending eigenvalues (unclamped).
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn purity(&self) -> f64 {
        self.elements.iter().map(|z| z.norm_sqr()).sum()
    }
}

fn check_norm(op: &'static str, psi: &[Complex64]) -> Result<f64> {
    let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if !((norm2 - 1.0).abs() <= NORM_TOL) {
        return Err(Error::domain(op, format!("state norm² = {norm2}, expected 1")));
    }
    Ok(norm2)
}

/// Entropy in bits and in nats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyValue {
    pub bits: f64,
    pub nats: f64,
}

impl EntropyValue {
    pub fn from_nats(nats: f64) -> Self {
        EntropyValue {
            bits: nats / LN_2,
            nats,
        }
    }

    pub fn from_bits(bits: f64) -> Self {
        EntropyValue {
            bits,
            nats: bits * LN_2,
        }
    }
}

/// Input to [`partial_trace`].
#[derive(Debug, Clone, Copy)]
pub enum StateRef<'a> {
    Pure(&'a [Complex64]),
    Mixed(&'a DensityMatrix),
}

impl<'a> From<&'a [Complex64]> for StateRef<'a> {
    fn from(psi: &'a [Complex64]) -> Self {
        StateRef::Pure(psi)
    }
}

impl<'a> From<&'a Vec<Complex64>> for StateRef<'a> {
    fn from(psi: &'a Vec<Complex64>) -> Self {
        StateRef::Pure(psi)
    }
}

impl<'a> From<&'a DensityMatrix> for StateRef<'a> {
    fn from(rho: &'a DensityMatrix) -> Self {
        StateRef::Mixed(rho)
    }
}

/// Reduced density matrix on the qubits in `keep`.
pub fn partial_trace<'a>(state: impl Into<StateRef<'a>>, n_qubits: usize, keep: &[usize]) -> Result<DensityMatrix> {
    let state = state.into();
    let dim = match state {
        StateRef::Pure(psi) => psi.len(),
        StateRef::Mixed(rho) => rho.dim(),
    };
    if n_qubits == 0 || n_qubits >= usize::BITS as usize || dim != 1 << n_qubits {
        return Err(Error::dimension(
            "partial_trace",
            format!("dimension {dim} is not 2^{n_qubits}"),
        ));
    }
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() || kept.iter().any(|&q| q >= n_qubits) {
        return Err(Error::index(
            "partial_trace",
            format!("keep {keep:?} is not a set of qubits below {n_qubits}"),
        ));
    }
    if kept.is_empty() || kept.len() == n_qubits {
        return Err(Error::index("partial_trace", "keep must be a non-empty proper subset"));
    }
    let traced: Vec<usize> = (0..n_qubits).filter(|q| !kept.contains(q)).collect();
    let da = 1usize << kept.len();
    let db = 1usize << traced.len();
    let compose = |a: usize, b: usize| -> usize {
        let mut s = 0;
        for (k, &q) in kept.iter().enumerate() {
            s |= (a >> k & 1) << q;
        }
        for (k, &q) in traced.iter().enumerate() {
            s |= (b >> k & 1) << q;
        }
        s
    };

    let mut out = vec![ZERO; da * da];
    match state {
        StateRef::Pure(psi) => {
            let norm2 = check_norm("partial_trace", psi)?;
            // M[a][b] = ψ(a, b); ρ_A = M M†
            let m: Vec<Complex64> = (0..da)
                .flat_map(|a| (0..db).map(move |b| (a, b)))
                .map(|(a, b)| psi[compose(a, b)])
                .collect();
            for a in 0..da {
                for a2 in a..da {
                    let ra = &m[a * db..(a + 1) * db];
                    let rb = &m[a2 * db..(a2 + 1) * db];
                    let v: Complex64 = ra.iter().zip(rb).map(|(x, y)| x * y.conj()).sum::<Complex64>() / norm2;
                    out[a * da + a2] = v;
                    out[a2 * da + a] = v.conj();
                }
            }
        }
        StateRef::Mixed(rho) => {
            for a in 0..da {
                for a2 in a..da {
                    let v: Complex64 = (0..db).map(|b| rho.get(compose(a, b), compose(a2, b))).sum();
                    out[a * da + a2] = v;
                    out[a2 * da + a] = v.conj();
                }
            }
        }
    }
    for a in 0..da {
        out[a * da + a].im = 0.0;
    }
    DensityMatrix::new(da, out)
}

/// `S = −Tr ρ ln ρ`, with eigenvalues clamped to `[0, 1]` and `0 ln 0 = 0`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> EntropyValue {
    let nats: f64 = rho
        .eigenvalues()
        .iter()
        .map(|&l| l.clamp(0.0, 1.0))
        .filter(|&l| l > 0.0)
        .map(|l| -l * l.ln())
        .sum();
    EntropyValue::from_nats(nats.max(0.0))
}

/// Entropy of `Iₙ/2ⁿ`: exactly `n` bits.
pub fn maximally_mixed_entropy(n: u32) -> Result<EntropyValue> {
    if n == 0 {
        return Err(Error::domain("maximally_mixed_entropy", "n must be ≥ 1"));
    }
    Ok(EntropyValue::from_bits(n as f64))
}

/// Wootters concurrence of a two-qubit state.
///
/// With `ρ = Σᵢ |vᵢ⟩⟨vᵢ|` (subnormalized eigenvectors), the square roots of
/// the eigenvalues of `ρ(σʸ⊗σʸ)ρ*(σʸ⊗σʸ)` are the singular values of
/// `τᵢⱼ = vᵢᵀ(σʸ⊗σʸ)vⱼ`. Taking them as the eigenvalues of the Hermitian
/// `[[0, τ], [τ†, 0]]` avoids square roots of round-off-sized numbers.
/// Eigenvalues of `ρ` below `64ε` are treated as zero.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    const SIGN: [f64; 4] = [-1.0, 1.0, 1.0, -1.0];
    if rho.dim() != 4 {
        return Err(Error::dimension(
            "concurrence",
            format!("needs a two-qubit state (dim 4), got dim {}", rho.dim()),
        ));
    }
    let (vals, vecs) = hermitian_eigen(rho.elements(), 4)?;
    let v: Vec<Vec<Complex64>> = vals
        .iter()
        .zip(&vecs)
        .map(|(&p, e)| {
            let w = if p > 64.0 * f64::EPSILON { p.sqrt() } else { 0.0 };
            e.iter().map(|z| z * w).collect()
        })
        .collect();
    let mut emb = vec![ZERO; 64];
    for i in 0..4 {
        for j in 0..4 {
            // (σʸ⊗σʸ)|k⟩ = SIGN[k]|3 − k⟩
            let t: Complex64 = (0..4).map(|k| v[i][3 - k] * SIGN[k] * v[j][k]).sum();
            emb[i * 8 + 4 + j] = t;
            emb[(4 + j) * 8 + i] = t.conj();
        }
    }
    let eig = hermitian_eigenvalues(&emb, 8)?;
    let s: Vec<f64> = eig.iter().rev().take(4).map(|x| x.max(0.0)).collect();
    Ok((s[0] - s[1] - s[2] - s[3]).clamp(0.0, 1.0))
}

/// `(|0…0⟩ + |1…1⟩)/√2` on `n` qubits.
pub fn ghz_state(n: usize) -> Result<Vec<Complex64>> {
    if !(2..=TFIM_MAX_SITES).contains(&n) {
        return Err(Error::size("ghz_state", format!("n = {n} outside 2..={TFIM_MAX_SITES}")));
    }
    let mut psi = vec![ZERO; 1 << n];
    let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    psi[0] = a;
    psi[(1 << n) - 1] = a;
    Ok(psi)
}

/// Bipartition used for TFIM entropy profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cut {
    /// Sites `0..n/2`.
    #[default]
    HalfChain,
    /// The site `(n − 1)/2`.
    SingleSite,
    /// The central pair `n/2 − 1, n/2`.
    BondPair,
}

impl Cut {
    pub fn sites(self, n_sites: usize) -> Vec<usize> {
        match self {
            Cut::HalfChain => (0..n_sites / 2).collect(),
            Cut::SingleSite => vec![(n_sites - 1) / 2],
            Cut::BondPair => vec![n_sites / 2 - 1, n_sites / 2],
        }
    }
}

/// Entanglement of a TFIM ground state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntanglementProfile {
    /// Entropy of the selected cut.
    pub entropy: EntropyValue,
    /// Concurrence of the central nearest-neighbour pair.
    pub concurrence: f64,
}

pub fn tfim_entanglement_profile(n_sites: usize, p: &TfimParams, cut: Cut) -> Result<EntanglementProfile> {
    profile_signed(n_sites, p.b(), p.j(), cut)
}

fn profile_signed(n_sites: usize, b: f64, j: f64, cut: Cut) -> Result<EntanglementProfile> {
    let h = build_tfim_signed(n_sites, b, j)?;
    let gs = ground_state(&h)?;
    let entropy = von_neumann_entropy(&partial_trace(&gs.vector, n_sites, &cut.sites(n_sites))?);
    let pair = partial_trace(&gs.vector, n_sites, &Cut::BondPair.sites(n_sites))?;
    Ok(EntanglementProfile {
        entropy,
        concurrence: concurrence(&pair)?,
    })
}

/// Ground-state entropy (bits) of the `n_sites` chain as a model in
/// `(h, g) = (B, J)`, for the entropy form of Γ. The sign of `J` is a gauge
/// choice (σˣ on every other site) and leaves the entropy unchanged, so
/// stencils may cross `J = 0`.
pub fn tfim_entropy_model(n_sites: usize, cut: Cut) -> TwoParamModel {
    let name = format!("tfim-entropy-n{n_sites}");
    TwoParamModel::new(&name, "B", "J", move |b, j| Ok(profile_signed(n_sites, b, j, cut)?.entropy.bits))
        .with_domain((f64::MIN_POSITIVE, f64::INFINITY), (f64::NEG_INFINITY, f64::INFINITY))
}
