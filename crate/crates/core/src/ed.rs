//! Exact diagonalization of small spin systems.
//!
//! Basis convention: spin `i` is bit `i` of the basis index, and bit value 0
//! is `|↑⟩` (σᶻ = +1). Every Hamiltonian built here is real symmetric in this
//! basis (σʸ only enters through σʸ⊗σʸ, which is real), so matrices are
//! stored as real sparse rows.
//!
//! Ground states come from the dense Householder/QL solver up to dimension
//! 256 and from Lanczos with full reorthogonalization above that.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, lanczos_lowest, symmetric_eigen, DenseMatrix};
use crate::tfim::TfimParams;

pub const TFIM_MAX_SITES: usize = 14;
/// Largest dimension handled by the dense solver.
pub const DENSE_MAX_DIM: usize = 256;
/// Relative gap below which the ground state counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;
const LANCZOS_TOL: f64 = 1e-13;
const LANCZOS_MAX_ITER: usize = 600;
const GAP_SEED: u64 = 0x05ee_d9a9;

/// Real symmetric spin Hamiltonian in compressed sparse rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinHamiltonian {
    n_spins: usize,
    label: String,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SpinHamiltonian {
    fn from_rows(n_spins: usize, label: &str, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for (c, v) in row {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => merged.push((c, v)),
                }
            }
            for (c, v) in merged {
                if v != 0.0 {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        SpinHamiltonian {
            n_spins,
            label: label.to_string(),
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        1 << self.n_spins
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Non-zero entries of row `i` as `(column, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(c, v)| v * x[c]).sum();
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply(x, &mut y);
        y
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.dim();
        let mut m = DenseMatrix::zeros(n);
        for i in 0..n {
            for (c, v) in self.row(i) {
                m[(i, c)] = v;
            }
        }
        m
    }

    /// Largest absolute row sum, an upper bound on the spectral norm.
    pub fn max_row_norm(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest `|H_ij − H_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.dim() {
            for (c, v) in self.row(i) {
                worst = worst.max((v - self.get(c, i)).abs());
            }
        }
        worst
    }

    /// `⟨v|H|v⟩` for a real vector.
    pub fn expectation(&self, v: &[f64]) -> f64 {
        dot(v, &self.matvec(v))
    }
}

fn sz(state: usize, i: usize) -> f64 {
    if state >> i & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Adds `c · σᵢ·σⱼ` acting on basis state `s` to `row`.
fn push_heisenberg(row: &mut Vec<(usize, f64)>, s: usize, i: usize, j: usize, c: f64) {
    if c == 0.0 {
        return;
    }
    let zz = sz(s, i) * sz(s, j);
    row.push((s, c * zz));
    // σˣσˣ + σʸσʸ flips antiparallel pairs with amplitude 2
    if zz < 0.0 {
        row.push((s ^ (1 << i) ^ (1 << j), 2.0 * c));
    }
}

/// Open-chain Pauli Hamiltonian `−B Σ σˣᵢ − J Σ σᶻᵢ σᶻᵢ₊₁`.
pub fn build_tfim(n_sites: usize, p: &TfimParams) -> Result<SpinHamiltonian> {
    build_tfim_signed(n_sites, p.b(), p.j())
}

/// As [`build_tfim`] but with unrestricted signs (used by derivative stencils).
pub(crate) fn build_tfim_signed(n_sites: usize, b: f64, j: f64) -> Result<SpinHamiltonian> {
    if !(2..=TFIM_MAX_SITES).contains(&n_sites) {
        return Err(Error::size(
            "build_tfim",
            format!("n_sites = {n_sites} outside 2..={TFIM_MAX_SITES}"),
        ));
    }
    let dim = 1usize << n_sites;
    let rows = (0..dim)
        .map(|s| {
            let mut row = Vec::with_capacity(n_sites + 1);
            let diag: f64 = (0..n_sites - 1).map(|i| -j * sz(s, i) * sz(s, i + 1)).sum();
            row.push((s, diag));
            if b != 0.0 {
                for i in 0..n_sites {
                    row.push((s ^ (1 << i), -b));
                }
            }
            row
        })
        .collect();
    Ok(SpinHamiltonian::from_rows(n_sites, "tfim", rows))
}

/// Which hyperfine pairs the two-donor Hamiltonian couples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HyperfineLayout {
    /// Each nucleus to its own electron: `A₁ n1·e1 + A₂ n2·e2`.
    #[default]
    OwnElectron,
    /// `A₁ n1·e2 + A₂ n2·e2`, as the formula is sometimes printed.
    PaperLiteral,
}

/// Qubit positions in the two-donor basis.
pub mod kane_qubits {
    pub const N1: usize = 0;
    pub const N2: usize = 1;
    pub const E1: usize = 2;
    pub const E2: usize = 3;
}

/// Two-donor Hamiltonian on qubits (n1, n2, e1, e2):
///
/// ```text
/// H = muBB (σᶻ_e1 + σᶻ_e2) − nuclear_zeeman (σᶻ_n1 + σᶻ_n2)
///   + A1 σ_n1·σ_e1 + A2 σ_n2·σ_e2 + Jp σ_e1·σ_e2
/// ```
pub fn build_kane(a1: f64, a2: f64, jp: f64, mu_b_b: f64, nuclear_zeeman: f64) -> Result<SpinHamiltonian> {
    build_kane_with(a1, a2, jp, mu_b_b, nuclear_zeeman, HyperfineLayout::OwnElectron)
}

pub fn build_kane_with(
    a1: f64,
    a2: f64,
    jp: f64,
    mu_b_b: f64,
    nuclear_zeeman: f64,
    layout: HyperfineLayout,
) -> Result<SpinHamiltonian> {
    use kane_qubits::*;
    for (name, v) in [("A1", a1), ("A2", a2), ("Jp", jp), ("muBB", mu_b_b), ("nuclear_zeeman", nuclear_zeeman)] {
        if !v.is_finite() {
            return Err(Error::domain("build_kane", format!("{name} = {v} is not finite")));
        }
    }
    if mu_b_b < 0.0 {
        return Err(Error::domain("build_kane", format!("muBB = {mu_b_b} must be ≥ 0")));
    }
    let partner1 = match layout {
        HyperfineLayout::OwnElectron => E1,
        HyperfineLayout::PaperLiteral => E2,
    };
    let rows = (0..16usize)
        .map(|s| {
            let mut row = Vec::with_capacity(8);
            let zeeman = mu_b_b * (sz(s, E1) + sz(s, E2)) - nuclear_zeeman * (sz(s, N1) + sz(s, N2));
            row.push((s, zeeman));
            push_heisenberg(&mut row, s, N1, partner1, a1);
            push_heisenberg(&mut row, s, N2, E2, a2);
            push_heisenberg(&mut row, s, E1, E2, jp);
            row
        })
        .collect();
    let label = match layout {
        HyperfineLayout::OwnElectron => "kane",
        HyperfineLayout::PaperLiteral => "kane-paper-literal",
    };
    Ok(SpinHamiltonian::from_rows(4, label, rows))
}

/// Lowest eigenpair with the gap to the next level.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub energy: f64,
    /// Unit vector; its largest-magnitude amplitude is real and positive.
    pub vector: Vec<Complex64>,
    /// First excitation energy; 0 when the ground level is degenerate.
    pub gap: f64,
}

impl GroundState {
    pub fn real_vector(&self) -> Vec<f64> {
        self.vector.iter().map(|c| c.re).collect()
    }
}

/// Ground state of a spin Hamiltonian.
///
/// In a degenerate ground level the returned vector is the normalized
/// projection of the uniform superposition onto that level when it is
/// non-zero (the symmetric, Perron state for the stoquastic chain), and the
/// first eigenvector otherwise.
pub fn ground_state(h: &SpinHamiltonian) -> Result<GroundState> {
    let norm = h.max_row_norm();
    let (energy, mut vector, e1) = if h.dim() <= DENSE_MAX_DIM {
        let eig = symmetric_eigen(&h.to_dense())?;
        let e1 = eig.values.get(1).copied();
        (eig.values[0], cluster_representative(&eig, norm), e1)
    } else {
        lanczos_ground(h, norm)?
    };
    fix_phase(&mut vector);

    let mut r = h.matvec(&vector);
    for (ri, vi) in r.iter_mut().zip(&vector) {
        *ri -= energy * vi;
    }
    let residual = dot(&r, &r).sqrt();
    if residual > 1e-9 * norm.max(f64::MIN_POSITIVE) {
        return Err(Error::no_convergence(
            "ground_state",
            format!("residual {residual:e} exceeds 1e-9 × {norm:e} (dim {})", h.dim()),
        ));
    }
    let gap = match e1 {
        Some(e1) if e1 - energy > DEGENERACY_TOL * norm.max(1.0) => e1 - energy,
        _ => 0.0,
    };
    Ok(GroundState {
        energy,
        vector: vector.into_iter().map(|x| Complex64::new(x, 0.0)).collect(),
        gap,
    })
}

/// Lanczos from the uniform superposition, which overlaps the Perron ground
/// state of every stoquastic model built here; a second deflated run from a
/// fixed pseudo-random vector supplies the first excited level.
fn lanczos_ground(h: &SpinHamiltonian, norm: f64) -> Result<(f64, Vec<f64>, Option<f64>)> {
    let dim = h.dim();
    let start = vec![1.0 / (dim as f64).sqrt(); dim];
    let apply = |x: &[f64], y: &mut [f64]| h.apply(x, y);
    let ground = lanczos_lowest(apply, &start, &[], norm, LANCZOS_TOL, LANCZOS_MAX_ITER)?;

    let mut rng = ChaCha8Rng::seed_from_u64(GAP_SEED);
    let probe: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let excited = lanczos_lowest(apply, &probe, &[&ground.vector], norm, LANCZOS_TOL, LANCZOS_MAX_ITER)?;
    Ok((ground.value, ground.vector, Some(excited.value)))
}

/// Within a degenerate ground cluster, the projection of the uniform
/// superposition, so that the dense and Lanczos paths pick the same state.
fn cluster_representative(eig: &crate::linalg::SymmetricEigen, norm: f64) -> Vec<f64> {
    let e0 = eig.values[0];
    let tol = DEGENERACY_TOL * norm.max(1.0);
    let cluster = eig.values.iter().take_while(|&&e| e - e0 <= tol).count();
    if cluster > 1 {
        let dim = eig.values.len();
        let mut v = vec![0.0; dim];
        for k in 0..cluster {
            let vk = eig.vector(k);
            let c: f64 = vk.iter().sum();
            v.iter_mut().zip(&vk).for_each(|(a, b)| *a += c * b);
        }
        let n = dot(&v, &v).sqrt();
        if n > 1e-8 {
            v.iter_mut().for_each(|x| *x /= n);
            return v;
        }
    }
    eig.vector(0)
}

/// Makes the largest-magnitude amplitude positive (first index on ties).
fn fix_phase(v: &mut [f64]) {
    let max = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if let Some(pivot) = v.iter().position(|x| x.abs() >= max * (1.0 - 1e-12)) {
        if v[pivot] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Full spectrum for small systems.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    /// Real eigenvectors, one per eigenvalue, each with the phase convention
    /// of [`GroundState`].
    pub vectors: Vec<Vec<f64>>,
}

/// All eigenpairs, for `dim ≤ 256`.
pub fn ground_state_full(h: &SpinHamiltonian) -> Result<Spectrum> {
    if h.dim() > DENSE_MAX_DIM {
        return Err(Error::size(
            "ground_state_full",
            format!("dimension {} exceeds {DENSE_MAX_DIM}", h.dim()),
        ));
    }
    let eig = symmetric_eigen(&h.to_dense())?;
    let vectors = (0..h.dim())
        .map(|k| {
            let mut v = eig.vector(k);
            fix_phase(&mut v);
            v
        })
        .collect();
    Ok(Spectrum {
        values: eig.values,
        vectors,
    })
}

/// Both sides of the Hellmann–Feynman relation for `∂/∂J`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HellmannFeynman {
    /// `dE₀/dJ` by a five-point central difference of ground energies.
    pub lhs: f64,
    /// `⟨ψ₀|∂H/∂J|ψ₀⟩ = −Σᵢ ⟨σᶻᵢ σᶻᵢ₊₁⟩`.
    pub rhs: f64,
    pub discrepancy: f64,
}

/// Minimum gap for the Hellmann–Feynman relation to be checked.
pub const HF_MIN_GAP: f64 = 1e-8;

pub fn hellmann_feynman_check(n_sites: usize, p: &TfimParams) -> Result<HellmannFeynman> {
    let h = build_tfim(n_sites, p)?;
    let gs = ground_state(&h)?;
    if gs.gap <= HF_MIN_GAP {
        return Err(Error::Degenerate {
            op: "hellmann_feynman_check",
            gap: gs.gap,
            threshold: HF_MIN_GAP,
        });
    }
    let psi = gs.real_vector();
    let rhs: f64 = psi
        .iter()
        .enumerate()
        .map(|(s, a)| {
            let zz: f64 = (0..n_sites - 1).map(|i| sz(s, i) * sz(s, i + 1)).sum();
            -a * a * zz
        })
        .sum();

    let step = 1e-3 * p.j().abs().max(1.0);
    let energy = |j: f64| -> Result<f64> { Ok(ground_state(&build_tfim_signed(n_sites, p.b(), j)?)?.energy) };
    let j = p.j();
    let lhs = (-energy(j + 2.0 * step)? + 8.0 * energy(j + step)? - 8.0 * energy(j - step)?
        + energy(j - 2.0 * step)?)
        / (12.0 * step);
    Ok(HellmannFeynman {
        lhs,
        rhs,
        discrepancy: (lhs - rhs).abs(),
    })
}
