//! Real symmetric eigensolvers.
//!
//! Every Hamiltonian built by this crate is real symmetric in the
//! computational basis, so the solvers work on `f64` only. Complex Hermitian
//! matrices (density matrices) go through [`hermitian_eigen`], which uses the
//! real embedding `[[Re, -Im], [Im, Re]]`.
//!
//! Dense path: Householder tridiagonalization followed by implicit QL with
//! Wilkinson-type shifts, with a cyclic Jacobi fallback for small matrices.
//! Large sparse Hamiltonians go through Lanczos with full reorthogonalization.

use num_complex::Complex64;

use crate::error::{Error, Result};

const QL_MAX_SWEEPS: usize = 60;
const JACOBI_MAX_DIM: usize = 64;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Row-major dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::dimension(
                "DenseMatrix::from_row_major",
                format!("expected {} entries, got {}", n * n, data.len()),
            ));
        }
        Ok(DenseMatrix { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        self.data
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        let n = self.n;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn max_abs_asymmetry(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Eigen-decomposition with ascending eigenvalues; eigenvectors are the
/// columns of `vectors`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl SymmetricEigen {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        let n = self.vectors.dim();
        (0..n).map(|i| self.vectors[(i, k)]).collect()
    }
}

/// Full eigen-decomposition of a real symmetric matrix.
///
/// Householder + implicit QL; if QL fails to converge on a matrix of
/// dimension ≤ 64 the cyclic Jacobi method is used instead.
pub fn symmetric_eigen(a: &DenseMatrix) -> Result<SymmetricEigen> {
    let n = a.dim();
    if n == 0 {
        return Err(Error::dimension("symmetric_eigen", "empty matrix"));
    }
    let mut v = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e);
    match tql2(&mut d, &mut e, Some(&mut v)) {
        Ok(()) => Ok(sorted(d, v)),
        Err(err) if n <= JACOBI_MAX_DIM => jacobi_eigen(a).map_err(|_| err),
        Err(err) => Err(err),
    }
}

/// Eigenvalues only (ascending).
pub fn symmetric_eigenvalues(a: &DenseMatrix) -> Result<Vec<f64>> {
    let n = a.dim();
    if n == 0 {
        return Err(Error::dimension("symmetric_eigenvalues", "empty matrix"));
    }
    let mut v = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Eigenvalues (ascending) of the symmetric tridiagonal matrix with the given
/// diagonal and off-diagonal (`off.len() == diag.len() - 1`).
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let (mut d, mut e) = tridiagonal_inputs(diag, off)?;
    tql2(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Eigen-decomposition of a symmetric tridiagonal matrix.
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<SymmetricEigen> {
    let (mut d, mut e) = tridiagonal_inputs(diag, off)?;
    let mut v = DenseMatrix::identity(diag.len());
    tql2(&mut d, &mut e, Some(&mut v))?;
    Ok(sorted(d, v))
}

fn tridiagonal_inputs(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if diag.is_empty() || off.len() + 1 != diag.len() {
        return Err(Error::dimension(
            "tridiagonal_eigen",
            format!("diag {} / off {}", diag.len(), off.len()),
        ));
    }
    // tql2 expects the sub-diagonal in e[1..n].
    let mut e = Vec::with_capacity(diag.len());
    e.push(0.0);
    e.extend_from_slice(off);
    Ok((diag.to_vec(), e))
}

fn sorted(d: Vec<f64>, v: DenseMatrix) -> SymmetricEigen {
    let n = d.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let mut vectors = DenseMatrix::zeros(n);
    for (new, &old) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, new)] = v[(i, old)];
        }
    }
    SymmetricEigen {
        values: order.iter().map(|&i| d[i]).collect(),
        vectors,
    }
}

/// Householder reduction to tridiagonal form. On exit `v` holds the
/// accumulated orthogonal transformation, `d` the diagonal and `e[1..]` the
/// sub-diagonal.
fn tred2(v: &mut DenseMatrix, d: &mut [f64], e: &mut [f64]) {
    let n = v.dim();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n.saturating_sub(1) {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL on a symmetric tridiagonal matrix (`d`, `e[1..]`). When `v` is
/// given, the rotations are accumulated into it.
fn tql2(d: &mut [f64], e: &mut [f64], mut v: Option<&mut DenseMatrix>) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1 = 0.0_f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > QL_MAX_SWEEPS {
                    return Err(Error::no_convergence(
                        "tql2",
                        format!("eigenvalue {l} not converged after {QL_MAX_SWEEPS} sweeps"),
                    ));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(v) = v.as_deref_mut() {
                        for k in 0..n {
                            let vh = v[(k, i + 1)];
                            v[(k, i + 1)] = s * v[(k, i)] + c * vh;
                            v[(k, i)] = c * v[(k, i)] - s * vh;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Cyclic Jacobi eigen-decomposition for small symmetric matrices.
pub fn jacobi_eigen(a: &DenseMatrix) -> Result<SymmetricEigen> {
    let n = a.dim();
    if n == 0 || n > JACOBI_MAX_DIM {
        return Err(Error::dimension(
            "jacobi_eigen",
            format!("dimension {n} outside 1..={JACOBI_MAX_DIM}"),
        ));
    }
    let mut m = a.clone();
    let mut v = DenseMatrix::identity(n);
    let scale: f64 = m.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)] * m[(p, q)];
            }
        }
        if off.sqrt() <= f64::EPSILON * scale.max(f64::MIN_POSITIVE) {
            let d = (0..n).map(|i| m[(i, i)]).collect();
            return Ok(sorted(d, v));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    Err(Error::no_convergence(
        "jacobi_eigen",
        format!("off-diagonal mass remains after {JACOBI_MAX_SWEEPS} sweeps"),
    ))
}

/// Eigen-decomposition of a complex Hermitian matrix, given row-major.
///
/// Eigenvalues are ascending; eigenvectors are returned as complex column
/// vectors.
pub fn hermitian_eigen(a: &[Complex64], n: usize) -> Result<(Vec<f64>, Vec<Vec<Complex64>>)> {
    if a.len() != n * n || n == 0 {
        return Err(Error::dimension(
            "hermitian_eigen",
            format!("expected {} entries, got {}", n * n, a.len()),
        ));
    }
    let emb = real_embedding(a, n);
    let eig = symmetric_eigen(&emb)?;
    // Each eigenvalue appears twice; the pair spans {(x, y), (-y, x)}, which
    // maps to the complex vectors x + iy and i(x + iy). Keep one
    // representative per complex direction by Gram-Schmidt in C^n.
    let mut values = Vec::with_capacity(n);
    let mut vectors: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for k in 0..2 * n {
        if vectors.len() == n {
            break;
        }
        let col = eig.vector(k);
        let mut z: Vec<Complex64> = (0..n).map(|i| Complex64::new(col[i], col[n + i])).collect();
        for u in &vectors {
            let proj: Complex64 = u.iter().zip(&z).map(|(a, b)| a.conj() * b).sum();
            for (zi, ui) in z.iter_mut().zip(u) {
                *zi -= proj * ui;
            }
        }
        let norm = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-4 {
            for zi in z.iter_mut() {
                *zi /= norm;
            }
            values.push(eig.values[k]);
            vectors.push(z);
        }
    }
    if vectors.len() != n {
        return Err(Error::no_convergence(
            "hermitian_eigen",
            "could not separate the doubled spectrum of the real embedding",
        ));
    }
    // The Rayleigh quotient of each representative is its eigenvalue.
    for (val, z) in values.iter_mut().zip(&vectors) {
        let mut q = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let row: Complex64 = (0..n).map(|j| a[i * n + j] * z[j]).sum();
            q += z[i].conj() * row;
        }
        *val = q.re;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    Ok((
        order.iter().map(|&i| values[i]).collect(),
        order.iter().map(|&i| vectors[i].clone()).collect(),
    ))
}

/// Eigenvalues (ascending) of a complex Hermitian matrix.
pub fn hermitian_eigenvalues(a: &[Complex64], n: usize) -> Result<Vec<f64>> {
    if a.len() != n * n || n == 0 {
        return Err(Error::dimension(
            "hermitian_eigenvalues",
            format!("expected {} entries, got {}", n * n, a.len()),
        ));
    }
    let doubled = symmetric_eigenvalues(&real_embedding(a, n))?;
    Ok(doubled.chunks_exact(2).map(|p| 0.5 * (p[0] + p[1])).collect())
}

fn real_embedding(a: &[Complex64], n: usize) -> DenseMatrix {
    let mut emb = DenseMatrix::zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = a[i * n + j];
            emb[(i, j)] = z.re;
            emb[(n + i, n + j)] = z.re;
            emb[(i, n + j)] = -z.im;
            emb[(n + i, j)] = z.im;
        }
    }
    emb
}

/// Lowest eigenpair found by Lanczos.
#[derive(Debug, Clone)]
pub struct LanczosPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Lanczos with full reorthogonalization for the lowest eigenpair of a
/// symmetric operator.
///
/// The Krylov space is kept orthogonal to every vector in `deflate` (assumed
/// orthonormal), so the result is the lowest eigenpair of the operator
/// restricted to their complement. Iteration stops once the Ritz residual
/// drops below `tol · norm_bound`.
pub fn lanczos_lowest<F>(
    apply: F,
    start: &[f64],
    deflate: &[&[f64]],
    norm_bound: f64,
    tol: f64,
    max_iter: usize,
) -> Result<LanczosPair>
where
    F: Fn(&[f64], &mut [f64]),
{
    let dim = start.len();
    let max_iter = max_iter.min(dim.saturating_sub(deflate.len())).max(1);
    let mut q = start.to_vec();
    project_out(&mut q, deflate);
    let norm = dot(&q, &q).sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::no_convergence(
            "lanczos_lowest",
            "start vector vanishes after deflation",
        ));
    }
    q.iter_mut().for_each(|x| *x /= norm);

    let threshold = tol * norm_bound.max(f64::MIN_POSITIVE);
    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];
    let mut last_estimate = f64::INFINITY;

    loop {
        let k = basis.len() - 1;
        apply(&basis[k], &mut w);
        let alpha = dot(&w, &basis[k]);
        alphas.push(alpha);
        // Two passes of classical Gram-Schmidt keep the basis orthogonal to
        // working precision.
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                axpy(-c, b, &mut w);
            }
            project_out(&mut w, deflate);
        }
        let beta = dot(&w, &w).sqrt();

        let m = alphas.len();
        let check = m == max_iter || beta <= threshold || m.is_multiple_of(4) || m < 4;
        if check {
            let t = tridiagonal_eigen(&alphas, &betas)?;
            let y = t.vector(0);
            let estimate = beta * y[m - 1].abs();
            last_estimate = estimate;
            if estimate <= threshold || beta <= threshold || m == max_iter {
                if estimate > threshold && beta > threshold {
                    return Err(Error::no_convergence(
                        "lanczos_lowest",
                        format!("{m} iterations, residual estimate {estimate:e}"),
                    ));
                }
                let mut v = vec![0.0; dim];
                for (coef, b) in y.iter().zip(&basis) {
                    axpy(*coef, b, &mut v);
                }
                let nv = dot(&v, &v).sqrt();
                v.iter_mut().for_each(|x| *x /= nv);
                return Ok(LanczosPair {
                    value: t.values[0],
                    vector: v,
                    iterations: m,
                    residual: estimate,
                });
            }
        }
        if m >= max_iter {
            return Err(Error::no_convergence(
                "lanczos_lowest",
                format!("{m} iterations, residual estimate {last_estimate:e}"),
            ));
        }
        betas.push(beta);
        let next: Vec<f64> = w.iter().map(|x| x / beta).collect();
        basis.push(next);
    }
}

fn project_out(v: &mut [f64], deflate: &[&[f64]]) {
    for d in deflate {
        let c = dot(v, d);
        axpy(-c, d, v);
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = DenseMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let x: f64 = rng.gen_range(-1.0..1.0);
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
        }
        m
    }

    fn residual(a: &DenseMatrix, eig: &SymmetricEigen) -> f64 {
        let mut worst = 0.0_f64;
        for k in 0..a.dim() {
            let v = eig.vector(k);
            let av = a.matvec(&v);
            let r: f64 = av
                .iter()
                .zip(&v)
                .map(|(x, y)| (x - eig.values[k] * y).powi(2))
                .sum::<f64>()
                .sqrt();
            worst = worst.max(r);
        }
        worst
    }

    #[test]
    fn two_by_two() {
        let a = DenseMatrix::from_row_major(2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let eig = symmetric_eigen(&a).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-14);
        assert!((eig.values[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn ql_matches_jacobi() {
        for (n, seed) in [(5, 1), (17, 2), (40, 3)] {
            let a = random_symmetric(n, seed);
            let ql = symmetric_eigen(&a).unwrap();
            let jac = jacobi_eigen(&a).unwrap();
            for (x, y) in ql.values.iter().zip(&jac.values) {
                assert!((x - y).abs() < 1e-12, "{x} vs {y}");
            }
            assert!(residual(&a, &ql) < 1e-12);
            assert!(residual(&a, &jac) < 1e-12);
        }
    }

    #[test]
    fn eigenvectors_orthonormal() {
        let a = random_symmetric(30, 9);
        let eig = symmetric_eigen(&a).unwrap();
        for i in 0..30 {
            for j in 0..30 {
                let d = dot(&eig.vector(i), &eig.vector(j));
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tridiagonal_known_spectrum() {
        // Path graph Laplacian-like matrix: eigenvalues 2 - 2cos(kπ/(n+1)).
        let n = 12;
        let diag = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        let vals = tridiagonal_eigenvalues(&diag, &off).unwrap();
        for (k, v) in vals.iter().enumerate() {
            let want = 2.0 - 2.0 * (((k + 1) as f64) * std::f64::consts::PI / (n as f64 + 1.0)).cos();
            assert!((v - want).abs() < 1e-13);
        }
    }

    #[test]
    fn hermitian_pauli_y() {
        let i = Complex64::i();
        let z = Complex64::new(0.0, 0.0);
        let a = vec![z, -i, i, z];
        let (vals, vecs) = hermitian_eigen(&a, 2).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
        // (1, i)/√2 is the +1 eigenvector up to phase
        let v = &vecs[1];
        let ratio = v[1] / v[0];
        assert!((ratio - i).norm() < 1e-12);
        let only = hermitian_eigenvalues(&a, 2).unwrap();
        assert!((only[0] + 1.0).abs() < 1e-14 && (only[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lanczos_matches_dense() {
        let n = 120;
        let a = random_symmetric(n, 5);
        let dense = symmetric_eigen(&a).unwrap();
        let start = vec![1.0; n];
        let pair = lanczos_lowest(
            |x, y| y.copy_from_slice(&a.matvec(x)),
            &start,
            &[],
            n as f64,
            1e-12,
            n,
        )
        .unwrap();
        assert!((pair.value - dense.values[0]).abs() < 1e-10);
        let v0 = dense.vector(0);
        assert!((dot(&v0, &pair.vector).abs() - 1.0).abs() < 1e-9);

        let second = lanczos_lowest(
            |x, y| y.copy_from_slice(&a.matvec(x)),
            &start,
            &[&pair.vector],
            n as f64,
            1e-12,
            n,
        )
        .unwrap();
        assert!((second.value - dense.values[1]).abs() < 1e-9);
    }
}
