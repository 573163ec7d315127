//! Dense real-symmetric eigensolver.
//!
//! Blocks up to [`JACOBI_MAX_DIM`] use cyclic Jacobi rotations; larger ones
//! are reduced to tridiagonal form by Householder reflections and finished
//! with implicit-shift QL. Accuracy is checked against the Frobenius norm of
//! the input, since eigenvalues here grow like `N^2`.

use std::sync::Arc;

use thiserror::Error;

use crate::hilbert::BlockBasis;
use crate::matrix::{DenseMatrix, HermitianMatrix};

pub const JACOBI_MAX_DIM: usize = 512;
pub const DEFAULT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EighError {
    #[error("cannot diagonalize an empty matrix")]
    Empty,
    #[error("tolerance must be positive and finite, got {0}")]
    BadTolerance(f64),
    #[error("matrix has a non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("{method} did not converge within {budget} iterations (dim {dim})")]
    NoConvergence { method: &'static str, budget: usize, dim: usize },
    #[error("eigenpair accuracy {achieved:e} exceeds bound {bound:e}")]
    AccuracyNotMet { achieved: f64, bound: f64 },
    #[error("spectrum carries no eigenvectors")]
    MissingEigenvectors,
    #[error("spectrum dimension {spectrum} does not match matrix dimension {matrix}")]
    DimensionMismatch { spectrum: usize, matrix: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Auto,
    Jacobi,
    TridiagonalQl,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EighOptions {
    pub want_vectors: bool,
    /// Relative to the Frobenius norm of the input.
    pub tol: f64,
    pub method: Method,
}

impl Default for EighOptions {
    fn default() -> Self {
        Self { want_vectors: false, tol: DEFAULT_TOL, method: Method::Auto }
    }
}

impl EighOptions {
    pub fn with_vectors() -> Self {
        Self { want_vectors: true, ..Self::default() }
    }
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector of `eigenvalues[k]`.
    pub eigenvectors: Option<DenseMatrix>,
    pub max_residual: Option<f64>,
    pub basis: Option<Arc<BlockBasis>>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    pub fn eigenvector(&self, k: usize) -> Option<Vec<f64>> {
        self.eigenvectors.as_ref().map(|v| v.column(k))
    }
}

/// Diagonalizes an assembled block.
pub fn eigh(matrix: &HermitianMatrix, opts: EighOptions) -> Result<Spectrum, EighError> {
    let mut spectrum = eigh_dense(&matrix.to_dense(), opts)?;
    spectrum.basis = Some(matrix.basis_arc());
    Ok(spectrum)
}

pub fn eigh_dense(matrix: &DenseMatrix, opts: EighOptions) -> Result<Spectrum, EighError> {
    let n = matrix.dim();
    if n == 0 {
        return Err(EighError::Empty);
    }
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(EighError::BadTolerance(opts.tol));
    }
    for i in 0..n {
        for j in 0..n {
            if !matrix[(i, j)].is_finite() {
                return Err(EighError::NonFinite(i, j));
            }
            if j < i && matrix[(i, j)] != matrix[(j, i)] {
                return Err(EighError::NotSymmetric(i, j));
            }
        }
    }

    let method = match opts.method {
        Method::Auto if n <= JACOBI_MAX_DIM => Method::Jacobi,
        Method::Auto => Method::TridiagonalQl,
        m => m,
    };
    let (values, vectors) = match method {
        Method::Jacobi => jacobi(matrix, opts.want_vectors)?,
        _ => tridiagonal_ql(matrix, opts.want_vectors)?,
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| values[k]).collect();
    let eigenvectors = vectors.map(|v| {
        let mut sorted = DenseMatrix::zeros(n);
        for (dst, &src) in order.iter().enumerate() {
            for i in 0..n {
                sorted[(i, dst)] = v[(i, src)];
            }
        }
        sorted
    });

    let mut spectrum = Spectrum { eigenvalues, eigenvectors, max_residual: None, basis: None };
    if let Some(vecs) = &spectrum.eigenvectors {
        let residuals = residuals_dense(matrix, &spectrum.eigenvalues, vecs);
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        let bound = opts.tol * matrix.frobenius_norm();
        if max_residual > bound {
            return Err(EighError::AccuracyNotMet { achieved: max_residual, bound });
        }
        let ortho = orthonormality_defect(vecs);
        if ortho > opts.tol {
            return Err(EighError::AccuracyNotMet { achieved: ortho, bound: opts.tol });
        }
        spectrum.max_residual = Some(max_residual);
    }
    Ok(spectrum)
}

/// `||H v_k - lambda_k v_k||_2` for every stored eigenpair.
pub fn residual_report(matrix: &HermitianMatrix, spectrum: &Spectrum) -> Result<Vec<f64>, EighError> {
    let vecs = spectrum.eigenvectors.as_ref().ok_or(EighError::MissingEigenvectors)?;
    if spectrum.dim() != matrix.dim() {
        return Err(EighError::DimensionMismatch { spectrum: spectrum.dim(), matrix: matrix.dim() });
    }
    Ok((0..spectrum.dim())
        .map(|k| {
            let v = vecs.column(k);
            residual(&matrix.matvec(&v), spectrum.eigenvalues[k], &v)
        })
        .collect())
}

fn residual(hv: &[f64], lambda: f64, v: &[f64]) -> f64 {
    hv.iter().zip(v).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt()
}

fn residuals_dense(matrix: &DenseMatrix, values: &[f64], vecs: &DenseMatrix) -> Vec<f64> {
    (0..values.len())
        .map(|k| {
            let v = vecs.column(k);
            residual(&matrix.matvec(&v), values[k], &v)
        })
        .collect()
}

/// `max_ij |<v_i, v_j> - delta_ij|`.
pub fn orthonormality_defect(vecs: &DenseMatrix) -> f64 {
    let n = vecs.dim();
    let cols: Vec<Vec<f64>> = (0..n).map(|k| vecs.column(k)).collect();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let dot: f64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

/// Cyclic Jacobi with threshold skipping on the first sweeps.
fn jacobi(matrix: &DenseMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<DenseMatrix>), EighError> {
    let n = matrix.dim();
    let budget = 64 * n * n;
    let mut a = matrix.clone();
    let mut v = want_vectors.then(|| DenseMatrix::identity(n));
    let mut d: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    let mut b = d.clone();
    let mut z = vec![0.0; n];
    let mut rotations = 0usize;

    for sweep in 1.. {
        let off: f64 = (0..n).flat_map(|p| (p + 1..n).map(move |q| (p, q))).map(|(p, q)| a[(p, q)].abs()).sum();
        if off == 0.0 {
            break;
        }
        let threshold = if sweep < 4 { 0.2 * off / (n * n) as f64 } else { 0.0 };
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let guard = 100.0 * apq.abs();
                if sweep > 4 && d[p].abs() + guard == d[p].abs() && d[q].abs() + guard == d[q].abs() {
                    a[(p, q)] = 0.0;
                    continue;
                }
                if apq.abs() <= threshold {
                    continue;
                }
                rotations += 1;
                if rotations > budget {
                    return Err(EighError::NoConvergence { method: "jacobi", budget, dim: n });
                }
                let gap = d[q] - d[p];
                let t = if gap.abs() + guard == gap.abs() {
                    apq / gap
                } else {
                    let theta = 0.5 * gap / apq;
                    let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                let h = t * apq;
                z[p] -= h;
                z[q] += h;
                d[p] -= h;
                d[q] += h;
                a[(p, q)] = 0.0;

                let rotate = |m: &mut DenseMatrix, i: usize, j: usize, k: usize, l: usize| {
                    let g = m[(i, j)];
                    let h = m[(k, l)];
                    m[(i, j)] = g - s * (h + g * tau);
                    m[(k, l)] = h + s * (g - h * tau);
                };
                for j in 0..p {
                    rotate(&mut a, j, p, j, q);
                }
                for j in p + 1..q {
                    rotate(&mut a, p, j, j, q);
                }
                for j in q + 1..n {
                    rotate(&mut a, p, j, q, j);
                }
                if let Some(v) = v.as_mut() {
                    for j in 0..n {
                        rotate(v, j, p, j, q);
                    }
                }
            }
        }
        for i in 0..n {
            b[i] += z[i];
            d[i] = b[i];
            z[i] = 0.0;
        }
    }
    Ok((d, v))
}

/// Householder tridiagonalization followed by implicit QL with Wilkinson-style
/// shifts (the EISPACK tred2/tql2 pair).
fn tridiagonal_ql(matrix: &DenseMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<DenseMatrix>), EighError> {
    let n = matrix.dim();
    let mut v = matrix.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    householder_tridiagonalize(&mut v, &mut d, &mut e);
    ql_implicit(&mut d, &mut e, want_vectors.then_some(&mut v))?;
    Ok((d, want_vectors.then_some(v)))
}

fn householder_tridiagonalize(v: &mut DenseMatrix, d: &mut [f64], e: &mut [f64]) {
    let n = v.dim();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in &d[..i] {
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
            for dk in &mut d[..i] {
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
                for k in j + 1..i {
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

    // accumulate the reflections
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

fn ql_implicit(d: &mut [f64], e: &mut [f64], mut v: Option<&mut DenseMatrix>) -> Result<(), EighError> {
    let n = d.len();
    const MAX_ITER_PER_VALUE: usize = 60;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_ITER_PER_VALUE {
                    return Err(EighError::NoConvergence {
                        method: "tridiagonal-ql",
                        budget: MAX_ITER_PER_VALUE * n,
                        dim: n,
                    });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
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
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(v) = v.as_deref_mut() {
                        for k in 0..n {
                            let h = v[(k, i + 1)];
                            v[(k, i + 1)] = s * v[(k, i)] + c * h;
                            v[(k, i)] = c * v[(k, i)] - s * h;
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
