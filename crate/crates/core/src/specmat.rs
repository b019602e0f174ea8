//! Truncated Gram matrices of exponential systems and the Hermitian
//! spectral calculus built on them.
//!
//! Eigendecompositions use nalgebra's dense symmetric solver (Householder
//! tridiagonalization followed by implicit QR sweeps), which accepts complex
//! Hermitian input directly.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, LabError, Result};
use crate::numeric::pairwise_sum;
use crate::pointset::WindowedPointSet;
use crate::spectrum::Spectrum;

/// Largest dimension for dense matrices.
pub const MAX_DENSE_DIM: usize = 4096;

/// Default relative cutoff for the spectral pseudoinverse.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Relative threshold below which a negative eigenvalue of a PSD matrix
/// is treated as roundoff.
pub const NEGATIVE_EIG_CLAMP: f64 = 1e-10;

/// Allowed asymmetry when wrapping an arbitrary matrix.
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(DMatrix<Complex64>);

impl HermitianMatrix {
    /// Wraps `m` after checking `m = m*` up to [`HERMITIAN_TOL`] (relative
    /// to the largest entry). The stored matrix is exactly Hermitian.
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if !m.is_square() {
            return Err(invalid(format!("matrix is {}x{}, not square", m.nrows(), m.ncols())));
        }
        let n = m.nrows();
        let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let mut out = m.clone();
        for j in 0..n {
            for k in j..n {
                let a = m[(j, k)];
                let b = m[(k, j)].conj();
                if (a - b).norm() > HERMITIAN_TOL * scale {
                    return Err(invalid(format!(
                        "matrix is not Hermitian at ({j}, {k}): {a} vs conj {b}"
                    )));
                }
                let avg = (a + b) * 0.5;
                if j == k {
                    out[(j, j)] = Complex64::new(avg.re, 0.0);
                } else {
                    out[(j, k)] = avg;
                    out[(k, j)] = avg.conj();
                }
            }
        }
        Ok(Self(out))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self(DMatrix::from_fn(n, n, |j, k| {
            if j == k {
                Complex64::new(diag[j], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_real_diagonal(&vec![1.0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn entry(&self, j: usize, k: usize) -> Complex64 {
        self.0[(j, k)]
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn eigen(&self) -> EigenDecomposition {
        EigenDecomposition::of(self)
    }
}

/// `G_{jk} = ⟨e_{λ_k}, e_{λ_j}⟩ = 1̂_S(λ_j - λ_k)`; the diagonal is exactly
/// `|S|`. Rows are filled in parallel; every entry is computed once from
/// the upper triangle, so the result does not depend on scheduling.
pub fn assemble_gram(s: &Spectrum, pts: &WindowedPointSet) -> Result<HermitianMatrix> {
    let n = pts.len();
    if n > MAX_DENSE_DIM {
        return Err(LabError::ResourceLimit {
            what: "Gram dimension",
            requested: n,
            limit: MAX_DENSE_DIM,
        });
    }
    let lam = &pts.points;
    let upper: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            (j..n)
                .map(|k| s.ft_indicator_unchecked(lam[j] - lam[k]))
                .collect()
        })
        .collect();
    let mut g = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for (j, row) in upper.into_iter().enumerate() {
        for (off, z) in row.into_iter().enumerate() {
            let k = j + off;
            if j == k {
                g[(j, j)] = Complex64::new(z.re, 0.0);
            } else {
                g[(j, k)] = z;
                g[(k, j)] = z.conj();
            }
        }
    }
    Ok(HermitianMatrix(g))
}

/// Eigenvalues in descending order with orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl EigenDecomposition {
    pub fn of(g: &HermitianMatrix) -> Self {
        let n = g.dim();
        if n == 0 {
            return Self {
                values: Vec::new(),
                vectors: DMatrix::zeros(0, 0),
            };
        }
        let eig = SymmetricEigen::new(g.0.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Self { values, vectors }
    }

    /// `‖G - VΛV*‖_F / ‖G‖_F` (absolute when `G = 0`).
    pub fn reconstruction_residual(&self, g: &HermitianMatrix) -> f64 {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for c in 0..n {
            let v = self.values[c];
            scaled.column_mut(c).iter_mut().for_each(|z| *z *= v);
        }
        let rec = scaled * self.vectors.adjoint();
        let diff = (&g.0 - rec).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let norm = g.frobenius_norm();
        if norm > 0.0 {
            diff / norm
        } else {
            diff
        }
    }

    /// `‖V*V - I‖_max`.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.values.len();
        let gram = self.vectors.adjoint() * &self.vectors;
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for k in 0..n {
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((gram[(j, k)] - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// Smallest and largest eigenvalue. Negative values no smaller than
/// `-1e-10·λ_max` are reported as 0.
pub fn extremal_eigs(g: &HermitianMatrix) -> Result<(f64, f64)> {
    if g.dim() == 0 {
        return Err(invalid("extremal eigenvalues of an empty matrix"));
    }
    let eig = g.eigen();
    let max = eig.values[0];
    let mut min = *eig.values.last().unwrap();
    if min < 0.0 && min >= -NEGATIVE_EIG_CLAMP * max.abs() {
        min = 0.0;
    }
    Ok((min, max))
}

/// Retained part of the eigendecomposition of a PSD matrix: eigenpairs with
/// `λ > rank_tol·λ_max`. Serves the pseudoinverse, the range projection and
/// repeated quadratic forms `g*G⁺g` without refactoring.
#[derive(Debug, Clone)]
pub struct SpectralCutoff {
    pub dim: usize,
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
    pub lambda_max: f64,
}

impl SpectralCutoff {
    pub fn new(g: &HermitianMatrix, rank_tol: f64) -> Result<Self> {
        if !(rank_tol > 0.0 && rank_tol < 1.0) {
            return Err(invalid(format!("rank_tol must lie in (0, 1), got {rank_tol}")));
        }
        let n = g.dim();
        let eig = g.eigen();
        let lambda_max = eig.values.first().copied().unwrap_or(0.0).max(0.0);
        if let Some(&min) = eig.values.last() {
            if min < -NEGATIVE_EIG_CLAMP * lambda_max.max(f64::MIN_POSITIVE) && lambda_max > 0.0 {
                return Err(LabError::InvariantViolation(format!(
                    "matrix is not positive semidefinite: eigenvalue {min} against max {lambda_max}"
                )));
            }
        }
        let keep = if lambda_max > 0.0 {
            eig.values.iter().take_while(|&&v| v > rank_tol * lambda_max).count()
        } else {
            0
        };
        let vectors = eig.vectors.columns(0, keep).into_owned();
        Ok(Self {
            dim: n,
            values: eig.values[..keep].to_vec(),
            vectors,
            lambda_max,
        })
    }

    pub fn rank(&self) -> usize {
        self.values.len()
    }

    /// Smallest retained eigenvalue (0 when nothing is retained).
    pub fn lambda_min_retained(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Diagonal of `V_keep V_keep*`, the orthogonal projection onto the range.
    pub fn projection_diag(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|j| {
                let terms: Vec<f64> = (0..self.rank()).map(|i| self.vectors[(j, i)].norm_sqr()).collect();
                pairwise_sum(&terms).clamp(0.0, 1.0)
            })
            .collect()
    }

    /// Coordinates `v_i* rhs` in the retained eigenbasis.
    fn coords(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        (0..self.rank())
            .map(|i| {
                let terms: Vec<Complex64> =
                    (0..self.dim).map(|j| self.vectors[(j, i)].conj() * rhs[j]).collect();
                pairwise_sum(&terms)
            })
            .collect()
    }

    /// `G⁺ rhs = Σ_kept (v_i* rhs / λ_i) v_i`.
    pub fn solve(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        if rhs.len() != self.dim {
            return Err(invalid(format!("rhs has length {}, matrix has dimension {}", rhs.len(), self.dim)));
        }
        let c = self.coords(rhs);
        Ok((0..self.dim)
            .map(|j| {
                let terms: Vec<Complex64> =
                    (0..self.rank()).map(|i| self.vectors[(j, i)] * (c[i] / self.values[i])).collect();
                pairwise_sum(&terms)
            })
            .collect())
    }

    /// `g* G⁺ g = Σ_kept |v_i* g|² / λ_i`.
    pub fn pinv_quadratic_form(&self, g: &[Complex64]) -> f64 {
        let c = self.coords(g);
        let terms: Vec<f64> = c.iter().zip(&self.values).map(|(z, v)| z.norm_sqr() / v).collect();
        pairwise_sum(&terms)
    }
}

/// Diagonal of `G·G⁺`: for a finite exponential system this is
/// `⟨e_λ, S⁻¹ e_λ⟩` of that system. Every entry lies in `[0, 1]` and the
/// entries sum to the retained rank. The zero matrix gives all zeros.
pub fn range_projection_diag(g: &HermitianMatrix, rank_tol: f64) -> Result<Vec<f64>> {
    Ok(SpectralCutoff::new(g, rank_tol)?.projection_diag())
}

/// Spectral-cutoff least squares solve `G⁺·rhs`.
pub fn solve_psd(g: &HermitianMatrix, rhs: &[Complex64], rank_tol: f64) -> Result<Vec<Complex64>> {
    if rhs.len() != g.dim() {
        return Err(invalid(format!("rhs has length {}, matrix has dimension {}", rhs.len(), g.dim())));
    }
    SpectralCutoff::new(g, rank_tol)?.solve(rhs)
}
