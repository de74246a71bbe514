//! Thin wrappers over LAPACK: symmetric/Hermitian spectra and an SVD pseudo-solver.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use ndarray_linalg::{c64, EigValshInto, JobSvd, SVDDC, UPLO};

use crate::error::Result;

/// Numerical-rank threshold `max(rows, cols) * eps * largest`.
pub fn rank_tolerance(rows: usize, cols: usize, largest: f64) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON * largest.abs()
}

/// Ascending eigenvalues of a real symmetric matrix (lower triangle is read).
pub fn symmetric_eigenvalues(a: Array2<f64>) -> Result<Vec<f64>> {
    Ok(a.eigvalsh_into(UPLO::Lower)?.to_vec())
}

/// Ascending eigenvalues of a complex Hermitian matrix (lower triangle is read).
pub fn hermitian_eigenvalues(a: Array2<c64>) -> Result<Vec<f64>> {
    Ok(a.eigvalsh_into(UPLO::Lower)?.to_vec())
}

/// Thin SVD `A = U diag(s) Vᵀ` truncated at numerical rank.
///
/// Singular values below `rcond * s_max` with `rcond = max(rows, cols) * eps`
/// are treated as zero.
#[derive(Debug, Clone)]
pub struct PseudoInverse {
    u: Array2<f64>,
    s: Array1<f64>,
    vt: Array2<f64>,
    rank: usize,
    rows: usize,
    cols: usize,
}

impl PseudoInverse {
    pub fn new(a: ArrayView2<'_, f64>) -> Result<Self> {
        let (rows, cols) = a.dim();
        let (u, s, vt) = a.to_owned().svddc(JobSvd::Some)?;
        let u = u.expect("svddc with JobSvd::Some returns U");
        let vt = vt.expect("svddc with JobSvd::Some returns Vt");
        let s_max = s.first().copied().unwrap_or(0.0);
        let cutoff = rank_tolerance(rows, cols, s_max);
        let rank = s.iter().take_while(|&&v| v > cutoff && v > 0.0).count();
        Ok(Self {
            u,
            s,
            vt,
            rank,
            rows,
            cols,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn singular_values(&self) -> ArrayView1<'_, f64> {
        self.s.view()
    }

    /// `s_max / s_min` over all `min(rows, cols)` singular values; infinite when one vanishes.
    pub fn condition(&self) -> f64 {
        match (self.s.first(), self.s.last()) {
            (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
            (Some(_), Some(_)) => f64::INFINITY,
            _ => f64::NAN,
        }
    }

    /// Minimum-norm least-squares solution `A⁺ y`.
    pub fn solve(&self, y: ArrayView1<'_, f64>) -> Array1<f64> {
        let r = self.rank;
        let u = self.u.slice(ndarray::s![.., ..r]);
        let vt = self.vt.slice(ndarray::s![..r, ..]);
        let mut coeff = u.t().dot(&y);
        coeff.iter_mut().zip(self.s.iter()).for_each(|(c, &s)| *c /= s);
        vt.t().dot(&coeff)
    }

    /// Orthogonal projection onto the row space of `A`, i.e. `V Vᵀ v`.
    pub fn project_row_space(&self, v: ArrayView1<'_, f64>) -> Array1<f64> {
        let vt = self.vt.slice(ndarray::s![..self.rank, ..]);
        vt.t().dot(&vt.dot(&v))
    }

    /// Orthonormal basis of the row space, one basis vector per row.
    pub fn row_space_basis(&self) -> ArrayView2<'_, f64> {
        self.vt.slice(ndarray::s![..self.rank, ..])
    }
}

pub(crate) fn norm(v: ArrayView1<'_, f64>) -> f64 {
    v.dot(&v).sqrt()
}
