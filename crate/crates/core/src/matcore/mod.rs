//! Dense matrices and the deterministic kernels built on them.
//!
//! Everything here is a pure function of its inputs. Randomness lives in
//! [`crate::sampler`].

mod matrix;
mod svd;

pub use matrix::DenseMatrix;
pub use svd::{svd, SvdResult};

use crate::{Error, Result, Scalar};

/// Cutoff below which a singular value counts as zero.
pub fn rank_tolerance<T: Scalar>(rows: usize, cols: usize, sigma_max: T) -> T {
    T::of(T::RANK_EPS) * T::of_usize(rows.max(cols)) * sigma_max
}

/// Truncated SVD keeping the `k` leading triples.
pub fn truncate<T: Scalar>(svd: &SvdResult<T>, k: usize) -> SvdResult<T> {
    svd.truncate(k)
}

/// Best rank-`k` approximation `A_k` in Frobenius (and spectral) norm.
pub fn best_rank_k<T: Scalar>(a: &DenseMatrix<T>, k: usize) -> Result<DenseMatrix<T>> {
    Ok(svd(a)?.truncate(k).reconstruct())
}

/// Moore–Penrose pseudoinverse `V·Σ⁻¹·Uᵀ` over the numerical rank.
///
/// The zero matrix maps to the zero matrix of transposed shape.
pub fn pseudoinverse<T: Scalar>(a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    let dec = svd(a)?;
    Ok(dec.pseudoinverse())
}

pub fn frobenius_norm<T: Scalar>(a: &DenseMatrix<T>) -> T {
    a.frobenius_norm()
}

/// Largest singular value.
pub fn spectral_norm<T: Scalar>(a: &DenseMatrix<T>) -> Result<T> {
    Ok(svd(a)?.singular_values().first().copied().unwrap_or_else(T::zero))
}

/// Numerical rank under [`rank_tolerance`].
pub fn numerical_rank<T: Scalar>(a: &DenseMatrix<T>) -> Result<usize> {
    Ok(svd(a)?.rank())
}

/// `A·R†·R`, the projection of the rows of `A` onto the row space of `R`.
pub fn project_onto_rowspace<T: Scalar>(a: &DenseMatrix<T>, r: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if a.cols() != r.cols() {
        return Err(Error::DimensionMismatch {
            op: "project_onto_rowspace",
            left: a.shape(),
            right: r.shape(),
        });
    }
    let r_pinv = pseudoinverse(r)?;
    a.matmul(&r_pinv)?.matmul(r)
}

/// `C·C†·A`, the projection of the columns of `A` onto the column space of `C`.
pub fn project_onto_colspace<T: Scalar>(c: &DenseMatrix<T>, a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if c.rows() != a.rows() {
        return Err(Error::DimensionMismatch {
            op: "project_onto_colspace",
            left: c.shape(),
            right: a.shape(),
        });
    }
    let c_pinv = pseudoinverse(c)?;
    c.matmul(&c_pinv.matmul(a)?)
}

/// Stable rank `‖M‖_F² / ‖M‖_2²`; `None` for the zero matrix.
pub fn stable_rank<T: Scalar>(m: &DenseMatrix<T>) -> Result<Option<T>> {
    let fro2 = m.sum_of_squares();
    if fro2 == T::zero() {
        return Ok(None);
    }
    let sigma = spectral_norm(m)?;
    Ok(Some(fro2 / (sigma * sigma)))
}
