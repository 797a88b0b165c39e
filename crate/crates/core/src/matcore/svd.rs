use serde::Serialize;

use super::{rank_tolerance, DenseMatrix};
use crate::{Error, Result, Scalar};

const MAX_SWEEPS: usize = 80;

/// Thin SVD `A = U·diag(σ)·Vᵀ` restricted to the numerical rank ρ.
///
/// `left` is `m×ρ`, `right` is `n×ρ`, both with orthonormal columns, and
/// `singular_values` is non-increasing and strictly above the rank cutoff.
#[derive(Debug, Clone, Serialize)]
pub struct SvdResult<T> {
    left: DenseMatrix<T>,
    singular_values: Vec<T>,
    right: DenseMatrix<T>,
}

impl<T: Scalar> SvdResult<T> {
    pub fn left(&self) -> &DenseMatrix<T> {
        &self.left
    }

    pub fn right(&self) -> &DenseMatrix<T> {
        &self.right
    }

    pub fn singular_values(&self) -> &[T] {
        &self.singular_values
    }

    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    pub fn left_rows(&self) -> usize {
        self.left.rows()
    }

    pub fn right_rows(&self) -> usize {
        self.right.rows()
    }

    /// Keeps the `min(k, ρ)` leading triples.
    pub fn truncate(&self, k: usize) -> Self {
        let keep = k.min(self.rank());
        Self {
            left: self.left.column_range(0..keep),
            singular_values: self.singular_values[..keep].to_vec(),
            right: self.right.column_range(0..keep),
        }
    }

    /// `U·diag(σ)·Vᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix<T> {
        let (m, n) = (self.left.rows(), self.right.rows());
        let rho = self.rank();
        DenseMatrix::from_fn(m, n, |i, j| {
            (0..rho)
                .map(|l| self.left.get(i, l) * self.singular_values[l] * self.right.get(j, l))
                .sum()
        })
    }

    /// `V·diag(σ)⁻¹·Uᵀ`, an `n×m` matrix.
    pub fn pseudoinverse(&self) -> DenseMatrix<T> {
        let (m, n) = (self.left.rows(), self.right.rows());
        let rho = self.rank();
        let inv: Vec<T> = self.singular_values.iter().map(|&s| T::one() / s).collect();
        DenseMatrix::from_fn(n, m, |i, j| {
            (0..rho)
                .map(|l| self.right.get(i, l) * inv[l] * self.left.get(j, l))
                .sum()
        })
    }

    fn transposed(self) -> Self {
        Self {
            left: self.right,
            singular_values: self.singular_values,
            right: self.left,
        }
    }
}

/// Thin SVD by one-sided (Hestenes) Jacobi rotations.
///
/// Works on the orientation with fewer columns, so wide inputs are handled
/// through their transpose. Fails with [`Error::IterationFailure`] if the
/// column pairs are not mutually orthogonal after the sweep budget.
pub fn svd<T: Scalar>(a: &DenseMatrix<T>) -> Result<SvdResult<T>> {
    if a.rows() < a.cols() {
        return Ok(jacobi_tall(&a.transpose())?.transposed());
    }
    jacobi_tall(a)
}

fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).map(|(&a, &b)| a * b).sum()
}

fn rotate<T: Scalar>(x: &mut [T], y: &mut [T], c: T, s: T) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (p, q) = (*a, *b);
        *a = c * p - s * q;
        *b = s * p + c * q;
    }
}

fn jacobi_tall<T: Scalar>(a: &DenseMatrix<T>) -> Result<SvdResult<T>> {
    let (m, n) = a.shape();
    let mut cols = a.columns();
    let mut v: Vec<Vec<T>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { T::one() } else { T::zero() }).collect())
        .collect();
    let tol = T::epsilon() * T::of_usize(m.max(1));

    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (head, tail) = cols.split_at_mut(q);
                let (cp, cq) = (&mut head[p], &mut tail[0]);
                let alpha = dot(cp, cp);
                let beta = dot(cq, cq);
                if alpha == T::zero() || beta == T::zero() {
                    continue;
                }
                let gamma = dot(cp, cq);
                if gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::of(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + T::one().hypot(zeta));
                let c = T::one() / T::one().hypot(t);
                let s = c * t;
                rotate(cp, cq, c, s);
                let (vh, vt) = v.split_at_mut(q);
                rotate(&mut vh[p], &mut vt[0], c, s);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::IterationFailure { sweeps: MAX_SWEEPS });
    }

    let norms: Vec<T> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(std::cmp::Ordering::Equal));
    let sigma_max = norms.get(order.first().copied().unwrap_or(0)).copied().unwrap_or_else(T::zero);
    let cutoff = rank_tolerance(m, n, sigma_max);

    let kept: Vec<usize> = order
        .into_iter()
        .take_while(|&j| norms[j] > cutoff && norms[j] > T::zero())
        .collect();
    let singular_values: Vec<T> = kept.iter().map(|&j| norms[j]).collect();
    let left_cols: Vec<Vec<T>> = kept
        .iter()
        .map(|&j| cols[j].iter().map(|&x| x / norms[j]).collect())
        .collect();
    let right_cols: Vec<Vec<T>> = kept.iter().map(|&j| v[j].clone()).collect();

    Ok(SvdResult {
        left: DenseMatrix::from_columns(m, &left_cols),
        singular_values,
        right: DenseMatrix::from_columns(n, &right_cols),
    })
}
