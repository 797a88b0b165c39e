//! Leverage-type scores over a fixed grouping of columns.
//!
//! All scores are computed from an orthonormal basis of the top-k singular
//! subspace: right singular vectors `V_k` (n×k) for column and block scores,
//! left singular vectors `U_k` (m×k) for incoherence and row scores.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::matcore::{svd, DenseMatrix};
use crate::sampler::BlockDistribution;
use crate::{Error, Result, Scalar};

/// Contiguous, disjoint, non-empty column ranges covering `[0, n)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPartition {
    n: usize,
    starts: Vec<usize>,
    nominal_width: Option<usize>,
}

impl BlockPartition {
    /// Blocks of width `s`; the last block holds the remainder.
    pub fn uniform(n: usize, s: usize) -> Result<Self> {
        if n == 0 || s == 0 {
            return Err(Error::InvalidPartition(format!(
                "need n >= 1 and block size >= 1, got n={n}, s={s}"
            )));
        }
        Ok(Self {
            n,
            starts: (0..n).step_by(s).collect(),
            nominal_width: Some(s),
        })
    }

    /// Blocks split at the given interior cut points. A leading `0` and a
    /// trailing `n` are accepted and ignored.
    pub fn from_cut_points(n: usize, cuts: &[usize]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPartition("n must be at least 1".into()));
        }
        let mut starts = vec![0];
        for &c in cuts {
            if c == 0 && starts.len() == 1 {
                continue;
            }
            if c == n {
                continue;
            }
            if c > n {
                return Err(Error::InvalidPartition(format!("cut point {c} exceeds n={n}")));
            }
            if c <= *starts.last().unwrap() {
                return Err(Error::InvalidPartition(format!(
                    "cut points must be strictly increasing, got {c} after {}",
                    starts.last().unwrap()
                )));
            }
            starts.push(c);
        }
        if cuts.iter().rev().skip(1).any(|&c| c == n) {
            return Err(Error::InvalidPartition(format!("cut point {n} may only appear last")));
        }
        Ok(Self {
            n,
            starts,
            nominal_width: None,
        })
    }

    pub fn singletons(n: usize) -> Result<Self> {
        Self::uniform(n, 1)
    }

    pub fn whole(n: usize) -> Result<Self> {
        Self::uniform(n, n)
    }

    /// Total number of columns.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of blocks `G`.
    pub fn len(&self) -> usize {
        self.starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.starts.is_empty()
    }

    pub fn nominal_width(&self) -> Option<usize> {
        self.nominal_width
    }

    pub fn block(&self, g: usize) -> Range<usize> {
        let end = self.starts.get(g + 1).copied().unwrap_or(self.n);
        self.starts[g]..end
    }

    pub fn width(&self, g: usize) -> usize {
        self.block(g).len()
    }

    pub fn max_width(&self) -> usize {
        self.iter().map(|r| r.len()).max().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        (0..self.len()).map(move |g| self.block(g))
    }

    /// Block holding column `j`.
    pub fn block_of(&self, j: usize) -> Result<usize> {
        if j >= self.n {
            return Err(Error::UnknownIndex {
                kind: "column",
                index: j,
                limit: self.n,
            });
        }
        Ok(self.starts.partition_point(|&s| s <= j) - 1)
    }

    pub(crate) fn check_columns(&self, n: usize, op: &'static str) -> Result<()> {
        if self.n != n {
            return Err(Error::DimensionMismatch {
                op,
                left: (self.n, self.len()),
                right: (n, 0),
            });
        }
        Ok(())
    }
}

/// Non-negative scores, one per block (or column), with the divisor that
/// turns them into probabilities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreVector<T> {
    scores: Vec<T>,
    normalizer: T,
}

impl<T: Scalar> ScoreVector<T> {
    pub fn new(scores: Vec<T>, normalizer: T) -> Result<Self> {
        if scores.iter().any(|&s| !(s >= T::zero()) || !s.is_finite()) {
            return Err(Error::invalid("scores must be finite and non-negative"));
        }
        if !(normalizer > T::zero()) {
            return Err(Error::invalid("normalizer must be positive"));
        }
        Ok(Self { scores, normalizer })
    }

    pub fn scores(&self) -> &[T] {
        &self.scores
    }

    pub fn normalizer(&self) -> T {
        self.normalizer
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn total(&self) -> T {
        self.scores.iter().copied().sum()
    }

    /// `score / normalizer` for each entry.
    pub fn probabilities(&self) -> Vec<T> {
        self.scores.iter().map(|&s| s / self.normalizer).collect()
    }

    /// Index of the largest score.
    pub fn argmax(&self) -> Option<usize> {
        self.scores
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, _)| i)
    }

    /// Scores divided by their actual sum, as a sampling distribution.
    pub fn distribution(&self) -> Result<BlockDistribution> {
        let total = self.total().f64();
        if !(total > 0.0) {
            return Err(Error::ZeroMatrix);
        }
        BlockDistribution::new(self.scores.iter().map(|s| s.f64() / total).collect())
    }
}

/// Fails with [`Error::InvalidBasis`] unless `qᵀq` is within tolerance of `I`.
pub fn check_orthonormal<T: Scalar>(q: &DenseMatrix<T>) -> Result<()> {
    let gram = q.t_matmul(q)?;
    let deviation = gram
        .max_abs_diff(&DenseMatrix::identity(q.cols()))
        .map_or(f64::INFINITY, |d| d.f64());
    if deviation > T::BASIS_TOL {
        return Err(Error::InvalidBasis { deviation });
    }
    Ok(())
}

fn squared_row_norms<T: Scalar>(q: &DenseMatrix<T>) -> Vec<T> {
    (0..q.rows()).map(|i| q.row(i).iter().map(|&x| x * x).sum()).collect()
}

/// Squared row norms of `V_k`; they sum to `k`.
pub fn column_leverage<T: Scalar>(v_k: &DenseMatrix<T>) -> Result<ScoreVector<T>> {
    check_orthonormal(v_k)?;
    ScoreVector::new(squared_row_norms(v_k), T::of_usize(v_k.cols().max(1)))
}

/// Row leverage from `U_k`, used for leverage-based row sampling.
pub fn row_leverage<T: Scalar>(u_k: &DenseMatrix<T>) -> Result<ScoreVector<T>> {
    column_leverage(u_k)
}

/// `ℓ_g = ‖V_kᵀ E_g‖_F²` for each block.
pub fn block_leverage<T: Scalar>(v_k: &DenseMatrix<T>, part: &BlockPartition) -> Result<ScoreVector<T>> {
    part.check_columns(v_k.rows(), "block_leverage")?;
    let columns = column_leverage(v_k)?;
    let scores = part.iter().map(|r| columns.scores[r].iter().copied().sum()).collect();
    ScoreVector::new(scores, columns.normalizer)
}

/// Minimum over non-zero column blocks of `M` of `‖M_g‖_F² / ‖M_g‖_2²`.
/// Blocks with no mass are skipped; returns `None` if every block is zero.
pub fn column_block_stable_rank<T: Scalar>(m: &DenseMatrix<T>, part: &BlockPartition) -> Result<Option<T>> {
    part.check_columns(m.cols(), "column_block_stable_rank")?;
    let mut best: Option<T> = None;
    for range in part.iter() {
        let block = m.column_range(range);
        if block.sum_of_squares() <= T::epsilon() * m.sum_of_squares() {
            continue;
        }
        let dec = svd(&block)?;
        let s1 = dec.singular_values()[0];
        // the ratio is at least 1; clamp away rounding
        let ratio = (block.sum_of_squares() / (s1 * s1)).max(T::one());
        best = Some(best.map_or(ratio, |b: T| b.min(ratio)));
    }
    Ok(best)
}

/// Block stable rank `α = min_g ‖V_kᵀE_g‖_F² / ‖V_kᵀE_g‖_2²`.
///
/// Fails with [`Error::ZeroBlock`] if some block carries no top-k mass.
pub fn block_stable_rank<T: Scalar>(v_k: &DenseMatrix<T>, part: &BlockPartition) -> Result<T> {
    let scores = block_leverage(v_k, part)?;
    if let Some(g) = scores.scores.iter().position(|&s| s <= T::epsilon()) {
        return Err(Error::ZeroBlock { block: g });
    }
    block_stable_rank_nonzero(v_k, part).map(|a| a.expect("every block is non-zero"))
}

/// Like [`block_stable_rank`] but skips zero blocks instead of failing.
pub fn block_stable_rank_nonzero<T: Scalar>(v_k: &DenseMatrix<T>, part: &BlockPartition) -> Result<Option<T>> {
    Ok(per_block_stable_rank(v_k, part)?.into_iter().flatten().reduce(T::min))
}

/// `‖V_kᵀE_g‖_F² / ‖V_kᵀE_g‖_2²` for every block, `None` for blocks that
/// carry no top-k mass.
pub fn per_block_stable_rank<T: Scalar>(v_k: &DenseMatrix<T>, part: &BlockPartition) -> Result<Vec<Option<T>>> {
    check_orthonormal(v_k)?;
    let vt = v_k.transpose();
    part.check_columns(vt.cols(), "block_stable_rank")?;
    let total = T::of_usize(v_k.cols());
    part.iter()
        .map(|range| {
            let block = vt.column_range(range);
            let fro2 = block.sum_of_squares();
            if fro2 <= T::epsilon() * total {
                return Ok(None);
            }
            let s1 = svd(&block)?.singular_values()[0];
            Ok(Some((fro2 / (s1 * s1)).max(T::one())))
        })
        .collect()
}

/// Column-space incoherence `μ = (m/k)·max_i ‖U_kᵀ e_i‖²`.
pub fn incoherence<T: Scalar>(u_k: &DenseMatrix<T>) -> Result<T> {
    check_orthonormal(u_k)?;
    let (m, k) = u_k.shape();
    if k == 0 {
        return Err(Error::invalid("incoherence needs k >= 1"));
    }
    let max_row = squared_row_norms(u_k).into_iter().fold(T::zero(), T::max);
    Ok(T::of_usize(m) / T::of_usize(k) * max_row)
}

/// Block scores from the right singular vectors of a row sample `R`.
///
/// Uses all `rank(R)` (at most `r`) singular vectors; the normalizer is that
/// rank, so the probabilities sum to one.
pub fn approx_block_leverage<T: Scalar>(r: &DenseMatrix<T>, part: &BlockPartition) -> Result<ScoreVector<T>> {
    part.check_columns(r.cols(), "approx_block_leverage")?;
    let dec = svd(r)?;
    if dec.rank() == 0 {
        return Err(Error::ZeroMatrix);
    }
    block_leverage(dec.right(), part)
}
