//! Block sketches behind the CUR guarantee: approximate multiplication by
//! sampled column/row blocks, blocked generalized least squares, and block
//! column subset selection.

pub mod harness;

use serde::Serialize;

use crate::leverage::{block_leverage, column_block_stable_rank, BlockPartition, ScoreVector};
use crate::matcore::{project_onto_colspace, pseudoinverse, svd, DenseMatrix};
use crate::sampler::{draw_blocks, materialize_columns, materialize_row_blocks, BlockDistribution, Generator, SamplingMode, SamplingPlan};
use crate::{Error, Result, Scalar};

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::invalid(format!("beta must be in (0, 1], got {beta}")));
    }
    Ok(())
}

/// Block probabilities `β·‖A^(i)‖_F²/‖A‖_F² + (1−β)/G`.
///
/// `β = 1` is the exact Frobenius-mass distribution; smaller `β` mixes in
/// the uniform distribution while keeping `p_i ≥ β·share_i`. The scores are
/// the probabilities themselves (normalizer 1).
pub fn frobenius_block_probs<T: Scalar>(a: &DenseMatrix<T>, part: &BlockPartition, beta: f64) -> Result<ScoreVector<T>> {
    check_beta(beta)?;
    part.check_columns(a.cols(), "frobenius_block_probs")?;
    let total = a.sum_of_squares();
    if total == T::zero() {
        return Err(Error::ZeroMatrix);
    }
    let g = T::of_usize(part.len());
    let beta_t = T::of(beta);
    let scores = part
        .iter()
        .map(|r| {
            let mass = a.column_range(r).sum_of_squares();
            beta_t * mass / total + (T::one() - beta_t) / g
        })
        .collect();
    ScoreVector::new(scores, T::one())
}

/// One realization of `C·R ≈ A·B`.
#[derive(Debug, Clone)]
pub struct ProductSketch<T> {
    pub product: DenseMatrix<T>,
    pub plan: SamplingPlan,
}

/// `C·R` where `C = A·S` samples column blocks of `A` and `R = Sᵀ·B` the
/// matching row blocks of `B`, both from the same plan.
pub fn approx_product_with_plan<T: Scalar>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    part: &BlockPartition,
    plan: &SamplingPlan,
) -> Result<DenseMatrix<T>> {
    if a.cols() != b.rows() {
        return Err(Error::DimensionMismatch {
            op: "approx_product",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let c = materialize_columns(a, part, plan)?;
    let r = materialize_row_blocks(b, part, plan)?;
    c.matmul(&r)
}

pub fn approx_product<T: Scalar>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    part: &BlockPartition,
    probs: &BlockDistribution,
    g: usize,
    mode: SamplingMode,
    rng: &mut Generator,
) -> Result<ProductSketch<T>> {
    if probs.len() != part.len() {
        return Err(Error::DistributionInvalid(format!(
            "{} probabilities for {} blocks",
            probs.len(),
            part.len()
        )));
    }
    let plan = draw_blocks(probs, g, mode, rng)?;
    let product = approx_product_with_plan(a, b, part, &plan)?;
    Ok(ProductSketch { product, plan })
}

/// Entry-wise variance of `C·R` under i.i.d. sampling:
/// `(1/g)·(Σ_i (A^(i)B_(i))²/p_i − (AB)²)`.
pub fn product_variance<T: Scalar>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    part: &BlockPartition,
    probs: &BlockDistribution,
    g: usize,
) -> Result<DenseMatrix<T>> {
    let exact = a.matmul(b)?;
    let (m, p) = exact.shape();
    let mut acc = DenseMatrix::zeros(m, p);
    for (i, range) in part.iter().enumerate() {
        let pi = probs.probabilities()[i];
        let term = a.column_range(range.clone()).matmul(&b.row_range(range))?;
        if pi == 0.0 {
            if !term.is_zero() {
                return Err(Error::DistributionInvalid(format!("block {i} has mass but zero probability")));
            }
            continue;
        }
        acc = acc.add(&term.map(|x| x * x / T::of(pi)))?;
    }
    let gf = T::of_usize(g);
    acc.sub(&exact.map(|x| x * x)).map(|v| v.scale(T::one() / gf))
}

/// `‖A‖_F‖B‖_F / (δ·√(β·g·α_A))`, the failure-probability-δ error bound.
pub fn multiplication_bound<T: Scalar>(a: &DenseMatrix<T>, b: &DenseMatrix<T>, part: &BlockPartition, beta: f64, g: usize, delta: f64) -> Result<f64> {
    check_beta(beta)?;
    check_delta(delta)?;
    let alpha = column_block_stable_rank(a, part)?.ok_or(Error::ZeroMatrix)?.f64();
    Ok(a.frobenius_norm().f64() * b.frobenius_norm().f64() / (delta * (beta * g as f64 * alpha).sqrt()))
}

/// Blocks needed for relative multiplication error `ε` at failure `δ`:
/// `⌈1/(δ²ε²α)⌉`.
pub fn multiplication_blocks(delta: f64, eps: f64, alpha: f64) -> Result<usize> {
    check_delta(delta)?;
    check_unit("eps", eps)?;
    if !(alpha >= 1.0) {
        return Err(Error::invalid(format!("alpha must be >= 1, got {alpha}")));
    }
    Ok((1.0 / (delta * delta * eps * eps * alpha)).ceil() as usize)
}

/// Blocks for the blocked regression bound: `⌈c·k²/(α·δ⁴·ε²)⌉` with the
/// constant `c` left to the caller.
pub fn regression_blocks(k: usize, alpha: f64, eps: f64, delta: f64, constant: f64) -> Result<usize> {
    check_delta(delta)?;
    check_unit("eps", eps)?;
    if !(constant > 0.0) || !(alpha >= 1.0) {
        return Err(Error::invalid("constant must be positive and alpha >= 1"));
    }
    let k = k as f64;
    Ok(((constant * k * k / (alpha * delta.powi(4) * eps * eps)).ceil() as usize).max(1))
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    check_unit("delta", delta)
}

pub(crate) fn check_unit(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::invalid(format!("{name} must be in (0, 1), got {x}")));
    }
    Ok(())
}

/// Block probabilities from `B`'s top right singular vectors,
/// `p_i = ‖(V_{B,k})_(i)‖_F²/k` with `k = rank(B)`. Also returns `V_{B,k}`.
pub fn regression_probs<T: Scalar>(b: &DenseMatrix<T>, part: &BlockPartition) -> Result<(ScoreVector<T>, DenseMatrix<T>)> {
    part.check_columns(b.cols(), "regression_probs")?;
    let dec = svd(b)?;
    if dec.rank() == 0 {
        return Err(Error::ZeroMatrix);
    }
    Ok((block_leverage(dec.right(), part)?, dec.right().clone()))
}

#[derive(Debug, Clone, Serialize)]
pub struct RegressionSketch<T> {
    /// `X̃ = (A·S)·(B·S)†`.
    pub x: DenseMatrix<T>,
    pub plan: SamplingPlan,
    /// `‖A − X̃·B‖_F`
    pub residual: T,
    /// `‖A − A·B†·B‖_F`
    pub optimal_residual: T,
}

/// `min_X ‖A − X·B‖_F` solved on sampled column blocks of `A` and `B`.
pub fn blocked_regression_with_plan<T: Scalar>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    part: &BlockPartition,
    plan: &SamplingPlan,
) -> Result<RegressionSketch<T>> {
    if a.cols() != b.cols() {
        return Err(Error::DimensionMismatch {
            op: "blocked_regression",
            left: a.shape(),
            right: b.shape(),
        });
    }
    if b.is_zero() {
        return Err(Error::ZeroMatrix);
    }
    let b_pinv = pseudoinverse(b)?;
    let optimal = a.matmul(&b_pinv)?.matmul(b)?;
    let optimal_residual = a.sub(&optimal)?.frobenius_norm();
    let a_s = materialize_columns(a, part, plan)?;
    let b_s = materialize_columns(b, part, plan)?;
    let x = a_s.matmul(&pseudoinverse(&b_s)?)?;
    let residual = a.sub(&x.matmul(b)?)?.frobenius_norm();
    Ok(RegressionSketch {
        x,
        plan: plan.clone(),
        residual,
        optimal_residual,
    })
}

pub fn blocked_regression<T: Scalar>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    part: &BlockPartition,
    g: usize,
    mode: SamplingMode,
    rng: &mut Generator,
) -> Result<RegressionSketch<T>> {
    let (scores, _) = regression_probs(b, part)?;
    let plan = draw_blocks(&scores.distribution()?, g, mode, rng)?;
    blocked_regression_with_plan(a, b, part, &plan)
}

#[derive(Debug, Clone)]
pub struct CssOutcome<T> {
    pub c: DenseMatrix<T>,
    pub plan: SamplingPlan,
    /// `‖A − C·C†·A‖_F`
    pub error: T,
    /// `‖A − A_k‖_F`
    pub best_k_residual: T,
}

/// Block column subset selection with probabilities from `A`'s own top-k
/// block leverage.
pub fn block_css<T: Scalar>(
    a: &DenseMatrix<T>,
    part: &BlockPartition,
    k: usize,
    g: usize,
    mode: SamplingMode,
    rng: &mut Generator,
) -> Result<CssOutcome<T>> {
    part.check_columns(a.cols(), "block_css")?;
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let dec = svd(a)?;
    if dec.rank() == 0 {
        return Err(Error::ZeroMatrix);
    }
    let top = dec.truncate(k);
    let best_k_residual = dec.singular_values().iter().skip(k).map(|&s| s * s).sum::<T>().sqrt();
    let plan = draw_blocks(&block_leverage(top.right(), part)?.distribution()?, g, mode, rng)?;
    css_with_plan(a, part, plan, best_k_residual)
}

pub(crate) fn css_with_plan<T: Scalar>(a: &DenseMatrix<T>, part: &BlockPartition, plan: SamplingPlan, best_k_residual: T) -> Result<CssOutcome<T>> {
    let c = materialize_columns(a, part, &plan)?;
    let error = a.sub(&project_onto_colspace(&c, a)?)?.frobenius_norm();
    Ok(CssOutcome {
        c,
        plan,
        error,
        best_k_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::identity_plan;

    fn block_matrix() -> DenseMatrix<f64> {
        DenseMatrix::from_fn(4, 6, |i, j| ((i * 3 + j * 5) % 7) as f64 - 3.0 + 0.5 * (i == j) as u8 as f64)
    }

    #[test]
    fn frobenius_probs() {
        let part = BlockPartition::uniform(4, 2).unwrap();
        let p = frobenius_block_probs(&DenseMatrix::<f64>::identity(4), &part, 1.0).unwrap();
        assert_eq!(p.scores(), &[0.5, 0.5]);

        let a = block_matrix();
        let part = BlockPartition::uniform(6, 2).unwrap();
        let exact = frobenius_block_probs(&a, &part, 1.0).unwrap();
        let total = a.sum_of_squares();
        for (g, r) in part.iter().enumerate() {
            let share = a.column_range(r).sum_of_squares() / total;
            assert!((exact.scores()[g] - share).abs() < 1e-15);
        }
        let mixed = frobenius_block_probs(&a, &part, 0.5).unwrap();
        for (m, e) in mixed.scores().iter().zip(exact.scores()) {
            assert!(*m >= 0.5 * e);
        }
        assert!((mixed.total() - 1.0).abs() < 1e-14);
        assert!(frobenius_block_probs(&a, &part, 0.0).is_err());
        assert!(matches!(
            frobenius_block_probs(&DenseMatrix::<f64>::zeros(2, 6), &part, 1.0),
            Err(Error::ZeroMatrix)
        ));
    }

    #[test]
    fn single_block_product_is_exact() {
        let a = block_matrix();
        let b = a.transpose();
        let part = BlockPartition::whole(6).unwrap();
        let probs = BlockDistribution::new(vec![1.0]).unwrap();
        let sk = approx_product(&a, &b, &part, &probs, 1, SamplingMode::WithReplacement, &mut Generator::from_seed(0)).unwrap();
        assert!(sk.product.max_abs_diff(&a.matmul(&b).unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn identity_plan_regression_is_exact() {
        let a = block_matrix();
        let b = DenseMatrix::from_fn(2, 6, |i, j| (i + j * j) as f64 - 2.0);
        let part = BlockPartition::uniform(6, 2).unwrap();
        let sk = blocked_regression_with_plan(&a, &b, &part, &identity_plan(&part)).unwrap();
        let direct = a.matmul(&pseudoinverse(&b).unwrap()).unwrap();
        assert!(sk.x.max_abs_diff(&direct).unwrap() < 1e-10);
        assert!((sk.residual - sk.optimal_residual).abs() < 1e-10);
    }

    #[test]
    fn full_selection_css_has_no_error() {
        let a = block_matrix();
        let part = BlockPartition::uniform(6, 2).unwrap();
        let out = css_with_plan(&a, &part, identity_plan(&part), 0.0).unwrap();
        assert!(out.error < 1e-10);
    }

    #[test]
    fn block_counts() {
        assert_eq!(multiplication_blocks(0.2, 0.5, 1.0).unwrap(), 100);
        assert_eq!(multiplication_blocks(0.2, 0.5, 2.0).unwrap(), 50);
        assert_eq!(regression_blocks(3, 1.0, 0.5, 0.2, 1.0).unwrap(), 22500);
        assert!(multiplication_blocks(1.2, 0.5, 1.0).is_err());
        assert!(regression_blocks(3, 0.5, 0.5, 0.2, 1.0).is_err());
    }
}
