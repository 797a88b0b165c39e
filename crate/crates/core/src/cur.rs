//! The Block CUR driver.
//!
//! 1. Sample `r` rows of `A` (uniformly by default) to form `R`.
//! 2. Score column blocks by the right singular vectors of `R` and draw `g`
//!    blocks; the same plan yields `C = A·S` and `W = R·S`.
//! 3. `U = W†` and `Â = C·U·R`.
//!
//! [`block_cur_boosted`] repeats the whole procedure and keeps the best
//! trial; [`rank_k_cur`] swaps `U` for its best rank-k approximation.

use serde::{Deserialize, Serialize};

use crate::leverage::{approx_block_leverage, row_leverage, BlockPartition, ScoreVector};
use crate::matcore::{pseudoinverse, svd, DenseMatrix};
use crate::sampler::{
    draw_blocks, draw_rows, draw_rows_distinct, draw_rows_weighted, materialize_columns, materialize_rows,
    BlockDistribution, Generator, RowPlan, SamplingMode, SamplingPlan,
};
use crate::{Error, Result, Scalar};

/// Residuals smaller than this fraction of `‖A‖_F` count as exactly zero.
const EXACT_RESIDUAL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "U")]
    U,
    #[serde(rename = "U_k")]
    Uk,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorReport<T> {
    /// `‖A − Â‖_F`
    pub abs_err: T,
    /// `‖A − Â‖_F / ‖A‖_F`
    pub rel_to_a: T,
    /// `‖A − Â‖_F / ‖A − A_k‖_F`, absent when `A` is numerically rank ≤ k.
    pub rel_to_best_k: Option<T>,
    pub k: usize,
    pub variant: Variant,
}

/// `‖A‖_F` and `‖A − A_k‖_F`, computed once per matrix and target rank.
#[derive(Debug, Clone)]
pub struct ErrorReference<T> {
    pub frob_a: T,
    pub best_k_residual: T,
    pub k: usize,
    row_leverage: Option<BlockDistribution>,
}

impl<T: Scalar> ErrorReference<T> {
    pub fn new(a: &DenseMatrix<T>, k: usize) -> Result<Self> {
        let dec = svd(a)?;
        let sigma = dec.singular_values();
        let tail: T = sigma.iter().skip(k).map(|&s| s * s).sum();
        let frob_a = a.frobenius_norm();
        let kept = dec.truncate(k);
        let row_leverage = if kept.rank() > 0 {
            Some(row_leverage(kept.left())?.distribution()?)
        } else {
            None
        };
        Ok(Self {
            frob_a,
            best_k_residual: tail.sqrt(),
            k,
            row_leverage,
        })
    }

    /// Whether `A` is (numerically) already of rank ≤ k.
    pub fn is_exact(&self) -> bool {
        self.best_k_residual.f64() <= EXACT_RESIDUAL * self.frob_a.f64()
    }

    pub fn report(&self, a: &DenseMatrix<T>, approx: &DenseMatrix<T>, variant: Variant) -> Result<ErrorReport<T>> {
        let abs_err = a.sub(approx)?.frobenius_norm();
        let rel_to_a = if self.frob_a > T::zero() { abs_err / self.frob_a } else { abs_err };
        let rel_to_best_k = (!self.is_exact()).then(|| abs_err / self.best_k_residual);
        Ok(ErrorReport {
            abs_err,
            rel_to_a,
            rel_to_best_k,
            k: self.k,
            variant,
        })
    }
}

/// Error metrics of `C·U·R` against `A` at target rank `k`.
pub fn error_report<T: Scalar>(
    a: &DenseMatrix<T>,
    c: &DenseMatrix<T>,
    u: &DenseMatrix<T>,
    r: &DenseMatrix<T>,
    k: usize,
) -> Result<ErrorReport<T>> {
    let approx = c.matmul(u)?.matmul(r)?;
    ErrorReference::new(a, k)?.report(a, &approx, Variant::U)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowSampling {
    /// i.i.d. uniform rows, the theory-facing default.
    Uniform,
    /// Uniform without repeated rows.
    UniformDistinct,
    /// i.i.d. by exact row leverage of `A` (needs the full SVD of `A`).
    Leverage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurConfig {
    pub k: usize,
    pub rows: usize,
    pub blocks: usize,
    pub mode: SamplingMode,
    pub row_sampling: RowSampling,
    /// Multiply sampled rows by `1/√(r·p)`; off returns the raw rows.
    pub scale_rows: bool,
}

impl CurConfig {
    pub fn new(k: usize, rows: usize, blocks: usize) -> Self {
        Self {
            k,
            rows,
            blocks,
            mode: SamplingMode::WithReplacement,
            row_sampling: RowSampling::Uniform,
            scale_rows: true,
        }
    }

    pub fn with_mode(mut self, mode: SamplingMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_row_sampling(mut self, rows: RowSampling) -> Self {
        self.row_sampling = rows;
        self
    }

    pub fn with_scaled_rows(mut self, scaled: bool) -> Self {
        self.scale_rows = scaled;
        self
    }

    pub fn validate(&self, m: usize, n: usize, part: &BlockPartition) -> Result<()> {
        if self.k == 0 || self.k > m.min(n) {
            return Err(Error::invalid(format!("k must be in 1..={}, got {}", m.min(n), self.k)));
        }
        if self.rows == 0 {
            return Err(Error::invalid("r must be at least 1"));
        }
        if self.blocks == 0 {
            return Err(Error::invalid("g must be at least 1"));
        }
        if self.mode == SamplingMode::Identity {
            return Err(Error::invalid("block_cur samples blocks; identity mode is not a sampling mode"));
        }
        if self.row_sampling == RowSampling::UniformDistinct && self.rows > m {
            return Err(Error::invalid(format!("cannot draw {} distinct rows from {m}", self.rows)));
        }
        part.check_columns(n, "block_cur")
    }
}

#[derive(Debug, Clone)]
pub struct CurResult<T> {
    pub c: DenseMatrix<T>,
    pub u: DenseMatrix<T>,
    pub r: DenseMatrix<T>,
    /// Scaled intersection `R·S`.
    pub w: DenseMatrix<T>,
    pub row_plan: RowPlan,
    pub block_plan: SamplingPlan,
    /// Approximate block leverage scores the block plan was drawn from.
    pub block_scores: ScoreVector<T>,
    pub metrics: ErrorReport<T>,
    /// Metrics of the rank-k variant `C·U_k·R`, when computed.
    pub rank_k_metrics: Option<ErrorReport<T>>,
}

/// Shapes, plans and metrics of a run; the matrices themselves are omitted.
#[derive(Debug, Clone, Serialize)]
pub struct CurSummary<T> {
    pub shape_c: (usize, usize),
    pub shape_u: (usize, usize),
    pub shape_r: (usize, usize),
    pub shape_w: (usize, usize),
    pub row_plan: RowPlan,
    pub block_plan: SamplingPlan,
    pub block_probabilities: Vec<f64>,
    pub metrics: ErrorReport<T>,
    pub rank_k_metrics: Option<ErrorReport<T>>,
}

impl<T: Scalar> CurResult<T> {
    /// `Â = C·U·R`.
    pub fn approximation(&self) -> Result<DenseMatrix<T>> {
        self.c.matmul(&self.u)?.matmul(&self.r)
    }

    pub fn summary(&self) -> CurSummary<T> {
        let total = self.block_scores.total().f64();
        CurSummary {
            shape_c: self.c.shape(),
            shape_u: self.u.shape(),
            shape_r: self.r.shape(),
            shape_w: self.w.shape(),
            row_plan: self.row_plan.clone(),
            block_plan: self.block_plan.clone(),
            block_probabilities: self.block_scores.scores().iter().map(|s| s.f64() / total).collect(),
            metrics: self.metrics,
            rank_k_metrics: self.rank_k_metrics,
        }
    }
}

/// Algorithm end to end, computing the error reference from `A`.
pub fn block_cur<T: Scalar>(
    a: &DenseMatrix<T>,
    part: &BlockPartition,
    config: &CurConfig,
    rng: &mut Generator,
) -> Result<CurResult<T>> {
    config.validate(a.rows(), a.cols(), part)?;
    let reference = ErrorReference::new(a, config.k)?;
    block_cur_with_reference(a, part, config, &reference, rng)
}

/// As [`block_cur`], reusing a precomputed [`ErrorReference`].
pub fn block_cur_with_reference<T: Scalar>(
    a: &DenseMatrix<T>,
    part: &BlockPartition,
    config: &CurConfig,
    reference: &ErrorReference<T>,
    rng: &mut Generator,
) -> Result<CurResult<T>> {
    config.validate(a.rows(), a.cols(), part)?;
    if reference.k != config.k {
        return Err(Error::invalid("error reference was built for a different k"));
    }
    let m = a.rows();
    let row_plan = match config.row_sampling {
        RowSampling::Uniform => draw_rows(m, config.rows, rng)?,
        RowSampling::UniformDistinct => draw_rows_distinct(m, config.rows, rng)?,
        RowSampling::Leverage => {
            let probs = reference.row_leverage.as_ref().ok_or(Error::DegenerateR)?;
            draw_rows_weighted(probs, config.rows, rng)?
        }
    };
    let r = materialize_rows(a, &row_plan, config.scale_rows)?;
    if r.is_zero() {
        return Err(Error::DegenerateR);
    }
    let block_scores = approx_block_leverage(&r, part).map_err(|e| match e {
        Error::ZeroMatrix => Error::DegenerateR,
        other => other,
    })?;
    let probs = block_scores.distribution()?;
    let block_plan = draw_blocks(&probs, config.blocks, config.mode, rng)?;
    assemble(a, part, r, row_plan, block_plan, block_scores, reference)
}

/// Builds `C`, `W`, `U` and both metric variants from fixed plans.
pub fn assemble<T: Scalar>(
    a: &DenseMatrix<T>,
    part: &BlockPartition,
    r: DenseMatrix<T>,
    row_plan: RowPlan,
    block_plan: SamplingPlan,
    block_scores: ScoreVector<T>,
    reference: &ErrorReference<T>,
) -> Result<CurResult<T>> {
    let c = materialize_columns(a, part, &block_plan)?;
    let w = materialize_columns(&r, part, &block_plan)?;
    let u = pseudoinverse(&w)?;
    let approx = c.matmul(&u)?.matmul(&r)?;
    let metrics = reference.report(a, &approx, Variant::U)?;
    let u_k = svd(&u)?.truncate(reference.k).reconstruct();
    let approx_k = c.matmul(&u_k)?.matmul(&r)?;
    let rank_k_metrics = Some(reference.report(a, &approx_k, Variant::Uk)?);
    Ok(CurResult {
        c,
        u,
        r,
        w,
        row_plan,
        block_plan,
        block_scores,
        metrics,
        rank_k_metrics,
    })
}

/// Replaces `U` by its best rank-k approximation, giving `rank(Â) ≤ k`.
pub fn rank_k_cur<T: Scalar>(a: &DenseMatrix<T>, result: &CurResult<T>, k: usize) -> Result<CurResult<T>> {
    let reference = ErrorReference::new(a, k)?;
    let u_k = svd(&result.u)?.truncate(k).reconstruct();
    let approx = result.c.matmul(&u_k)?.matmul(&result.r)?;
    let metrics = reference.report(a, &approx, Variant::Uk)?;
    Ok(CurResult {
        u: u_k,
        metrics,
        rank_k_metrics: None,
        ..result.clone()
    })
}

/// Number of boosting trials `⌈ln(1/δ)⌉` (at least one).
pub fn boosting_trials(delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must be in (0, 1), got {delta}")));
    }
    Ok(((1.0 / delta).ln().ceil() as usize).max(1))
}

#[derive(Debug, Clone)]
pub struct BoostedCur<T> {
    pub best: CurResult<T>,
    /// `abs_err` of every trial, in trial order.
    pub trial_errors: Vec<T>,
    pub best_trial: usize,
}

/// Runs `t` independent trials on one generator stream and keeps the one
/// with the smallest `‖A − CUR‖_F`.
pub fn block_cur_boosted<T: Scalar>(
    a: &DenseMatrix<T>,
    part: &BlockPartition,
    config: &CurConfig,
    t: usize,
    rng: &mut Generator,
) -> Result<BoostedCur<T>> {
    config.validate(a.rows(), a.cols(), part)?;
    let reference = ErrorReference::new(a, config.k)?;
    block_cur_boosted_with_reference(a, part, config, &reference, t, rng)
}

pub fn block_cur_boosted_with_reference<T: Scalar>(
    a: &DenseMatrix<T>,
    part: &BlockPartition,
    config: &CurConfig,
    reference: &ErrorReference<T>,
    t: usize,
    rng: &mut Generator,
) -> Result<BoostedCur<T>> {
    if t == 0 {
        return Err(Error::invalid("t must be at least 1"));
    }
    let mut best: Option<(usize, CurResult<T>)> = None;
    let mut trial_errors = Vec::with_capacity(t);
    for trial in 0..t {
        let run = block_cur_with_reference(a, part, config, reference, rng)?;
        trial_errors.push(run.metrics.abs_err);
        let better = best
            .as_ref()
            .is_none_or(|(_, b)| run.metrics.abs_err < b.metrics.abs_err);
        if better {
            best = Some((trial, run));
        }
    }
    let (best_trial, best) = best.expect("t >= 1");
    Ok(BoostedCur {
        best,
        trial_errors,
        best_trial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::numerical_rank;

    fn noisy_low_rank(m: usize, n: usize) -> DenseMatrix<f64> {
        let u = DenseMatrix::from_fn(m, 2, |i, j| ((i * (j + 3)) % 5) as f64 - 2.0);
        let v = DenseMatrix::from_fn(2, n, |i, j| ((j * (i + 2)) % 7) as f64 - 3.0);
        let noise = DenseMatrix::from_fn(m, n, |i, j| (((i * 31 + j * 17) % 13) as f64 - 6.0) * 1e-3);
        u.matmul(&v).unwrap().add(&noise).unwrap()
    }

    #[test]
    fn identity_is_recovered_exactly() {
        let a = DenseMatrix::<f64>::identity(4);
        let part = BlockPartition::whole(4).unwrap();
        let cfg = CurConfig::new(4, 4, 1).with_row_sampling(RowSampling::UniformDistinct);
        let res = block_cur(&a, &part, &cfg, &mut Generator::from_seed(9)).unwrap();
        assert!(res.approximation().unwrap().max_abs_diff(&a).unwrap() < 1e-12);
        assert!(res.metrics.rel_to_a < 1e-12);
        assert_eq!(res.metrics.rel_to_best_k, None);
    }

    #[test]
    fn config_is_validated() {
        let a = DenseMatrix::<f64>::identity(4);
        let part = BlockPartition::whole(4).unwrap();
        let mut rng = Generator::from_seed(0);
        for cfg in [CurConfig::new(0, 2, 1), CurConfig::new(5, 2, 1), CurConfig::new(2, 0, 1), CurConfig::new(2, 2, 0)] {
            assert!(matches!(block_cur(&a, &part, &cfg, &mut rng), Err(Error::InvalidArgument(_))));
        }
        let wrong = BlockPartition::whole(5).unwrap();
        assert!(block_cur(&a, &wrong, &CurConfig::new(2, 2, 1), &mut rng).is_err());
    }

    #[test]
    fn zero_row_sample_is_degenerate() {
        let mut a = vec![0.0; 16];
        a[0] = 1.0;
        let a = DenseMatrix::new(4, 4, a).unwrap();
        let part = BlockPartition::uniform(4, 2).unwrap();
        let cfg = CurConfig::new(1, 1, 1);
        // some seed picks a zero row
        let hit = (0..50).any(|s| matches!(block_cur(&a, &part, &cfg, &mut Generator::from_seed(s)), Err(Error::DegenerateR)));
        assert!(hit);
    }

    #[test]
    fn w_is_recomputable_from_plans() {
        let a = noisy_low_rank(12, 10);
        let part = BlockPartition::uniform(10, 3).unwrap();
        let res = block_cur(&a, &part, &CurConfig::new(2, 5, 3), &mut Generator::from_seed(4)).unwrap();
        let r = materialize_rows(&a, &res.row_plan, true).unwrap();
        assert_eq!(r, res.r);
        assert_eq!(materialize_columns(&r, &part, &res.block_plan).unwrap(), res.w);
        let (m, n) = a.shape();
        assert_eq!(res.approximation().unwrap().shape(), (m, n));
    }

    #[test]
    fn rank_k_variant() {
        let a = noisy_low_rank(12, 10);
        let part = BlockPartition::uniform(10, 2).unwrap();
        let res = block_cur(&a, &part, &CurConfig::new(2, 6, 4), &mut Generator::from_seed(8)).unwrap();
        let uk = rank_k_cur(&a, &res, 2).unwrap();
        assert!(numerical_rank(&uk.approximation().unwrap()).unwrap() <= 2);
        assert!(uk.metrics.rel_to_best_k.unwrap() >= 1.0 - 1e-9);
        let same = rank_k_cur(&a, &res, 100).unwrap();
        assert!(same.u.max_abs_diff(&res.u).unwrap() < 1e-10);
        assert_eq!(uk.metrics.abs_err, res.rank_k_metrics.unwrap().abs_err);
    }

    #[test]
    fn error_report_edges() {
        let a = noisy_low_rank(6, 5);
        let id = DenseMatrix::identity(5);
        let exact = error_report(&a, &a, &id, &id, 2).unwrap();
        assert_eq!(exact.abs_err, 0.0);
        assert_eq!(exact.rel_to_best_k, Some(0.0));
        let zero_u = DenseMatrix::zeros(5, 5);
        let rep = error_report(&a, &a, &zero_u, &id, 2).unwrap();
        assert!((rep.abs_err - a.frobenius_norm()).abs() < 1e-12);
    }

    #[test]
    fn boosting_selects_minimum() {
        let a = noisy_low_rank(12, 10);
        let part = BlockPartition::uniform(10, 2).unwrap();
        let cfg = CurConfig::new(2, 4, 2);
        let single = block_cur(&a, &part, &cfg, &mut Generator::from_seed(21)).unwrap();
        let one = block_cur_boosted(&a, &part, &cfg, 1, &mut Generator::from_seed(21)).unwrap();
        assert_eq!(one.best.metrics.abs_err, single.metrics.abs_err);
        assert_eq!(one.best.block_plan, single.block_plan);

        let five = block_cur_boosted(&a, &part, &cfg, 5, &mut Generator::from_seed(21)).unwrap();
        assert_eq!(five.trial_errors.len(), 5);
        let min = five.trial_errors.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(five.best.metrics.abs_err, min);
        assert_eq!(five.trial_errors[five.best_trial], min);
        assert_eq!(boosting_trials(0.1).unwrap(), 3);
        assert!(boosting_trials(1.0).is_err());
    }
}
