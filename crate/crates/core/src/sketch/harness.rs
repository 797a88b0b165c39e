//! Monte Carlo validation of the probabilistic error bounds.
//!
//! Each harness runs independent trials, records the realized error next to
//! the bound it is supposed to respect, and passes when the empirical
//! violation rate stays within `δ + 2σ`, `σ = √(δ(1−δ)/N)`. The full list of
//! `error / bound` ratios is kept so the slack of Markov-type bounds shows.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{approx_product_with_plan, blocked_regression_with_plan, check_delta, multiplication_bound, product_variance, regression_probs};
use crate::cur::{block_cur_boosted_with_reference, CurConfig, ErrorReference};
use crate::leverage::BlockPartition;
use crate::matcore::DenseMatrix;
use crate::sampler::{draw_blocks, BlockDistribution, Generator, SamplingMode};
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// `‖AB − CR‖_F ≤ ‖A‖_F‖B‖_F / (δ√(βgα_A))`
    Multiplication,
    /// `‖A − AS(BS)†B‖_F ≤ (1+ε)‖A − AB†B‖_F`
    Regression,
    /// `‖A − CUR‖_F ≤ (1+ε)‖A − A_k‖_F`
    Cur,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundTrial {
    pub trial: usize,
    pub error: f64,
    pub bound: f64,
    pub violated: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct HarnessReport {
    pub bound: Bound,
    pub delta: f64,
    pub g: usize,
    pub trials: Vec<BoundTrial>,
    pub violations: usize,
    pub violation_rate: f64,
    /// Allowed excess over `δ`: two binomial standard deviations.
    pub slack: f64,
    pub passed: bool,
    /// Largest `|mean(CR) − AB| / √(Var/N)` over entries (multiplication only).
    pub mean_max_z: Option<f64>,
    /// Trials in which the sketched residual fell below the optimum
    /// (regression only; should always be zero).
    pub dominance_failures: Option<usize>,
}

/// Two binomial standard deviations for `n` trials at rate `delta`.
pub fn binomial_slack(delta: f64, n: usize) -> f64 {
    2.0 * (delta * (1.0 - delta) / n as f64).sqrt()
}

impl HarnessReport {
    fn from_trials(bound: Bound, delta: f64, g: usize, trials: Vec<BoundTrial>) -> Self {
        let n = trials.len();
        let violations = trials.iter().filter(|t| t.violated).count();
        let violation_rate = violations as f64 / n as f64;
        let slack = binomial_slack(delta, n);
        Self {
            bound,
            delta,
            g,
            trials,
            violations,
            violation_rate,
            slack,
            passed: violation_rate <= delta + slack,
            mean_max_z: None,
            dominance_failures: None,
        }
    }

    /// Sorted `error / bound` ratios paired with their empirical CDF value.
    pub fn cdf(&self) -> Vec<(f64, f64)> {
        let mut ratios: Vec<f64> = self
            .trials
            .iter()
            .map(|t| if t.bound > 0.0 { t.error / t.bound } else if t.error > 0.0 { f64::INFINITY } else { 0.0 })
            .collect();
        ratios.sort_by(f64::total_cmp);
        let n = ratios.len() as f64;
        ratios.into_iter().enumerate().map(|(i, r)| (r, (i + 1) as f64 / n)).collect()
    }

    /// CSV with header `trial,error,bound,violated`.
    pub fn write_trials_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["trial", "error", "bound", "violated"]).map_err(csv_err)?;
        for t in &self.trials {
            out.write_record([t.trial.to_string(), t.error.to_string(), t.bound.to_string(), t.violated.to_string()])
                .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    /// CSV with header `ratio,cdf`.
    pub fn write_cdf_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["ratio", "cdf"]).map_err(csv_err)?;
        for (r, c) in self.cdf() {
            out.write_record([r.to_string(), c.to_string()]).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    Ok(())
}

/// Block multiplication bound, sampling with replacement from `probs`.
///
/// `beta` is the domination factor the caller guarantees for `probs`
/// relative to the Frobenius-mass distribution.
#[allow(clippy::too_many_arguments)]
pub fn validate_multiplication<T: Scalar>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    part: &BlockPartition,
    probs: &BlockDistribution,
    beta: f64,
    delta: f64,
    g: usize,
    trials: usize,
    rng: &mut Generator,
) -> Result<HarnessReport> {
    check_trials(trials)?;
    let bound = multiplication_bound(a, b, part, beta, g, delta)?;
    let exact = a.matmul(b)?;
    let (m, p) = exact.shape();
    let mut sum = vec![0.0f64; m * p];
    let mut records = Vec::with_capacity(trials);
    for trial in 0..trials {
        let plan = draw_blocks(probs, g, SamplingMode::WithReplacement, rng)?;
        let prod = approx_product_with_plan(a, b, part, &plan)?;
        for (s, &x) in sum.iter_mut().zip(prod.as_slice()) {
            *s += x.f64();
        }
        let error = exact.sub(&prod)?.frobenius_norm().f64();
        records.push(BoundTrial {
            trial,
            error,
            bound,
            violated: error > bound,
        });
    }
    let var = product_variance(a, b, part, probs, g)?;
    let n = trials as f64;
    let mut max_z: f64 = 0.0;
    for (idx, s) in sum.iter().enumerate() {
        let mean = s / n;
        let sd = (var.as_slice()[idx].f64().max(0.0) / n).sqrt();
        let diff = (mean - exact.as_slice()[idx].f64()).abs();
        let z = if sd > 0.0 {
            diff / sd
        } else if diff <= 1e-12 * (1.0 + exact.as_slice()[idx].f64().abs()) {
            0.0
        } else {
            f64::INFINITY
        };
        max_z = max_z.max(z);
    }
    let mut report = HarnessReport::from_trials(Bound::Multiplication, delta, g, records);
    report.mean_max_z = Some(max_z);
    Ok(report)
}

/// Blocked regression bound with leverage probabilities from `B`.
#[allow(clippy::too_many_arguments)]
pub fn validate_regression<T: Scalar>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    part: &BlockPartition,
    eps: f64,
    delta: f64,
    g: usize,
    mode: SamplingMode,
    trials: usize,
    rng: &mut Generator,
) -> Result<HarnessReport> {
    check_trials(trials)?;
    check_delta(delta)?;
    let (scores, _) = regression_probs(b, part)?;
    let probs = scores.distribution()?;
    let mut records = Vec::with_capacity(trials);
    let mut dominance_failures = 0;
    for trial in 0..trials {
        let plan = match mode {
            SamplingMode::Identity => crate::sampler::identity_plan(part),
            _ => draw_blocks(&probs, g, mode, rng)?,
        };
        let sk = blocked_regression_with_plan(a, b, part, &plan)?;
        let error = sk.residual.f64();
        let optimal = sk.optimal_residual.f64();
        if error < optimal * (1.0 - 1e-10) - 1e-12 * a.frobenius_norm().f64() {
            dominance_failures += 1;
        }
        let bound = (1.0 + eps) * optimal;
        records.push(BoundTrial {
            trial,
            error,
            bound,
            violated: error > bound * (1.0 + 1e-12) + 1e-12 * a.frobenius_norm().f64(),
        });
    }
    let mut report = HarnessReport::from_trials(Bound::Regression, delta, g, records);
    report.dominance_failures = Some(dominance_failures);
    Ok(report)
}

/// Relative-error CUR bound, each trial boosted `t` times.
#[allow(clippy::too_many_arguments)]
pub fn validate_cur<T: Scalar>(
    a: &DenseMatrix<T>,
    part: &BlockPartition,
    config: &CurConfig,
    eps: f64,
    delta: f64,
    t: usize,
    trials: usize,
    rng: &mut Generator,
) -> Result<HarnessReport> {
    check_trials(trials)?;
    check_delta(delta)?;
    config.validate(a.rows(), a.cols(), part)?;
    let reference = ErrorReference::new(a, config.k)?;
    let bound = (1.0 + eps) * reference.best_k_residual.f64();
    let slack = 1e-12 * reference.frob_a.f64();
    let mut records = Vec::with_capacity(trials);
    for trial in 0..trials {
        let run = block_cur_boosted_with_reference(a, part, config, &reference, t, rng)?;
        let error = run.best.metrics.abs_err.f64();
        records.push(BoundTrial {
            trial,
            error,
            bound,
            violated: error > bound + slack,
        });
    }
    Ok(HarnessReport::from_trials(Bound::Cur, delta, config.blocks, records))
}
