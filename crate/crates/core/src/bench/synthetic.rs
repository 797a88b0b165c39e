//! Synthetic inputs.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::leverage::BlockPartition;
use crate::matcore::DenseMatrix;
use crate::sampler::Generator;
use crate::{Error, Result, Scalar};

fn gaussian<T: Scalar>(rows: usize, cols: usize, rng: &mut Generator) -> DenseMatrix<T> {
    DenseMatrix::from_fn(rows, cols, |_, _| T::of(rng.sample::<f64, _>(StandardNormal)))
}

/// `A = U·V + σ·N` with i.i.d. standard normal `U` (`m×k`), `V` (`k×n`), `N`.
pub fn synthetic_low_rank<T: Scalar>(m: usize, n: usize, k: usize, noise_sigma: f64, rng: &mut Generator) -> Result<DenseMatrix<T>> {
    if m == 0 || n == 0 {
        return Err(Error::invalid("synthetic matrix needs m, n >= 1"));
    }
    if k == 0 || k > m.min(n) {
        return Err(Error::invalid(format!("rank {k} must be in 1..={}", m.min(n))));
    }
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(Error::invalid("noise sigma must be finite and non-negative"));
    }
    let u = gaussian::<T>(m, k, rng);
    let v = gaussian::<T>(k, n, rng);
    let a = u.matmul(&v)?;
    if noise_sigma == 0.0 {
        return Ok(a);
    }
    let noise = gaussian::<T>(m, n, rng).scale(T::of(noise_sigma));
    a.add(&noise)
}

/// Multichannel time-series surrogate: each row is one subject, columns are
/// time samples.
///
/// The background is `factors` smooth sinusoids mixed with Gaussian
/// per-row loadings. On top of that one block carries a shared bump of
/// height `spike_height` (loadings again Gaussian per row), so the top
/// singular subspace puts most of one direction's mass inside that block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurrogateSpec {
    pub rows: usize,
    pub cols: usize,
    pub block_size: usize,
    pub factors: usize,
    pub spike_height: f64,
    pub noise_sigma: f64,
    /// Planted block; drawn uniformly when `None`.
    pub planted_block: Option<usize>,
}

impl Default for SurrogateSpec {
    fn default() -> Self {
        Self {
            rows: 24,
            cols: 1000,
            block_size: 50,
            factors: 4,
            spike_height: 10.0,
            noise_sigma: 0.1,
            planted_block: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Surrogate<T> {
    pub matrix: DenseMatrix<T>,
    pub partition: BlockPartition,
    pub planted_block: usize,
}

pub fn planted_block_surrogate<T: Scalar>(spec: &SurrogateSpec, rng: &mut Generator) -> Result<Surrogate<T>> {
    let part = BlockPartition::uniform(spec.cols, spec.block_size)?;
    if spec.rows == 0 {
        return Err(Error::invalid("surrogate needs at least one row"));
    }
    if !(spec.noise_sigma.is_finite() && spec.noise_sigma >= 0.0 && spec.spike_height.is_finite()) {
        return Err(Error::invalid("surrogate amplitudes must be finite, noise non-negative"));
    }
    let planted = match spec.planted_block {
        Some(b) if b >= part.len() => {
            return Err(Error::UnknownIndex {
                kind: "block",
                index: b,
                limit: part.len(),
            })
        }
        Some(b) => b,
        None => rng.random_range(0..part.len()),
    };
    let n = spec.cols as f64;
    let waves: Vec<(f64, f64)> = (0..spec.factors)
        .map(|_| (rng.random_range(1..=12) as f64, rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    let loadings: Vec<f64> = (0..spec.rows * spec.factors).map(|_| rng.sample(StandardNormal)).collect();
    let spike_loadings: Vec<f64> = (0..spec.rows).map(|_| rng.sample(StandardNormal)).collect();
    let range = part.block(planted);
    let centre = (range.start + range.end) as f64 / 2.0;
    let width = range.len() as f64 / 6.0;
    let mut a = DenseMatrix::from_fn(spec.rows, spec.cols, |i, j| {
        let t = j as f64;
        let mut x: f64 = waves
            .iter()
            .enumerate()
            .map(|(f, &(freq, phase))| loadings[i * spec.factors + f] * (std::f64::consts::TAU * freq * t / n + phase).sin())
            .sum();
        if range.contains(&j) {
            let z = (t - centre) / width;
            x += spec.spike_height * spike_loadings[i] * (-0.5 * z * z).exp();
        }
        T::of(x)
    });
    if spec.noise_sigma > 0.0 {
        a = a.add(&gaussian::<T>(spec.rows, spec.cols, rng).scale(T::of(spec.noise_sigma)))?;
    }
    Ok(Surrogate {
        matrix: a,
        partition: part,
        planted_block: planted,
    })
}
