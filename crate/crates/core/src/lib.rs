//! Block CUR matrix decomposition.
//!
//! Approximates a matrix `A ≈ C·U·R` where `R` holds sampled rows of `A`,
//! `C` holds sampled *blocks* of contiguous columns, and `U` is the
//! pseudoinverse of the scaled intersection `W = R·S`. Blocks are the atomic
//! sampling unit, which matches storage systems that hand out whole
//! partitions and time-series data whose samples only make sense in context.
//!
//! The numerical core is generic over [`Scalar`] (implemented for `f32` and
//! `f64`); the aliases at the crate root fix the scalar to `f64`, which is
//! what the CLI and experiment drivers use.
//!
//! Module map:
//!
//! - [`matcore`]: dense matrices, SVD, pseudoinverse, norms, projections.
//! - [`leverage`]: column/block leverage, block stable rank, incoherence.
//! - [`sampler`]: seeded generators, row and block sampling plans.
//! - [`cur`]: the Block CUR driver, boosting, rank-k variant, error metrics.
//! - [`sketch`]: block matrix multiplication and blocked regression sketches
//!   plus Monte Carlo bound harnesses.
//! - [`bench`]: synthetic generators, storage-access simulator, pipelines.
//! - [`io`]: CSV and `BCUR` binary matrix formats.

pub mod bench;
pub mod cur;
mod error;
pub mod io;
pub mod leverage;
pub mod matcore;
pub mod sampler;
mod scalar;
pub mod sketch;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use cur::{BoostedCur, CurConfig, CurResult, ErrorReference, ErrorReport, RowSampling, Variant};
pub use leverage::{BlockPartition, ScoreVector};
pub use matcore::{DenseMatrix, SvdResult};
pub use sampler::{BlockDistribution, Generator, RowPlan, SamplingMode, SamplingPlan};

/// Double-precision matrix.
pub type Matrix = DenseMatrix<f64>;
/// Single-precision matrix.
pub type Matrix32 = DenseMatrix<f32>;
/// Double-precision SVD.
pub type Svd = SvdResult<f64>;
/// Double-precision CUR result.
pub type Cur = CurResult<f64>;
/// Double-precision score vector.
pub type Scores = ScoreVector<f64>;
