use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::Serialize;

/// Real floating-point scalar the numerical kernels are generic over.
///
/// The associated tolerances scale with the precision of the type: `f64`
/// uses the documented double-precision cutoffs, `f32` relaxes them to what
/// single precision can actually deliver.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Serialize + Send + Sync + 'static
{
    /// Relative cutoff for numerical rank: singular values at or below
    /// `RANK_EPS · max(m, n) · σ₁` are treated as zero.
    const RANK_EPS: f64;
    /// Maximum deviation of a Gram matrix from the identity for a basis to
    /// count as orthonormal.
    const BASIS_TOL: f64;

    /// Lossy conversion from `f64`.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 converts to every supported scalar")
    }

    /// Lossless (for `f32`/`f64`) widening to `f64`.
    fn f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }

    fn of_usize(n: usize) -> Self {
        Self::of(n as f64)
    }
}

impl Scalar for f64 {
    const RANK_EPS: f64 = 1e-12;
    const BASIS_TOL: f64 = 1e-8;
}

impl Scalar for f32 {
    const RANK_EPS: f64 = 1e-6;
    const BASIS_TOL: f64 = 1e-4;
}
