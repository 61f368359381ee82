//! Scalar abstraction.
//!
//! All numeric kernels in this crate are generic over [`Real`], so the same
//! code runs in `f32` or `f64`. Concrete aliases for the main types live at
//! the crate root (`GraphonSpec64`, `EmbeddingState32`, ...).

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};
use rand::distributions::uniform::SampleUniform;

/// Floating-point scalar usable throughout the crate.
pub trait Real:
    Float + NumAssign + FromPrimitive + Sum + SampleUniform + Debug + Display + Send + Sync + 'static
{
    fn from_f64_lossy(x: f64) -> Self;
    fn to_f64_lossy(self) -> f64;
}

impl Real for f32 {
    fn from_f64_lossy(x: f64) -> Self {
        x as f32
    }
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn from_f64_lossy(x: f64) -> Self {
        x
    }
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

/// Shorthand for converting an `f64` constant into the working scalar type.
#[inline]
pub fn real<F: Real>(x: f64) -> F {
    F::from_f64_lossy(x)
}

/// Numerically stable sigmoid `1 / (1 + e^{-y})`.
#[inline]
pub fn sigmoid<F: Real>(y: F) -> F {
    if y >= F::zero() {
        F::one() / (F::one() + (-y).exp())
    } else {
        let e = y.exp();
        e / (F::one() + e)
    }
}

/// Inverse sigmoid `log(p / (1 - p))`.
#[inline]
pub fn logit<F: Real>(p: F) -> F {
    (p / (F::one() - p)).ln()
}

/// Stable `log(1 + e^y)`, exact for large `|y|`.
#[inline]
pub fn softplus<F: Real>(y: F) -> F {
    y.max(F::zero()) + (-y.abs()).exp().ln_1p()
}
