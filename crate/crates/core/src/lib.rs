//! Graphon random graphs, subsampled embedding training, and the limiting
//! kernels those embeddings converge to.
//!
//! The crate covers one experimental loop end to end:
//!
//! 1. [`graphon`] defines SBM and smooth graphon models and samples finite
//!    graphs from them with reproducible per-pair random substreams.
//! 2. [`sampling`] implements four subsampling schemes (uniform vertex,
//!    uniform edge with unigram or induced negatives, random walk with
//!    unigram negatives), their closed-form sampling weights, and a
//!    Monte-Carlo estimator of pair-inclusion probabilities.
//! 3. [`embed`] trains node embeddings by constant-step SGD over sampled
//!    batches with either a regular or an indefinite (Krein) inner product.
//! 4. [`limits`] computes the kernels trained Gram matrices converge to:
//!    the pointwise unconstrained minimizer, its SBM block form, the
//!    PSD-constrained minimizer via a projected-gradient convex program, and
//!    the two-block closed form.
//! 5. [`diagnostics`] measures convergence (average L1 gap to an oracle
//!    kernel), link-prediction losses, gradient variance, and degree
//!    concentration.
//!
//! All numeric code is generic over the scalar type through
//! [`scalar::Real`]; the aliases below fix `f64` (the default used by the
//! CLI) and `f32` variants.

// Validation guards are written `!(x > 0)` on purpose: unlike `x <= 0`, the
// negated form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod embed;
pub mod error;
pub mod graphon;
pub mod limits;
pub mod linalg;
pub mod rng;
pub mod sampling;
pub mod scalar;

pub use error::Error;
pub use scalar::Real;

/// `f64` aliases (default precision).
pub type GraphonSpec64 = graphon::GraphonSpec<f64>;
pub type SmoothGraphon64 = graphon::SmoothGraphon<f64>;
pub type SampledGraph64 = graphon::SampledGraph<f64>;
pub type SamplingScheme64 = sampling::SamplingScheme<f64>;
pub type SamplingWeights64 = sampling::SamplingWeights<f64>;
pub type EmbeddingState64 = embed::EmbeddingState<f64>;
pub type TrainConfig64 = embed::TrainConfig<f64>;
pub type BlockKernel64 = limits::BlockKernel<f64>;
pub type KernelSignature64 = limits::KernelSignature<f64>;
pub type Error64 = error::Error<f64>;

/// `f32` aliases.
pub type GraphonSpec32 = graphon::GraphonSpec<f32>;
pub type SmoothGraphon32 = graphon::SmoothGraphon<f32>;
pub type SampledGraph32 = graphon::SampledGraph<f32>;
pub type SamplingScheme32 = sampling::SamplingScheme<f32>;
pub type SamplingWeights32 = sampling::SamplingWeights<f32>;
pub type EmbeddingState32 = embed::EmbeddingState<f32>;
pub type TrainConfig32 = embed::TrainConfig<f32>;
pub type BlockKernel32 = limits::BlockKernel<f32>;
pub type KernelSignature32 = limits::KernelSignature<f32>;
pub type Error32 = error::Error<f32>;
