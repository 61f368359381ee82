//! Convergence metrics, link-prediction losses, gradient-variance probes and
//! degree-concentration reports.

use rand::Rng;

use crate::embed::{gradient_estimate, EmbeddingState};
use crate::error::{Error, Result};
use crate::graphon::{GraphonSpec, SampledGraph};
use crate::limits::BlockKernel;
use crate::sampling::SamplingScheme;
use crate::scalar::{real, Real};

/// Comparison kernel for [`l1_kernel_error`]: a block kernel or an arbitrary
/// pointwise limit `K*(l, l')`.
pub enum KernelOracle<'a, F: Real> {
    Block(&'a BlockKernel<F>),
    Pointwise(&'a dyn Fn(F, F) -> F),
}

impl<F: Real> KernelOracle<'_, F> {
    #[inline]
    fn value(&self, l: F, l_prime: F) -> F {
        match self {
            KernelOracle::Block(k) => k.value_at(l, l_prime),
            KernelOracle::Pointwise(f) => f(l, l_prime),
        }
    }
}

/// Average L1 gap between the embedding Gram matrix and the oracle kernel,
/// `(1/n^2) sum_{i,j} |B(w_i, w_j) - K*(l_i, l_j)|`, over all ordered pairs
/// including the diagonal (block kernels are well defined there).
pub fn l1_kernel_error<F: Real>(
    emb: &EmbeddingState<F>,
    graph: &SampledGraph<F>,
    oracle: &KernelOracle<'_, F>,
) -> Result<F, F> {
    let n = graph.n();
    if emb.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: emb.n(),
        });
    }
    let mut acc = F::zero();
    for i in 0..n as u32 {
        let li = graph.latent(i);
        // Diagonal term.
        acc += (emb.pair_similarity(i, i) - oracle.value(li, li)).abs();
        for j in (i + 1)..n as u32 {
            let gap = (emb.pair_similarity(i, j) - oracle.value(li, graph.latent(j))).abs();
            acc += gap + gap;
        }
    }
    Ok(acc / real::<F>((n * n) as f64))
}

/// Pairwise discrepancy for link-prediction scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkLossKind<F> {
    /// Misclassification after thresholding scores at `tau`.
    ZeroOne { tau: F },
    /// Cross-entropy of the sigmoid of the score, with scores clipped to
    /// `|s| <= 30` so the loss stays Lipschitz and bounded.
    CrossEntropy,
    /// `max(0, 1 - (2b - 1) s)`; callers supply scores clipped to a bounded
    /// range.
    Hinge,
}

/// Clip bound applied to scores inside the cross-entropy link loss.
pub const CROSS_ENTROPY_SCORE_CLIP: f64 = 30.0;

/// `D(S, B) = (1/(n(n-1))) sum_{i != j} d(S_ij, a_ij)`.
///
/// `scores` must be symmetric with the graph's vertex count.
pub fn link_prediction_loss<F: Real>(
    scores: &crate::linalg::SquareMatrix<F>,
    graph: &SampledGraph<F>,
    kind: LinkLossKind<F>,
) -> Result<F, F> {
    let n = graph.n();
    if scores.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: scores.n(),
        });
    }
    if n < 2 {
        return Err(Error::InvalidArgument(
            "link prediction needs at least two vertices".into(),
        ));
    }
    debug_assert!(scores.is_symmetric(), "score matrix must be symmetric");
    let clip = real::<F>(CROSS_ENTROPY_SCORE_CLIP);
    let mut acc = F::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            let s = scores.get(i, j);
            let edge = graph.has_edge(i as u32, j as u32);
            let d = match kind {
                LinkLossKind::ZeroOne { tau } => {
                    let predict_edge = s >= tau;
                    if predict_edge == edge {
                        F::zero()
                    } else {
                        F::one()
                    }
                }
                LinkLossKind::CrossEntropy => {
                    let s = s.max(-clip).min(clip);
                    let (loss, _) = crate::embed::loss_and_grad(s, edge);
                    loss
                }
                LinkLossKind::Hinge => {
                    let b = if edge { F::one() } else { -F::one() };
                    (F::one() - b * s).max(F::zero())
                }
            };
            acc += d + d;
        }
    }
    Ok(acc / real::<F>((n * (n - 1)) as f64))
}

/// Sample mean and per-coordinate sample variance of the walk-based gradient
/// estimator at one vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientProbe<F> {
    pub mean: Vec<F>,
    pub variance: Vec<F>,
    pub trials: usize,
}

pub fn gradient_variance_probe<F: Real, R: Rng>(
    graph: &SampledGraph<F>,
    scheme: &SamplingScheme<F>,
    emb: &EmbeddingState<F>,
    vertex: u32,
    trials: usize,
    rng: &mut R,
) -> Result<GradientProbe<F>, F> {
    if trials < 2 {
        return Err(Error::InvalidArgument(
            "variance probe needs trials >= 2".into(),
        ));
    }
    let d = emb.dim();
    let mut mean = vec![F::zero(); d];
    let mut m2 = vec![F::zero(); d];
    for t in 1..=trials {
        let g = gradient_estimate(graph, scheme, emb, vertex, rng)?;
        let count = real::<F>(t as f64);
        for r in 0..d {
            // Welford update.
            let delta = g[r] - mean[r];
            mean[r] += delta / count;
            m2[r] += delta * (g[r] - mean[r]);
        }
    }
    let denom = real::<F>((trials - 1) as f64);
    let variance = m2.into_iter().map(|x| x / denom).collect();
    Ok(GradientProbe {
        mean,
        variance,
        trials,
    })
}

/// Per-vertex relative degree deviations from the conditional mean
/// `(n-1) rho W(lambda_i, .)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDeviation<F> {
    pub vertex: u32,
    pub degree: u32,
    pub expected: F,
    pub rel_dev: F,
    /// True when the expected degree vanishes; excluded from the maximum.
    pub excluded: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeConcentrationReport<F> {
    pub max_rel_dev: F,
    pub rows: Vec<DegreeDeviation<F>>,
}

/// Exact per-vertex relative deviations `|deg(i) / ((n-1) rho W(l_i, .)) - 1|`
/// and their maximum. A graph on one vertex yields an empty report.
pub fn degree_concentration_report<F: Real>(
    graph: &SampledGraph<F>,
    spec: &GraphonSpec<F>,
) -> Result<DegreeConcentrationReport<F>, F> {
    let n = graph.n();
    if n < 2 {
        return Ok(DegreeConcentrationReport {
            max_rel_dev: F::zero(),
            rows: Vec::new(),
        });
    }
    let scale = real::<F>((n - 1) as f64) * spec.rho();
    let mut rows = Vec::with_capacity(n);
    let mut max_rel_dev = F::zero();
    for v in 0..n as u32 {
        let expected = scale * spec.degree_function(graph.latent(v))?;
        let excluded = !(expected > F::zero());
        let rel_dev = if excluded {
            F::zero()
        } else {
            (real::<F>(graph.degree(v) as f64) / expected - F::one()).abs()
        };
        if !excluded {
            max_rel_dev = max_rel_dev.max(rel_dev);
        }
        rows.push(DegreeDeviation {
            vertex: v,
            degree: graph.degree(v),
            expected,
            rel_dev,
            excluded,
        });
    }
    Ok(DegreeConcentrationReport { max_rel_dev, rows })
}

/// One convergence measurement: a trained cell evaluated against one oracle.
/// Serialized as CSV with the fixed column order in [`METRICS_HEADER`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub n: usize,
    pub seed: u64,
    pub scheme: String,
    pub d_plus: usize,
    pub d_minus: usize,
    pub oracle: String,
    pub l1_error: f64,
    pub epochs: usize,
    pub wall_time_s: f64,
}

pub const METRICS_HEADER: &str = "n,seed,scheme,d_plus,d_minus,oracle,l1_error,epochs,wall_time_s";
