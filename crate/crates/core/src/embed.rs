//! Similarity measures, the cross-entropy loss, and the stochastic-gradient
//! trainer for the subsampling-induced empirical risk.

use std::io::{self, Write};

use rand::Rng;

use crate::error::{Error, Result};
use crate::graphon::SampledGraph;
use crate::rng;
use crate::sampling::SamplingWeights;
use crate::sampling::{DrawContext, PairLabel, SampleBatch, SamplingOptions, SamplingScheme};
use crate::scalar::{real, sigmoid, softplus, Real};

/// Signature `(d_plus, d_minus)` of the bilinear similarity
/// `B(w, w') = <w, diag(I_{d+}, -I_{d-}) w'>`. `d_minus = 0` recovers the
/// ordinary inner product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SimilaritySignature {
    pub d_plus: usize,
    pub d_minus: usize,
}

impl SimilaritySignature {
    pub fn new(d_plus: usize, d_minus: usize) -> Self {
        SimilaritySignature { d_plus, d_minus }
    }

    pub fn regular(d: usize) -> Self {
        SimilaritySignature {
            d_plus: d,
            d_minus: 0,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d_plus + self.d_minus
    }

    pub fn validate<F: Real>(&self) -> Result<(), F> {
        if self.dim() == 0 {
            return Err(Error::InvalidArgument(
                "signature must have d_plus + d_minus >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Sign of coordinate `r` in the induced metric.
    #[inline]
    pub fn sign<F: Real>(&self, r: usize) -> F {
        if r < self.d_plus {
            F::one()
        } else {
            -F::one()
        }
    }
}

/// `B(w, w') = sum_{r < d+} w_r w'_r - sum_{r >= d+} w_r w'_r`.
pub fn similarity<F: Real>(sig: SimilaritySignature, w: &[F], w_prime: &[F]) -> Result<F, F> {
    let d = sig.dim();
    if w.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: w.len(),
        });
    }
    if w_prime.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: w_prime.len(),
        });
    }
    Ok(similarity_unchecked(sig, w, w_prime))
}

#[inline]
pub(crate) fn similarity_unchecked<F: Real>(sig: SimilaritySignature, w: &[F], w_prime: &[F]) -> F {
    let mut plus = F::zero();
    for r in 0..sig.d_plus {
        plus += w[r] * w_prime[r];
    }
    let mut minus = F::zero();
    for r in sig.d_plus..sig.dim() {
        minus += w[r] * w_prime[r];
    }
    plus - minus
}

/// Cross-entropy loss of a logit against a binary label, with its derivative
/// in the logit. Stable for logits far beyond the naive formula's range:
/// `loss = x softplus(-y) + (1-x) softplus(y)`, `dloss/dy = sigmoid(y) - x`.
#[inline]
pub fn loss_and_grad<F: Real>(y: F, x: bool) -> (F, F) {
    let loss = if x { softplus(-y) } else { softplus(y) };
    let grad = if x { sigmoid(y) - F::one() } else { sigmoid(y) };
    (loss, grad)
}

/// Embedding vectors for every vertex, with the similarity signature they
/// were trained under and the box bound that constrained them.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingState<F> {
    signature: SimilaritySignature,
    box_bound: F,
    n: usize,
    vectors: Vec<F>,
}

impl<F: Real> EmbeddingState<F> {
    pub fn from_vectors(
        signature: SimilaritySignature,
        box_bound: F,
        n: usize,
        vectors: Vec<F>,
    ) -> Result<Self, F> {
        signature.validate()?;
        if vectors.len() != n * signature.dim() {
            return Err(Error::DimensionMismatch {
                expected: n * signature.dim(),
                got: vectors.len(),
            });
        }
        Ok(EmbeddingState {
            signature,
            box_bound,
            n,
            vectors,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.signature.dim()
    }

    pub fn signature(&self) -> SimilaritySignature {
        self.signature
    }

    pub fn box_bound(&self) -> F {
        self.box_bound
    }

    #[inline]
    pub fn row(&self, v: u32) -> &[F] {
        let d = self.dim();
        &self.vectors[v as usize * d..(v as usize + 1) * d]
    }

    pub fn vectors(&self) -> &[F] {
        &self.vectors
    }

    /// `B(w_i, w_j)` under the state's signature.
    #[inline]
    pub fn pair_similarity(&self, i: u32, j: u32) -> F {
        similarity_unchecked(self.signature, self.row(i), self.row(j))
    }

    /// CSV export: one row per vertex, `dim` columns.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let d = self.dim();
        for v in 0..self.n {
            let row = &self.vectors[v * d..(v + 1) * d];
            let line: Vec<String> = row.iter().map(|x| format!("{x}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// Sidecar describing the signature and box bound.
    pub fn write_sidecar<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(
            w,
            "{{\"d_plus\": {}, \"d_minus\": {}, \"box_bound\": {}}}",
            self.signature.d_plus, self.signature.d_minus, self.box_bound
        )
    }
}

/// Hyperparameters of one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig<F> {
    pub signature: SimilaritySignature,
    pub scheme: SamplingScheme<F>,
    pub step_size: F,
    pub epochs: usize,
    /// Draws per epoch; `None` derives it from the epoch convention
    /// `cumulative pairs used / edge count`, i.e. one epoch spends about
    /// `E_n` pair terms.
    pub draws_per_epoch: Option<usize>,
    pub seed: u64,
    /// Box bound `A`: coordinates are clipped to `[-A, A]` after each step.
    pub clip_bound: F,
    /// Coordinates initialize i.i.d. uniform on `[-init_scale, init_scale]`.
    pub init_scale: F,
    pub sampling_options: SamplingOptions,
}

impl<F: Real> TrainConfig<F> {
    /// Defaults: constant step 0.025, 40 epochs, clip bound 10, init scale
    /// 0.1, derived draws per epoch.
    pub fn new(signature: SimilaritySignature, scheme: SamplingScheme<F>) -> Self {
        TrainConfig {
            signature,
            scheme,
            step_size: real::<F>(0.025),
            epochs: 40,
            draws_per_epoch: None,
            seed: 0,
            clip_bound: real::<F>(10.0),
            init_scale: real::<F>(0.1),
            sampling_options: SamplingOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<(), F> {
        self.signature.validate()?;
        self.scheme.validate()?;
        if !(self.step_size > F::zero()) {
            return Err(Error::InvalidArgument("step_size must be positive".into()));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidArgument("epochs must be >= 1".into()));
        }
        if self.draws_per_epoch == Some(0) {
            return Err(Error::InvalidArgument(
                "draws_per_epoch must be >= 1 when given".into(),
            ));
        }
        if !(self.clip_bound > F::zero()) {
            return Err(Error::InvalidArgument("clip_bound must be positive".into()));
        }
        if !(self.init_scale > F::zero()) {
            return Err(Error::InvalidArgument("init_scale must be positive".into()));
        }
        Ok(())
    }

    fn resolve_draws_per_epoch(&self, graph: &SampledGraph<F>) -> usize {
        match self.draws_per_epoch {
            Some(d) => d,
            None => {
                let per_draw = self.scheme.nominal_pairs_per_draw().max(1);
                graph.edge_count().div_ceil(per_draw)
            }
        }
        .max(1)
    }
}

/// Loss and dense gradient of the summed batch loss
/// `L = sum_{(i,j) in batch} loss(B(w_i, w_j), label)` with respect to every
/// embedding coordinate. Both endpoints of each pair receive contributions.
pub fn batch_loss_and_gradient<F: Real>(
    emb: &EmbeddingState<F>,
    batch: &SampleBatch,
) -> Result<(F, Vec<F>), F> {
    let mut grad = vec![F::zero(); emb.n() * emb.dim()];
    let mut touched = Vec::new();
    let loss = accumulate_batch_gradient(emb, batch, 0, &mut grad, &mut touched)?;
    Ok((loss, grad))
}

fn accumulate_batch_gradient<F: Real>(
    emb: &EmbeddingState<F>,
    batch: &SampleBatch,
    iteration: usize,
    grad: &mut [F],
    touched: &mut Vec<u32>,
) -> Result<F, F> {
    let sig = emb.signature();
    let d = sig.dim();
    let mut total = F::zero();
    for p in &batch.pairs {
        let wi = emb.row(p.i);
        let wj = emb.row(p.j);
        let y = similarity_unchecked(sig, wi, wj);
        if !y.is_finite() {
            return Err(Error::NonFiniteGradient {
                iteration,
                pair: (p.i, p.j),
                logit: y,
            });
        }
        let (loss, g) = loss_and_grad(y, p.label == PairLabel::Positive);
        total += loss;
        let gi = p.i as usize * d;
        let gj = p.j as usize * d;
        for r in 0..d {
            let s: F = sig.sign(r);
            grad[gi + r] += g * s * wj[r];
            grad[gj + r] += g * s * wi[r];
        }
        touched.push(p.i);
        touched.push(p.j);
    }
    Ok(total)
}

/// Trains embeddings by constant-step SGD on batches drawn from `scheme`.
///
/// Each iteration draws one batch, takes one gradient step on the summed
/// batch loss, and clips every touched coordinate to `[-A, A]`. The run is
/// single-threaded and a pure function of `(graph, config)`.
pub fn train<F: Real>(
    graph: &SampledGraph<F>,
    config: &TrainConfig<F>,
) -> Result<EmbeddingState<F>, F> {
    config.validate()?;
    if graph.n() == 0 {
        return Err(Error::InvalidArgument("graph is empty".into()));
    }
    let n = graph.n();
    let d = config.signature.dim();
    let mut rng = rng::stream(config.seed, 0);

    let mut vectors = Vec::with_capacity(n * d);
    let scale = config.init_scale.to_f64_lossy();
    for _ in 0..n * d {
        let u: f64 = rng.gen();
        vectors.push(real::<F>((2.0 * u - 1.0) * scale));
    }
    let mut state = EmbeddingState::from_vectors(config.signature, config.clip_bound, n, vectors)?;

    let ctx = DrawContext::new(graph, &config.scheme)?;
    let draws = config.epochs * config.resolve_draws_per_epoch(graph);
    let eta = config.step_size;
    let bound = config.clip_bound;

    let mut batch = SampleBatch::default();
    let mut grad = vec![F::zero(); n * d];
    let mut touched: Vec<u32> = Vec::new();
    for iteration in 0..draws {
        ctx.draw_into(
            &config.scheme,
            config.sampling_options,
            &mut rng,
            &mut batch,
        )?;
        touched.clear();
        accumulate_batch_gradient(&state, &batch, iteration, &mut grad, &mut touched)?;
        for &v in &touched {
            let base = v as usize * d;
            for r in 0..d {
                let idx = base + r;
                let g = grad[idx];
                if !g.is_finite() {
                    return Err(Error::NonFiniteGradient {
                        iteration,
                        pair: (v, v),
                        logit: g,
                    });
                }
                let updated = (state.vectors[idx] - eta * g).max(-bound).min(bound);
                state.vectors[idx] = updated;
                grad[idx] = F::zero();
            }
        }
    }
    Ok(state)
}

/// The subsampling-induced empirical risk
/// `(1/n^2) sum_{i != j} f_n(l_i, l_j, a_ij) loss(B(w_i, w_j), a_ij)`.
pub fn empirical_risk<F: Real>(
    graph: &SampledGraph<F>,
    weights: &SamplingWeights<F>,
    emb: &EmbeddingState<F>,
) -> Result<F, F> {
    if emb.n() != graph.n() {
        return Err(Error::DimensionMismatch {
            expected: graph.n(),
            got: emb.n(),
        });
    }
    let n = graph.n();
    let mut acc = F::zero();
    for i in 0..n as u32 {
        for j in (i + 1)..n as u32 {
            let edge = graph.has_edge(i, j);
            let f = weights.f(graph.latent(i), graph.latent(j), edge)?;
            let y = emb.pair_similarity(i, j);
            let (loss, _) = loss_and_grad(y, edge);
            acc += f * loss;
        }
    }
    // Ordered pairs double the upper triangle.
    Ok(acc * real::<F>(2.0) / real::<F>((n * n) as f64))
}

/// One draw of the per-vertex gradient estimator for walk-based sampling:
/// `G_i = (1/k) sum_j 1[(i,j) in S] loss'(B(w_i, w_j), a_ij) I w_j`,
/// where the indicator counts membership (not multiplicity).
pub fn gradient_estimate<F: Real, R: Rng>(
    graph: &SampledGraph<F>,
    scheme: &SamplingScheme<F>,
    emb: &EmbeddingState<F>,
    vertex: u32,
    rng: &mut R,
) -> Result<Vec<F>, F> {
    let k = match *scheme {
        SamplingScheme::RandomWalkUnigram { k, .. } => k,
        _ => {
            return Err(Error::InvalidArgument(
                "gradient estimator is defined for the random-walk scheme".into(),
            ))
        }
    };
    if emb.n() != graph.n() {
        return Err(Error::DimensionMismatch {
            expected: graph.n(),
            got: emb.n(),
        });
    }
    let ctx = DrawContext::new(graph, scheme)?;
    let mut batch = SampleBatch::default();
    ctx.draw_into(scheme, SamplingOptions::default(), rng, &mut batch)?;
    gradient_from_batch(graph, emb, vertex, k, &batch)
}

pub(crate) fn gradient_from_batch<F: Real>(
    graph: &SampledGraph<F>,
    emb: &EmbeddingState<F>,
    vertex: u32,
    walk_length: usize,
    batch: &SampleBatch,
) -> Result<Vec<F>, F> {
    let sig = emb.signature();
    let d = sig.dim();
    let mut partners: Vec<u32> = batch
        .pairs
        .iter()
        .filter_map(|p| {
            if p.i == vertex {
                Some(p.j)
            } else if p.j == vertex {
                Some(p.i)
            } else {
                None
            }
        })
        .collect();
    partners.sort_unstable();
    partners.dedup();

    let wi = emb.row(vertex);
    let mut g = vec![F::zero(); d];
    for &j in &partners {
        let wj = emb.row(j);
        let y = similarity_unchecked(sig, wi, wj);
        let (_, dy) = loss_and_grad(y, graph.has_edge(vertex, j));
        for r in 0..d {
            let s: F = sig.sign(r);
            g[r] += dy * s * wj[r];
        }
    }
    let inv_k = F::one() / real::<F>(walk_length as f64);
    for x in &mut g {
        *x *= inv_k;
    }
    Ok(g)
}
