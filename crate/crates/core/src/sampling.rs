//! Subsampling schemes and their asymptotic sampling weights.
//!
//! Four schemes are implemented: uniform vertex sampling (induced subgraph),
//! uniform edge sampling with unigram negatives, uniform edge sampling with
//! induced-subgraph negatives, and random-walk sampling with unigram
//! negatives. Each has a closed-form weight `f_n(l, l', a)` approximating
//! `n^2 P((i,j) in S(G) | G)` in terms of the latents and edge status alone;
//! [`SamplingWeights`] evaluates those formulas and their `tilde` variants,
//! and [`estimate_pair_probability`] checks them against the Monte-Carlo
//! truth on a concrete graph.

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::Rng;

use crate::error::{Error, Result};
use crate::graphon::{GraphonSpec, SampledGraph};
use crate::scalar::{real, Real};

/// One of the four subsampling schemes with its hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub enum SamplingScheme<F> {
    /// Sample `k` vertices without replacement; return the induced subgraph.
    UniformVertex { k: usize },
    /// Sample `k` edges without replacement; for each endpoint vertex draw
    /// `l` unigram negatives with exponent `alpha`.
    UniformEdgeUnigram { k: usize, l: usize, alpha: F },
    /// Sample `k` edges without replacement; return the subgraph induced by
    /// their endpoints.
    UniformEdgeInduced { k: usize },
    /// Simple random walk of length `k` started from the stationary
    /// distribution `deg/2E`; consecutive pairs are positives and each walk
    /// vertex draws `l` unigram negatives with exponent `alpha`.
    RandomWalkUnigram { k: usize, l: usize, alpha: F },
}

impl<F: Real> SamplingScheme<F> {
    pub fn validate(&self) -> Result<(), F> {
        match *self {
            SamplingScheme::UniformVertex { k } => {
                if k < 2 {
                    return Err(Error::InvalidArgument(
                        "uniform vertex sampling needs k >= 2".into(),
                    ));
                }
            }
            SamplingScheme::UniformEdgeUnigram { k, l, alpha } => {
                check_k_l(k, l)?;
                check_alpha(alpha)?;
            }
            SamplingScheme::UniformEdgeInduced { k } => {
                if k < 1 {
                    return Err(Error::InvalidArgument("k must be >= 1".into()));
                }
            }
            SamplingScheme::RandomWalkUnigram { k, l, alpha } => {
                check_k_l(k, l)?;
                check_alpha(alpha)?;
            }
        }
        Ok(())
    }

    /// Stable identifier used in metrics files (no commas).
    pub fn id(&self) -> String {
        match self {
            SamplingScheme::UniformVertex { k } => format!("uniform_vertex_k{k}"),
            SamplingScheme::UniformEdgeUnigram { k, l, alpha } => {
                format!("uniform_edge_unigram_k{k}_l{l}_a{alpha}")
            }
            SamplingScheme::UniformEdgeInduced { k } => format!("uniform_edge_induced_k{k}"),
            SamplingScheme::RandomWalkUnigram { k, l, alpha } => {
                format!("random_walk_unigram_k{k}_l{l}_a{alpha}")
            }
        }
    }

    /// Nominal number of pairs one draw contributes, used for epoch
    /// accounting (cumulative pairs relative to the edge count).
    pub fn nominal_pairs_per_draw(&self) -> usize {
        match *self {
            SamplingScheme::UniformVertex { k } => k * (k - 1) / 2,
            SamplingScheme::UniformEdgeUnigram { k, l, .. } => k + 2 * k * l,
            SamplingScheme::UniformEdgeInduced { k } => k * (2 * k - 1),
            SamplingScheme::RandomWalkUnigram { k, l, .. } => k + (k + 1) * l,
        }
    }
}

fn check_k_l<F: Real>(k: usize, l: usize) -> Result<(), F> {
    if k < 1 || l < 1 {
        return Err(Error::InvalidArgument("k and l must be >= 1".into()));
    }
    Ok(())
}

fn check_alpha<F: Real>(alpha: F) -> Result<(), F> {
    if alpha > F::zero() && alpha <= F::one() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "unigram exponent alpha must lie in (0, 1], got {alpha}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairLabel {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplePair {
    pub i: u32,
    pub j: u32,
    pub label: PairLabel,
}

/// Labeled vertex pairs returned by one draw of a scheme.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SampleBatch {
    pub pairs: Vec<SamplePair>,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Knobs mirroring common implementation trade-offs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplingOptions {
    /// Keep a unigram draw only when it is a non-edge. Real implementations
    /// often skip the check; disabling it removes the `1 - rho W` factor from
    /// the positive tilde weight.
    pub check_non_edges: bool,
    /// Drop repeated `(i, j, label)` occurrences within one batch. Off by
    /// default: the risk surrogate weights pairs by inclusion probability, so
    /// training consumes each occurrence as its own gradient term.
    pub dedupe: bool,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        SamplingOptions {
            check_non_edges: true,
            dedupe: false,
        }
    }
}

/// Draws one batch with default options.
pub fn draw_sample<F: Real, R: Rng>(
    graph: &SampledGraph<F>,
    scheme: &SamplingScheme<F>,
    rng: &mut R,
) -> Result<SampleBatch, F> {
    draw_sample_with(graph, scheme, SamplingOptions::default(), rng)
}

/// Draws one batch of labeled pairs from `graph` according to `scheme`.
pub fn draw_sample_with<F: Real, R: Rng>(
    graph: &SampledGraph<F>,
    scheme: &SamplingScheme<F>,
    options: SamplingOptions,
    rng: &mut R,
) -> Result<SampleBatch, F> {
    scheme.validate()?;
    let ctx = DrawContext::new(graph, scheme)?;
    let mut batch = SampleBatch::default();
    ctx.draw_into(scheme, options, rng, &mut batch)?;
    Ok(batch)
}

/// Per-(graph, scheme) state reused across repeated draws: the unigram
/// cumulative table is O(n) to build, so Monte-Carlo loops hoist it.
pub(crate) struct DrawContext<'g, F: Real> {
    graph: &'g SampledGraph<F>,
    unigram_cumsum: Option<Vec<F>>,
}

impl<'g, F: Real> DrawContext<'g, F> {
    pub(crate) fn new(graph: &'g SampledGraph<F>, scheme: &SamplingScheme<F>) -> Result<Self, F> {
        scheme.validate()?;
        let unigram_cumsum = match *scheme {
            SamplingScheme::UniformEdgeUnigram { alpha, .. }
            | SamplingScheme::RandomWalkUnigram { alpha, .. } => {
                let w = unigram_weights(graph, alpha)?;
                let mut acc = F::zero();
                Some(
                    w.into_iter()
                        .map(|x| {
                            acc += x;
                            acc
                        })
                        .collect(),
                )
            }
            _ => None,
        };
        Ok(DrawContext {
            graph,
            unigram_cumsum,
        })
    }

    fn unigram_pick<R: Rng>(&self, rng: &mut R) -> u32 {
        let cum = self
            .unigram_cumsum
            .as_ref()
            .expect("unigram table prepared for unigram schemes");
        let total = *cum.last().unwrap();
        let t = rng.gen_range(F::zero()..total);
        cum.partition_point(|&c| c <= t).min(cum.len() - 1) as u32
    }

    pub(crate) fn draw_into<R: Rng>(
        &self,
        scheme: &SamplingScheme<F>,
        options: SamplingOptions,
        rng: &mut R,
        batch: &mut SampleBatch,
    ) -> Result<(), F> {
        batch.pairs.clear();
        let graph = self.graph;
        let n = graph.n();
        match *scheme {
            SamplingScheme::UniformVertex { k } => {
                if k > n {
                    return Err(Error::InvalidArgument(format!(
                        "cannot sample {k} of {n} vertices"
                    )));
                }
                let sample = rand::seq::index::sample(rng, n, k);
                let verts: Vec<u32> = sample.iter().map(|v| v as u32).collect();
                for (a, &i) in verts.iter().enumerate() {
                    for &j in verts.iter().skip(a + 1) {
                        let label = if graph.has_edge(i, j) {
                            PairLabel::Positive
                        } else {
                            PairLabel::Negative
                        };
                        batch.pairs.push(SamplePair { i, j, label });
                    }
                }
            }
            SamplingScheme::UniformEdgeUnigram { k, l, .. } => {
                let verts = self.sample_edges_into(k, rng, batch)?;
                for &u in &verts {
                    for _ in 0..l {
                        let v = self.unigram_pick(rng);
                        if v != u && (!options.check_non_edges || !graph.has_edge(u, v)) {
                            batch.pairs.push(SamplePair {
                                i: u,
                                j: v,
                                label: PairLabel::Negative,
                            });
                        }
                    }
                }
            }
            SamplingScheme::UniformEdgeInduced { k } => {
                let mut scratch = SampleBatch::default();
                let verts = self.sample_edges_into(k, rng, &mut scratch)?;
                let verts: Vec<u32> = verts.into_iter().collect();
                for (a, &i) in verts.iter().enumerate() {
                    for &j in verts.iter().skip(a + 1) {
                        let label = if graph.has_edge(i, j) {
                            PairLabel::Positive
                        } else {
                            PairLabel::Negative
                        };
                        batch.pairs.push(SamplePair { i, j, label });
                    }
                }
            }
            SamplingScheme::RandomWalkUnigram { k, l, .. } => {
                if graph.edge_count() == 0 {
                    return Err(Error::InvalidArgument(
                        "random walk sampling needs at least one edge".into(),
                    ));
                }
                let mut walk = Vec::with_capacity(k + 1);
                let mut cur = graph.stationary_vertex(rng)?;
                walk.push(cur);
                for _ in 0..k {
                    let ns = graph.neighbors(cur);
                    cur = ns[rng.gen_range(0..ns.len())];
                    walk.push(cur);
                }
                for t in 0..k {
                    batch.pairs.push(SamplePair {
                        i: walk[t],
                        j: walk[t + 1],
                        label: PairLabel::Positive,
                    });
                }
                for &u in &walk {
                    for _ in 0..l {
                        let v = self.unigram_pick(rng);
                        if v != u && (!options.check_non_edges || !graph.has_edge(u, v)) {
                            batch.pairs.push(SamplePair {
                                i: u,
                                j: v,
                                label: PairLabel::Negative,
                            });
                        }
                    }
                }
            }
        }
        if options.dedupe {
            let mut seen = HashSet::with_capacity(batch.pairs.len());
            batch
                .pairs
                .retain(|p| seen.insert((p.i.min(p.j), p.i.max(p.j), p.label)));
        }
        Ok(())
    }

    /// Samples `k` distinct edges, pushes them as positives, and returns the
    /// sorted set of their endpoints.
    fn sample_edges_into<R: Rng>(
        &self,
        k: usize,
        rng: &mut R,
        batch: &mut SampleBatch,
    ) -> Result<BTreeSet<u32>, F> {
        let edges = self.graph.edges();
        if k > edges.len() {
            return Err(Error::InvalidArgument(format!(
                "cannot sample {k} of {} edges",
                edges.len()
            )));
        }
        let idx = rand::seq::index::sample(rng, edges.len(), k);
        let mut verts = BTreeSet::new();
        for e in idx.iter() {
            let (i, j) = edges[e];
            batch.pairs.push(SamplePair {
                i,
                j,
                label: PairLabel::Positive,
            });
            verts.insert(i);
            verts.insert(j);
        }
        Ok(verts)
    }
}

/// Unigram distribution over vertices: `weight(v) ∝ deg(v)^alpha`.
///
/// This is the asymptotically equivalent surrogate for the visit-probability
/// unigram: the chance a length-`k` stationary walk visits `v` is
/// `k deg(v)/2E` up to vanishing relative error, and the constants cancel
/// after normalization.
pub fn unigram_weights<F: Real>(graph: &SampledGraph<F>, alpha: F) -> Result<Vec<F>, F> {
    if !(alpha > F::zero()) {
        return Err(Error::Domain(format!(
            "unigram exponent must be positive, got {alpha}"
        )));
    }
    if graph.edge_count() == 0 {
        return Err(Error::InvalidArgument(
            "all degrees are zero; unigram distribution undefined".into(),
        ));
    }
    let mut w: Vec<F> = graph
        .degrees()
        .iter()
        .map(|&d| {
            if d == 0 {
                F::zero()
            } else {
                real::<F>(d as f64).powf(alpha)
            }
        })
        .collect();
    let total: F = w.iter().copied().sum();
    for x in &mut w {
        *x /= total;
    }
    Ok(w)
}

/// Closed-form sampling weights `f_n` and `tilde f_n` for a (model, scheme)
/// pair. Construction precomputes the graphon moments.
#[derive(Debug, Clone)]
pub struct SamplingWeights<F: Real> {
    spec: GraphonSpec<F>,
    scheme: SamplingScheme<F>,
    e_w: F,
    e_w_alpha: F,
}

impl<F: Real> SamplingWeights<F> {
    pub fn new(spec: &GraphonSpec<F>, scheme: &SamplingScheme<F>) -> Result<Self, F> {
        spec.validate()?;
        scheme.validate()?;
        let alpha = match *scheme {
            SamplingScheme::UniformEdgeUnigram { alpha, .. }
            | SamplingScheme::RandomWalkUnigram { alpha, .. } => alpha,
            _ => F::one(),
        };
        let (e_w, e_w_alpha) = spec.moments(alpha)?;
        if !(e_w > F::zero()) {
            return Err(Error::InvalidSpec(
                "edge density E_W must be positive for sampling weights".into(),
            ));
        }
        Ok(SamplingWeights {
            spec: spec.clone(),
            scheme: scheme.clone(),
            e_w,
            e_w_alpha,
        })
    }

    pub fn spec(&self) -> &GraphonSpec<F> {
        &self.spec
    }

    pub fn scheme(&self) -> &SamplingScheme<F> {
        &self.scheme
    }

    /// `f_n(l, l', a)`: the asymptotic value of `n^2 P((i,j) in S | G)` for a
    /// pair with latents `(l, l')` and edge indicator `a`.
    pub fn f(&self, l: F, l_prime: F, edge: bool) -> Result<F, F> {
        let rho = self.spec.rho();
        match self.scheme {
            SamplingScheme::UniformVertex { k } => Ok(count::<F>(k) * count(k - 1)),
            SamplingScheme::UniformEdgeUnigram { k, l: neg, alpha } => {
                if edge {
                    self.per_edge_weight(real::<F>(2.0) * count(k), rho)
                } else {
                    let s = self.degree_cross_term(l, l_prime, alpha)?;
                    Ok(real::<F>(2.0) * count(k) * count(neg) / (self.e_w * self.e_w_alpha) * s)
                }
            }
            SamplingScheme::UniformEdgeInduced { k } => {
                let d = self.spec.degree_function(l)? * self.spec.degree_function(l_prime)?;
                let shared = real::<F>(4.0) * count(k) * count(k - 1) * d / (self.e_w * self.e_w);
                if edge {
                    Ok(self.per_edge_weight(real::<F>(4.0) * count(k), rho)? + shared)
                } else {
                    Ok(shared)
                }
            }
            SamplingScheme::RandomWalkUnigram { k, l: neg, alpha } => {
                if edge {
                    self.per_edge_weight(real::<F>(2.0) * count(k), rho)
                } else {
                    let s = self.degree_cross_term(l, l_prime, alpha)?;
                    Ok(count::<F>(neg) * count(k + 1) / (self.e_w * self.e_w_alpha) * s)
                }
            }
        }
    }

    /// `tilde f_n(l, l', 1) = f_n(l, l', 1) * rho * W` and
    /// `tilde f_n(l, l', 0) = f_n(l, l', 0) * (1 - rho * W)`.
    ///
    /// The edge-based schemes cancel `rho` analytically: their positive tilde
    /// weight is exactly free of the sparsity factor.
    pub fn tilde(&self, l: F, l_prime: F) -> Result<(F, F), F> {
        let w = self.spec.kernel(l, l_prime)?;
        let w_n = self.spec.rho() * w;
        let two = real::<F>(2.0);
        let t1 = match self.scheme {
            SamplingScheme::UniformVertex { k } => count::<F>(k) * count(k - 1) * w_n,
            SamplingScheme::UniformEdgeUnigram { k, .. } => two * count(k) * w / self.e_w,
            SamplingScheme::UniformEdgeInduced { k } => {
                let d = self.spec.degree_function(l)? * self.spec.degree_function(l_prime)?;
                real::<F>(4.0) * count(k) * w / self.e_w
                    + real::<F>(4.0) * count(k) * count(k - 1) * d / (self.e_w * self.e_w) * w_n
            }
            SamplingScheme::RandomWalkUnigram { k, .. } => two * count(k) * w / self.e_w,
        };
        let t0 = self.f(l, l_prime, false)? * (F::one() - w_n);
        Ok((t1, t0))
    }

    fn per_edge_weight(&self, numerator: F, rho: F) -> Result<F, F> {
        if !(rho > F::zero()) {
            return Err(Error::Domain(
                "per-edge sampling weight is undefined at rho = 0".into(),
            ));
        }
        Ok(numerator / (self.e_w * rho))
    }

    /// `W(l,.) W(l',.)^alpha + W(l',.) W(l,.)^alpha`.
    fn degree_cross_term(&self, l: F, l_prime: F, alpha: F) -> Result<F, F> {
        let dl = self.spec.degree_function(l)?;
        let dlp = self.spec.degree_function(l_prime)?;
        Ok(dl * dlp.powf(alpha) + dlp * dl.powf(alpha))
    }
}

#[inline]
fn count<F: Real>(k: usize) -> F {
    real::<F>(k as f64)
}

/// One-shot evaluation of `f_n`; use [`SamplingWeights`] for repeated calls.
pub fn sampling_weight_f<F: Real>(
    spec: &GraphonSpec<F>,
    scheme: &SamplingScheme<F>,
    l: F,
    l_prime: F,
    edge: bool,
) -> Result<F, F> {
    SamplingWeights::new(spec, scheme)?.f(l, l_prime, edge)
}

/// One-shot evaluation of `(tilde f_1, tilde f_0)`.
pub fn tilde_weights<F: Real>(
    spec: &GraphonSpec<F>,
    scheme: &SamplingScheme<F>,
    l: F,
    l_prime: F,
) -> Result<(F, F), F> {
    SamplingWeights::new(spec, scheme)?.tilde(l, l_prime)
}

/// Monte-Carlo estimate of the scaled inclusion probability of one pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairEstimate<F> {
    pub i: u32,
    pub j: u32,
    pub edge: bool,
    /// `n^2` times the inclusion frequency across draws.
    pub scaled_estimate: F,
    /// `n^2` times the binomial standard error of the frequency.
    pub std_err: F,
    pub hits: u64,
    pub trials: u64,
}

/// Estimates `n^2 P((i,j) in S(G) | G)` for each queried pair by drawing
/// `trials` independent batches and counting inclusion (a pair counts once
/// per draw regardless of multiplicity).
pub fn estimate_pair_probability<F: Real, R: Rng>(
    graph: &SampledGraph<F>,
    scheme: &SamplingScheme<F>,
    pairs: &[(u32, u32)],
    trials: usize,
    rng: &mut R,
) -> Result<Vec<PairEstimate<F>>, F> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    let mut index: HashMap<(u32, u32), usize> = HashMap::with_capacity(pairs.len());
    for (slot, &(a, b)) in pairs.iter().enumerate() {
        if a == b {
            return Err(Error::InvalidArgument(format!(
                "pair ({a}, {b}) is a self-pair"
            )));
        }
        index.insert((a.min(b), a.max(b)), slot);
    }

    let ctx = DrawContext::new(graph, scheme)?;
    let mut hits = vec![0u64; pairs.len()];
    let mut stamp = vec![0u64; pairs.len()];
    let mut batch = SampleBatch::default();
    for trial in 1..=(trials as u64) {
        ctx.draw_into(scheme, SamplingOptions::default(), rng, &mut batch)?;
        for p in &batch.pairs {
            let key = (p.i.min(p.j), p.i.max(p.j));
            if let Some(&slot) = index.get(&key) {
                if stamp[slot] != trial {
                    stamp[slot] = trial;
                    hits[slot] += 1;
                }
            }
        }
    }

    let n2 = real::<F>((graph.n() * graph.n()) as f64);
    let t = real::<F>(trials as f64);
    Ok(pairs
        .iter()
        .zip(&hits)
        .map(|(&(a, b), &h)| {
            let p_hat = real::<F>(h as f64) / t;
            PairEstimate {
                i: a,
                j: b,
                edge: graph.has_edge(a, b),
                scaled_estimate: n2 * p_hat,
                std_err: n2 * (p_hat * (F::one() - p_hat) / t).sqrt(),
                hits: h,
                trials: trials as u64,
            }
        })
        .collect())
}
