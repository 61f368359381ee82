//! Limiting kernels of trained embeddings.
//!
//! For a model and subsampling scheme, the Gram matrix of risk-minimizing
//! embeddings converges to a kernel `K*` on `[0,1]^2`. Training with an
//! indefinite (Krein) similarity reaches the unconstrained pointwise
//! minimizer `sigma^{-1}(tf_1 / (tf_1 + tf_0))`; training with the ordinary
//! inner product reaches the minimizer constrained to the nonnegative
//! definite cone, computed here by a projected-gradient convex program. For
//! two even blocks under uniform vertex sampling the constrained minimizer
//! has a four-regime closed form, which doubles as the solver's oracle.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::graphon::GraphonSpec;
use crate::linalg::{psd_project, symmetric_eigen, SquareMatrix};
use crate::sampling::{SamplingScheme, SamplingWeights};
use crate::scalar::{logit, real, sigmoid, Real};

/// A symmetric kernel that is constant on the blocks of an SBM partition.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockKernel<F> {
    pi: Vec<F>,
    values: SquareMatrix<F>,
}

impl<F: Real> BlockKernel<F> {
    pub fn new(pi: Vec<F>, values: SquareMatrix<F>) -> Result<Self, F> {
        if pi.is_empty() || pi.iter().any(|&p| !(p > F::zero())) {
            return Err(Error::InvalidArgument(
                "block sizes must be positive and nonempty".into(),
            ));
        }
        if values.n() != pi.len() {
            return Err(Error::DimensionMismatch {
                expected: pi.len(),
                got: values.n(),
            });
        }
        if !values.is_symmetric() {
            return Err(Error::InvalidArgument(
                "kernel matrix must be symmetric".into(),
            ));
        }
        Ok(BlockKernel { pi, values })
    }

    pub fn kappa(&self) -> usize {
        self.pi.len()
    }

    pub fn pi(&self) -> &[F] {
        &self.pi
    }

    pub fn values(&self) -> &SquareMatrix<F> {
        &self.values
    }

    #[inline]
    pub fn entry(&self, l: usize, m: usize) -> F {
        self.values.get(l, m)
    }

    /// Block of a latent coordinate under this kernel's partition.
    pub fn block_of(&self, l: F) -> usize {
        let mut acc = F::zero();
        for (b, &p) in self.pi.iter().enumerate() {
            acc += p;
            if l < acc {
                return b;
            }
        }
        self.pi.len() - 1
    }

    /// `K*(l, l')` for latent coordinates.
    #[inline]
    pub fn value_at(&self, l: F, l_prime: F) -> F {
        self.values.get(self.block_of(l), self.block_of(l_prime))
    }

    pub fn max_abs_diff(&self, other: &BlockKernel<F>) -> F {
        self.values.max_abs_diff(&other.values)
    }

    /// CSV export: `pi` header row, then the kappa x kappa matrix.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let header: Vec<String> = self.pi.iter().map(|p| format!("{p}")).collect();
        writeln!(w, "{}", header.join(","))?;
        for l in 0..self.kappa() {
            let row: Vec<String> = (0..self.kappa())
                .map(|m| format!("{}", self.values.get(l, m)))
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Pointwise unconstrained minimizer
/// `sigma^{-1}( tf_1(l,l') / (tf_1(l,l') + tf_0(l,l')) )`.
pub fn unconstrained_limit<F: Real>(
    spec: &GraphonSpec<F>,
    scheme: &SamplingScheme<F>,
    l: F,
    l_prime: F,
) -> Result<F, F> {
    let weights = SamplingWeights::new(spec, scheme)?;
    unconstrained_from_tilde(weights.tilde(l, l_prime)?)
}

fn unconstrained_from_tilde<F: Real>((t1, t0): (F, F)) -> Result<F, F> {
    if !(t1 > F::zero()) || !(t0 > F::zero()) {
        return Err(Error::SingularLimit {
            tilde_f1: t1,
            tilde_f0: t0,
        });
    }
    Ok(logit(t1 / (t1 + t0)))
}

/// Block kernel of Krein-trained embeddings for an SBM: the unconstrained
/// minimizer evaluated on every block pair.
pub fn sbm_block_limit_krein<F: Real>(
    spec: &GraphonSpec<F>,
    scheme: &SamplingScheme<F>,
) -> Result<BlockKernel<F>, F> {
    let pi = require_sbm(spec)?;
    let weights = SamplingWeights::new(spec, scheme)?;
    let kappa = pi.len();
    let mut values = SquareMatrix::zeros(kappa);
    for l in 0..kappa {
        for m in l..kappa {
            let v = unconstrained_from_tilde(
                weights.tilde(spec.block_midpoint(l), spec.block_midpoint(m))?,
            )?;
            values.set(l, m, v);
            values.set(m, l, v);
        }
    }
    BlockKernel::new(pi.to_vec(), values)
}

fn require_sbm<F: Real>(spec: &GraphonSpec<F>) -> Result<&[F], F> {
    spec.block_sizes().ok_or_else(|| {
        Error::InvalidArgument("block limits are defined for SBM models only".into())
    })
}

/// Iteration cap for the projected-gradient solver.
const PSD_MAX_ITERATIONS: usize = 1_000_000;

/// Block kernel of regular-inner-product training for an SBM: minimizes
///
/// `I[K] = sum_{l,m} pi_l pi_m [ tf_1(l,m) loss(K_lm, 1) + tf_0(l,m) loss(K_lm, 0) ]`
///
/// over kernels that are nonnegative definite as operators (equivalently,
/// `D^{1/2} K D^{1/2} >= 0` with `D = diag(pi)`). Solved by projected
/// gradient descent in the measure-weighted coordinates `M = D^{1/2} K D^{1/2}`
/// with step `1/L` and eigenvalue-clipping projection, stopping when the
/// objective decreases by less than `tol`.
pub fn sbm_block_limit_psd<F: Real>(
    spec: &GraphonSpec<F>,
    scheme: &SamplingScheme<F>,
    tol: F,
) -> Result<BlockKernel<F>, F> {
    if !(tol > F::zero()) {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    let pi = require_sbm(spec)?.to_vec();
    let weights = SamplingWeights::new(spec, scheme)?;
    let kappa = pi.len();

    let mut c1 = SquareMatrix::zeros(kappa);
    let mut c0 = SquareMatrix::zeros(kappa);
    for l in 0..kappa {
        for m in l..kappa {
            let (t1, t0) = weights.tilde(spec.block_midpoint(l), spec.block_midpoint(m))?;
            if !(t1 >= F::zero() && t0 >= F::zero()) {
                return Err(Error::SingularLimit {
                    tilde_f1: t1,
                    tilde_f0: t0,
                });
            }
            c1.set(l, m, t1);
            c1.set(m, l, t1);
            c0.set(l, m, t0);
            c0.set(m, l, t0);
        }
    }

    let sqrt_pi: Vec<F> = pi.iter().map(|&p| p.sqrt()).collect();
    // Curvature of the cross-entropy loss is at most 1/4, so in the
    // M-coordinates the gradient is (c1 + c0)/4-Lipschitz entrywise.
    let mut lip = F::zero();
    for l in 0..kappa {
        for m in 0..kappa {
            lip = lip.max((c1.get(l, m) + c0.get(l, m)) * real::<F>(0.25));
        }
    }
    if !(lip > F::zero()) {
        return Err(Error::InvalidSpec(
            "all sampling weights vanish; objective is constant".into(),
        ));
    }
    let step = F::one() / lip;

    let objective = |m: &SquareMatrix<F>| -> F {
        let mut acc = F::zero();
        for l in 0..kappa {
            for mm in 0..kappa {
                let k_lm = m.get(l, mm) / (sqrt_pi[l] * sqrt_pi[mm]);
                let (lp, _) = crate::embed::loss_and_grad(k_lm, true);
                let (ln_, _) = crate::embed::loss_and_grad(k_lm, false);
                acc += pi[l] * pi[mm] * (c1.get(l, mm) * lp + c0.get(l, mm) * ln_);
            }
        }
        acc
    };
    let gradient = |m: &SquareMatrix<F>, out: &mut SquareMatrix<F>| {
        for l in 0..kappa {
            for mm in 0..kappa {
                let k_lm = m.get(l, mm) / (sqrt_pi[l] * sqrt_pi[mm]);
                let s = sigmoid(k_lm);
                let g = c1.get(l, mm) * (s - F::one()) + c0.get(l, mm) * s;
                out.set(l, mm, sqrt_pi[l] * sqrt_pi[mm] * g);
            }
        }
    };

    let mut m = SquareMatrix::zeros(kappa);
    let mut grad = SquareMatrix::zeros(kappa);
    let mut obj = objective(&m);
    let mut iterations = 0;
    loop {
        iterations += 1;
        gradient(&m, &mut grad);
        let mut next = m.clone();
        for l in 0..kappa {
            for mm in 0..kappa {
                next.set(l, mm, m.get(l, mm) - step * grad.get(l, mm));
            }
        }
        let mut next = psd_project(&next);
        next.symmetrize();
        let next_obj = objective(&next);
        let decrease = obj - next_obj;
        let moved = next.max_abs_diff(&m);
        m = next;
        obj = next_obj;
        if decrease < tol && decrease >= -tol {
            break;
        }
        if iterations >= PSD_MAX_ITERATIONS {
            let kkt_residual = moved / step;
            return Err(Error::NoConvergence {
                iterations,
                kkt_residual,
                last: unscale_kernel(&pi, &sqrt_pi, &m)?,
            });
        }
    }

    unscale_kernel(&pi, &sqrt_pi, &m)
}

fn unscale_kernel<F: Real>(
    pi: &[F],
    sqrt_pi: &[F],
    m: &SquareMatrix<F>,
) -> Result<BlockKernel<F>, F> {
    let kappa = pi.len();
    let mut k = SquareMatrix::zeros(kappa);
    for l in 0..kappa {
        for mm in 0..kappa {
            k.set(l, mm, m.get(l, mm) / (sqrt_pi[l] * sqrt_pi[mm]));
        }
    }
    k.symmetrize();
    BlockKernel::new(pi.to_vec(), k)
}

/// Gradient of the population objective with respect to the kernel entries,
/// `dI/dK_lm = pi_l pi_m [ tf_1 (sigma(K_lm) - 1) + tf_0 sigma(K_lm) ]`.
/// Used for KKT certificates at the solver output.
pub fn psd_objective_gradient<F: Real>(
    spec: &GraphonSpec<F>,
    scheme: &SamplingScheme<F>,
    kernel: &BlockKernel<F>,
) -> Result<SquareMatrix<F>, F> {
    let pi = require_sbm(spec)?;
    let weights = SamplingWeights::new(spec, scheme)?;
    let kappa = pi.len();
    let mut grad = SquareMatrix::zeros(kappa);
    for l in 0..kappa {
        for m in 0..kappa {
            let (t1, t0) = weights.tilde(spec.block_midpoint(l), spec.block_midpoint(m))?;
            let s = sigmoid(kernel.entry(l, m));
            grad.set(l, m, pi[l] * pi[m] * (t1 * (s - F::one()) + t0 * s));
        }
    }
    Ok(grad)
}

/// Closed form of the constrained minimizer for two even blocks under
/// uniform vertex sampling, in four regimes of `(p, q)`:
///
/// - `p >= q`, `p + q >= 1`: `(sigma^{-1}(p), sigma^{-1}(q))`
/// - `p >= q`, `p + q <  1`: `(c, -c)` with `c = sigma^{-1}((1 + p - q)/2)`
/// - `p <  q`, `p + q >= 1`: both entries `sigma^{-1}((p + q)/2)`
/// - otherwise: the zero kernel.
///
/// The regimes agree on their shared boundaries.
pub fn two_block_closed_form<F: Real>(p: F, q: F) -> Result<BlockKernel<F>, F> {
    for (name, v) in [("p", p), ("q", q)] {
        if !(v > F::zero() && v < F::one()) {
            return Err(Error::Domain(format!("{name} must lie in (0, 1), got {v}")));
        }
    }
    let one = F::one();
    let half = real::<F>(0.5);
    let (k11, k12) = if p >= q && p + q >= one {
        (logit(p), logit(q))
    } else if p >= q {
        let c = logit((one + p - q) * half);
        (c, -c)
    } else if p + q >= one {
        let c = logit((p + q) * half);
        (c, c)
    } else {
        (F::zero(), F::zero())
    };
    BlockKernel::new(
        vec![half, half],
        SquareMatrix::from_rows(&[vec![k11, k12], vec![k12, k11]]),
    )
}

/// Inertia of a block kernel as an operator on `L^2[0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSignature<F> {
    pub d_plus: usize,
    pub d_minus: usize,
    /// Eigenvalues of `D^{1/2} K D^{1/2}`, sorted by decreasing magnitude.
    pub eigenvalues: Vec<F>,
    /// Matching eigenvectors as columns, in the measure-weighted coordinates;
    /// the block-constant eigenfunction of `K` is `v_b / sqrt(pi_b)`.
    pub eigenvectors: SquareMatrix<F>,
}

/// Counts eigenvalues of `M = D^{1/2} K D^{1/2}` above `threshold` and below
/// `-threshold`; eigenvalues within the threshold band count as zero.
pub fn signature_from_kernel<F: Real>(kernel: &BlockKernel<F>, threshold: F) -> KernelSignature<F> {
    let kappa = kernel.kappa();
    let mut m = SquareMatrix::zeros(kappa);
    for l in 0..kappa {
        for mm in 0..kappa {
            let s = (kernel.pi()[l] * kernel.pi()[mm]).sqrt();
            m.set(l, mm, s * kernel.entry(l, mm));
        }
    }
    let (w, v) = symmetric_eigen(&m);
    let mut order: Vec<usize> = (0..kappa).collect();
    order.sort_by(|&a, &b| w[b].abs().partial_cmp(&w[a].abs()).unwrap());

    let eigenvalues: Vec<F> = order.iter().map(|&i| w[i]).collect();
    let mut eigenvectors = SquareMatrix::zeros(kappa);
    for (col, &i) in order.iter().enumerate() {
        for row in 0..kappa {
            eigenvectors.set(row, col, v.get(row, i));
        }
    }
    let d_plus = eigenvalues.iter().filter(|&&x| x > threshold).count();
    let d_minus = eigenvalues.iter().filter(|&&x| x < -threshold).count();
    KernelSignature {
        d_plus,
        d_minus,
        eigenvalues,
        eigenvectors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::SamplingScheme;

    fn two_block(p: f64, q: f64) -> GraphonSpec<f64> {
        GraphonSpec::two_block(p, q, 1.0).unwrap()
    }

    #[test]
    fn uniform_vertex_limit_is_logit_of_the_kernel() {
        let spec = two_block(0.7, 0.3);
        let uv = SamplingScheme::UniformVertex { k: 100 };
        // Within-block: sigma^{-1}(0.7) = log(7/3).
        let v = unconstrained_limit(&spec, &uv, 0.1, 0.2).unwrap();
        assert!((v - (7.0f64 / 3.0).ln()).abs() < 1e-12);
        // Cross-block: sigma^{-1}(0.3).
        let v = unconstrained_limit(&spec, &uv, 0.1, 0.9).unwrap();
        assert!((v - (0.3f64 / 0.7).ln()).abs() < 1e-12);
        // Equal tilde weights give zero.
        let er = GraphonSpec::erdos_renyi(0.5, 1.0).unwrap();
        assert!(unconstrained_limit(&er, &uv, 0.3, 0.6).unwrap().abs() < 1e-15);
    }

    #[test]
    fn walk_limit_matches_the_closed_form_route() {
        // Independent algebraic route for SBM(p, q, kappa) with even blocks:
        // every block has the same degree function, so the limit is
        // log( W kappa / ((1 + 1/k) l (1 - rho W) (p + (kappa-1) q)) ).
        let cases = [
            (0.7, 0.3, 1.0, 50usize, 1usize, 1.0),
            (0.7, 0.3, 1.0, 50, 1, 0.75),
            (0.6, 0.2, 0.5, 20, 2, 0.75),
            (0.9, 0.4, 0.25, 7, 3, 1.0),
        ];
        for &(p, q, rho, k, l, alpha) in &cases {
            let spec = GraphonSpec::two_block(p, q, rho).unwrap();
            let rw = SamplingScheme::RandomWalkUnigram { k, l, alpha };
            let kernel = sbm_block_limit_krein(&spec, &rw).unwrap();
            let expect = |w: f64| {
                let denom = (1.0 + 1.0 / k as f64) * l as f64 * (1.0 - rho * w) * (p + q);
                (w * 2.0 / denom).ln()
            };
            assert!(
                (kernel.entry(0, 0) - expect(p)).abs() < 1e-12,
                "diag for p={p}, q={q}, rho={rho}, k={k}, l={l}, alpha={alpha}"
            );
            assert!((kernel.entry(0, 1) - expect(q)).abs() < 1e-12);
        }
        // Pinned value: SBM(0.7, 0.3, 2), k=50, l=1, rho=1 diagonal is
        // log(1.4 / (1.02 * 0.3)) ~ 1.5206.
        let spec = two_block(0.7, 0.3);
        let rw = SamplingScheme::RandomWalkUnigram {
            k: 50,
            l: 1,
            alpha: 1.0,
        };
        let kernel = sbm_block_limit_krein(&spec, &rw).unwrap();
        assert!((kernel.entry(0, 0) - (1.4f64 / (1.02 * 0.3)).ln()).abs() < 1e-12);
        assert!((kernel.entry(0, 0) - 1.5206).abs() < 1e-3);
    }

    #[test]
    fn krein_limit_for_uniform_vertex_sampling() {
        let spec = two_block(0.7, 0.3);
        let uv = SamplingScheme::UniformVertex { k: 100 };
        let kernel = sbm_block_limit_krein(&spec, &uv).unwrap();
        let c = (7.0f64 / 3.0).ln();
        assert!((kernel.entry(0, 0) - c).abs() < 1e-12);
        assert!((kernel.entry(1, 1) - c).abs() < 1e-12);
        assert!((kernel.entry(0, 1) + c).abs() < 1e-12);

        // p = q collapses to a single effective block.
        let flat = two_block(0.4, 0.4);
        let kernel = sbm_block_limit_krein(&flat, &uv).unwrap();
        assert!((kernel.entry(0, 0) - kernel.entry(0, 1)).abs() < 1e-14);

        // Smooth models have no block limit.
        let smooth = GraphonSpec::smooth(
            crate::graphon::SmoothGraphon::CosineProduct {
                base: 0.5,
                amplitude: 0.2,
            },
            1.0,
        )
        .unwrap();
        assert!(sbm_block_limit_krein(&smooth, &uv).is_err());
    }

    #[test]
    fn closed_form_regimes_and_boundaries() {
        // Case (a).
        let k = two_block_closed_form(0.7f64, 0.5).unwrap();
        assert!((k.entry(0, 0) - logit(0.7)).abs() < 1e-15);
        assert!(k.entry(0, 1).abs() < 1e-15);
        // Case (b).
        let k = two_block_closed_form(0.3f64, 0.1).unwrap();
        assert!((k.entry(0, 0) - 1.5f64.ln()).abs() < 1e-15);
        assert!((k.entry(0, 1) + 1.5f64.ln()).abs() < 1e-15);
        // Case (c): p < q with p + q >= 1.
        let k = two_block_closed_form(0.4f64, 0.8).unwrap();
        assert!((k.entry(0, 0) - logit(0.6)).abs() < 1e-15);
        assert!((k.entry(0, 0) - k.entry(0, 1)).abs() < 1e-15);
        // p = 0.2, q = 0.6 has p + q < 1, so it falls in regime (d).
        let k = two_block_closed_form(0.2f64, 0.6).unwrap();
        assert_eq!((k.entry(0, 0), k.entry(0, 1)), (0.0, 0.0));
        // Case (d).
        let k = two_block_closed_form(0.1f64, 0.3).unwrap();
        assert_eq!(k.entry(0, 0), 0.0);
        assert_eq!(k.entry(0, 1), 0.0);
        // p = q = 1/2 sits on every boundary and gives the zero kernel.
        let k = two_block_closed_form(0.5f64, 0.5).unwrap();
        assert!(k.entry(0, 0).abs() < 1e-15 && k.entry(0, 1).abs() < 1e-15);
        // Continuity across p + q = 1 for p >= q: cases (a) and (b) agree.
        for p in [0.6f64, 0.75, 0.9] {
            let q = 1.0 - p;
            let a = two_block_closed_form(p, q).unwrap();
            let c = logit((1.0 + p - q) / 2.0);
            assert!((a.entry(0, 0) - c).abs() < 1e-12);
            assert!((a.entry(0, 1) + c).abs() < 1e-12);
        }
        // Domain errors.
        assert!(two_block_closed_form(0.0f64, 0.5).is_err());
        assert!(two_block_closed_form(0.5f64, 1.0).is_err());
    }

    #[test]
    fn psd_solver_reproduces_spec_cases() {
        let uv = SamplingScheme::UniformVertex { k: 100 };
        let tol = 1e-12;

        let k = sbm_block_limit_psd(&two_block(0.7, 0.5), &uv, tol).unwrap();
        assert!((k.entry(0, 0) - logit(0.7)).abs() < 1e-5);
        assert!(k.entry(0, 1).abs() < 1e-5);

        let k = sbm_block_limit_psd(&two_block(0.3, 0.1), &uv, tol).unwrap();
        assert!((k.entry(0, 0) - 1.5f64.ln()).abs() < 1e-5);
        assert!((k.entry(0, 1) + 1.5f64.ln()).abs() < 1e-5);

        let k = sbm_block_limit_psd(&two_block(0.1, 0.3), &uv, tol).unwrap();
        assert!(k.entry(0, 0).abs() < 1e-5);
        assert!(k.entry(0, 1).abs() < 1e-5);
    }

    #[test]
    fn psd_solver_agrees_with_closed_form_on_a_subgrid() {
        let uv = SamplingScheme::UniformVertex { k: 100 };
        for &p in &[0.2f64, 0.5, 0.8] {
            for &q in &[0.3f64, 0.6, 0.9] {
                let solved = sbm_block_limit_psd(&two_block(p, q), &uv, 1e-12).unwrap();
                let exact = two_block_closed_form(p, q).unwrap();
                assert!(
                    solved.max_abs_diff(&exact) < 1e-4,
                    "p={p}, q={q}: {:?} vs {:?}",
                    solved.values(),
                    exact.values()
                );
            }
        }
    }

    #[test]
    fn psd_solver_matches_unconstrained_limit_in_the_psd_regime() {
        // When the unconstrained minimizer is already nonnegative definite
        // the constraint is inactive.
        let spec = two_block(0.8, 0.6);
        let uv = SamplingScheme::UniformVertex { k: 100 };
        let solved = sbm_block_limit_psd(&spec, &uv, 1e-12).unwrap();
        let krein = sbm_block_limit_krein(&spec, &uv).unwrap();
        assert!(solved.max_abs_diff(&krein) < 1e-6);
    }

    #[test]
    fn psd_solver_handles_uneven_blocks() {
        // KKT certificate: the negative gradient at the optimum lies in the
        // normal cone of the PSD set, i.e. <grad, C - K*> >= 0 for every PSD
        // direction C (checked over random PSD matrices).
        use rand::Rng;
        let spec = GraphonSpec::sbm(vec![0.3, 0.7], vec![0.2, 0.4, 0.4, 0.3], 1.0).unwrap();
        // k = 2 keeps the weights O(1) so the stated slack is meaningful.
        let uv = SamplingScheme::UniformVertex { k: 2 };
        let k_star = sbm_block_limit_psd(&spec, &uv, 1e-14).unwrap();
        let grad = psd_objective_gradient(&spec, &uv, &k_star).unwrap();
        let mut rng = crate::rng::stream(100, 0);
        for _ in 0..100 {
            let a: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.5..1.5)).collect();
            // C = A^T A is PSD.
            let c = [
                a[0] * a[0] + a[2] * a[2],
                a[0] * a[1] + a[2] * a[3],
                a[0] * a[1] + a[2] * a[3],
                a[1] * a[1] + a[3] * a[3],
            ];
            let mut inner = 0.0;
            for l in 0..2 {
                for m in 0..2 {
                    inner += grad.get(l, m) * (c[l * 2 + m] - k_star.entry(l, m));
                }
            }
            assert!(inner >= -1e-6, "KKT violated: {inner}");
        }
    }

    #[test]
    fn signature_counts_match_hand_eigenvalues() {
        // PSD case-(a) kernel: no negative spectrum.
        let psd = two_block_closed_form(0.7f64, 0.5).unwrap();
        let sig = signature_from_kernel(&psd, 1e-9);
        assert_eq!(sig.d_minus, 0);
        assert!(sig.d_plus >= 1);

        // [[-c, c], [c, -c]] with even blocks has eigenvalues {0, -c}.
        let c = logit(0.7f64);
        let kernel = BlockKernel::new(
            vec![0.5, 0.5],
            SquareMatrix::from_rows(&[vec![-c, c], vec![c, -c]]),
        )
        .unwrap();
        let sig = signature_from_kernel(&kernel, 1e-9);
        assert_eq!((sig.d_plus, sig.d_minus), (0, 1));
        assert!((sig.eigenvalues[0] + c).abs() < 1e-12);
        assert!(sig.eigenvalues[1].abs() < 1e-12);

        // Zero kernel.
        let zero = BlockKernel::new(vec![0.5, 0.5], SquareMatrix::zeros(2)).unwrap();
        let sig = signature_from_kernel(&zero, 1e-9);
        assert_eq!((sig.d_plus, sig.d_minus), (0, 0));
    }

    #[test]
    fn signature_eigen_residuals_are_tiny() {
        use rand::Rng;
        let mut rng = crate::rng::stream(55, 0);
        for _ in 0..25 {
            let kappa = rng.gen_range(2..5usize);
            let mut pi: Vec<f64> = (0..kappa).map(|_| rng.gen_range(0.1..1.0)).collect();
            let total: f64 = pi.iter().sum();
            pi.iter_mut().for_each(|p| *p /= total);
            let mut values = SquareMatrix::zeros(kappa);
            for l in 0..kappa {
                for m in l..kappa {
                    let v = rng.gen_range(-3.0..3.0);
                    values.set(l, m, v);
                    values.set(m, l, v);
                }
            }
            let kernel = BlockKernel::new(pi.clone(), values).unwrap();
            let sig = signature_from_kernel(&kernel, 1e-9);
            assert!(sig.d_plus + sig.d_minus <= kappa);

            let mut m = SquareMatrix::zeros(kappa);
            for l in 0..kappa {
                for mm in 0..kappa {
                    m.set(l, mm, (pi[l] * pi[mm]).sqrt() * kernel.entry(l, mm));
                }
            }
            for (idx, &lam) in sig.eigenvalues.iter().enumerate() {
                let v: Vec<f64> = (0..kappa).map(|r| sig.eigenvectors.get(r, idx)).collect();
                let mv = m.mul_vec(&v);
                let res: f64 = mv
                    .iter()
                    .zip(&v)
                    .map(|(&x, &y)| (x - lam * y).powi(2))
                    .sum::<f64>()
                    .sqrt();
                assert!(res <= 1e-10, "residual {res}");
            }
        }
    }

    #[test]
    fn singular_limit_is_reported() {
        let disconnected = GraphonSpec::sbm(vec![0.5, 0.5], vec![0.5, 0.0, 0.0, 0.5], 1.0).unwrap();
        let rw = SamplingScheme::RandomWalkUnigram {
            k: 10,
            l: 1,
            alpha: 1.0,
        };
        match unconstrained_limit(&disconnected, &rw, 0.1, 0.9) {
            Err(Error::SingularLimit { tilde_f1, .. }) => assert_eq!(tilde_f1, 0.0),
            other => panic!("expected singularity, got {other:?}"),
        }
    }
}
