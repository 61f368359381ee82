//! Implementations of the one-shot CLI subcommands (everything except the
//! grid runner, which lives in [`crate::experiment`]).

use std::fs;
use std::path::{Path, PathBuf};

use graphon_embed::diagnostics::{gradient_variance_probe, link_prediction_loss, LinkLossKind};
use graphon_embed::embed::train;
use graphon_embed::graphon::sample_graph;
use graphon_embed::limits::{
    sbm_block_limit_krein, sbm_block_limit_psd, signature_from_kernel, two_block_closed_form,
};
use graphon_embed::linalg::SquareMatrix;
use graphon_embed::rng::mix_seed;
use graphon_embed::sampling::{estimate_pair_probability, SamplingWeights};
use graphon_embed::{GraphonSpec64, SampledGraph64, SamplingScheme64};

use crate::config::ExperimentConfig;

pub type CommandError = Box<dyn std::error::Error + Send + Sync>;
pub type CommandResult = Result<(), CommandError>;

fn ensure_dir(dir: &Path) -> Result<(), CommandError> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn scheme_at(config: &ExperimentConfig, idx: usize) -> Result<SamplingScheme64, CommandError> {
    config
        .schemes
        .get(idx)
        .map(|s| s.to_core())
        .ok_or_else(|| format!("scheme index {idx} out of range").into())
}

fn graph_for(
    config: &ExperimentConfig,
    n: usize,
    seed: u64,
) -> Result<(GraphonSpec64, SampledGraph64), CommandError> {
    let spec = config.spec.to_core()?;
    let rho = crate::experiment::effective_rho(config.sparsity, spec.rho(), n);
    let spec = spec.with_rho(rho)?;
    let graph = sample_graph(&spec, n, seed)?;
    Ok((spec, graph))
}

/// `generate`: sample one graph and export it as an edge list plus latents
/// sidecar.
pub fn generate(config: &ExperimentConfig, n: usize, seed: u64, out: &Path) -> CommandResult {
    ensure_dir(out)?;
    let (_, graph) = graph_for(config, n, seed)?;
    let mut edges = Vec::new();
    graph.write_edge_list(&mut edges)?;
    fs::write(out.join("edges.txt"), edges)?;
    let mut latents = Vec::new();
    graph.write_latents(&mut latents)?;
    fs::write(out.join("latents.txt"), latents)?;
    println!(
        "generated n={n} graph: {} edges -> {}",
        graph.edge_count(),
        out.display()
    );
    Ok(())
}

/// `train`: train one cell and export the embeddings plus sidecar.
pub fn train_once(
    config: &ExperimentConfig,
    n: usize,
    scheme_idx: usize,
    sig_idx: usize,
    seed: u64,
    out: &Path,
) -> CommandResult {
    ensure_dir(out)?;
    let (_, graph) = graph_for(config, n, mix_seed(seed, &[0]))?;
    let scheme = scheme_at(config, scheme_idx)?;
    let signature = config
        .signatures
        .get(sig_idx)
        .ok_or_else(|| format!("signature index {sig_idx} out of range"))?
        .to_core();
    let train_config = config
        .train
        .to_core(signature, scheme, mix_seed(seed, &[1]));
    let emb = train(&graph, &train_config)?;
    let mut csv = Vec::new();
    emb.write_csv(&mut csv)?;
    fs::write(out.join("embedding.csv"), csv)?;
    let mut sidecar = Vec::new();
    emb.write_sidecar(&mut sidecar)?;
    fs::write(out.join("embedding.json"), sidecar)?;
    println!(
        "trained n={n} d=({},{}) -> {}",
        signature.d_plus,
        signature.d_minus,
        out.display()
    );
    Ok(())
}

/// `oracle`: compute the limiting kernels for one scheme and export them.
pub fn oracle(
    config: &ExperimentConfig,
    scheme_idx: usize,
    psd_tol: f64,
    out: &Path,
) -> CommandResult {
    ensure_dir(out)?;
    let spec = config.spec.to_core()?;
    let scheme = scheme_at(config, scheme_idx)?;

    let krein = sbm_block_limit_krein(&spec, &scheme)?;
    let mut buf = Vec::new();
    krein.write_csv(&mut buf)?;
    fs::write(out.join("kernel_krein.csv"), buf)?;
    let sig = signature_from_kernel(&krein, 1e-9);
    println!(
        "krein limit: kappa={} signature=({}, {}) eigenvalues={:?}",
        krein.kappa(),
        sig.d_plus,
        sig.d_minus,
        sig.eigenvalues
    );

    let psd = sbm_block_limit_psd(&spec, &scheme, psd_tol)?;
    let mut buf = Vec::new();
    psd.write_csv(&mut buf)?;
    fs::write(out.join("kernel_psd.csv"), buf)?;

    if config.spec.is_even_two_block() {
        let l0 = spec.block_midpoint(0);
        let l1 = spec.block_midpoint(1);
        let closed = two_block_closed_form(spec.kernel(l0, l0)?, spec.kernel(l0, l1)?)?;
        let mut buf = Vec::new();
        closed.write_csv(&mut buf)?;
        fs::write(out.join("kernel_two_block_closed_form.csv"), buf)?;
        println!(
            "psd vs closed form max abs gap: {:.3e}",
            psd.max_abs_diff(&closed)
        );
    }
    println!("kernels -> {}", out.display());
    Ok(())
}

/// `verify-sampling`: Monte-Carlo pair-inclusion estimates against the
/// closed-form sampling weights, as CSV.
pub fn verify_sampling(
    config: &ExperimentConfig,
    n: usize,
    scheme_idx: usize,
    pairs: usize,
    trials: usize,
    seed: u64,
    out: &Path,
) -> CommandResult {
    ensure_dir(out)?;
    let (spec, graph) = graph_for(config, n, mix_seed(seed, &[0]))?;
    let scheme = scheme_at(config, scheme_idx)?;
    let weights = SamplingWeights::new(&spec, &scheme)?;

    // Half the tested pairs are edges, half non-edges, where available.
    let mut rng = graphon_embed::rng::stream(mix_seed(seed, &[1]), 0);
    use rand::seq::SliceRandom;
    use rand::Rng;
    let mut chosen: Vec<(u32, u32)> = graph
        .edges()
        .choose_multiple(&mut rng, pairs / 2)
        .copied()
        .collect();
    while chosen.len() < pairs {
        let i = rng.gen_range(0..n as u32);
        let j = rng.gen_range(0..n as u32);
        if i != j && !graph.has_edge(i, j) && !chosen.contains(&(i.min(j), i.max(j))) {
            chosen.push((i.min(j), i.max(j)));
        }
    }

    let estimates = estimate_pair_probability(&graph, &scheme, &chosen, trials, &mut rng)?;
    let mut csv = String::from("pair_i,pair_j,a_ij,mc_estimate,formula_value,std_err\n");
    let mut within = 0usize;
    for e in &estimates {
        let formula = weights.f(graph.latent(e.i), graph.latent(e.j), e.edge)?;
        if (e.scaled_estimate - formula).abs() <= 0.1 * formula {
            within += 1;
        }
        csv.push_str(&format!(
            "{},{},{},{:.16e},{:.16e},{:.16e}\n",
            e.i, e.j, e.edge as u8, e.scaled_estimate, formula, e.std_err
        ));
    }
    let path = out.join("sampling_verification.csv");
    fs::write(&path, csv)?;
    println!(
        "{within}/{} pairs within 10% of the formula at {trials} draws -> {}",
        estimates.len(),
        path.display()
    );
    Ok(())
}

/// `probe-variance`: sample mean/variance of the walk gradient estimator.
pub fn probe_variance(
    config: &ExperimentConfig,
    n: usize,
    scheme_idx: usize,
    vertex: u32,
    trials: usize,
    seed: u64,
    out: &Path,
) -> CommandResult {
    ensure_dir(out)?;
    let (_, graph) = graph_for(config, n, mix_seed(seed, &[0]))?;
    let scheme = scheme_at(config, scheme_idx)?;
    let signature = config.signatures[0].to_core();
    // Fixed random embeddings at the configured init scale.
    use rand::Rng;
    let mut init_rng = graphon_embed::rng::stream(mix_seed(seed, &[1]), 0);
    let scale = config.train.init_scale;
    let vectors: Vec<f64> = (0..graph.n() * signature.dim())
        .map(|_| init_rng.gen_range(-scale..scale))
        .collect();
    let emb = graphon_embed::EmbeddingState64::from_vectors(
        signature,
        config.train.clip_bound,
        graph.n(),
        vectors,
    )?;
    let mut rng = graphon_embed::rng::stream(mix_seed(seed, &[2]), 0);
    let probe = gradient_variance_probe(&graph, &scheme, &emb, vertex, trials, &mut rng)?;
    let mut csv = String::from("coordinate,mean,variance\n");
    for r in 0..probe.mean.len() {
        csv.push_str(&format!(
            "{r},{:.16e},{:.16e}\n",
            probe.mean[r], probe.variance[r]
        ));
    }
    let path = out.join("gradient_probe.csv");
    fs::write(&path, csv)?;
    println!(
        "vertex {vertex}: mean |g| = {:.3e}, mean var = {:.3e} over {trials} draws -> {}",
        probe.mean.iter().map(|x| x.abs()).sum::<f64>() / probe.mean.len() as f64,
        probe.variance.iter().sum::<f64>() / probe.variance.len() as f64,
        path.display()
    );
    Ok(())
}

/// `evaluate`: train one cell and report link-prediction losses of the score
/// matrix `S_ij = B(w_i, w_j)` against the graph's adjacency.
pub fn evaluate(
    config: &ExperimentConfig,
    n: usize,
    scheme_idx: usize,
    sig_idx: usize,
    tau: f64,
    seed: u64,
    out: &Path,
) -> CommandResult {
    ensure_dir(out)?;
    let (_, graph) = graph_for(config, n, mix_seed(seed, &[0]))?;
    let scheme = scheme_at(config, scheme_idx)?;
    let signature = config
        .signatures
        .get(sig_idx)
        .ok_or_else(|| format!("signature index {sig_idx} out of range"))?
        .to_core();
    let train_config = config
        .train
        .to_core(signature, scheme, mix_seed(seed, &[1]));
    let emb = train(&graph, &train_config)?;

    let mut scores = SquareMatrix::zeros(n);
    for i in 0..n as u32 {
        for j in 0..n as u32 {
            scores.set(i as usize, j as usize, emb.pair_similarity(i, j));
        }
    }
    let zero_one = link_prediction_loss(&scores, &graph, LinkLossKind::ZeroOne { tau })?;
    let cross_entropy = link_prediction_loss(&scores, &graph, LinkLossKind::CrossEntropy)?;
    // The hinge is evaluated on sigmoid-squashed scores so they sit in (0, 1).
    let mut squashed = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            squashed.set(i, j, graphon_embed::scalar::sigmoid(scores.get(i, j)));
        }
    }
    let hinge = link_prediction_loss(&squashed, &graph, LinkLossKind::Hinge)?;

    let csv = format!(
        "loss,value\nzero_one_tau_{tau},{zero_one:.16e}\ncross_entropy,{cross_entropy:.16e}\nhinge,{hinge:.16e}\n"
    );
    let path = out.join("link_prediction.csv");
    fs::write(&path, csv)?;
    println!(
        "link prediction on n={n}: zero-one(tau={tau}) = {zero_one:.4}, cross-entropy = {cross_entropy:.4}, hinge = {hinge:.4} -> {}",
        path.display()
    );
    Ok(())
}

/// `experiment`: the full grid. Returns the number of failed cells.
pub fn experiment(
    config: &ExperimentConfig,
    out_dir: &Path,
    jobs: usize,
    cell_filter: Option<&str>,
) -> Result<usize, CommandError> {
    let outcome = crate::experiment::run_experiment(config, jobs, cell_filter);
    let path = resolve_output_path(out_dir, &config.output_path);
    crate::experiment::write_metrics(&outcome.records, &path)?;
    println!("{} records -> {}", outcome.records.len(), path.display());
    println!("n,scheme,d_plus,d_minus,oracle,mean_l1,sd_l1,cells");
    for s in &outcome.summary {
        println!(
            "{},{},{},{},{},{:.6},{:.6},{}",
            s.n, s.scheme, s.d_plus, s.d_minus, s.oracle, s.mean_l1, s.sd_l1, s.cells
        );
    }
    for f in &outcome.failures {
        eprintln!("cell {} failed: {}", f.cell, f.error);
    }
    Ok(outcome.failures.len())
}

pub fn resolve_output_path(out_dir: &Path, output_path: &str) -> PathBuf {
    let p = Path::new(output_path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        out_dir.join(p)
    }
}
