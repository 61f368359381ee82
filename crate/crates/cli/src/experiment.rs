//! Seeded grid runner: generate, train and evaluate every
//! `(n, replicate, scheme, signature)` cell, then persist metrics.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use graphon_embed::diagnostics::{
    l1_kernel_error, ConvergenceRecord, KernelOracle, METRICS_HEADER,
};
use graphon_embed::embed::train;
use graphon_embed::graphon::sample_graph;
use graphon_embed::limits::{sbm_block_limit_krein, sbm_block_limit_psd, two_block_closed_form};
use graphon_embed::rng::mix_seed;
use graphon_embed::sampling::SamplingWeights;
use graphon_embed::scalar::logit;
use graphon_embed::{BlockKernel64, GraphonSpec64, SampledGraph64};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, OracleConfig, SparsityRule};

/// One grid cell, with its derived seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub index: usize,
    pub n: usize,
    pub replicate: usize,
    pub scheme_idx: usize,
    pub sig_idx: usize,
    pub id: String,
    pub seed: u64,
}

/// Seed of a cell: a pure function of the master seed and the cell's grid
/// coordinates, independent of execution order.
pub fn cell_seed(
    master: u64,
    n: usize,
    replicate: usize,
    scheme_idx: usize,
    sig_idx: usize,
) -> u64 {
    mix_seed(
        master,
        &[
            n as u64,
            replicate as u64,
            scheme_idx as u64,
            sig_idx as u64,
        ],
    )
}

/// Enumerates the grid in deterministic order: n, replicate, scheme, signature.
pub fn cells(config: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    let mut index = 0;
    for &n in &config.n_grid {
        for replicate in 0..config.replications {
            for scheme_idx in 0..config.schemes.len() {
                for sig_idx in 0..config.signatures.len() {
                    out.push(Cell {
                        index,
                        n,
                        replicate,
                        scheme_idx,
                        sig_idx,
                        id: format!("n{n}-r{replicate}-s{scheme_idx}-g{sig_idx}"),
                        seed: cell_seed(config.master_seed, n, replicate, scheme_idx, sig_idx),
                    });
                    index += 1;
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub cell: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub n: usize,
    pub scheme: String,
    pub d_plus: usize,
    pub d_minus: usize,
    pub oracle: String,
    pub mean_l1: f64,
    pub sd_l1: f64,
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub records: Vec<ConvergenceRecord>,
    pub failures: Vec<CellFailure>,
    pub summary: Vec<SummaryRow>,
}

/// Effective sparsity for a grid size under the configured rule.
pub fn effective_rho(rule: SparsityRule, rho: f64, n: usize) -> f64 {
    match rule {
        SparsityRule::Fixed => rho,
        SparsityRule::LogSquaredOverN => rho.min((n as f64).ln().powi(2) / n as f64),
    }
}

fn spec_for_cell(config: &ExperimentConfig, n: usize) -> Result<GraphonSpec64, String> {
    let spec = config.spec.to_core().map_err(|e| e.to_string())?;
    let rho = effective_rho(config.sparsity, spec.rho(), n);
    spec.with_rho(rho).map_err(|e| e.to_string())
}

/// Resolved comparison kernel for one oracle selector.
enum ResolvedOracle {
    Block(BlockKernel64),
    Pointwise(SamplingWeights<f64>),
}

/// Resolves one oracle for a cell (oracles may override the scheme).
fn resolve_oracle(
    oracle: &OracleConfig,
    spec: &GraphonSpec64,
    cell_scheme: &graphon_embed::SamplingScheme64,
) -> Result<ResolvedOracle, String> {
    let scheme = oracle
        .scheme_override()
        .map(|s| s.to_core())
        .unwrap_or_else(|| cell_scheme.clone());
    match oracle {
        OracleConfig::Krein { .. } => sbm_block_limit_krein(spec, &scheme)
            .map(ResolvedOracle::Block)
            .map_err(|e| e.to_string()),
        OracleConfig::Psd { tol, .. } => sbm_block_limit_psd(spec, &scheme, *tol)
            .map(ResolvedOracle::Block)
            .map_err(|e| e.to_string()),
        OracleConfig::TwoBlockClosedForm { .. } => {
            let (p, q) = two_block_probs(spec)?;
            two_block_closed_form(p, q)
                .map(ResolvedOracle::Block)
                .map_err(|e| e.to_string())
        }
        OracleConfig::UnconstrainedPointwise { .. } => SamplingWeights::new(spec, &scheme)
            .map(ResolvedOracle::Pointwise)
            .map_err(|e| e.to_string()),
    }
}

/// Pointwise limit with the sampling ratio clamped away from {0, 1} so the
/// logit stays finite at degenerate points.
fn pointwise_limit(weights: &SamplingWeights<f64>, l: f64, l_prime: f64) -> f64 {
    match weights.tilde(l, l_prime) {
        Ok((t1, t0)) => {
            let ratio = (t1 / (t1 + t0)).clamp(1e-15, 1.0 - 1e-15);
            logit(ratio)
        }
        Err(_) => 0.0,
    }
}

fn two_block_probs(spec: &GraphonSpec64) -> Result<(f64, f64), String> {
    if spec.kappa() != 2 {
        return Err("two-block closed form needs kappa = 2".into());
    }
    // Un-sparsified within/between probabilities via block midpoints.
    let l0 = spec.block_midpoint(0);
    let l1 = spec.block_midpoint(1);
    Ok((
        spec.kernel(l0, l0).map_err(|e| e.to_string())?,
        spec.kernel(l0, l1).map_err(|e| e.to_string())?,
    ))
}

struct CellOutput {
    records: Vec<ConvergenceRecord>,
    failure: Option<CellFailure>,
}

fn run_cell(config: &ExperimentConfig, cell: &Cell) -> CellOutput {
    let fail = |error: String| CellOutput {
        records: Vec::new(),
        failure: Some(CellFailure {
            cell: cell.id.clone(),
            error,
        }),
    };

    let spec = match spec_for_cell(config, cell.n) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let scheme = config.schemes[cell.scheme_idx].to_core();
    let signature = config.signatures[cell.sig_idx].to_core();

    let started = Instant::now();
    let graph: SampledGraph64 = match sample_graph(&spec, cell.n, mix_seed(cell.seed, &[0])) {
        Ok(g) => g,
        Err(e) => return fail(e.to_string()),
    };
    let train_config = config
        .train
        .to_core(signature, scheme.clone(), mix_seed(cell.seed, &[1]));
    let emb = match train(&graph, &train_config) {
        Ok(e) => e,
        Err(e) => return fail(e.to_string()),
    };

    let mut records = Vec::with_capacity(config.oracles.len());
    for oracle in &config.oracles {
        let resolved = match resolve_oracle(oracle, &spec, &scheme) {
            Ok(k) => k,
            Err(e) => return fail(format!("oracle {}: {e}", oracle.id(&scheme))),
        };
        let l1 = match &resolved {
            ResolvedOracle::Block(kernel) => {
                l1_kernel_error(&emb, &graph, &KernelOracle::Block(kernel))
            }
            ResolvedOracle::Pointwise(weights) => {
                let limit = |l: f64, lp: f64| pointwise_limit(weights, l, lp);
                l1_kernel_error(&emb, &graph, &KernelOracle::Pointwise(&limit))
            }
        };
        let l1 = match l1 {
            Ok(v) => v,
            Err(e) => return fail(e.to_string()),
        };
        records.push(ConvergenceRecord {
            n: cell.n,
            seed: cell.seed,
            scheme: scheme.id(),
            d_plus: signature.d_plus,
            d_minus: signature.d_minus,
            oracle: oracle.id(&scheme),
            l1_error: l1,
            epochs: config.train.epochs,
            wall_time_s: 0.0,
        });
    }
    let elapsed = started.elapsed().as_secs_f64();
    for r in &mut records {
        r.wall_time_s = elapsed;
    }
    CellOutput {
        records,
        failure: None,
    }
}

/// Runs every cell (optionally filtered by a substring of the cell id) on a
/// worker pool of `jobs` threads (0 = rayon default), gathering records in
/// grid order regardless of completion order.
pub fn run_experiment(
    config: &ExperimentConfig,
    jobs: usize,
    cell_filter: Option<&str>,
) -> ExperimentOutcome {
    let selected: Vec<Cell> = cells(config)
        .into_iter()
        .filter(|c| cell_filter.map_or(true, |f| c.id.contains(f)))
        .collect();

    let outputs: Vec<CellOutput> = if jobs == 1 {
        selected.iter().map(|c| run_cell(config, c)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .expect("worker pool");
        pool.install(|| selected.par_iter().map(|c| run_cell(config, c)).collect())
    };

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for out in outputs {
        records.extend(out.records);
        failures.extend(out.failure);
    }
    let summary = summarize(&records);
    ExperimentOutcome {
        records,
        failures,
        summary,
    }
}

/// Per-(n, scheme, signature, oracle) mean and standard deviation of the L1
/// error across replicates, in first-appearance order.
pub fn summarize(records: &[ConvergenceRecord]) -> Vec<SummaryRow> {
    let mut rows: Vec<SummaryRow> = Vec::new();
    let mut groups: Vec<(usize, Vec<f64>)> = Vec::new();
    for r in records {
        let key_pos = rows.iter().position(|row| {
            row.n == r.n
                && row.scheme == r.scheme
                && row.d_plus == r.d_plus
                && row.d_minus == r.d_minus
                && row.oracle == r.oracle
        });
        match key_pos {
            Some(pos) => groups[pos].1.push(r.l1_error),
            None => {
                rows.push(SummaryRow {
                    n: r.n,
                    scheme: r.scheme.clone(),
                    d_plus: r.d_plus,
                    d_minus: r.d_minus,
                    oracle: r.oracle.clone(),
                    mean_l1: 0.0,
                    sd_l1: 0.0,
                    cells: 0,
                });
                groups.push((rows.len() - 1, vec![r.l1_error]));
            }
        }
    }
    for (pos, values) in groups {
        let count = values.len() as f64;
        let mean = values.iter().sum::<f64>() / count;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0)
        } else {
            0.0
        };
        rows[pos].mean_l1 = mean;
        rows[pos].sd_l1 = var.sqrt();
        rows[pos].cells = values.len();
    }
    rows
}

/// Formats one record as a CSV line: floats carry 17 significant digits so
/// re-reading reconstructs them exactly.
fn record_line(r: &ConvergenceRecord) -> String {
    format!(
        "{},{},{},{},{},{},{:.16e},{},{:.16e}",
        r.n, r.seed, r.scheme, r.d_plus, r.d_minus, r.oracle, r.l1_error, r.epochs, r.wall_time_s
    )
}

/// Renders records as CSV text (UTF-8, LF line endings, fixed header).
pub fn metrics_to_string(records: &[ConvergenceRecord]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&record_line(r));
        out.push('\n');
    }
    out
}

/// Writes the metrics CSV to `path`, creating parent directories.
pub fn write_metrics(records: &[ConvergenceRecord], path: &Path) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(metrics_to_string(records).as_bytes())
}

/// Parses a metrics CSV produced by [`write_metrics`].
pub fn read_metrics(text: &str) -> Result<Vec<ConvergenceRecord>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == METRICS_HEADER => {}
        other => return Err(format!("unexpected header: {other:?}")),
    }
    let mut records = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(format!("line {}: expected 9 fields", lineno + 2));
        }
        let err = |e: &dyn std::fmt::Display| format!("line {}: {e}", lineno + 2);
        records.push(ConvergenceRecord {
            n: fields[0].parse().map_err(|e| err(&e))?,
            seed: fields[1].parse().map_err(|e| err(&e))?,
            scheme: fields[2].to_string(),
            d_plus: fields[3].parse().map_err(|e| err(&e))?,
            d_minus: fields[4].parse().map_err(|e| err(&e))?,
            oracle: fields[5].to_string(),
            l1_error: fields[6].parse().map_err(|e| err(&e))?,
            epochs: fields[7].parse().map_err(|e| err(&e))?,
            wall_time_s: fields[8].parse().map_err(|e| err(&e))?,
        });
    }
    Ok(records)
}

/// The CSV with its wall-time column removed: the determinism contract
/// covers everything else byte for byte.
pub fn metrics_without_wall_time(text: &str) -> String {
    text.lines()
        .map(|line| match line.rfind(',') {
            Some(pos) => &line[..pos],
            None => line,
        })
        .map(|l| format!("{l}\n"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn tiny_config() -> ExperimentConfig {
        parse_config(
            r#"{
                "spec": {"kind": "sbm", "pi": [0.5, 0.5], "p": [0.7, 0.3, 0.3, 0.7], "rho": 1.0},
                "n_grid": [30, 40],
                "replications": 2,
                "schemes": [{"type": "uniform_vertex", "k": 10}],
                "signatures": [{"d_plus": 2, "d_minus": 0}],
                "train": {"epochs": 1},
                "oracles": [{"type": "krein"}, {"type": "psd"}],
                "output_path": "metrics.csv",
                "master_seed": 99
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn grid_cardinality_counts_records() {
        let config = tiny_config();
        let outcome = run_experiment(&config, 1, None);
        assert!(outcome.failures.is_empty(), "{:?}", outcome.failures);
        // 2 n * 2 replicates * 1 scheme * 1 signature * 2 oracles.
        assert_eq!(outcome.records.len(), 8);
    }

    #[test]
    fn seeds_are_order_independent() {
        let a = cell_seed(5, 100, 2, 1, 0);
        assert_eq!(a, cell_seed(5, 100, 2, 1, 0));
        assert_ne!(a, cell_seed(5, 100, 2, 0, 1));
        assert_ne!(a, cell_seed(5, 200, 2, 1, 0));
        // Enumerated cells carry the same seeds as direct computation.
        let config = tiny_config();
        for cell in cells(&config) {
            assert_eq!(
                cell.seed,
                cell_seed(99, cell.n, cell.replicate, cell.scheme_idx, cell.sig_idx)
            );
        }
    }

    #[test]
    fn parallel_and_sequential_runs_agree_modulo_wall_time() {
        let config = tiny_config();
        let seq = run_experiment(&config, 1, None);
        let par = run_experiment(&config, 4, None);
        let a = metrics_without_wall_time(&metrics_to_string(&seq.records));
        let b = metrics_without_wall_time(&metrics_to_string(&par.records));
        assert_eq!(a, b);
    }

    #[test]
    fn cell_filter_selects_a_subset() {
        let config = tiny_config();
        let outcome = run_experiment(&config, 1, Some("n30"));
        assert_eq!(outcome.records.len(), 4);
        assert!(outcome.records.iter().all(|r| r.n == 30));
    }

    #[test]
    fn failures_are_recorded_and_other_cells_continue() {
        let mut config = tiny_config();
        // k exceeds the smaller n, so those cells fail while n=40 succeeds.
        config.schemes[0] = crate::config::SchemeConfig::UniformVertex { k: 35 };
        let outcome = run_experiment(&config, 1, None);
        assert_eq!(outcome.failures.len(), 2);
        assert_eq!(outcome.records.len(), 4);
        assert!(outcome.failures.iter().all(|f| f.cell.contains("n30")));
    }

    #[test]
    fn metrics_round_trip_exactly() {
        let records = vec![
            ConvergenceRecord {
                n: 200,
                seed: 12345,
                scheme: "uniform_vertex_k100".into(),
                d_plus: 2,
                d_minus: 2,
                oracle: "krein_uniform_vertex_k100".into(),
                l1_error: 0.12345678901234567,
                epochs: 40,
                wall_time_s: 1.5,
            },
            ConvergenceRecord {
                n: 400,
                seed: 9,
                scheme: "random_walk_unigram_k50_l1_a0.75".into(),
                d_plus: 4,
                d_minus: 0,
                oracle: "psd_uniform_vertex_k100".into(),
                l1_error: f64::MIN_POSITIVE,
                epochs: 1,
                wall_time_s: 0.0,
            },
        ];
        let text = metrics_to_string(&records);
        assert!(text.ends_with('\n') && !text.contains('\r'));
        let reread = read_metrics(&text).unwrap();
        assert_eq!(reread, records);
        assert_eq!(reread[0].l1_error.to_bits(), records[0].l1_error.to_bits());
    }

    #[test]
    fn empty_and_singleton_files() {
        let empty = metrics_to_string(&[]);
        assert_eq!(empty.lines().count(), 1);
        assert_eq!(read_metrics(&empty).unwrap(), vec![]);
        let one = vec![ConvergenceRecord {
            n: 10,
            seed: 1,
            scheme: "uniform_vertex_k5".into(),
            d_plus: 1,
            d_minus: 0,
            oracle: "krein_uniform_vertex_k5".into(),
            l1_error: 1.0,
            epochs: 1,
            wall_time_s: 0.25,
        }];
        assert_eq!(metrics_to_string(&one).lines().count(), 2);
    }

    #[test]
    fn sparsity_rule_caps_rho() {
        assert_eq!(effective_rho(SparsityRule::Fixed, 0.7, 1000), 0.7);
        let rho = effective_rho(SparsityRule::LogSquaredOverN, 1.0, 200);
        assert!((rho - (200f64.ln().powi(2) / 200.0)).abs() < 1e-15);
        // Large rho cap leaves small graphs dense.
        let tiny = effective_rho(SparsityRule::LogSquaredOverN, 0.01, 200);
        assert_eq!(tiny, 0.01);
    }

    #[test]
    fn summary_groups_by_cell_coordinates() {
        let config = tiny_config();
        let outcome = run_experiment(&config, 1, None);
        // 2 n * 2 oracles = 4 groups, each with 2 replicates.
        assert_eq!(outcome.summary.len(), 4);
        assert!(outcome.summary.iter().all(|s| s.cells == 2));
    }
}
