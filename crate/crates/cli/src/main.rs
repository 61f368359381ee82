use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use graphon_embed_cli::commands;
use graphon_embed_cli::config::{parse_config, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "graphon-embed",
    about = "Graphon graph generation, subsampled embedding training, and convergence verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON; see configs/ for examples).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Master seed override (defaults to the config's master_seed).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a graph and export the edge list plus latents sidecar.
    Generate {
        #[command(flatten)]
        common: Common,
        /// Vertex count.
        #[arg(long)]
        n: usize,
    },
    /// Train one cell and export the embeddings.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
        /// Index into the config's schemes list.
        #[arg(long, default_value_t = 0)]
        scheme: usize,
        /// Index into the config's signatures list.
        #[arg(long, default_value_t = 0)]
        signature: usize,
    },
    /// Compute and export the limiting kernels for one scheme.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        scheme: usize,
        /// Objective-decrease tolerance of the PSD solver.
        #[arg(long, default_value_t = 1e-10)]
        psd_tol: f64,
    },
    /// Monte-Carlo pair-inclusion probabilities vs the closed-form weights.
    VerifySampling {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        scheme: usize,
        /// Number of vertex pairs to test.
        #[arg(long, default_value_t = 200)]
        pairs: usize,
        /// Monte-Carlo draws.
        #[arg(long, default_value_t = 200_000)]
        trials: usize,
    },
    /// Mean and variance of the walk gradient estimator at one vertex.
    ProbeVariance {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        scheme: usize,
        #[arg(long, default_value_t = 0)]
        vertex: u32,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
    /// Run the full (n, replicate, scheme, signature) grid.
    Experiment {
        #[command(flatten)]
        common: Common,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Run only cells whose id contains this substring (e.g. "n200-r0").
        #[arg(long)]
        cell: Option<String>,
    },
    /// Train one cell and report link-prediction losses.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        scheme: usize,
        #[arg(long, default_value_t = 0)]
        signature: usize,
        /// Zero-one loss threshold.
        #[arg(long, default_value_t = 0.0)]
        tau: f64,
    },
}

fn load_config(common: &Common) -> Result<ExperimentConfig, commands::CommandError> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| format!("reading {}: {e}", common.config.display()))?;
    let mut config = parse_config(&text)?;
    if let Some(seed) = common.seed {
        config.master_seed = seed;
    }
    Ok(config)
}

fn run() -> Result<u8, commands::CommandError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate { common, n } => {
            let config = load_config(&common)?;
            commands::generate(&config, n, config.master_seed, &common.out)?;
            Ok(0)
        }
        Command::Train {
            common,
            n,
            scheme,
            signature,
        } => {
            let config = load_config(&common)?;
            commands::train_once(
                &config,
                n,
                scheme,
                signature,
                config.master_seed,
                &common.out,
            )?;
            Ok(0)
        }
        Command::Oracle {
            common,
            scheme,
            psd_tol,
        } => {
            let config = load_config(&common)?;
            commands::oracle(&config, scheme, psd_tol, &common.out)?;
            Ok(0)
        }
        Command::VerifySampling {
            common,
            n,
            scheme,
            pairs,
            trials,
        } => {
            let config = load_config(&common)?;
            commands::verify_sampling(
                &config,
                n,
                scheme,
                pairs,
                trials,
                config.master_seed,
                &common.out,
            )?;
            Ok(0)
        }
        Command::ProbeVariance {
            common,
            n,
            scheme,
            vertex,
            trials,
        } => {
            let config = load_config(&common)?;
            commands::probe_variance(
                &config,
                n,
                scheme,
                vertex,
                trials,
                config.master_seed,
                &common.out,
            )?;
            Ok(0)
        }
        Command::Experiment { common, jobs, cell } => {
            let config = load_config(&common)?;
            let failures = commands::experiment(&config, &common.out, jobs, cell.as_deref())?;
            // Exit 2 on partial cell failures, 0 on full success.
            Ok(if failures > 0 { 2 } else { 0 })
        }
        Command::Evaluate {
            common,
            n,
            scheme,
            signature,
            tau,
        } => {
            let config = load_config(&common)?;
            commands::evaluate(
                &config,
                n,
                scheme,
                signature,
                tau,
                config.master_seed,
                &common.out,
            )?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
