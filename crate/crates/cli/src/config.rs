//! Experiment configuration: a JSON document describing the generative
//! model, the grid, the training hyperparameters and the oracle kernels.
//!
//! Schema (unknown keys are rejected):
//!
//! ```json
//! {
//!   "spec": {"kind": "sbm", "pi": [0.5, 0.5], "p": [0.7, 0.3, 0.3, 0.7], "rho": 1.0},
//!   "n_grid": [200, 400],
//!   "replications": 2,
//!   "schemes": [{"type": "uniform_vertex", "k": 100}],
//!   "signatures": [{"d_plus": 2, "d_minus": 2}],
//!   "train": {"step_size": 0.025, "epochs": 40},
//!   "oracles": [{"type": "krein"}],
//!   "output_path": "metrics.csv",
//!   "master_seed": 1234
//! }
//! ```
//!
//! `spec.p` is the block linkage matrix in row-major order. A smooth model
//! uses `{"kind": "smooth", "family": "cosine_product", "base": 0.5,
//! "amplitude": 0.3, "rho": 1.0}`. The optional top-level key `"sparsity"`
//! set to `"log_squared_over_n"` replaces `rho` by `(ln n)^2 / n` per grid
//! size (capped at the configured `rho`); the default `"fixed"` uses `rho`
//! as given.

use std::fmt;

use graphon_embed::embed::SimilaritySignature;
use graphon_embed::graphon::SmoothGraphon;
use graphon_embed::{GraphonSpec64, SamplingScheme64, TrainConfig64};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub spec: SpecConfig,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub schemes: Vec<SchemeConfig>,
    pub signatures: Vec<SignatureConfig>,
    pub train: TrainSection,
    pub oracles: Vec<OracleConfig>,
    pub output_path: String,
    pub master_seed: u64,
    #[serde(default)]
    pub sparsity: SparsityRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum SpecConfig {
    Sbm {
        pi: Vec<f64>,
        /// Row-major linkage matrix, length `pi.len()^2`.
        p: Vec<f64>,
        rho: f64,
    },
    Smooth {
        family: SmoothFamily,
        base: f64,
        amplitude: f64,
        rho: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothFamily {
    CosineProduct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "type", rename_all = "snake_case")]
pub enum SchemeConfig {
    UniformVertex { k: usize },
    UniformEdgeUnigram { k: usize, l: usize, alpha: f64 },
    UniformEdgeInduced { k: usize },
    RandomWalkUnigram { k: usize, l: usize, alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignatureConfig {
    pub d_plus: usize,
    pub d_minus: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    #[serde(default = "default_step_size")]
    pub step_size: f64,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default)]
    pub draws_per_epoch: Option<usize>,
    #[serde(default = "default_clip_bound")]
    pub clip_bound: f64,
    #[serde(default = "default_init_scale")]
    pub init_scale: f64,
}

fn default_step_size() -> f64 {
    0.025
}
fn default_epochs() -> usize {
    40
}
fn default_clip_bound() -> f64 {
    10.0
}
fn default_init_scale() -> f64 {
    0.1
}

impl Default for TrainSection {
    fn default() -> Self {
        TrainSection {
            step_size: default_step_size(),
            epochs: default_epochs(),
            draws_per_epoch: None,
            clip_bound: default_clip_bound(),
            init_scale: default_init_scale(),
        }
    }
}

/// Which limiting kernel to compare trained Gram matrices against. The
/// optional `scheme` override supports mismatched-oracle experiments; by
/// default the cell's own scheme is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "type", rename_all = "snake_case")]
pub enum OracleConfig {
    /// Unconstrained (Krein-training) block limit.
    Krein {
        #[serde(default)]
        scheme: Option<SchemeConfig>,
        #[serde(default)]
        id: Option<String>,
    },
    /// PSD-constrained (regular-training) block limit via the convex program.
    Psd {
        #[serde(default)]
        scheme: Option<SchemeConfig>,
        #[serde(default)]
        id: Option<String>,
        #[serde(default = "default_psd_tol")]
        tol: f64,
    },
    /// Closed-form two-even-block constrained limit (requires such a model).
    TwoBlockClosedForm {
        #[serde(default)]
        id: Option<String>,
    },
    /// Pointwise unconstrained limit evaluated at the latent pairs; works for
    /// smooth models too (quadrature cost per pair on those).
    UnconstrainedPointwise {
        #[serde(default)]
        scheme: Option<SchemeConfig>,
        #[serde(default)]
        id: Option<String>,
    },
}

fn default_psd_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SparsityRule {
    #[default]
    Fixed,
    /// `rho(n) = min(rho, (ln n)^2 / n)`.
    LogSquaredOverN,
}

#[derive(Debug)]
pub enum ConfigError {
    /// Malformed JSON or schema violation; carries serde's line/column info.
    Schema(serde_json::Error),
    /// Structurally valid JSON that violates a semantic invariant.
    Invalid { key: String, message: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Schema(e) => write!(f, "config schema error: {e}"),
            ConfigError::Invalid { key, message } => {
                write!(f, "config key `{key}`: {message}")
            }
        }
    }
}

impl std::error::Error for ConfigError {}

/// Parses and fully validates a config document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let config: ExperimentConfig = serde_json::from_str(text).map_err(ConfigError::Schema)?;
    config.validate()?;
    Ok(config)
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.spec
            .to_core()
            .map_err(|e| invalid("spec", e.to_string()))?;
        if self.n_grid.is_empty() {
            return Err(invalid("n_grid", "must be nonempty"));
        }
        if !self.n_grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(invalid("n_grid", "must be strictly ascending"));
        }
        if self.replications == 0 {
            return Err(invalid("replications", "must be >= 1"));
        }
        if self.schemes.is_empty() {
            return Err(invalid("schemes", "must be nonempty"));
        }
        for (i, s) in self.schemes.iter().enumerate() {
            s.to_core()
                .validate()
                .map_err(|e| invalid(&format!("schemes[{i}]"), e.to_string()))?;
        }
        if self.signatures.is_empty() {
            return Err(invalid("signatures", "must be nonempty"));
        }
        for (i, s) in self.signatures.iter().enumerate() {
            if s.d_plus + s.d_minus == 0 {
                return Err(invalid(
                    &format!("signatures[{i}]"),
                    "d_plus + d_minus must be >= 1",
                ));
            }
        }
        if self.oracles.is_empty() {
            return Err(invalid("oracles", "must be nonempty"));
        }
        for (i, o) in self.oracles.iter().enumerate() {
            if let Some(s) = o.scheme_override() {
                s.to_core()
                    .validate()
                    .map_err(|e| invalid(&format!("oracles[{i}].scheme"), e.to_string()))?;
            }
            if let OracleConfig::Psd { tol, .. } = o {
                if !(*tol > 0.0) {
                    return Err(invalid(&format!("oracles[{i}].tol"), "must be positive"));
                }
            }
            if matches!(o, OracleConfig::TwoBlockClosedForm { .. })
                && !self.spec.is_even_two_block()
            {
                return Err(invalid(
                    &format!("oracles[{i}]"),
                    "two_block_closed_form needs an SBM with two even blocks",
                ));
            }
        }
        if !(self.train.step_size > 0.0) {
            return Err(invalid("train.step_size", "must be positive"));
        }
        if self.train.epochs == 0 {
            return Err(invalid("train.epochs", "must be >= 1"));
        }
        if self.output_path.is_empty() {
            return Err(invalid("output_path", "must be nonempty"));
        }
        Ok(())
    }
}

impl SpecConfig {
    pub fn to_core(&self) -> Result<GraphonSpec64, graphon_embed::Error64> {
        match self {
            SpecConfig::Sbm { pi, p, rho } => GraphonSpec64::sbm(pi.clone(), p.clone(), *rho),
            SpecConfig::Smooth {
                family: SmoothFamily::CosineProduct,
                base,
                amplitude,
                rho,
            } => GraphonSpec64::smooth(
                SmoothGraphon::CosineProduct {
                    base: *base,
                    amplitude: *amplitude,
                },
                *rho,
            ),
        }
    }

    pub fn is_even_two_block(&self) -> bool {
        match self {
            SpecConfig::Sbm { pi, .. } => pi.len() == 2 && (pi[0] - pi[1]).abs() < 1e-12,
            SpecConfig::Smooth { .. } => false,
        }
    }
}

impl SchemeConfig {
    pub fn to_core(&self) -> SamplingScheme64 {
        match *self {
            SchemeConfig::UniformVertex { k } => SamplingScheme64::UniformVertex { k },
            SchemeConfig::UniformEdgeUnigram { k, l, alpha } => {
                SamplingScheme64::UniformEdgeUnigram { k, l, alpha }
            }
            SchemeConfig::UniformEdgeInduced { k } => SamplingScheme64::UniformEdgeInduced { k },
            SchemeConfig::RandomWalkUnigram { k, l, alpha } => {
                SamplingScheme64::RandomWalkUnigram { k, l, alpha }
            }
        }
    }
}

impl SignatureConfig {
    pub fn to_core(&self) -> SimilaritySignature {
        SimilaritySignature::new(self.d_plus, self.d_minus)
    }
}

impl TrainSection {
    pub fn to_core(
        &self,
        signature: SimilaritySignature,
        scheme: SamplingScheme64,
        seed: u64,
    ) -> TrainConfig64 {
        let mut config = TrainConfig64::new(signature, scheme);
        config.step_size = self.step_size;
        config.epochs = self.epochs;
        config.draws_per_epoch = self.draws_per_epoch;
        config.clip_bound = self.clip_bound;
        config.init_scale = self.init_scale;
        config.seed = seed;
        config
    }
}

impl OracleConfig {
    pub fn scheme_override(&self) -> Option<&SchemeConfig> {
        match self {
            OracleConfig::Krein { scheme, .. }
            | OracleConfig::Psd { scheme, .. }
            | OracleConfig::UnconstrainedPointwise { scheme, .. } => scheme.as_ref(),
            OracleConfig::TwoBlockClosedForm { .. } => None,
        }
    }

    /// Identifier used in the metrics CSV.
    pub fn id(&self, cell_scheme: &SamplingScheme64) -> String {
        let scheme_part = |ov: &Option<SchemeConfig>| {
            ov.as_ref()
                .map(|s| s.to_core().id())
                .unwrap_or_else(|| cell_scheme.id())
        };
        match self {
            OracleConfig::Krein { id: Some(id), .. }
            | OracleConfig::Psd { id: Some(id), .. }
            | OracleConfig::TwoBlockClosedForm { id: Some(id) }
            | OracleConfig::UnconstrainedPointwise { id: Some(id), .. } => id.clone(),
            OracleConfig::Krein { scheme, .. } => format!("krein_{}", scheme_part(scheme)),
            OracleConfig::Psd { scheme, .. } => format!("psd_{}", scheme_part(scheme)),
            OracleConfig::TwoBlockClosedForm { .. } => "two_block_closed_form".into(),
            OracleConfig::UnconstrainedPointwise { scheme, .. } => {
                format!("pointwise_{}", scheme_part(scheme))
            }
        }
    }
}
