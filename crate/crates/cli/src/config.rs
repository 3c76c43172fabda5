//! Experiment configuration: file format, defaults and validation.
//!
//! The types here mirror the library's channel and method types so that the
//! file format is documented by a JSON schema.

use crate::error::CliError;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use wbc_polar::eval::DEFAULT_BUDGET;
use wbc_polar::sets::{EntropyMethod, DEFAULT_BETA};
use wbc_polar::{ComponentChannel, DmsSpec};

/// One binary-input component channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelKind {
    /// Binary erasure channel.
    Bec { erasure: f64 },
    /// Binary symmetric channel.
    Bsc { crossover: f64 },
    /// Row-stochastic transition matrix, one row per input bit.
    Matrix { rows: [Vec<f64>; 2] },
}

impl From<&ChannelKind> for ComponentChannel {
    fn from(c: &ChannelKind) -> Self {
        match c {
            ChannelKind::Bec { erasure } => ComponentChannel::Bec { erasure: *erasure },
            ChannelKind::Bsc { crossover } => ComponentChannel::Bsc { crossover: *crossover },
            ChannelKind::Matrix { rows } => ComponentChannel::Matrix { rows: rows.clone() },
        }
    }
}

fn default_input_law() -> [f64; 4] {
    [0.5, 0.0, 0.0, 0.5]
}

/// Source law and the three component channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    /// `P(V = v, X = x)` in the order 00, 01, 10, 11. Defaults to `V = X` uniform.
    #[serde(default = "default_input_law")]
    pub input_law: [f64; 4],
    pub y1: ChannelKind,
    pub y2: ChannelKind,
    pub z: ChannelKind,
}

impl ChannelConfig {
    pub fn spec(&self) -> DmsSpec {
        DmsSpec {
            input_law: self.input_law,
            y1: (&self.y1).into(),
            y2: (&self.y2).into(),
            z: (&self.z).into(),
        }
    }
}

/// How per-index entropies are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodConfig {
    /// Erasure-parameter recursion.
    #[default]
    ExactBec,
    /// Sampled successive-cancellation posteriors.
    MonteCarlo { samples: usize, seed: u64 },
    /// Sum over all blocks; `n <= 8` only.
    Enumeration,
}

impl From<MethodConfig> for EntropyMethod {
    fn from(m: MethodConfig) -> Self {
        match m {
            MethodConfig::ExactBec => EntropyMethod::ExactBec,
            MethodConfig::MonteCarlo { samples, seed } => EntropyMethod::MonteCarlo { samples, seed },
            MethodConfig::Enumeration => EntropyMethod::Enumeration,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, JsonSchema, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Reliability,
    Leakage,
    Tv,
    Independence,
    Rates,
    Constants,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Reliability => "reliability",
            Suite::Leakage => "leakage",
            Suite::Tv => "tv",
            Suite::Independence => "independence",
            Suite::Rates => "rates",
            Suite::Constants => "constants",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum LeakageMode {
    /// Exact enumeration; small `n` and `L` only.
    #[default]
    Exact,
    /// Sampled plug-in estimate with a bootstrap interval.
    Plugin,
    Both,
}

fn default_plugin_samples() -> usize {
    100_000
}

fn default_bootstrap() -> usize {
    200
}

fn default_confidence() -> f64 {
    0.99
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct LeakageConfig {
    #[serde(default)]
    pub mode: LeakageMode,
    #[serde(default = "default_plugin_samples")]
    pub plugin_samples: usize,
    #[serde(default = "default_bootstrap")]
    pub bootstrap: usize,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
}

impl Default for LeakageConfig {
    fn default() -> Self {
        LeakageConfig {
            mode: LeakageMode::default(),
            plugin_samples: default_plugin_samples(),
            bootstrap: default_bootstrap(),
            confidence: default_confidence(),
        }
    }
}

/// Block lengths and block counts of the rate scan; default to `n` and `blocks`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RatesConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks_list: Option<Vec<usize>>,
}

fn default_pad_bits() -> Vec<usize> {
    vec![1, 2, 3]
}

fn default_chi_square_samples() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct IndependenceConfig {
    #[serde(default = "default_pad_bits")]
    pub pad_bits: Vec<usize>,
    #[serde(default = "default_chi_square_samples")]
    pub chi_square_samples: usize,
    /// Smaller and larger block length for the single-block leakage trend.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trend_n: Option<[usize; 2]>,
    /// Run the exact earlier-blocks conditional test on the configured code.
    #[serde(default)]
    pub conditional: bool,
}

impl Default for IndependenceConfig {
    fn default() -> Self {
        IndependenceConfig {
            pad_bits: default_pad_bits(),
            chi_square_samples: default_chi_square_samples(),
            trend_n: None,
            conditional: false,
        }
    }
}

fn default_beta() -> f64 {
    DEFAULT_BETA
}

fn default_trials() -> usize {
    1000
}

fn default_budget() -> usize {
    DEFAULT_BUDGET
}

/// A complete experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub channel: ChannelConfig,
    /// Block length, a power of two.
    pub n: usize,
    /// Number of chained blocks, at least 2.
    pub blocks: usize,
    /// Threshold exponent in (0, 1/2).
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub method: MethodConfig,
    /// Master seed; may instead be given on the command line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Outcome limit for exact computations.
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default)]
    pub suites: Vec<Suite>,
    #[serde(default)]
    pub leakage: LeakageConfig,
    #[serde(default)]
    pub rates: RatesConfig,
    #[serde(default)]
    pub independence: IndependenceConfig,
    /// Report directory; `--out` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn is_toml(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"))
}

impl ExperimentConfig {
    /// Reads TOML or JSON, chosen by the file extension.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, is_toml(path)).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str, toml: bool) -> Result<Self, String> {
        if toml {
            toml::from_str(text).map_err(|e| e.to_string())
        } else {
            serde_json::from_str(text).map_err(|e| e.to_string())
        }
    }

    pub fn to_toml(&self) -> Result<String, String> {
        toml::to_string(self).map_err(|e| e.to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn seed(&self) -> u64 {
        self.seed.expect("validated config has a seed")
    }

    pub fn method(&self) -> EntropyMethod {
        self.method.into()
    }

    /// The config with the output directory removed; this is what report
    /// hashes cover, so moving the output does not change them.
    pub fn hashed(&self) -> ExperimentConfig {
        ExperimentConfig { out: None, ..self.clone() }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if !is_block_length(self.n) {
            return bad(format!("n = {} must be a power of two, at least 2", self.n));
        }
        if self.blocks < 2 {
            return bad(format!("blocks = {} must be at least 2", self.blocks));
        }
        if !(self.beta > 0.0 && self.beta < 0.5) {
            return bad(format!("beta = {} must lie in (0, 1/2)", self.beta));
        }
        if self.seed.is_none() {
            return bad("no seed: set `seed` in the config or pass --seed".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if let MethodConfig::MonteCarlo { samples: 0, .. } = self.method {
            return bad("monte_carlo samples must be at least 1".into());
        }
        if let Some(list) = &self.rates.n_list {
            if list.is_empty() || list.iter().any(|&n| !is_block_length(n)) {
                return bad("rates.n_list must be non-empty powers of two".into());
            }
        }
        if let Some(list) = &self.rates.blocks_list {
            if list.is_empty() || list.iter().any(|&l| l < 2) {
                return bad("rates.blocks_list entries must be at least 2".into());
            }
        }
        if let Some([a, b]) = self.independence.trend_n {
            if !is_block_length(a) || !is_block_length(b) || a >= b {
                return bad("independence.trend_n must be two increasing powers of two".into());
            }
        }
        let c = self.leakage.confidence;
        if !(c > 0.0 && c < 1.0) {
            return bad(format!("leakage.confidence = {c} must lie in (0, 1)"));
        }
        if self.leakage.plugin_samples == 0 {
            return bad("leakage.plugin_samples must be at least 1".into());
        }
        self.channel.spec().validate()?;
        Ok(())
    }
}

fn is_block_length(n: usize) -> bool {
    n >= 2 && n.is_power_of_two()
}
