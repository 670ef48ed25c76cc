//! Experiment configuration: a TOML file with one section per component, overridable
//! through `VQCCS_<SECTION>__<KEY>` environment variables.
//!
//! Every field has a default, so an empty file describes the reference scenario.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vqccs::postproc::MlpHyper;
use vqccs::solvers::{LeVariant, OampReadout};
use vqccs::system_model::ScenarioConfig;
use vqccs::training::TrainConfig;

use crate::error::{CliError, CliResult};

pub const ENV_PREFIX: &str = "VQCCS_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Ista,
    Fista,
    Oamp,
    VqcCs,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Ista => "ista",
            SolverKind::Fista => "fista",
            SolverKind::Oamp => "oamp",
            SolverKind::VqcCs => "vqc-cs",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub enabled: Vec<SolverKind>,
    /// Iterations for every solver; `None` uses `train.n_iterations`.
    pub iterations: Option<usize>,
    pub le_variant: LeVariant,
    pub oamp_readout: OampReadout,
    /// Measurement shots per expectation; 0 evaluates exactly.
    pub shots: u32,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            enabled: vec![SolverKind::Ista, SolverKind::Fista, SolverKind::Oamp, SolverKind::VqcCs],
            iterations: None,
            le_variant: LeVariant::PseudoInverse,
            oamp_readout: OampReadout::Posterior,
            shots: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub train: usize,
    /// Held out for ISTA/FISTA threshold selection.
    pub validation: usize,
    pub test: usize,
    /// Refuse evaluation on fewer test instances than this.
    pub min_test: usize,
    /// Instances for fitting the detector MLP.
    pub detector: usize,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            train: 4000,
            validation: 500,
            test: 5000,
            min_test: 5000,
            detector: 16000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpConfig {
    pub enabled: bool,
    pub hyper: MlpHyper,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            hyper: MlpHyper::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub train: TrainConfig,
    /// Independent training restarts; the lowest validation loss wins. Empty means
    /// `[train.seed]`.
    pub training_seeds: Vec<u64>,
    pub solvers: SolverConfig,
    pub data: DataConfig,
    pub mlp: MlpConfig,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            train: TrainConfig::default(),
            training_seeds: Vec::new(),
            solvers: SolverConfig::default(),
            data: DataConfig::default(),
            mlp: MlpConfig::default(),
            out_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn iterations(&self) -> usize {
        self.solvers.iterations.unwrap_or(self.train.n_iterations)
    }

    pub fn seeds(&self) -> Vec<u64> {
        if self.training_seeds.is_empty() {
            vec![self.train.seed]
        } else {
            self.training_seeds.clone()
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        self.scenario.validate()?;
        self.train.validate()?;
        let bad = |field: &str, why: &str| Err(CliError::Config(format!("{field}: {why}")));
        if self.data.train == 0 {
            return bad("data.train", "count must be positive");
        }
        if self.data.validation == 0 {
            return bad("data.validation", "count must be positive");
        }
        if self.data.test == 0 {
            return bad("data.test", "count must be positive");
        }
        if self.mlp.enabled && self.data.detector == 0 {
            return bad("data.detector", "count must be positive while mlp.enabled");
        }
        if self.solvers.enabled.is_empty() {
            return bad("solvers.enabled", "select at least one solver");
        }
        if self.iterations() == 0 {
            return bad("solvers.iterations", "must be positive");
        }
        if self.solvers.enabled.contains(&SolverKind::VqcCs) && self.iterations() > self.train.n_iterations {
            return bad("solvers.iterations", "VQC-CS cannot run more iterations than were trained");
        }
        if self.mlp.hyper.batch_size == 0 {
            return bad("mlp.hyper.batch_size", "must be positive");
        }
        Ok(())
    }

    /// Short content hash of the canonical JSON form, ignoring where outputs go.
    pub fn hash(&self) -> String {
        let content = ExperimentConfig {
            out_dir: PathBuf::new(),
            ..self.clone()
        };
        let json = serde_json::to_vec(&content).expect("config serializes");
        vqccs::persist::sha256_hex(&json)[..16].to_string()
    }

    pub fn data_dir(&self) -> PathBuf {
        self.out_dir.join("data")
    }
}

/// Reads `path` (or defaults when `None`), applies environment overrides from `vars`,
/// and deserializes.
pub fn load(path: Option<&Path>, vars: impl IntoIterator<Item = (String, String)>) -> CliResult<ExperimentConfig> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|source| match source.kind() {
            std::io::ErrorKind::NotFound => CliError::Missing {
                path: p.to_path_buf(),
                hint: "a config file path that exists",
            },
            _ => CliError::Io {
                path: p.to_path_buf(),
                source,
            },
        })?,
        None => String::new(),
    };
    let mut doc: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?;
    for (key, value) in vars {
        if let Some(rest) = key.strip_prefix(ENV_PREFIX) {
            apply_override(&mut doc, rest, &value)?;
        }
    }
    let cfg: ExperimentConfig = toml::Value::Table(doc)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?;
    Ok(cfg)
}

/// `SCENARIO__SNR_DB=20` sets `scenario.snr_db = 20`. Values parse as TOML literals and
/// fall back to plain strings.
fn apply_override(doc: &mut toml::Table, key: &str, raw: &str) -> CliResult<()> {
    let path: Vec<String> = key.split("__").map(|s| s.to_ascii_lowercase()).collect();
    if path.iter().any(String::is_empty) {
        return Err(CliError::Config(format!("malformed override key {ENV_PREFIX}{key}")));
    }
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut table = doc;
    for p in parents {
        let entry = table
            .entry(p.clone())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override {ENV_PREFIX}{key}: `{p}` is not a section")))?;
    }
    table.insert(last.clone(), value);
    Ok(())
}
