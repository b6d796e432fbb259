//! TOML run configuration: optional fields over profile defaults.
//!
//! A config file narrows down one run. Everything is optional; the
//! profile picks schema and network defaults, the master seed feeds every
//! seeded component, and unknown keys are rejected so typos fail loudly.

use qnids_core::agent::{AgentConfig, Algorithm};
use qnids_core::data::Schema;
use qnids_core::loss::LossKind;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Profile {
    #[serde(rename = "unsw-nb15")]
    UnswNb15,
    #[serde(rename = "bot-iot")]
    BotIot,
    #[serde(rename = "synthetic")]
    Synthetic,
}

impl Profile {
    pub fn name(&self) -> &'static str {
        match self {
            Profile::UnswNb15 => "unsw-nb15",
            Profile::BotIot => "bot-iot",
            Profile::Synthetic => "synthetic",
        }
    }

    /// Built-in schema for the published dataset layouts.
    pub fn schema(&self) -> Option<Schema> {
        match self {
            Profile::UnswNb15 => Some(Schema::unsw_nb15()),
            Profile::BotIot => Some(Schema::bot_iot()),
            Profile::Synthetic => None,
        }
    }

    fn default_hidden(&self) -> Vec<usize> {
        match self {
            Profile::UnswNb15 | Profile::Synthetic => vec![40],
            Profile::BotIot => vec![5, 5],
        }
    }
}

impl FromStr for Profile {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unsw-nb15" => Ok(Profile::UnswNb15),
            "bot-iot" => Ok(Profile::BotIot),
            "synthetic" => Ok(Profile::Synthetic),
            other => Err(ConfigError(format!(
                "unknown profile {other:?} (expected unsw-nb15, bot-iot, or synthetic)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    /// Raw CSV to preprocess (unsw-nb15 and bot-iot profiles).
    pub raw_csv: Option<PathBuf>,
    /// JSON schema file overriding the profile's built-in column layout.
    pub schema: Option<PathBuf>,
    /// Preprocessed dataset location; defaults to `<out>/dataset.bin`.
    pub dataset: Option<PathBuf>,
    pub split_fraction: Option<f64>,
    /// Seed for the train/test split; defaults to the master seed.
    pub split_seed: Option<u64>,
    pub synthetic: Option<SyntheticSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSection {
    pub samples: Option<usize>,
    pub features: Option<usize>,
    pub classes: Option<usize>,
    pub separation: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    /// Dense widths between flatten and the output layer.
    pub hidden_dense: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferSection {
    /// Dense widths of the fresh head grafted behind the copied layers.
    pub head_hidden: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSection {
    pub algorithm: Option<String>,
    pub batch_size: Option<usize>,
    pub epochs: Option<usize>,
    pub epsilon_initial: Option<f64>,
    pub epsilon_decay: Option<f64>,
    pub epsilon_floor: Option<f64>,
    pub gamma: Option<f64>,
    pub learning_rate: Option<f64>,
    pub alpha_initial: Option<f64>,
    pub alpha_decay: Option<f64>,
    pub buffer_capacity: Option<usize>,
    pub target_sync_period: Option<usize>,
    pub loss: Option<String>,
    pub huber_delta: Option<f64>,
    pub early_stop_accuracy: Option<f64>,
    pub log_train_accuracy: Option<bool>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub profile: Option<Profile>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub network: NetworkSection,
    #[serde(default)]
    pub transfer: TransferSection,
    #[serde(default)]
    pub agent: AgentSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| ConfigError(format!("invalid config {}: {e}", path.display())))
    }
}

/// Synthetic generation settings after defaulting.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedSynthetic {
    pub samples: usize,
    pub features: usize,
    pub classes: usize,
    pub separation: f64,
}

/// A run configuration with every choice made.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub profile: Profile,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub raw_csv: Option<PathBuf>,
    pub schema: Schema,
    pub dataset_path: PathBuf,
    pub split_fraction: f64,
    pub split_seed: u64,
    pub synthetic: ResolvedSynthetic,
    pub hidden_dense: Vec<usize>,
    pub head_hidden: Vec<usize>,
    pub agent: AgentConfig,
}

/// Command-line overrides that win over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub algorithm: Option<Algorithm>,
    pub loss: Option<LossKind>,
    pub epochs: Option<usize>,
}

pub fn resolve(
    config: &RunConfig,
    out_dir: &Path,
    overrides: &Overrides,
) -> Result<Resolved, ConfigError> {
    let profile = config.profile.unwrap_or(Profile::Synthetic);
    let seed = overrides.seed.or(config.seed).unwrap_or(0);

    let schema = match &config.data.schema {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                ConfigError(format!("cannot read schema {}: {e}", path.display()))
            })?;
            serde_json::from_str(&text).map_err(|e| {
                ConfigError(format!("invalid schema {}: {e}", path.display()))
            })?
        }
        None => profile.schema().unwrap_or_else(|| {
            // Synthetic data is generated already encoded; the schema is
            // only a placeholder describing its layout.
            Schema::numeric(&[], &[])
        }),
    };

    let split_fraction = config.data.split_fraction.unwrap_or(0.8);
    if !(split_fraction > 0.0 && split_fraction < 1.0) {
        return Err(ConfigError(format!(
            "split_fraction {split_fraction} outside (0, 1)"
        )));
    }

    let syn = config.data.synthetic.as_ref();
    let synthetic = ResolvedSynthetic {
        samples: syn.and_then(|s| s.samples).unwrap_or(600),
        features: syn.and_then(|s| s.features).unwrap_or(8),
        classes: syn.and_then(|s| s.classes).unwrap_or(3),
        separation: syn.and_then(|s| s.separation).unwrap_or(6.0),
    };

    let mut agent = AgentConfig {
        seed,
        ..AgentConfig::default()
    };
    let a = &config.agent;
    if let Some(s) = &a.algorithm {
        agent.algorithm = s
            .parse()
            .map_err(|e| ConfigError(format!("agent.algorithm: {e}")))?;
    }
    if let Some(v) = a.batch_size {
        agent.batch_size = v;
    }
    if let Some(v) = a.epochs {
        agent.epochs = v;
    }
    if let Some(v) = a.epsilon_initial {
        agent.epsilon_initial = v;
    }
    if let Some(v) = a.epsilon_decay {
        agent.epsilon_decay = v;
    }
    if let Some(v) = a.epsilon_floor {
        agent.epsilon_floor = v;
    }
    if let Some(v) = a.gamma {
        agent.gamma = v;
    }
    if let Some(v) = a.learning_rate {
        agent.learning_rate = v;
    }
    if let Some(v) = a.alpha_initial {
        agent.alpha_initial = v;
    }
    if let Some(v) = a.alpha_decay {
        agent.alpha_decay = v;
    }
    if let Some(v) = a.buffer_capacity {
        agent.buffer_capacity = v;
    }
    if let Some(v) = a.target_sync_period {
        agent.target_sync_period = v;
    }
    if let Some(s) = &a.loss {
        agent.loss = s
            .parse()
            .map_err(|e| ConfigError(format!("agent.loss: {e}")))?;
    }
    if let Some(delta) = a.huber_delta {
        match agent.loss {
            LossKind::Huber { .. } => agent.loss = LossKind::Huber { delta },
            _ => {
                return Err(ConfigError(
                    "agent.huber_delta set but agent.loss is not \"huber\"".into(),
                ))
            }
        }
    }
    if let Some(v) = a.early_stop_accuracy {
        agent.early_stop_accuracy = Some(v);
    }
    if let Some(v) = a.log_train_accuracy {
        agent.log_train_accuracy = v;
    }
    if let Some(algo) = overrides.algorithm {
        agent.algorithm = algo;
    }
    if let Some(loss) = overrides.loss {
        agent.loss = loss;
    }
    if let Some(epochs) = overrides.epochs {
        agent.epochs = epochs;
    }
    agent
        .validate()
        .map_err(|e| ConfigError(format!("agent config: {e}")))?;

    Ok(Resolved {
        profile,
        seed,
        out_dir: out_dir.to_path_buf(),
        raw_csv: config.data.raw_csv.clone(),
        schema,
        dataset_path: config
            .data
            .dataset
            .clone()
            .unwrap_or_else(|| out_dir.join("dataset.bin")),
        split_fraction,
        split_seed: config.data.split_seed.unwrap_or(seed),
        synthetic,
        hidden_dense: config
            .network
            .hidden_dense
            .clone()
            .unwrap_or_else(|| profile.default_hidden()),
        head_hidden: config
            .transfer
            .head_hidden
            .clone()
            .unwrap_or_else(|| vec![5, 5]),
        agent,
    })
}

impl Resolved {
    /// Echoes every resolved choice as TOML so a run is reproducible from
    /// its output directory alone.
    pub fn to_toml(&self) -> String {
        #[derive(Serialize)]
        struct EchoAgent<'a> {
            algorithm: &'a str,
            batch_size: usize,
            epochs: usize,
            epsilon_initial: f64,
            epsilon_decay: f64,
            epsilon_floor: f64,
            gamma: f64,
            learning_rate: f64,
            alpha_initial: f64,
            alpha_decay: f64,
            buffer_capacity: usize,
            target_sync_period: usize,
            loss: String,
            #[serde(skip_serializing_if = "Option::is_none")]
            huber_delta: Option<f64>,
            #[serde(skip_serializing_if = "Option::is_none")]
            early_stop_accuracy: Option<f64>,
            log_train_accuracy: bool,
        }
        #[derive(Serialize)]
        struct Echo<'a> {
            profile: &'a str,
            seed: u64,
            dataset: &'a Path,
            #[serde(skip_serializing_if = "Option::is_none")]
            raw_csv: Option<&'a Path>,
            split_fraction: f64,
            split_seed: u64,
            synthetic: &'a ResolvedSynthetic,
            hidden_dense: &'a [usize],
            head_hidden: &'a [usize],
            agent: EchoAgent<'a>,
        }
        let a = &self.agent;
        let echo = Echo {
            profile: self.profile.name(),
            seed: self.seed,
            dataset: &self.dataset_path,
            raw_csv: self.raw_csv.as_deref(),
            split_fraction: self.split_fraction,
            split_seed: self.split_seed,
            synthetic: &self.synthetic,
            hidden_dense: &self.hidden_dense,
            head_hidden: &self.head_hidden,
            agent: EchoAgent {
                algorithm: a.algorithm.name(),
                batch_size: a.batch_size,
                epochs: a.epochs,
                epsilon_initial: a.epsilon_initial,
                epsilon_decay: a.epsilon_decay,
                epsilon_floor: a.epsilon_floor,
                gamma: a.gamma,
                learning_rate: a.learning_rate,
                alpha_initial: a.alpha_initial,
                alpha_decay: a.alpha_decay,
                buffer_capacity: a.buffer_capacity,
                target_sync_period: a.target_sync_period,
                loss: a.loss.name().to_string(),
                huber_delta: match a.loss {
                    LossKind::Huber { delta } => Some(delta),
                    _ => None,
                },
                early_stop_accuracy: a.early_stop_accuracy,
                log_train_accuracy: a.log_train_accuracy,
            },
        };
        toml::to_string_pretty(&echo).expect("resolved config serializes")
    }
}
