//! Engine configuration: a TOML file, overridden by command-line flags.
//! Secrets are never read from the file or the command line; the file names
//! the environment variable that holds them.

use std::path::{Path, PathBuf};
use std::time::Duration;

use appletgen_core::agents::{RemoteChatConfig, PipelineConfig};
use appletgen_core::embedding::RemoteEmbeddingConfig;
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_DIM: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "provider", rename_all = "lowercase", deny_unknown_fields)]
pub enum EmbeddingSettings {
    Deterministic {
        #[serde(default = "default_dim")]
        dim: usize,
    },
    Remote {
        url: String,
        #[serde(default)]
        trigger_model: Option<String>,
        #[serde(default)]
        action_model: Option<String>,
        #[serde(default)]
        token_env: Option<String>,
        dim: usize,
        #[serde(default = "default_batch")]
        batch_size: usize,
        #[serde(default = "default_timeout")]
        timeout_secs: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "lowercase", deny_unknown_fields)]
pub enum LlmSettings {
    Off,
    Scripted {
        path: PathBuf,
    },
    Remote {
        url: String,
        model: String,
        #[serde(default)]
        token_env: Option<String>,
        #[serde(default = "default_llm_timeout")]
        timeout_secs: u64,
    },
}

fn default_dim() -> usize {
    DEFAULT_DIM
}

fn default_batch() -> usize {
    32
}

fn default_timeout() -> u64 {
    30
}

fn default_llm_timeout() -> u64 {
    120
}

fn default_parallelism() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineConfig {
    #[serde(default)]
    pub catalog: Option<PathBuf>,
    #[serde(default)]
    pub synonyms: Option<PathBuf>,
    #[serde(default)]
    pub trigger_vectors: Option<PathBuf>,
    #[serde(default)]
    pub action_vectors: Option<PathBuf>,
    /// Upper bound on concurrently processed queries and in-flight requests.
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default)]
    pub pipeline: PipelineConfig,
    #[serde(default = "default_embedding")]
    pub embedding: EmbeddingSettings,
    #[serde(default = "default_llm")]
    pub llm: LlmSettings,
}

fn default_embedding() -> EmbeddingSettings {
    EmbeddingSettings::Deterministic { dim: DEFAULT_DIM }
}

fn default_llm() -> LlmSettings {
    LlmSettings::Off
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            catalog: None,
            synonyms: None,
            trigger_vectors: None,
            action_vectors: None,
            parallelism: default_parallelism(),
            pipeline: PipelineConfig::default(),
            embedding: default_embedding(),
            llm: default_llm(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LlmMode {
    Off,
    Scripted,
    Remote,
}

/// Flags shared by every command that builds an engine.
#[derive(Debug, Clone, Default, Args)]
pub struct EngineArgs {
    /// TOML configuration file; relative paths inside it are resolved
    /// against the working directory.
    #[arg(long, short = 'c')]
    pub config: Option<PathBuf>,
    /// Catalog file.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Synonym table file (`{"include_default": bool, "groups": [[...]]}`).
    #[arg(long)]
    pub synonyms: Option<PathBuf>,
    /// Trigger vector file.
    #[arg(long)]
    pub trigger_vectors: Option<PathBuf>,
    /// Action vector file.
    #[arg(long)]
    pub action_vectors: Option<PathBuf>,
    /// Candidates retrieved per side.
    #[arg(long)]
    pub k: Option<usize>,
    /// Agreement ratio needed to override the retrieved trigger.
    #[arg(long)]
    pub trigger_threshold: Option<f64>,
    /// Agreement ratio needed to override the retrieved action.
    #[arg(long)]
    pub action_threshold: Option<f64>,
    /// Minimum verifier score for acceptance.
    #[arg(long)]
    pub verifier_threshold: Option<f64>,
    /// Re-run retrieval with the analyzer's rewritten intents.
    #[arg(long)]
    pub reretrieve: bool,
    /// Dimension of the deterministic embedder.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Language-model backend.
    #[arg(long, value_enum)]
    pub llm: Option<LlmMode>,
    /// Script file for the scripted backend.
    #[arg(long)]
    pub llm_script: Option<PathBuf>,
    /// Maximum number of queries processed at once.
    #[arg(long)]
    pub parallelism: Option<usize>,
}

impl EngineConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Loads the file named by `--config` (if any) and applies flag overrides.
    pub fn from_args(args: &EngineArgs) -> Result<Self, CliError> {
        let mut cfg = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                Self::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            }
            None => EngineConfig::default(),
        };
        let set = |slot: &mut Option<PathBuf>, v: &Option<PathBuf>| {
            if v.is_some() {
                slot.clone_from(v);
            }
        };
        set(&mut cfg.catalog, &args.catalog);
        set(&mut cfg.synonyms, &args.synonyms);
        set(&mut cfg.trigger_vectors, &args.trigger_vectors);
        set(&mut cfg.action_vectors, &args.action_vectors);
        if let Some(k) = args.k {
            cfg.pipeline.k = k;
        }
        if let Some(t) = args.trigger_threshold {
            cfg.pipeline.trigger_threshold = t;
        }
        if let Some(t) = args.action_threshold {
            cfg.pipeline.action_threshold = t;
        }
        if let Some(t) = args.verifier_threshold {
            cfg.pipeline.verifier_threshold = t;
        }
        if args.reretrieve {
            cfg.pipeline.reretrieve_with_intents = true;
        }
        if let Some(p) = args.parallelism {
            cfg.parallelism = p;
        }
        if let Some(dim) = args.dim {
            match &mut cfg.embedding {
                EmbeddingSettings::Deterministic { dim: d } => *d = dim,
                EmbeddingSettings::Remote { .. } => {
                    return Err(CliError::Config("--dim applies to the deterministic embedder only".into()))
                }
            }
        }
        match (args.llm, &args.llm_script) {
            (Some(LlmMode::Off), _) => cfg.llm = LlmSettings::Off,
            (Some(LlmMode::Scripted), Some(path)) | (None, Some(path)) => {
                cfg.llm = LlmSettings::Scripted { path: path.clone() }
            }
            (Some(LlmMode::Scripted), None) => {
                if !matches!(cfg.llm, LlmSettings::Scripted { .. }) {
                    return Err(CliError::Usage("--llm scripted needs --llm-script".into()));
                }
            }
            (Some(LlmMode::Remote), _) => {
                if !matches!(cfg.llm, LlmSettings::Remote { .. }) {
                    return Err(CliError::Config("--llm remote needs an [llm] remote section in the config file".into()));
                }
            }
            (None, None) => {}
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.pipeline.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.parallelism == 0 {
            return Err(CliError::Config("parallelism must be at least 1".into()));
        }
        match &self.embedding {
            EmbeddingSettings::Deterministic { dim } | EmbeddingSettings::Remote { dim, .. } if *dim == 0 => {
                Err(CliError::Config("embedding dim must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn catalog_path(&self) -> Result<&Path, CliError> {
        self.catalog
            .as_deref()
            .ok_or_else(|| CliError::Config("no catalog configured (use --catalog or `catalog =` in the config)".into()))
    }
}

fn token_from_env(var: &Option<String>) -> Result<Option<String>, CliError> {
    match var {
        None => Ok(None),
        Some(name) => std::env::var(name)
            .map(Some)
            .map_err(|_| CliError::Config(format!("environment variable {name} is not set"))),
    }
}

/// Remote embedding settings for the trigger and the action encoder.
pub fn remote_embedding_configs(
    settings: &EmbeddingSettings,
    parallelism: usize,
) -> Result<Option<(RemoteEmbeddingConfig, RemoteEmbeddingConfig)>, CliError> {
    let EmbeddingSettings::Remote {
        url,
        trigger_model,
        action_model,
        token_env,
        dim,
        batch_size,
        timeout_secs,
    } = settings
    else {
        return Ok(None);
    };
    let token = token_from_env(token_env)?;
    let make = |model: &Option<String>| {
        let mut c = RemoteEmbeddingConfig::new(url.clone(), *dim);
        c.model.clone_from(model);
        c.token.clone_from(&token);
        c.batch_size = *batch_size;
        c.max_in_flight = parallelism;
        c.timeout = Duration::from_secs(*timeout_secs);
        c
    };
    Ok(Some((make(trigger_model), make(action_model))))
}

pub fn remote_chat_config(settings: &LlmSettings, parallelism: usize) -> Result<Option<RemoteChatConfig>, CliError> {
    let LlmSettings::Remote {
        url,
        model,
        token_env,
        timeout_secs,
    } = settings
    else {
        return Ok(None);
    };
    let mut c = RemoteChatConfig::new(url.clone(), model.clone());
    c.token = token_from_env(token_env)?;
    c.max_in_flight = parallelism;
    c.timeout = Duration::from_secs(*timeout_secs);
    Ok(Some(c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_example_config() {
        let text = include_str!("../../../data/engine.example.toml");
        let cfg = EngineConfig::from_toml(text).unwrap();
        assert_eq!(cfg.catalog.as_deref(), Some(Path::new("data/synthetic_catalog.json")));
        assert_eq!(cfg.pipeline, PipelineConfig::default());
        assert_eq!(cfg.embedding, EmbeddingSettings::Deterministic { dim: 256 });
        assert_eq!(cfg.llm, LlmSettings::Off);
    }

    #[test]
    fn defaults_without_file() {
        let cfg = EngineConfig::from_args(&EngineArgs::default()).unwrap();
        assert_eq!(cfg.pipeline.k, 5);
        assert_eq!(cfg.parallelism, 4);
    }

    #[test]
    fn flags_override_and_validate() {
        let args = EngineArgs {
            k: Some(3),
            verifier_threshold: Some(0.7),
            llm_script: Some("s.json".into()),
            ..Default::default()
        };
        let cfg = EngineConfig::from_args(&args).unwrap();
        assert_eq!(cfg.pipeline.k, 3);
        assert_eq!(cfg.pipeline.verifier_threshold, 0.7);
        assert!(matches!(cfg.llm, LlmSettings::Scripted { .. }));
        let bad = EngineArgs {
            trigger_threshold: Some(1.5),
            ..Default::default()
        };
        assert!(matches!(EngineConfig::from_args(&bad), Err(CliError::Config(_))));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(EngineConfig::from_toml("catalgo = \"x\"").is_err());
    }

    #[test]
    fn missing_token_variable_is_a_config_error() {
        let settings = LlmSettings::Remote {
            url: "http://localhost:1".into(),
            model: "m".into(),
            token_env: Some("APPLETGEN_TEST_UNSET_TOKEN_VARIABLE".into()),
            timeout_secs: 1,
        };
        assert!(matches!(remote_chat_config(&settings, 1), Err(CliError::Config(_))));
    }
}
