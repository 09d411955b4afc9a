//! Builds catalogs, providers, indexes and backends from an [`EngineConfig`].

use std::fs::File;
use std::io::BufReader;
use std::path::Path;
use std::sync::Arc;

use appletgen_core::agents::{RemoteChatBackend, ScriptedBackend};
use appletgen_core::embedding::{import_vectors, RemoteEmbeddingProvider};
use appletgen_core::{
    build_index, Catalog, EmbeddingProvider, Engine, FunctionKind, HashedBagOfWords, LlmBackend, SynonymTable,
    VectorIndex,
};

use crate::config::{remote_chat_config, remote_embedding_configs, EmbeddingSettings, EngineConfig, LlmSettings};
use crate::error::CliError;

pub type Providers = (Arc<dyn EmbeddingProvider>, Arc<dyn EmbeddingProvider>);

pub fn load_catalog(path: &Path) -> Result<Catalog, CliError> {
    Catalog::load(path).map_err(|e| CliError::input(path.display(), e))
}

pub fn load_synonyms(cfg: &EngineConfig) -> Result<SynonymTable, CliError> {
    match &cfg.synonyms {
        None => Ok(SynonymTable::default_table()),
        Some(path) => SynonymTable::load(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display()))),
    }
}

/// The trigger and the action encoder. The deterministic embedder is shared
/// by both sides.
pub fn providers(cfg: &EngineConfig) -> Result<Providers, CliError> {
    match &cfg.embedding {
        EmbeddingSettings::Deterministic { dim } => {
            let p: Arc<dyn EmbeddingProvider> = Arc::new(HashedBagOfWords::new(*dim));
            Ok((p.clone(), p))
        }
        EmbeddingSettings::Remote { .. } => {
            let (t, a) = remote_embedding_configs(&cfg.embedding, cfg.parallelism)?
                .expect("remote settings yield remote configs");
            Ok((
                Arc::new(RemoteEmbeddingProvider::new(t)),
                Arc::new(RemoteEmbeddingProvider::new(a)),
            ))
        }
    }
}

pub fn backend(cfg: &EngineConfig) -> Result<Option<Arc<dyn LlmBackend>>, CliError> {
    match &cfg.llm {
        LlmSettings::Off => Ok(None),
        LlmSettings::Scripted { path } => {
            let b = ScriptedBackend::load(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            Ok(Some(Arc::new(b)))
        }
        LlmSettings::Remote { .. } => {
            let c = remote_chat_config(&cfg.llm, cfg.parallelism)?.expect("remote settings yield a remote config");
            Ok(Some(Arc::new(RemoteChatBackend::new(c))))
        }
    }
}

pub fn read_vector_file(path: &Path, catalog: &Catalog) -> Result<VectorIndex, CliError> {
    let file = File::open(path).map_err(|e| {
        CliError::Input(format!(
            "{}: {e} (run `appletgen index` to create it)",
            path.display()
        ))
    })?;
    import_vectors(BufReader::new(file), Some(catalog)).map_err(|e| {
        let mapped: CliError = e.into();
        match mapped {
            CliError::Input(m) => CliError::Input(format!("{}: {m}", path.display())),
            other => other,
        }
    })
}

/// Reads the configured vector file for `kind`, or embeds the catalog in
/// memory when no file is configured.
fn index_for(
    cfg: &EngineConfig,
    catalog: &Catalog,
    kind: FunctionKind,
    provider: &dyn EmbeddingProvider,
) -> Result<VectorIndex, CliError> {
    let path = match kind {
        FunctionKind::Trigger => &cfg.trigger_vectors,
        FunctionKind::Action => &cfg.action_vectors,
    };
    match path {
        Some(path) => read_vector_file(path, catalog),
        None => Ok(build_index(catalog, kind, provider)?),
    }
}

pub fn build_engine(cfg: &EngineConfig) -> Result<Engine, CliError> {
    let catalog = load_catalog(cfg.catalog_path()?)?;
    let synonyms = load_synonyms(cfg)?;
    let (tp, ap) = providers(cfg)?;
    let ti = index_for(cfg, &catalog, FunctionKind::Trigger, tp.as_ref())?;
    let ai = index_for(cfg, &catalog, FunctionKind::Action, ap.as_ref())?;
    let backend = backend(cfg)?;
    Ok(Engine::new(
        Arc::new(catalog),
        Arc::new(ti),
        Arc::new(ai),
        tp,
        ap,
        Arc::new(synonyms),
        backend,
        cfg.pipeline.clone(),
    )?)
}
