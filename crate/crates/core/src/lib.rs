//! Turns natural-language automation requests into trigger-action applet
//! configurations.
//!
//! The engine retrieves candidate trigger and action functions from a
//! schema-rich [`catalog`] by [`embedding`] similarity, ranks every candidate
//! pair by how well the trigger's ingredients cover the action's required
//! fields ([`pairing`]), and runs a four-agent selection pipeline
//! ([`agents`]) that binds ingredients to fields and verifies the result.
//! [`eval`] computes retrieval and end-to-end accuracy metrics.

pub mod agents;
pub mod catalog;
pub mod embedding;
pub mod eval;
pub mod pairing;

pub use agents::{
    AppletConfig, Binding, BindingSource, Engine, LlmBackend, Outcome, PipelineConfig, PipelineError,
    PipelineRun, PipelineState, ScriptedBackend,
};
pub use catalog::{parse_catalog, render_text, Catalog, CatalogError, DataType, FieldSpec, FunctionEntry, FunctionKind, IngredientSpec};
pub use embedding::{
    build_index, cosine, Candidate, EmbeddingProvider, EmbeddingVector, HashedBagOfWords, Role, VectorIndex,
};
pub use eval::{evaluate_run, GoldRecord, MetricsReport, PredictionRecord};
pub use pairing::{coverage, match_ingredient_field, normalize_name, pair_score, rank_pairs, MatchKind, PairCandidate, SynonymTable};
