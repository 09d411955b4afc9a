use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::backend::LlmBackend;
use super::intent::analyze_intent;
use super::select::{select_action, select_trigger};
use super::state::{
    ActionConfig, AppletConfig, LogEntry, PipelineState, SelectionDecision, TriggerConfig, VerifierSummary,
};
use super::verify::verify;
use super::{PipelineConfig, PipelineError};
use crate::catalog::{Catalog, FunctionKind};
use crate::embedding::{Candidate, EmbeddingProvider, IndexError, VectorIndex};
use crate::pairing::{rank_pairs, PairCandidate, SynonymTable};

/// One pass through trigger selection, action selection and verification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    /// 1-based attempt number.
    pub attempt: usize,
    /// Queue rank of the pair this attempt started from.
    pub queue_rank: usize,
    pub pair_trigger_id: String,
    pub pair_action_id: String,
    pub trigger_id: String,
    pub action_id: String,
    /// The attempt re-ran its pair with the retrieval choices after a
    /// rejected model override.
    pub forced_rag: bool,
    pub llm_overrode_rag: bool,
    pub score: f64,
    pub via_rule_fallback: bool,
    pub critique: String,
}

/// Why a query produced no applet: every attempt scored below the threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureReport {
    pub query: String,
    pub threshold: f64,
    pub attempts: Vec<AttemptRecord>,
    pub log: Vec<LogEntry>,
    pub decisions: Vec<SelectionDecision>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Outcome {
    Accepted(AppletConfig),
    Exhausted(FailureReport),
}

/// Everything one query produced: retrieval lists, the pair queue, the
/// attempts and the final outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineRun {
    pub query: String,
    pub trigger_candidates: Vec<Candidate>,
    pub action_candidates: Vec<Candidate>,
    pub queue: Vec<PairCandidate>,
    pub attempts: Vec<AttemptRecord>,
    pub outcome: Outcome,
}

impl PipelineRun {
    pub fn applet(&self) -> Option<&AppletConfig> {
        match &self.outcome {
            Outcome::Accepted(a) => Some(a),
            Outcome::Exhausted(_) => None,
        }
    }

    /// The system's ranked list of pairs: the accepted pair first (if any),
    /// then the remaining queue pairs in queue order.
    pub fn ranked_pairs(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::with_capacity(self.queue.len() + 1);
        if let Some(a) = self.applet() {
            out.push((a.trigger.id.clone(), a.action.id.clone()));
        }
        for p in &self.queue {
            let pair = (p.trigger_id.clone(), p.action_id.clone());
            if !out.contains(&pair) {
                out.push(pair);
            }
        }
        out
    }
}

/// The selection engine: immutable catalog, indexes and providers shared by
/// every query. `run` may be called concurrently from many threads.
pub struct Engine {
    catalog: Arc<Catalog>,
    trigger_index: Arc<VectorIndex>,
    action_index: Arc<VectorIndex>,
    trigger_provider: Arc<dyn EmbeddingProvider>,
    action_provider: Arc<dyn EmbeddingProvider>,
    synonyms: Arc<SynonymTable>,
    backend: Option<Arc<dyn LlmBackend>>,
    config: PipelineConfig,
}

impl Engine {
    /// Checks that the indexes match the catalog and the providers before
    /// any query runs.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        catalog: Arc<Catalog>,
        trigger_index: Arc<VectorIndex>,
        action_index: Arc<VectorIndex>,
        trigger_provider: Arc<dyn EmbeddingProvider>,
        action_provider: Arc<dyn EmbeddingProvider>,
        synonyms: Arc<SynonymTable>,
        backend: Option<Arc<dyn LlmBackend>>,
        config: PipelineConfig,
    ) -> Result<Self, PipelineError> {
        config.validate()?;
        for (index, kind, provider) in [
            (&trigger_index, FunctionKind::Trigger, &trigger_provider),
            (&action_index, FunctionKind::Action, &action_provider),
        ] {
            if index.kind() != kind {
                return Err(IndexError::KindMismatch {
                    expected: kind,
                    found: index.kind(),
                }
                .into());
            }
            if catalog.entries(kind).is_empty() {
                return Err(IndexError::EmptyCatalog(kind).into());
            }
            index.check_against(&catalog)?;
            if provider.dim() != index.dim() {
                return Err(IndexError::DimMismatch {
                    expected: index.dim(),
                    found: provider.dim(),
                }
                .into());
            }
        }
        Ok(Engine {
            catalog,
            trigger_index,
            action_index,
            trigger_provider,
            action_provider,
            synonyms,
            backend,
            config,
        })
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    /// Runs the full pipeline for one query.
    ///
    /// Pairs are tried in queue order. An attempt is accepted when the
    /// verifier score reaches the threshold. A failed attempt in which the
    /// model overrode retrieval is first retried on the same pair with the
    /// retrieval choices. At most one attempt per queue entry is made in
    /// total, so retries count against the same budget.
    pub fn run(&self, query: &str) -> Result<PipelineRun, PipelineError> {
        if query.trim().is_empty() {
            return Err(PipelineError::EmptyQuery);
        }
        let backend = self.backend.as_deref();
        let cfg = &self.config;
        let mut state = PipelineState::new(query);
        state.trigger_candidates =
            self.trigger_index
                .search_text(self.trigger_provider.as_ref(), query, cfg.k)?;
        state.action_candidates = self
            .action_index
            .search_text(self.action_provider.as_ref(), query, cfg.k)?;
        analyze_intent(&mut state, backend, cfg.parse_retries)?;
        if cfg.reretrieve_with_intents {
            let intents = state.search_intents.clone().expect("analyzer always sets intents");
            state.trigger_candidates =
                self.trigger_index
                    .search_text(self.trigger_provider.as_ref(), &intents.trigger, cfg.k)?;
            state.action_candidates =
                self.action_index
                    .search_text(self.action_provider.as_ref(), &intents.action, cfg.k)?;
        }
        let queue = rank_pairs(
            &state.trigger_candidates,
            &state.action_candidates,
            &self.catalog,
            &self.synonyms,
        )?;
        let budget = queue.len();
        let mut attempts: Vec<AttemptRecord> = Vec::new();
        let mut accepted = false;

        'queue: for pair in &queue {
            let mut force_rag = false;
            loop {
                if attempts.len() >= budget {
                    break 'queue;
                }
                if !attempts.is_empty() {
                    state.reset_attempt();
                }
                let record = self.attempt(&mut state, pair, force_rag)?;
                let passed = record.score >= cfg.verifier_threshold;
                let retry = !passed && record.llm_overrode_rag && !force_rag;
                attempts.push(record);
                if passed {
                    accepted = true;
                    break 'queue;
                }
                if !retry {
                    break;
                }
                state.log(
                    "pipeline",
                    format!("score below {} after a model override; retrying the pair with retrieval's choices", cfg.verifier_threshold),
                );
                force_rag = true;
            }
        }

        let outcome = if accepted {
            let selected = state.selected_trigger.clone().expect("accepted attempt has a trigger");
            let bindings = state.bindings.clone().expect("accepted attempt has bindings");
            let verdict = state.verdict.clone().expect("accepted attempt has a verdict");
            Outcome::Accepted(AppletConfig {
                query: query.to_string(),
                trigger: TriggerConfig {
                    id: selected.trigger_id,
                    field_values: state.trigger_field_values.clone(),
                },
                action: ActionConfig {
                    id: bindings.action_id,
                    bindings: bindings.bindings,
                },
                verifier: VerifierSummary {
                    score: verdict.score,
                    critique: verdict.critique,
                    via_rule_fallback: verdict.via_rule_fallback,
                },
                attempts: attempts.len(),
                log: state.reasoning_log.clone(),
                decisions: state.decisions.clone(),
            })
        } else {
            Outcome::Exhausted(FailureReport {
                query: query.to_string(),
                threshold: cfg.verifier_threshold,
                attempts: attempts.clone(),
                log: state.reasoning_log.clone(),
                decisions: state.decisions.clone(),
            })
        };
        Ok(PipelineRun {
            query: query.to_string(),
            trigger_candidates: state.trigger_candidates,
            action_candidates: state.action_candidates,
            queue,
            attempts,
            outcome,
        })
    }

    fn attempt(
        &self,
        state: &mut PipelineState,
        pair: &PairCandidate,
        force_rag: bool,
    ) -> Result<AttemptRecord, PipelineError> {
        let backend = self.backend.as_deref();
        let cfg = &self.config;
        state.log(
            "pipeline",
            format!(
                "attempt {}: pair #{} ({}, {}) score {:.4}",
                state.attempt_index + 1,
                pair.queue_rank,
                pair.trigger_id,
                pair.action_id,
                pair.score
            ),
        );
        select_trigger(
            state,
            &self.catalog,
            &pair.trigger_id,
            backend,
            cfg.trigger_threshold,
            cfg.parse_retries,
            force_rag,
        )?;
        select_action(
            state,
            &self.catalog,
            &self.synonyms,
            &pair.action_id,
            backend,
            cfg.action_threshold,
            cfg.parse_retries,
            force_rag,
        )?;
        verify(state, &self.catalog, backend, cfg.parse_retries)?;
        let verdict = state.verdict.as_ref().expect("verify sets a verdict");
        Ok(AttemptRecord {
            attempt: state.attempt_index + 1,
            queue_rank: pair.queue_rank,
            pair_trigger_id: pair.trigger_id.clone(),
            pair_action_id: pair.action_id.clone(),
            trigger_id: state.selected_trigger.as_ref().expect("trigger selected").trigger_id.clone(),
            action_id: state.bindings.as_ref().expect("bindings generated").action_id.clone(),
            forced_rag: force_rag,
            llm_overrode_rag: state.llm_overrode_rag,
            score: verdict.score,
            via_rule_fallback: verdict.via_rule_fallback,
            critique: verdict.critique.clone(),
        })
    }
}
