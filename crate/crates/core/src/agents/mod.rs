//! The selection pipeline: Intent Analyzer → Trigger Selector → Action
//! Selector → Verifier, communicating through a shared [`PipelineState`],
//! with agreement-gated model overrides and a quality-gated fallback over
//! the pair queue.
//!
//! Every agent also has a deterministic path used when no backend is
//! configured or the model's reply cannot be parsed after one re-ask.

pub mod backend;
mod bindings;
mod intent;
mod pipeline;
pub mod prompts;
pub mod response;
mod select;
mod state;
mod verify;

pub use backend::{
    AgentRole, BackendError, LlmBackend, LlmRequest, RemoteChatBackend, RemoteChatConfig, Script,
    ScriptedBackend, ScriptedResponse,
};
pub use bindings::{generate_bindings, propose_static_values, trigger_field_values, StaticProposals};
pub use intent::analyze_intent;
pub use pipeline::{AttemptRecord, Engine, FailureReport, Outcome, PipelineRun};
pub use select::{agreement_ratio, select_action, select_trigger};
pub use state::{
    placeholder, ActionBindings, ActionConfig, AppletConfig, Binding, BindingSource, LogEntry,
    PipelineState, SearchIntents, SelectedTrigger, SelectionDecision, TriggerConfig,
    VerifierSummary, VerifierVerdict, PLACEHOLDER_PREFIX,
};
pub use verify::{rule_based_verify, verify};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::catalog::CatalogError;
use crate::embedding::IndexError;
use crate::pairing::PairingError;
use response::{parse_reply, Parsed};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("query is empty")]
    EmptyQuery,
    #[error("invalid pipeline configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Pairing(#[from] PairingError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("agent precondition violated: {0}")]
    State(&'static str),
}

/// Thresholds and sizes of the selection pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Candidates retrieved per side; the queue holds up to k² pairs.
    pub k: usize,
    /// Agreement ratio needed for the model to override the trigger.
    pub trigger_threshold: f64,
    /// Agreement ratio needed for the model to override the action.
    pub action_threshold: f64,
    /// Minimum verifier score for an applet to be accepted.
    pub verifier_threshold: f64,
    /// Re-run retrieval with the analyzer's rewritten intents.
    pub reretrieve_with_intents: bool,
    /// Re-asks after an unparseable reply before falling back.
    pub parse_retries: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            k: 5,
            trigger_threshold: 0.95,
            action_threshold: 0.80,
            verifier_threshold: 0.5,
            reretrieve_with_intents: false,
            parse_retries: 1,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.k == 0 {
            return Err(PipelineError::Config("k must be at least 1".into()));
        }
        for (name, t) in [
            ("trigger_threshold", self.trigger_threshold),
            ("action_threshold", self.action_threshold),
        ] {
            if !(t > 0.0 && t <= 1.0) {
                return Err(PipelineError::Config(format!("{name} must be in (0, 1], got {t}")));
            }
        }
        if !(0.0..=1.0).contains(&self.verifier_threshold) {
            return Err(PipelineError::Config(format!(
                "verifier_threshold must be in [0, 1], got {}",
                self.verifier_threshold
            )));
        }
        Ok(())
    }
}

/// Result of asking one agent: a parsed decision or the reason there is none.
pub(crate) enum Answer<T> {
    Parsed(Parsed<T>),
    Missing(String),
}

/// Sends a prompt, re-asking on unparseable or invalid replies. Transport
/// failures are returned as errors; everything else becomes `Missing`.
pub(crate) fn ask<T, V>(
    backend: &dyn LlmBackend,
    role: AgentRole,
    query: &str,
    vars: &[(&str, &str)],
    schema: &'static str,
    retries: usize,
    validate: V,
) -> Result<Answer<T>, BackendError>
where
    T: DeserializeOwned,
    V: Fn(&T) -> Result<(), String>,
{
    let mut vars = vars.to_vec();
    vars.push(("schema", schema));
    let (system, user) = prompts::render(role, &vars);
    let mut last_problem = String::new();
    for attempt in 0..=retries {
        let user = if attempt == 0 {
            user.clone()
        } else {
            format!(
                "{user}\n\nYour previous reply could not be used ({last_problem}). Reply again: THINKING, then exactly one ```json block in the required form."
            )
        };
        let request = LlmRequest {
            role,
            query: query.to_string(),
            system: system.clone(),
            user,
            response_schema: schema,
        };
        let reply = match backend.complete(&request) {
            Ok(reply) => reply,
            Err(e) if e.is_transport() => return Err(e),
            Err(e) => return Ok(Answer::Missing(e.to_string())),
        };
        match parse_reply::<T>(&reply).and_then(|p| validate(&p.decision).map(|_| p)) {
            Ok(parsed) => return Ok(Answer::Parsed(parsed)),
            Err(problem) => {
                log::warn!("{role}: unusable reply (attempt {}): {problem}", attempt + 1);
                last_problem = problem;
            }
        }
    }
    Ok(Answer::Missing(last_problem))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_thresholds() {
        let c = PipelineConfig::default();
        assert_eq!((c.k, c.trigger_threshold, c.action_threshold, c.verifier_threshold), (5, 0.95, 0.80, 0.5));
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_thresholds() {
        let bad = [
            PipelineConfig { k: 0, ..Default::default() },
            PipelineConfig { trigger_threshold: 0.0, ..Default::default() },
            PipelineConfig { action_threshold: 1.2, ..Default::default() },
            PipelineConfig { verifier_threshold: -0.1, ..Default::default() },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }
}
