use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::backend::AgentRole;
use crate::catalog::IngredientSpec;
use crate::embedding::Candidate;
use crate::pairing::MatchKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BindingSource {
    Ingredient,
    Static,
}

/// One action field fed either by a trigger ingredient or by a literal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Binding {
    pub field_slug: String,
    pub source: BindingSource,
    /// Ingredient slug for `Ingredient`, the literal for `Static`.
    pub value: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub match_kind: Option<MatchKind>,
}

impl Binding {
    pub fn ingredient(field: &str, ingredient: &str, kind: MatchKind) -> Self {
        Binding {
            field_slug: field.into(),
            source: BindingSource::Ingredient,
            value: ingredient.into(),
            match_kind: Some(kind),
        }
    }

    pub fn literal(field: &str, value: &str) -> Self {
        Binding {
            field_slug: field.into(),
            source: BindingSource::Static,
            value: value.into(),
            match_kind: None,
        }
    }
}

/// Prefix of the literal used when no value is known for a required field.
pub const PLACEHOLDER_PREFIX: &str = "TODO_";

pub fn placeholder(slug: &str) -> String {
    format!("{PLACEHOLDER_PREFIX}{slug}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifierVerdict {
    pub score: f64,
    pub binding_quality: f64,
    pub completeness: f64,
    pub executability: f64,
    pub critique: String,
    pub via_rule_fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchIntents {
    pub trigger: String,
    pub action: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectedTrigger {
    pub trigger_id: String,
    pub ingredients: Vec<IngredientSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionBindings {
    pub action_id: String,
    pub bindings: Vec<Binding>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntry {
    pub agent: String,
    pub trace: String,
}

/// Record of one agreement check between the retrieval choice and the
/// model's pick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionDecision {
    pub attempt: usize,
    pub agent: AgentRole,
    pub rag_choice: String,
    pub rag_similarity: f64,
    pub llm_choice: Option<String>,
    pub llm_similarity: Option<f64>,
    pub ratio: Option<f64>,
    pub threshold: f64,
    pub final_choice: String,
    pub overrode: bool,
}

/// Shared state the four agents read and write for one query.
///
/// Within an attempt fields are only ever filled in; [`reset_attempt`]
/// clears the per-attempt outputs before the next pair is tried.
///
/// [`reset_attempt`]: PipelineState::reset_attempt
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineState {
    pub query: String,
    pub trigger_candidates: Vec<Candidate>,
    pub action_candidates: Vec<Candidate>,
    pub search_intents: Option<SearchIntents>,
    pub selected_trigger: Option<SelectedTrigger>,
    pub trigger_field_values: BTreeMap<String, String>,
    pub bindings: Option<ActionBindings>,
    pub verdict: Option<VerifierVerdict>,
    pub llm_overrode_rag: bool,
    pub attempt_index: usize,
    pub reasoning_log: Vec<LogEntry>,
    pub decisions: Vec<SelectionDecision>,
}

impl PipelineState {
    pub fn new(query: impl Into<String>) -> Self {
        PipelineState {
            query: query.into(),
            trigger_candidates: Vec::new(),
            action_candidates: Vec::new(),
            search_intents: None,
            selected_trigger: None,
            trigger_field_values: BTreeMap::new(),
            bindings: None,
            verdict: None,
            llm_overrode_rag: false,
            attempt_index: 0,
            reasoning_log: Vec::new(),
            decisions: Vec::new(),
        }
    }

    pub fn log(&mut self, agent: impl Into<String>, trace: impl Into<String>) {
        self.reasoning_log.push(LogEntry {
            agent: agent.into(),
            trace: trace.into(),
        });
    }

    pub fn verifier_score(&self) -> Option<f64> {
        self.verdict.as_ref().map(|v| v.score)
    }

    pub fn set_selected_trigger(&mut self, selected: SelectedTrigger) {
        assert!(self.selected_trigger.is_none(), "trigger already selected this attempt");
        self.selected_trigger = Some(selected);
    }

    pub fn set_bindings(&mut self, bindings: ActionBindings) {
        assert!(self.bindings.is_none(), "bindings already generated this attempt");
        self.bindings = Some(bindings);
    }

    pub fn set_verdict(&mut self, verdict: VerifierVerdict) {
        assert!(self.verdict.is_none(), "attempt already verified");
        self.verdict = Some(verdict);
    }

    /// Clears per-attempt outputs and moves to the next attempt.
    pub fn reset_attempt(&mut self) {
        self.selected_trigger = None;
        self.trigger_field_values.clear();
        self.bindings = None;
        self.verdict = None;
        self.llm_overrode_rag = false;
        self.attempt_index += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriggerConfig {
    pub id: String,
    pub field_values: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionConfig {
    pub id: String,
    pub bindings: Vec<Binding>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifierSummary {
    pub score: f64,
    pub critique: String,
    #[serde(default)]
    pub via_rule_fallback: bool,
}

/// The generated applet: trigger with its configuration, action with its
/// bindings, and the verdict that accepted it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppletConfig {
    pub query: String,
    pub trigger: TriggerConfig,
    pub action: ActionConfig,
    pub verifier: VerifierSummary,
    pub attempts: usize,
    pub log: Vec<LogEntry>,
    #[serde(default)]
    pub decisions: Vec<SelectionDecision>,
}

impl AppletConfig {
    pub fn trigger_id(&self) -> &str {
        &self.trigger.id
    }

    pub fn action_id(&self) -> &str {
        &self.action.id
    }

    pub fn bindings(&self) -> &[Binding] {
        &self.action.bindings
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("applet serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reset_clears_attempt_outputs_only() {
        let mut s = PipelineState::new("q");
        s.search_intents = Some(SearchIntents {
            trigger: "t".into(),
            action: "a".into(),
        });
        s.set_selected_trigger(SelectedTrigger {
            trigger_id: "t1".into(),
            ingredients: vec![],
        });
        s.llm_overrode_rag = true;
        s.log("x", "y");
        s.reset_attempt();
        assert!(s.selected_trigger.is_none());
        assert!(!s.llm_overrode_rag);
        assert_eq!(s.attempt_index, 1);
        assert!(s.search_intents.is_some());
        assert_eq!(s.reasoning_log.len(), 1);
    }

    #[test]
    #[should_panic(expected = "already selected")]
    fn cannot_overwrite_within_attempt() {
        let mut s = PipelineState::new("q");
        let sel = SelectedTrigger {
            trigger_id: "t".into(),
            ingredients: vec![],
        };
        s.set_selected_trigger(sel.clone());
        s.set_selected_trigger(sel);
    }

    #[test]
    fn applet_json_shape() {
        let applet = AppletConfig {
            query: "q".into(),
            trigger: TriggerConfig {
                id: "t".into(),
                field_values: BTreeMap::new(),
            },
            action: ActionConfig {
                id: "a".into(),
                bindings: vec![Binding::literal("color", "green")],
            },
            verifier: VerifierSummary {
                score: 0.85,
                critique: "ok".into(),
                via_rule_fallback: false,
            },
            attempts: 1,
            log: vec![],
            decisions: vec![],
        };
        let v: serde_json::Value = serde_json::from_str(&applet.to_json()).unwrap();
        assert_eq!(v["trigger"]["id"], "t");
        assert_eq!(v["action"]["bindings"][0]["source"], "static");
        assert_eq!(v["verifier"]["score"], 0.85);
        assert_eq!(v["attempts"], 1);
    }
}
