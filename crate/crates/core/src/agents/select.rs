use serde::Deserialize;

use super::backend::{AgentRole, LlmBackend};
use super::bindings::{generate_bindings, propose_static_values, trigger_field_values, StaticProposals};
use super::prompts::SELECTION_SCHEMA;
use super::state::{ActionBindings, PipelineState, SelectedTrigger, SelectionDecision};
use super::{ask, Answer, PipelineError};
use crate::catalog::{render_text, Catalog, FunctionKind};
use crate::embedding::Candidate;
use crate::pairing::{coverage_with, SynonymTable};

#[derive(Deserialize)]
struct SelectionReply {
    selected_id: String,
    #[serde(default)]
    reasoning: String,
}

/// `llm_sim / rag_sim`: how close the model's pick comes to the retrieval
/// choice in retrieval similarity. When the retrieval choice has no positive
/// similarity the ratio is 1 if the pick is at least as similar, else 0.
pub fn agreement_ratio(rag_sim: f64, llm_sim: f64) -> f64 {
    if rag_sim > 0.0 {
        llm_sim / rag_sim
    } else if llm_sim >= rag_sim {
        1.0
    } else {
        0.0
    }
}

fn similarity_of(candidates: &[Candidate], id: &str) -> Option<f64> {
    candidates.iter().find(|c| c.entry_id == id).map(|c| c.similarity)
}

/// Everything one selector needs to apply the agreement rule.
struct Gate<'a> {
    agent: AgentRole,
    candidates: &'a [Candidate],
    rag_choice: &'a str,
    threshold: f64,
}

impl Gate<'_> {
    /// Returns the final choice and whether the model overrode retrieval.
    fn decide(&self, state: &mut PipelineState, pick: Option<(String, String)>) -> (String, bool) {
        let rag_sim = similarity_of(self.candidates, self.rag_choice).unwrap_or(0.0);
        let mut decision = SelectionDecision {
            attempt: state.attempt_index,
            agent: self.agent,
            rag_choice: self.rag_choice.to_string(),
            rag_similarity: rag_sim,
            llm_choice: None,
            llm_similarity: None,
            ratio: None,
            threshold: self.threshold,
            final_choice: self.rag_choice.to_string(),
            overrode: false,
        };
        let trace = match pick {
            None => "kept the retrieval choice (no model decision)".to_string(),
            Some((id, reasoning)) => {
                decision.llm_choice = Some(id.clone());
                match similarity_of(self.candidates, &id) {
                    None => {
                        log::warn!("{}: model chose `{id}`, which is not a candidate", self.agent);
                        format!("{reasoning}\nModel chose `{id}`, not among the candidates; keeping `{}`", self.rag_choice)
                    }
                    Some(llm_sim) => {
                        let ratio = agreement_ratio(rag_sim, llm_sim);
                        decision.llm_similarity = Some(llm_sim);
                        decision.ratio = Some(ratio);
                        if id == self.rag_choice {
                            format!("{reasoning}\nAgrees with retrieval on `{id}`")
                        } else if ratio >= self.threshold {
                            decision.final_choice = id.clone();
                            decision.overrode = true;
                            format!(
                                "{reasoning}\nOverride accepted: {llm_sim:.3}/{rag_sim:.3} = {ratio:.3} >= {}",
                                self.threshold
                            )
                        } else {
                            format!(
                                "{reasoning}\nOverride rejected: {llm_sim:.3}/{rag_sim:.3} = {ratio:.3} < {}; keeping `{}`",
                                self.threshold, self.rag_choice
                            )
                        }
                    }
                }
            }
        };
        state.log(self.agent.as_str(), trace);
        let out = (decision.final_choice.clone(), decision.overrode);
        state.decisions.push(decision);
        out
    }
}

fn candidate_block(catalog: &Catalog, candidates: &[Candidate], extra: impl Fn(&str) -> String) -> String {
    candidates
        .iter()
        .map(|c| {
            let text = catalog.get(&c.entry_id).map(render_text).unwrap_or_default();
            format!("- id: {} (retrieval similarity {:.3}{})\n  {text}", c.entry_id, c.similarity, extra(&c.entry_id))
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn ask_pick(
    backend: &dyn LlmBackend,
    role: AgentRole,
    query: &str,
    vars: &[(&str, &str)],
    retries: usize,
) -> Result<Option<(String, String)>, PipelineError> {
    let answer = ask::<SelectionReply, _>(backend, role, query, vars, SELECTION_SCHEMA, retries, |d| {
        if d.selected_id.trim().is_empty() {
            Err("empty selected_id".into())
        } else {
            Ok(())
        }
    })?;
    Ok(match answer {
        Answer::Parsed(p) => {
            let reasoning = match (p.thinking.is_empty(), p.decision.reasoning.is_empty()) {
                (false, false) => format!("{}\nDecision: {}", p.thinking, p.decision.reasoning),
                (false, true) => p.thinking,
                _ => p.decision.reasoning,
            };
            Some((p.decision.selected_id.trim().to_string(), reasoning))
        }
        Answer::Missing(why) => {
            log::warn!("{role}: keeping the retrieval choice: {why}");
            None
        }
    })
}

/// Picks the trigger for this attempt. `rag_choice` is the current pair's
/// trigger; the model may replace it only with a candidate whose retrieval
/// similarity is within `threshold` of it. With `force_rag` (or no backend)
/// the model is not consulted.
pub fn select_trigger(
    state: &mut PipelineState,
    catalog: &Catalog,
    rag_choice: &str,
    backend: Option<&dyn LlmBackend>,
    threshold: f64,
    retries: usize,
    force_rag: bool,
) -> Result<(), PipelineError> {
    if state.trigger_candidates.is_empty() {
        return Err(PipelineError::State("no trigger candidates"));
    }
    let role = AgentRole::TriggerSelector;
    let pick = match backend {
        Some(backend) if !force_rag => {
            let intent = state
                .search_intents
                .as_ref()
                .map_or(state.query.clone(), |i| i.trigger.clone());
            let candidates = candidate_block(catalog, &state.trigger_candidates, |_| String::new());
            ask_pick(
                backend,
                role,
                &state.query,
                &[("query", &state.query), ("intent", &intent), ("candidates", &candidates)],
                retries,
            )?
        }
        _ => None,
    };
    let candidates = state.trigger_candidates.clone();
    let gate = Gate {
        agent: role,
        candidates: &candidates,
        rag_choice,
        threshold,
    };
    let (chosen, overrode) = gate.decide(state, pick);
    let entry = catalog.lookup(&chosen, Some(FunctionKind::Trigger))?;
    state.llm_overrode_rag |= overrode;
    state.set_selected_trigger(SelectedTrigger {
        trigger_id: entry.id.clone(),
        ingredients: entry.ingredients.clone(),
    });
    Ok(())
}

/// Picks the action for this attempt under the same agreement rule, then
/// generates its bindings and the trigger's configuration values.
#[allow(clippy::too_many_arguments)]
pub fn select_action(
    state: &mut PipelineState,
    catalog: &Catalog,
    syn: &SynonymTable,
    rag_choice: &str,
    backend: Option<&dyn LlmBackend>,
    threshold: f64,
    retries: usize,
    force_rag: bool,
) -> Result<(), PipelineError> {
    let selected = state
        .selected_trigger
        .clone()
        .ok_or(PipelineError::State("action selection before trigger selection"))?;
    if state.action_candidates.is_empty() {
        return Err(PipelineError::State("no action candidates"));
    }
    let trigger = catalog.lookup(&selected.trigger_id, Some(FunctionKind::Trigger))?;
    let role = AgentRole::ActionSelector;
    let pick = match backend {
        Some(backend) if !force_rag => {
            let intent = state
                .search_intents
                .as_ref()
                .map_or(state.query.clone(), |i| i.action.clone());
            let candidates = candidate_block(catalog, &state.action_candidates, |id| {
                let cov = catalog
                    .get(id)
                    .map_or(0.0, |a| coverage_with(&selected.ingredients, a, syn));
                format!(", coverage {cov:.2}")
            });
            let trigger_desc = format!("{} ({})", trigger.function_name, trigger.channel);
            let ingredients = if selected.ingredients.is_empty() {
                "(none)".to_string()
            } else {
                selected
                    .ingredients
                    .iter()
                    .map(|i| format!("{} ({})", i.slug, i.data_type))
                    .collect::<Vec<_>>()
                    .join(", ")
            };
            ask_pick(
                backend,
                role,
                &state.query,
                &[
                    ("query", &state.query),
                    ("intent", &intent),
                    ("trigger", &trigger_desc),
                    ("ingredients", &ingredients),
                    ("candidates", &candidates),
                ],
                retries,
            )?
        }
        _ => None,
    };
    let candidates = state.action_candidates.clone();
    let gate = Gate {
        agent: role,
        candidates: &candidates,
        rag_choice,
        threshold,
    };
    let (chosen, overrode) = gate.decide(state, pick);
    let action = catalog.lookup(&chosen, Some(FunctionKind::Action))?;
    state.llm_overrode_rag |= overrode;

    let proposals = match backend {
        Some(backend) => {
            let (proposals, trace) =
                propose_static_values(backend, &state.query, trigger, action, &selected.ingredients, syn, retries)?;
            state.log(AgentRole::BindingGenerator.as_str(), trace);
            proposals
        }
        None => StaticProposals::default(),
    };
    let bindings = generate_bindings(&selected.ingredients, action, syn, &proposals.action_fields);
    state.trigger_field_values = trigger_field_values(trigger, &proposals.trigger_fields);
    let summary = bindings
        .iter()
        .map(|b| format!("({}, {:?}, {})", b.field_slug, b.source, b.value))
        .collect::<Vec<_>>()
        .join(", ");
    state.log(role.as_str(), format!("Bindings for `{}`: [{summary}]", action.id));
    state.set_bindings(ActionBindings {
        action_id: action.id.clone(),
        bindings,
    });
    Ok(())
}
