use serde::Deserialize;

use super::backend::{AgentRole, LlmBackend};
use super::prompts::INTENT_SCHEMA;
use super::state::{PipelineState, SearchIntents};
use super::{ask, Answer, PipelineError};

#[derive(Deserialize)]
struct IntentDecision {
    trigger_query: String,
    action_query: String,
}

/// Splits the query into a trigger search intent and an action search
/// intent. Without a usable reply both intents are the raw query.
pub fn analyze_intent(
    state: &mut PipelineState,
    backend: Option<&dyn LlmBackend>,
    retries: usize,
) -> Result<(), PipelineError> {
    if state.query.trim().is_empty() {
        return Err(PipelineError::EmptyQuery);
    }
    let role = AgentRole::IntentAnalyzer;
    let fallback = |state: &mut PipelineState, why: &str| {
        state.search_intents = Some(SearchIntents {
            trigger: state.query.clone(),
            action: state.query.clone(),
        });
        state.log(role.as_str(), format!("{why}; using the query for both intents"));
    };
    let Some(backend) = backend else {
        fallback(state, "language model disabled");
        return Ok(());
    };
    let answer = ask::<IntentDecision, _>(
        backend,
        role,
        &state.query,
        &[("query", &state.query)],
        INTENT_SCHEMA,
        retries,
        |d| {
            if d.trigger_query.trim().is_empty() || d.action_query.trim().is_empty() {
                Err("empty intent".into())
            } else {
                Ok(())
            }
        },
    )?;
    match answer {
        Answer::Parsed(p) => {
            let intents = SearchIntents {
                trigger: p.decision.trigger_query.trim().to_string(),
                action: p.decision.action_query.trim().to_string(),
            };
            state.log(
                role.as_str(),
                format!(
                    "{}\nIntent: trigger=\"{}\" action=\"{}\"",
                    p.thinking, intents.trigger, intents.action
                ),
            );
            state.search_intents = Some(intents);
        }
        Answer::Missing(why) => {
            log::warn!("intent analyzer fell back to the raw query: {why}");
            fallback(state, &format!("no usable analysis ({why})"));
        }
    }
    Ok(())
}
