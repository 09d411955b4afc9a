//! Versioned prompt templates, one per agent.
//!
//! Each template holds a system part and a user part separated by a line
//! containing only `---`. Placeholders are written `{{name}}`.

use super::backend::AgentRole;

pub const PROMPT_VERSION: &str = "v1";

const INTENT_ANALYZER: &str = include_str!("../../prompts/intent_analyzer.v1.txt");
const TRIGGER_SELECTOR: &str = include_str!("../../prompts/trigger_selector.v1.txt");
const ACTION_SELECTOR: &str = include_str!("../../prompts/action_selector.v1.txt");
const BINDING_GENERATOR: &str = include_str!("../../prompts/binding_generator.v1.txt");
const VERIFIER: &str = include_str!("../../prompts/verifier.v1.txt");

pub const INTENT_SCHEMA: &str =
    r#"{"trigger_query": <search query for the event>, "action_query": <search query for the action>}"#;
pub const SELECTION_SCHEMA: &str =
    r#"{"selected_id": <one candidate id>, "reasoning": <one sentence>}"#;
pub const BINDING_SCHEMA: &str =
    r#"{"trigger_fields": {<field slug>: <literal>, ...}, "action_fields": {<field slug>: <literal>, ...}}"#;
pub const VERDICT_SCHEMA: &str = r#"{"binding_quality": <0..1>, "completeness": <0..1>, "executability": <0..1>, "score": <0..1>, "critique": <text>}"#;

fn template(role: AgentRole) -> &'static str {
    match role {
        AgentRole::IntentAnalyzer => INTENT_ANALYZER,
        AgentRole::TriggerSelector => TRIGGER_SELECTOR,
        AgentRole::ActionSelector => ACTION_SELECTOR,
        AgentRole::BindingGenerator => BINDING_GENERATOR,
        AgentRole::Verifier => VERIFIER,
    }
}

/// Returns `(system, user)` with placeholders substituted.
pub fn render(role: AgentRole, vars: &[(&str, &str)]) -> (String, String) {
    let text = template(role);
    let (system, user) = text
        .split_once("\n---\n")
        .expect("prompt templates have a system/user separator");
    let fill = |part: &str| {
        vars.iter().fold(part.to_string(), |acc, (k, v)| {
            acc.replace(&format!("{{{{{k}}}}}"), v)
        })
    };
    (fill(system).trim_end().to_string(), fill(user).trim_end().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_template_splits_and_fills() {
        for role in [
            AgentRole::IntentAnalyzer,
            AgentRole::TriggerSelector,
            AgentRole::ActionSelector,
            AgentRole::BindingGenerator,
            AgentRole::Verifier,
        ] {
            let (system, user) = render(role, &[("query", "QUERY"), ("schema", "SCHEMA")]);
            assert!(!system.is_empty());
            assert!(user.contains("QUERY"), "{role}");
            assert!(user.contains("SCHEMA"), "{role}");
        }
    }

    #[test]
    fn schemas_are_not_valid_json() {
        // An echoed prompt must never parse as a decision.
        for s in [INTENT_SCHEMA, SELECTION_SCHEMA, BINDING_SCHEMA, VERDICT_SCHEMA] {
            assert!(serde_json::from_str::<serde_json::Value>(s).is_err());
        }
    }
}
