use serde::Deserialize;

use super::backend::{AgentRole, LlmBackend};
use super::prompts::VERDICT_SCHEMA;
use super::state::{BindingSource, PipelineState, VerifierVerdict};
use super::{ask, Answer, PipelineError};
use crate::catalog::{Catalog, FunctionEntry, FunctionKind};

#[derive(Deserialize)]
struct VerdictReply {
    binding_quality: f64,
    completeness: f64,
    executability: f64,
    score: f64,
    #[serde(default)]
    critique: String,
}

fn unit(x: f64) -> bool {
    x.is_finite() && (0.0..=1.0).contains(&x)
}

/// Deterministic verdict: the mean of
/// - presence: 1 when both the trigger and the action resolve in the catalog,
/// - coverage: share of the action's required fields that carry a binding,
/// - validity: share of bindings whose field exists on the action and, for
///   ingredient bindings, whose ingredient exists on the trigger.
///
/// Without an action coverage is 0. Without required fields coverage is 1.
/// Without bindings validity is 1 only if the action needs none, else 0.
pub fn rule_based_verify(state: &PipelineState, catalog: &Catalog) -> VerifierVerdict {
    let trigger: Option<&FunctionEntry> = state
        .selected_trigger
        .as_ref()
        .and_then(|s| catalog.lookup(&s.trigger_id, Some(FunctionKind::Trigger)).ok());
    let action: Option<&FunctionEntry> = state
        .bindings
        .as_ref()
        .and_then(|b| catalog.lookup(&b.action_id, Some(FunctionKind::Action)).ok());
    let bindings = state.bindings.as_ref().map_or(&[][..], |b| &b.bindings[..]);
    let mut problems = Vec::new();

    let presence = if trigger.is_some() && action.is_some() {
        1.0
    } else {
        problems.push("trigger or action not selected".to_string());
        0.0
    };

    let coverage = match action {
        None => 0.0,
        Some(a) => {
            let required: Vec<_> = a.required_fields().collect();
            if required.is_empty() {
                1.0
            } else {
                let bound = required
                    .iter()
                    .filter(|f| bindings.iter().any(|b| b.field_slug == f.slug))
                    .count();
                if bound < required.len() {
                    problems.push(format!("{} of {} required fields unbound", required.len() - bound, required.len()));
                }
                bound as f64 / required.len() as f64
            }
        }
    };

    let ingredients = state.selected_trigger.as_ref().map_or(&[][..], |s| &s.ingredients[..]);
    let validity = if bindings.is_empty() {
        match action {
            Some(a) if a.required_fields().next().is_none() => 1.0,
            _ => 0.0,
        }
    } else {
        let valid = bindings
            .iter()
            .filter(|b| {
                let field_ok = action.is_some_and(|a| a.field(&b.field_slug).is_some());
                let source_ok = match b.source {
                    BindingSource::Ingredient => ingredients.iter().any(|i| i.slug == b.value),
                    BindingSource::Static => true,
                };
                if !(field_ok && source_ok) {
                    problems.push(format!("binding for `{}` references an unknown slug", b.field_slug));
                }
                field_ok && source_ok
            })
            .count();
        valid as f64 / bindings.len() as f64
    };

    let critique = if problems.is_empty() {
        "rule check: trigger and action present, required fields bound, bindings valid".to_string()
    } else {
        format!("rule check: {}", problems.join("; "))
    };
    VerifierVerdict {
        score: (presence + coverage + validity) / 3.0,
        binding_quality: validity,
        completeness: coverage,
        executability: presence,
        critique,
        via_rule_fallback: true,
    }
}

fn describe_bindings(state: &PipelineState) -> String {
    match &state.bindings {
        Some(b) if !b.bindings.is_empty() => b
            .bindings
            .iter()
            .map(|b| {
                let src = match b.source {
                    BindingSource::Ingredient => "ingredient",
                    BindingSource::Static => "static",
                };
                format!("- {} <- {src} {}", b.field_slug, b.value)
            })
            .collect::<Vec<_>>()
            .join("\n"),
        _ => "(none)".into(),
    }
}

/// Scores the attempt's configuration with the model, or with
/// [`rule_based_verify`] when there is no backend or no usable verdict.
/// Never fails on backend problems.
pub fn verify(
    state: &mut PipelineState,
    catalog: &Catalog,
    backend: Option<&dyn LlmBackend>,
    retries: usize,
) -> Result<(), PipelineError> {
    let bindings = state
        .bindings
        .as_ref()
        .ok_or(PipelineError::State("verification before bindings"))?;
    let role = AgentRole::Verifier;
    let llm_verdict = match backend {
        None => Err("language model disabled".to_string()),
        Some(backend) => {
            let trigger = state
                .selected_trigger
                .as_ref()
                .and_then(|s| catalog.get(&s.trigger_id))
                .map_or("(none)".to_string(), |t| format!("{} ({})", t.function_name, t.channel));
            let action_entry = catalog.get(&bindings.action_id);
            let action = action_entry.map_or("(none)".to_string(), |a| format!("{} ({})", a.function_name, a.channel));
            let required = action_entry
                .map(|a| a.required_fields().map(|f| f.slug.as_str()).collect::<Vec<_>>().join(", "))
                .filter(|s| !s.is_empty())
                .unwrap_or_else(|| "(none)".into());
            let trigger_fields = if state.trigger_field_values.is_empty() {
                "(none)".to_string()
            } else {
                state
                    .trigger_field_values
                    .iter()
                    .map(|(k, v)| format!("{k} = {v}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            };
            let listed = describe_bindings(state);
            let answer = ask::<VerdictReply, _>(
                backend,
                role,
                &state.query,
                &[
                    ("query", &state.query),
                    ("trigger", &trigger),
                    ("trigger_fields", &trigger_fields),
                    ("action", &action),
                    ("required", &required),
                    ("bindings", &listed),
                ],
                VERDICT_SCHEMA,
                retries,
                |v| {
                    if [v.binding_quality, v.completeness, v.executability, v.score].into_iter().all(unit) {
                        Ok(())
                    } else {
                        Err("scores must lie in [0, 1]".into())
                    }
                },
            );
            match answer {
                Ok(Answer::Parsed(p)) => Ok(p),
                Ok(Answer::Missing(why)) => Err(why),
                Err(e) => Err(e.to_string()),
            }
        }
    };
    let verdict = match llm_verdict {
        Ok(p) => {
            state.log(
                role.as_str(),
                format!("{}\nScore: {} ({})", p.thinking, p.decision.score, p.decision.critique),
            );
            VerifierVerdict {
                score: p.decision.score,
                binding_quality: p.decision.binding_quality,
                completeness: p.decision.completeness,
                executability: p.decision.executability,
                critique: p.decision.critique,
                via_rule_fallback: false,
            }
        }
        Err(why) => {
            if backend.is_some() {
                log::warn!("verifier fell back to rule check: {why}");
            }
            let v = rule_based_verify(state, catalog);
            state.log(role.as_str(), format!("{why}; {} -> score {:.4}", v.critique, v.score));
            v
        }
    };
    state.set_verdict(verdict);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::backend::{BackendError, LlmRequest, ScriptedBackend};
    use crate::agents::state::{ActionBindings, Binding, SelectedTrigger};
    use crate::catalog::parse_catalog;
    use crate::pairing::MatchKind;

    fn catalog() -> Catalog {
        parse_catalog(
            r#"{
            "triggers": [{"id": "t", "function_name": "T", "channel": "C", "category": "K", "description": "d",
                          "fields": [], "ingredients": [{"slug": "Title", "data_type": "String"}]}],
            "actions": [
              {"id": "a2", "function_name": "A", "channel": "C", "category": "K", "description": "d",
               "fields": [{"label": "Title", "slug": "title", "required": true, "data_type": "String"},
                          {"label": "Body", "slug": "body", "required": true, "data_type": "String"}]},
              {"id": "a0", "function_name": "B", "channel": "C", "category": "K", "description": "d", "fields": []}
            ]}"#,
        )
        .unwrap()
    }

    fn state(action: &str, bindings: Vec<Binding>) -> PipelineState {
        let c = catalog();
        let mut s = PipelineState::new("q");
        s.set_selected_trigger(SelectedTrigger {
            trigger_id: "t".into(),
            ingredients: c.get("t").unwrap().ingredients.clone(),
        });
        s.set_bindings(ActionBindings {
            action_id: action.into(),
            bindings,
        });
        s
    }

    #[test]
    fn perfect_configuration_scores_one() {
        let s = state(
            "a2",
            vec![Binding::ingredient("title", "Title", MatchKind::Direct), Binding::literal("body", "x")],
        );
        let v = rule_based_verify(&s, &catalog());
        assert_eq!(v.score, 1.0);
        assert!(v.via_rule_fallback);
    }

    #[test]
    fn half_coverage() {
        let s = state("a2", vec![Binding::ingredient("title", "Title", MatchKind::Direct)]);
        let v = rule_based_verify(&s, &catalog());
        assert!((v.score - 2.5 / 3.0).abs() < 1e-12);
        assert_eq!(v.completeness, 0.5);
    }

    #[test]
    fn missing_required_bindings_fail() {
        let s = state("a2", vec![]);
        let v = rule_based_verify(&s, &catalog());
        assert_eq!(v.completeness, 0.0);
        assert!(v.score < 0.5);
    }

    #[test]
    fn no_action_caps_score() {
        let s = state("nope", vec![]);
        let v = rule_based_verify(&s, &catalog());
        assert_eq!(v.executability, 0.0);
        assert!(v.score <= 2.0 / 3.0);
    }

    #[test]
    fn fieldless_action_is_vacuously_perfect() {
        assert_eq!(rule_based_verify(&state("a0", vec![]), &catalog()).score, 1.0);
    }

    #[test]
    fn hallucinated_slugs_lower_validity() {
        let s = state(
            "a2",
            vec![Binding::ingredient("title", "Ghost", MatchKind::Direct), Binding::literal("body", "x")],
        );
        assert_eq!(rule_based_verify(&s, &catalog()).binding_quality, 0.5);
    }

    #[test]
    fn model_verdict_is_used() {
        let backend = ScriptedBackend::from_json(
            r#"{"default": {"verifier": [{"thinking": "fine", "decision": {"binding_quality": 0.9, "completeness": 0.8, "executability": 0.85, "score": 0.85, "critique": "ok"}}]}}"#,
        )
        .unwrap();
        let mut s = state("a2", vec![]);
        verify(&mut s, &catalog(), Some(&backend), 1).unwrap();
        let v = s.verdict.unwrap();
        assert_eq!(v.score, 0.85);
        assert!(!v.via_rule_fallback);
    }

    #[test]
    fn out_of_range_verdict_falls_back() {
        let backend = ScriptedBackend::from_json(
            r#"{"default": {"verifier": [{"decision": {"binding_quality": 1, "completeness": 1, "executability": 1, "score": 1.7}}]}}"#,
        )
        .unwrap();
        let mut s = state("a0", vec![]);
        verify(&mut s, &catalog(), Some(&backend), 1).unwrap();
        assert!(s.verdict.unwrap().via_rule_fallback);
    }

    #[test]
    fn unreachable_backend_falls_back() {
        struct Down;
        impl LlmBackend for Down {
            fn complete(&self, _: &LlmRequest) -> Result<String, BackendError> {
                Err(BackendError::Unreachable("down".into()))
            }
        }
        let mut s = state("a0", vec![]);
        verify(&mut s, &catalog(), Some(&Down), 1).unwrap();
        assert!(s.verdict.unwrap().via_rule_fallback);
    }
}
