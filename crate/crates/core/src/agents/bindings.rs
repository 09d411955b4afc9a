use std::collections::BTreeMap;

use serde::Deserialize;

use super::backend::{AgentRole, LlmBackend};
use super::prompts::BINDING_SCHEMA;
use super::state::{placeholder, Binding};
use super::{ask, Answer, PipelineError};
use crate::catalog::{FieldSpec, FunctionEntry, IngredientSpec};
use crate::pairing::{match_kind, SynonymTable};

/// Literal values the model extracted from the query, keyed by field slug.
#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(default)]
pub struct StaticProposals {
    pub trigger_fields: BTreeMap<String, String>,
    pub action_fields: BTreeMap<String, String>,
}

impl StaticProposals {
    fn cleaned(mut self) -> Self {
        for map in [&mut self.trigger_fields, &mut self.action_fields] {
            map.retain(|_, v| !v.trim().is_empty());
            for v in map.values_mut() {
                *v = v.trim().to_string();
            }
        }
        self
    }
}

/// Maps each action field to a data source.
///
/// Fields are visited required-first, in declaration order. A field takes
/// the best-matching ingredient (direct over substring over semantic, then
/// ingredient order). Unmatched required fields get the proposed literal or
/// a `TODO_<slug>` placeholder; unmatched optional fields stay unbound.
pub fn generate_bindings(
    ingredients: &[IngredientSpec],
    action: &FunctionEntry,
    syn: &SynonymTable,
    proposals: &BTreeMap<String, String>,
) -> Vec<Binding> {
    let ordered = action
        .fields
        .iter()
        .filter(|f| f.required)
        .chain(action.fields.iter().filter(|f| !f.required));
    let mut out = Vec::new();
    for field in ordered {
        let best = ingredients
            .iter()
            .enumerate()
            .filter_map(|(pos, i)| match_kind(i, field, syn).map(|k| (k, pos, i)))
            .min_by_key(|&(k, pos, _)| (k, pos));
        match best {
            Some((kind, _, ingredient)) => {
                out.push(Binding::ingredient(&field.slug, &ingredient.slug, kind));
            }
            None if field.required => {
                let value = proposals
                    .get(&field.slug)
                    .cloned()
                    .unwrap_or_else(|| placeholder(&field.slug));
                out.push(Binding::literal(&field.slug, &value));
            }
            None => {}
        }
    }
    out
}

/// Configuration values for the trigger's input fields: proposed literals,
/// with placeholders for required fields nobody filled.
pub fn trigger_field_values(
    trigger: &FunctionEntry,
    proposals: &BTreeMap<String, String>,
) -> BTreeMap<String, String> {
    trigger
        .fields
        .iter()
        .filter_map(|f| match proposals.get(&f.slug) {
            Some(v) => Some((f.slug.clone(), v.clone())),
            None if f.required => Some((f.slug.clone(), placeholder(&f.slug))),
            None => None,
        })
        .collect()
}

fn describe_fields(fields: &[&FieldSpec]) -> String {
    if fields.is_empty() {
        return "(none)".into();
    }
    fields
        .iter()
        .map(|f| {
            let req = if f.required { "required" } else { "optional" };
            match &f.helper_text {
                Some(h) => format!("- {} \"{}\" ({}, {req}): {h}", f.slug, f.label, f.data_type),
                None => format!("- {} \"{}\" ({}, {req})", f.slug, f.label, f.data_type),
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Asks the model for literal values of the trigger's configuration fields
/// and of the action fields no ingredient matches. Keys that are not among
/// the listed fields are dropped.
pub fn propose_static_values(
    backend: &dyn LlmBackend,
    query: &str,
    trigger: &FunctionEntry,
    action: &FunctionEntry,
    ingredients: &[IngredientSpec],
    syn: &SynonymTable,
    retries: usize,
) -> Result<(StaticProposals, String), PipelineError> {
    let trigger_fields: Vec<&FieldSpec> = trigger.fields.iter().collect();
    let open_fields: Vec<&FieldSpec> = action
        .fields
        .iter()
        .filter(|f| !ingredients.iter().any(|i| match_kind(i, f, syn).is_some()))
        .collect();
    if trigger_fields.is_empty() && open_fields.is_empty() {
        return Ok((StaticProposals::default(), "every field is fed by an ingredient".into()));
    }
    let trigger_desc = format!("{} ({})", trigger.function_name, trigger.channel);
    let action_desc = format!("{} ({})", action.function_name, action.channel);
    let trigger_list = describe_fields(&trigger_fields);
    let action_list = describe_fields(&open_fields);
    let answer = ask::<StaticProposals, _>(
        backend,
        AgentRole::BindingGenerator,
        query,
        &[
            ("query", query),
            ("trigger", &trigger_desc),
            ("trigger_fields", &trigger_list),
            ("action", &action_desc),
            ("action_fields", &action_list),
        ],
        BINDING_SCHEMA,
        retries,
        |_| Ok(()),
    )?;
    Ok(match answer {
        Answer::Parsed(p) => {
            let mut proposals = p.decision.cleaned();
            proposals
                .trigger_fields
                .retain(|k, _| trigger_fields.iter().any(|f| &f.slug == k));
            proposals
                .action_fields
                .retain(|k, _| open_fields.iter().any(|f| &f.slug == k));
            (proposals, p.thinking)
        }
        Answer::Missing(why) => (StaticProposals::default(), format!("no literal values proposed ({why})")),
    })
}
