//! Ingredient-to-field compatibility and the ranked k×k pair queue.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, CatalogError, FieldSpec, FunctionEntry, FunctionKind, IngredientSpec};
use crate::embedding::Candidate;

/// Weight of schema coverage in the pair score; retrieval similarity gets the rest.
pub const COVERAGE_WEIGHT: f64 = 0.7;
pub const SIMILARITY_WEIGHT: f64 = 0.3;

#[derive(Debug, thiserror::Error)]
pub enum PairingError {
    #[error("pair ranking needs at least one trigger and one action candidate")]
    EmptyCandidates,
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("synonym table: {0}")]
    Synonyms(String),
}

/// Lowercases, splits camel case, and collapses any run of separators
/// (underscore, hyphen, whitespace, punctuation) into one space.
pub fn normalize_name(raw: &str) -> String {
    name_tokens(raw).join(" ")
}

fn name_tokens(raw: &str) -> Vec<String> {
    let chars: Vec<char> = raw.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if !c.is_alphanumeric() {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
            continue;
        }
        if c.is_uppercase() && !current.is_empty() {
            let prev = chars[i - 1];
            let next_lower = chars.get(i + 1).is_some_and(|n| n.is_lowercase());
            // fooBar -> foo bar; HTMLPage -> html page
            if prev.is_lowercase() || prev.is_numeric() || (prev.is_uppercase() && next_lower) {
                tokens.push(std::mem::take(&mut current));
            }
        }
        current.extend(c.to_lowercase());
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Groups of names treated as interchangeable when matching ingredients to
/// fields. Names are stored normalized and each name belongs to one group;
/// adding a group that overlaps existing ones merges them.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynonymTable {
    groups: Vec<BTreeSet<String>>,
    group_of: HashMap<String, usize>,
}

#[derive(Deserialize, Serialize)]
struct SynonymFile {
    #[serde(default)]
    include_default: bool,
    groups: Vec<Vec<String>>,
}

impl SynonymTable {
    pub fn new<I, G, S>(groups: I) -> Self
    where
        I: IntoIterator<Item = G>,
        G: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut table = SynonymTable::default();
        for group in groups {
            table.add_group(group);
        }
        table
    }

    /// The shipped default table. It is configuration, not ground truth.
    pub fn default_table() -> Self {
        SynonymTable::new([
            &["message", "body", "content", "text"][..],
            &["name", "title", "label"],
            &["url", "link", "address"],
            &["time", "date", "timestamp"],
            &["image", "photo", "picture"],
        ])
    }

    pub fn add_group<G, S>(&mut self, group: G)
    where
        G: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut merged: BTreeSet<String> = group
            .into_iter()
            .map(|s| normalize_name(s.as_ref()))
            .filter(|s| !s.is_empty())
            .collect();
        if merged.is_empty() {
            return;
        }
        let mut absorbed: Vec<usize> = merged
            .iter()
            .filter_map(|n| self.group_of.get(n).copied())
            .collect();
        absorbed.sort_unstable();
        absorbed.dedup();
        for &g in absorbed.iter().rev() {
            merged.extend(self.groups.remove(g));
        }
        self.groups.push(merged);
        self.group_of = self
            .groups
            .iter()
            .enumerate()
            .flat_map(|(g, names)| names.iter().map(move |n| (n.clone(), g)))
            .collect();
    }

    pub fn groups(&self) -> &[BTreeSet<String>] {
        &self.groups
    }

    /// True when both (already normalized) names sit in the same group.
    pub fn equivalent(&self, a: &str, b: &str) -> bool {
        match (self.group_of.get(a), self.group_of.get(b)) {
            (Some(x), Some(y)) => x == y,
            _ => false,
        }
    }

    /// Parses `{"include_default": bool, "groups": [["a", "b"], ...]}`.
    pub fn from_json(text: &str) -> Result<Self, PairingError> {
        let file: SynonymFile =
            serde_json::from_str(text).map_err(|e| PairingError::Synonyms(e.to_string()))?;
        let mut table = if file.include_default {
            SynonymTable::default_table()
        } else {
            SynonymTable::default()
        };
        for group in file.groups {
            table.add_group(group);
        }
        Ok(table)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PairingError> {
        let text = std::fs::read_to_string(path).map_err(|e| PairingError::Synonyms(e.to_string()))?;
        Self::from_json(&text)
    }
}

/// How an ingredient matched a field, best first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchKind {
    Direct,
    Substring,
    Semantic,
}

fn contains_run(haystack: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

/// Compares two raw names with the direct, substring and semantic rules,
/// in that order.
pub fn match_names(a: &str, b: &str, syn: &SynonymTable) -> Option<MatchKind> {
    let ta = name_tokens(a);
    let tb = name_tokens(b);
    if ta.is_empty() || tb.is_empty() {
        return None;
    }
    if ta == tb {
        return Some(MatchKind::Direct);
    }
    if contains_run(&ta, &tb) || contains_run(&tb, &ta) {
        return Some(MatchKind::Substring);
    }
    let whole_a = ta.join(" ");
    let whole_b = tb.join(" ");
    let side_a = ta.iter().chain(std::iter::once(&whole_a));
    for x in side_a {
        let side_b = tb.iter().chain(std::iter::once(&whole_b));
        for y in side_b {
            if syn.equivalent(x, y) {
                return Some(MatchKind::Semantic);
            }
        }
    }
    None
}

pub fn match_kind(ingredient: &IngredientSpec, field: &FieldSpec, syn: &SynonymTable) -> Option<MatchKind> {
    match_names(&ingredient.slug, &field.slug, syn)
}

pub fn match_ingredient_field(ingredient: &IngredientSpec, field: &FieldSpec, syn: &SynonymTable) -> bool {
    match_kind(ingredient, field, syn).is_some()
}

/// Fraction of the action's required fields that some trigger ingredient
/// matches. Actions without required fields are fully covered.
pub fn coverage(trigger: &FunctionEntry, action: &FunctionEntry, syn: &SynonymTable) -> f64 {
    coverage_with(&trigger.ingredients, action, syn)
}

pub fn coverage_with(ingredients: &[IngredientSpec], action: &FunctionEntry, syn: &SynonymTable) -> f64 {
    let required: Vec<&FieldSpec> = action.required_fields().collect();
    if required.is_empty() {
        return 1.0;
    }
    let covered = required
        .iter()
        .filter(|f| ingredients.iter().any(|i| match_ingredient_field(i, f, syn)))
        .count();
    covered as f64 / required.len() as f64
}

/// `0.7 · coverage + 0.3 · mean(similarities)`, with similarities clamped to [0, 1].
pub fn pair_score(coverage: f64, sim_trigger: f64, sim_action: f64) -> f64 {
    let st = sim_trigger.clamp(0.0, 1.0);
    let sa = sim_action.clamp(0.0, 1.0);
    COVERAGE_WEIGHT * coverage + SIMILARITY_WEIGHT * (st + sa) / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCandidate {
    pub trigger_id: String,
    pub action_id: String,
    pub coverage: f64,
    pub sim_t: f64,
    pub sim_a: f64,
    pub score: f64,
    /// 1-based position in the queue.
    pub queue_rank: usize,
}

/// Queue order: score desc, then summed similarity desc, then ids asc.
pub fn queue_order(a: &PairCandidate, b: &PairCandidate) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| (b.sim_t + b.sim_a).total_cmp(&(a.sim_t + a.sim_a)))
        .then_with(|| a.trigger_id.cmp(&b.trigger_id))
        .then_with(|| a.action_id.cmp(&b.action_id))
}

/// Scores every (trigger, action) combination of the candidate lists and
/// returns them as a best-first queue.
pub fn rank_pairs(
    triggers: &[Candidate],
    actions: &[Candidate],
    catalog: &Catalog,
    syn: &SynonymTable,
) -> Result<Vec<PairCandidate>, PairingError> {
    if triggers.is_empty() || actions.is_empty() {
        return Err(PairingError::EmptyCandidates);
    }
    let action_entries = actions
        .iter()
        .map(|c| catalog.lookup(&c.entry_id, Some(FunctionKind::Action)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut pairs = Vec::with_capacity(triggers.len() * actions.len());
    for tc in triggers {
        let t = catalog.lookup(&tc.entry_id, Some(FunctionKind::Trigger))?;
        for (ac, a) in actions.iter().zip(&action_entries) {
            let cov = coverage(t, a, syn);
            pairs.push(PairCandidate {
                trigger_id: tc.entry_id.clone(),
                action_id: ac.entry_id.clone(),
                coverage: cov,
                sim_t: tc.similarity,
                sim_a: ac.similarity,
                score: pair_score(cov, tc.similarity, ac.similarity),
                queue_rank: 0,
            });
        }
    }
    pairs.sort_by(queue_order);
    for (i, p) in pairs.iter_mut().enumerate() {
        p.queue_rank = i + 1;
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::DataType;

    fn ing(slug: &str) -> IngredientSpec {
        IngredientSpec {
            slug: slug.into(),
            data_type: DataType::String,
            example: None,
            filter_code: None,
        }
    }

    fn field(slug: &str, required: bool) -> FieldSpec {
        FieldSpec {
            label: slug.into(),
            slug: slug.into(),
            required,
            data_type: DataType::String,
            helper_text: None,
        }
    }

    fn entry(kind: FunctionKind, id: &str, ingredients: &[&str], required: &[&str]) -> FunctionEntry {
        FunctionEntry {
            id: id.into(),
            kind,
            function_name: id.into(),
            channel: "c".into(),
            category: "k".into(),
            description: "d".into(),
            fields: required.iter().map(|s| field(s, true)).collect(),
            ingredients: ingredients.iter().map(|s| ing(s)).collect(),
        }
    }

    #[test]
    fn normalizes_names() {
        assert_eq!(normalize_name("StockName"), "stock name");
        assert_eq!(normalize_name("row_content"), "row content");
        assert_eq!(normalize_name(""), "");
        assert_eq!(normalize_name("__Image--URL  "), "image url");
        assert_eq!(normalize_name("ImageURL"), "image url");
        assert_eq!(normalize_name("HTMLPage"), "html page");
        assert_eq!(normalize_name("PercentageChange"), "percentage change");
    }

    #[test]
    fn match_rules() {
        let syn = SynonymTable::default_table();
        assert_eq!(match_names("temperature", "temperature", &syn), Some(MatchKind::Direct));
        assert_eq!(match_names("stock_name", "name", &syn), Some(MatchKind::Substring));
        assert_eq!(match_names("message", "body", &syn), Some(MatchKind::Semantic));
        assert_eq!(match_names("body", "content", &syn), Some(MatchKind::Semantic));
        assert_eq!(match_names("Title", "title", &syn), Some(MatchKind::Direct));
        assert_eq!(match_names("temperature", "humidity", &syn), None);
        assert_eq!(match_names("", "name", &syn), None);
    }

    #[test]
    fn synonym_groups_merge_on_overlap() {
        let mut syn = SynonymTable::default_table();
        syn.add_group(["blurb", "body"]);
        let body_groups = syn.groups().iter().filter(|g| g.contains("body")).count();
        assert_eq!(body_groups, 1);
        assert!(syn.equivalent("blurb", "message"));
    }

    #[test]
    fn synonym_file_extends_default() {
        let syn = SynonymTable::from_json(r#"{"include_default": true, "groups": [["keywords", "tags"]]}"#).unwrap();
        assert!(syn.equivalent("keywords", "tags"));
        assert!(syn.equivalent("url", "link"));
    }

    #[test]
    fn coverage_examples() {
        let syn = SynonymTable::default_table();
        let t = entry(FunctionKind::Trigger, "t", &["temperature", "humidity"], &[]);
        let a1 = entry(FunctionKind::Action, "a1", &[], &["temperature"]);
        let a2 = entry(FunctionKind::Action, "a2", &[], &["temperature", "image_url"]);
        let a3 = entry(FunctionKind::Action, "a3", &[], &[]);
        assert_eq!(coverage(&t, &a1, &syn), 1.0);
        assert_eq!(coverage(&t, &a2, &syn), 0.5);
        assert_eq!(coverage(&t, &a3, &syn), 1.0);
    }

    #[test]
    fn optional_fields_do_not_count() {
        let syn = SynonymTable::default_table();
        let t = entry(FunctionKind::Trigger, "t", &["temperature"], &[]);
        let mut a = entry(FunctionKind::Action, "a", &[], &["temperature"]);
        a.fields.push(field("caption", false));
        assert_eq!(coverage(&t, &a, &syn), 1.0);
    }

    #[test]
    fn pair_score_examples() {
        assert!((pair_score(1.0, 0.8, 0.6) - 0.91).abs() < 1e-12);
        assert_eq!(pair_score(0.0, 0.0, 0.0), 0.0);
        // negative similarity contributes nothing
        assert_eq!(pair_score(0.0, -0.4, -0.2), 0.0);
    }

    #[test]
    fn queue_tie_breaks() {
        let mk = |t: &str, a: &str, score: f64, st: f64| PairCandidate {
            trigger_id: t.into(),
            action_id: a.into(),
            coverage: 0.0,
            sim_t: st,
            sim_a: 0.0,
            score,
            queue_rank: 0,
        };
        let mut v = [mk("b", "x", 0.5, 0.1), mk("a", "y", 0.5, 0.1), mk("c", "x", 0.5, 0.2), mk("d", "x", 0.9, 0.0)];
        v.sort_by(queue_order);
        let order: Vec<_> = v.iter().map(|p| p.trigger_id.as_str()).collect();
        assert_eq!(order, ["d", "c", "a", "b"]);
    }
}
