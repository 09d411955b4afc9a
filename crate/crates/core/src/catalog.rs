//! Function-level catalog of trigger and action functions.
//!
//! A catalog document is a JSON object with `triggers` and `actions` arrays
//! (and an optional `categories` array declaring the allowed labels). Each
//! entry carries its full data interface: configuration/input `fields` for
//! both kinds, and output `ingredients` for triggers only.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("syntax error at {path} (line {line}, column {column}): {message}")]
    Syntax {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("empty trigger catalog")]
    EmptyTriggers,
    #[error("empty action catalog")]
    EmptyActions,
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("invalid id `{0}`: ids must be non-empty and contain no whitespace")]
    InvalidId(String),
    #[error("action `{0}` declares ingredients; only triggers provide ingredients")]
    IngredientsOnAction(String),
    #[error("entry `{id}`: {kind} slug must be non-empty")]
    EmptySlug { id: String, kind: &'static str },
    #[error("entry `{id}`: duplicate {kind} slug `{slug}`")]
    DuplicateSlug {
        id: String,
        kind: &'static str,
        slug: String,
    },
    #[error("entry `{id}`: category `{category}` is not declared by the catalog")]
    UnknownCategory { id: String, category: String },
    #[error("entry `{id}` has kind {found}, expected {expected}")]
    KindMismatch {
        id: String,
        expected: FunctionKind,
        found: FunctionKind,
    },
    #[error("no catalog entry with id `{0}`")]
    NotFound(String),
    #[error("reading catalog: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionKind {
    Trigger,
    Action,
}

impl fmt::Display for FunctionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FunctionKind::Trigger => "trigger",
            FunctionKind::Action => "action",
        })
    }
}

impl std::str::FromStr for FunctionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "trigger" => Ok(FunctionKind::Trigger),
            "action" => Ok(FunctionKind::Action),
            other => Err(format!("unknown function kind `{other}`")),
        }
    }
}

/// Value type of an ingredient or field.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DataType {
    String,
    Number,
    Boolean,
    Date,
    DateWithTime,
    Url,
    ImageUrl,
    Other(String),
}

impl DataType {
    /// Parses a type label leniently ("Date with time", "DateWithTime" and
    /// "date_with_time" are the same type). Unknown labels become `Other`.
    pub fn parse(label: &str) -> DataType {
        let key: String = label
            .chars()
            .filter(|c| c.is_alphanumeric())
            .flat_map(char::to_lowercase)
            .collect();
        match key.as_str() {
            "string" | "text" => DataType::String,
            "number" | "integer" | "float" => DataType::Number,
            "boolean" | "bool" => DataType::Boolean,
            "date" => DataType::Date,
            "datewithtime" | "datetime" => DataType::DateWithTime,
            "url" | "linkurl" => DataType::Url,
            "imageurl" | "photourl" => DataType::ImageUrl,
            _ => {
                log::warn!("unknown data type `{label}`, keeping it as an opaque type");
                DataType::Other(label.to_string())
            }
        }
    }

    pub fn label(&self) -> &str {
        match self {
            DataType::String => "String",
            DataType::Number => "Number",
            DataType::Boolean => "Boolean",
            DataType::Date => "Date",
            DataType::DateWithTime => "Date with time",
            DataType::Url => "URL",
            DataType::ImageUrl => "Image URL",
            DataType::Other(name) => name,
        }
    }
}

impl fmt::Display for DataType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl Serialize for DataType {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for DataType {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let label = String::deserialize(deserializer)?;
        Ok(DataType::parse(&label))
    }
}

/// An output value a trigger emits when it fires.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngredientSpec {
    pub slug: String,
    pub data_type: DataType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub example: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter_code: Option<String>,
}

/// An input parameter: configuration for a trigger, execution input for an action.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub label: String,
    pub slug: String,
    pub required: bool,
    pub data_type: DataType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub helper_text: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FunctionEntry {
    pub id: String,
    #[serde(skip)]
    pub kind: FunctionKind,
    pub function_name: String,
    pub channel: String,
    pub category: String,
    pub description: String,
    pub fields: Vec<FieldSpec>,
    #[serde(skip_serializing_if = "skip_ingredients")]
    pub ingredients: Vec<IngredientSpec>,
}

fn skip_ingredients(ingredients: &[IngredientSpec]) -> bool {
    ingredients.is_empty()
}

impl FunctionEntry {
    pub fn ingredient(&self, slug: &str) -> Option<&IngredientSpec> {
        self.ingredients.iter().find(|i| i.slug == slug)
    }

    pub fn field(&self, slug: &str) -> Option<&FieldSpec> {
        self.fields.iter().find(|f| f.slug == slug)
    }

    pub fn required_fields(&self) -> impl Iterator<Item = &FieldSpec> {
        self.fields.iter().filter(|f| f.required)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    id: String,
    function_name: String,
    channel: String,
    category: String,
    description: String,
    #[serde(default)]
    fields: Vec<FieldSpec>,
    #[serde(default)]
    ingredients: Vec<IngredientSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCatalog {
    #[serde(default)]
    categories: Option<Vec<String>>,
    triggers: Vec<RawEntry>,
    actions: Vec<RawEntry>,
}

#[derive(Serialize)]
struct CatalogDocument<'a> {
    categories: &'a BTreeSet<String>,
    triggers: &'a [FunctionEntry],
    actions: &'a [FunctionEntry],
}

/// Validated, immutable catalog.
#[derive(Debug, Clone)]
pub struct Catalog {
    triggers: Vec<FunctionEntry>,
    actions: Vec<FunctionEntry>,
    categories: BTreeSet<String>,
    by_id: HashMap<String, (FunctionKind, usize)>,
}

impl PartialEq for Catalog {
    fn eq(&self, other: &Self) -> bool {
        self.triggers == other.triggers
            && self.actions == other.actions
            && self.categories == other.categories
    }
}

impl Catalog {
    /// Builds a catalog from entries, enforcing id, slug, kind and category
    /// invariants. When `categories` is `None` the set is derived from the
    /// entries. Emptiness is not checked here; see [`parse_catalog`].
    pub fn new(
        triggers: Vec<FunctionEntry>,
        actions: Vec<FunctionEntry>,
        categories: Option<BTreeSet<String>>,
    ) -> Result<Self, CatalogError> {
        let declared = categories.is_some();
        let categories = categories.unwrap_or_else(|| {
            triggers
                .iter()
                .chain(actions.iter())
                .map(|e| e.category.clone())
                .collect()
        });
        let mut by_id = HashMap::with_capacity(triggers.len() + actions.len());
        for (expected, list) in [
            (FunctionKind::Trigger, &triggers),
            (FunctionKind::Action, &actions),
        ] {
            for (pos, entry) in list.iter().enumerate() {
                if entry.kind != expected {
                    return Err(CatalogError::KindMismatch {
                        id: entry.id.clone(),
                        expected,
                        found: entry.kind,
                    });
                }
                validate_entry(entry)?;
                if declared && !categories.contains(&entry.category) {
                    return Err(CatalogError::UnknownCategory {
                        id: entry.id.clone(),
                        category: entry.category.clone(),
                    });
                }
                if by_id.insert(entry.id.clone(), (expected, pos)).is_some() {
                    return Err(CatalogError::DuplicateId(entry.id.clone()));
                }
            }
        }
        Ok(Catalog {
            triggers,
            actions,
            categories,
            by_id,
        })
    }

    pub fn triggers(&self) -> &[FunctionEntry] {
        &self.triggers
    }

    pub fn actions(&self) -> &[FunctionEntry] {
        &self.actions
    }

    pub fn entries(&self, kind: FunctionKind) -> &[FunctionEntry] {
        match kind {
            FunctionKind::Trigger => &self.triggers,
            FunctionKind::Action => &self.actions,
        }
    }

    pub fn categories(&self) -> &BTreeSet<String> {
        &self.categories
    }

    pub fn len(&self) -> usize {
        self.triggers.len() + self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, id: &str) -> Option<&FunctionEntry> {
        self.by_id.get(id).map(|&(kind, pos)| &self.entries(kind)[pos])
    }

    /// Finds an entry by id, optionally requiring a specific kind.
    pub fn lookup(
        &self,
        id: &str,
        kind: Option<FunctionKind>,
    ) -> Result<&FunctionEntry, CatalogError> {
        let entry = self
            .get(id)
            .ok_or_else(|| CatalogError::NotFound(id.to_string()))?;
        match kind {
            Some(expected) if entry.kind != expected => Err(CatalogError::KindMismatch {
                id: id.to_string(),
                expected,
                found: entry.kind,
            }),
            _ => Ok(entry),
        }
    }

    pub fn to_json(&self) -> String {
        let doc = CatalogDocument {
            categories: &self.categories,
            triggers: &self.triggers,
            actions: &self.actions,
        };
        serde_json::to_string_pretty(&doc).expect("catalog serialization cannot fail")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CatalogError> {
        let mut text = String::new();
        std::fs::File::open(path)?.read_to_string(&mut text)?;
        parse_catalog(&text)
    }
}

fn validate_entry(entry: &FunctionEntry) -> Result<(), CatalogError> {
    if entry.id.is_empty() || entry.id.chars().any(char::is_whitespace) {
        return Err(CatalogError::InvalidId(entry.id.clone()));
    }
    if entry.kind == FunctionKind::Action && !entry.ingredients.is_empty() {
        return Err(CatalogError::IngredientsOnAction(entry.id.clone()));
    }
    check_slugs(&entry.id, "ingredient", entry.ingredients.iter().map(|i| &i.slug))?;
    check_slugs(&entry.id, "field", entry.fields.iter().map(|f| &f.slug))
}

fn check_slugs<'a>(
    id: &str,
    kind: &'static str,
    slugs: impl Iterator<Item = &'a String>,
) -> Result<(), CatalogError> {
    let mut seen = HashSet::new();
    for slug in slugs {
        if slug.is_empty() {
            return Err(CatalogError::EmptySlug {
                id: id.to_string(),
                kind,
            });
        }
        if !seen.insert(slug.as_str()) {
            return Err(CatalogError::DuplicateSlug {
                id: id.to_string(),
                kind,
                slug: slug.clone(),
            });
        }
    }
    Ok(())
}

/// Parses and validates a catalog document. Malformed entries are rejected,
/// never repaired; both function lists must be non-empty.
pub fn parse_catalog(document: &str) -> Result<Catalog, CatalogError> {
    let de = &mut serde_json::Deserializer::from_str(document);
    let raw: RawCatalog = serde_path_to_error::deserialize(de).map_err(|err| {
        let path = err.path().to_string();
        let inner = err.into_inner();
        CatalogError::Syntax {
            path,
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    })?;
    if raw.triggers.is_empty() {
        return Err(CatalogError::EmptyTriggers);
    }
    if raw.actions.is_empty() {
        return Err(CatalogError::EmptyActions);
    }
    let convert = |kind: FunctionKind, raw: RawEntry| FunctionEntry {
        id: raw.id,
        kind,
        function_name: raw.function_name,
        channel: raw.channel,
        category: raw.category,
        description: raw.description,
        fields: raw.fields,
        ingredients: raw.ingredients,
    };
    let triggers = raw
        .triggers
        .into_iter()
        .map(|e| convert(FunctionKind::Trigger, e))
        .collect();
    let actions = raw
        .actions
        .into_iter()
        .map(|e| convert(FunctionKind::Action, e))
        .collect();
    Catalog::new(
        triggers,
        actions,
        raw.categories.map(|c| c.into_iter().collect()),
    )
}

/// Renders the schema-enriched text used as the embedding input:
/// `[channel] [category] name. desc || Provides: ...` for triggers and
/// `... || Requires: ...` for actions.
pub fn render_text(entry: &FunctionEntry) -> String {
    let schema = match entry.kind {
        FunctionKind::Trigger => {
            let items: Vec<String> = entry
                .ingredients
                .iter()
                .map(|i| format!("{} ({})", i.slug, i.data_type))
                .collect();
            format!("Provides: {}", items.join(", "))
        }
        FunctionKind::Action => {
            let items: Vec<String> = entry
                .fields
                .iter()
                .map(|f| {
                    let flag = if f.required { "required" } else { "optional" };
                    format!("{} ({flag})", f.slug)
                })
                .collect();
            format!("Requires: {}", items.join(", "))
        }
    };
    format!(
        "[{}] [{}] {}. {} || {}",
        entry.channel, entry.category, entry.function_name, entry.description, schema
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const ARTICLE_NOTE: &str = include_str!("../../../data/article_note_catalog.json");

    #[test]
    fn parses_article_trigger() {
        let catalog = parse_catalog(ARTICLE_NOTE).unwrap();
        assert_eq!(catalog.triggers().len(), 1);
        assert_eq!(catalog.actions().len(), 1);
        let trigger = &catalog.triggers()[0];
        assert_eq!(trigger.ingredients.len(), 9);
        assert_eq!(trigger.fields.len(), 1);
        assert_eq!(
            trigger.ingredient("PublishedDate").unwrap().data_type,
            DataType::DateWithTime
        );
        let action = &catalog.actions()[0];
        assert_eq!(action.required_fields().count(), 2);
    }

    #[test]
    fn renders_trigger_schema() {
        let catalog = parse_catalog(ARTICLE_NOTE).unwrap();
        let text = render_text(&catalog.triggers()[0]);
        assert!(text.starts_with(
            "[The New York Times] [News & information] New article from search."
        ));
        assert!(text.contains("Provides: Title (String), Author (String)"));
        assert!(text.ends_with("PublishedDate (Date with time)"));
    }

    #[test]
    fn renders_action_schema() {
        let catalog = parse_catalog(ARTICLE_NOTE).unwrap();
        let text = render_text(&catalog.actions()[0]);
        assert!(text.contains(" || Requires: title (required), body (required), notebook (optional)"));
    }

    fn bare(kind: FunctionKind, id: &str) -> FunctionEntry {
        FunctionEntry {
            id: id.into(),
            kind,
            function_name: "Name".into(),
            channel: "Chan".into(),
            category: "Cat".into(),
            description: "Desc".into(),
            fields: vec![],
            ingredients: vec![],
        }
    }

    #[test]
    fn empty_schema_renders_marker_only() {
        let text = render_text(&bare(FunctionKind::Trigger, "t"));
        assert_eq!(text, "[Chan] [Cat] Name. Desc || Provides: ");
        let text = render_text(&bare(FunctionKind::Action, "a"));
        assert!(text.ends_with("|| Requires: "));
    }

    #[test]
    fn rejects_empty_trigger_list() {
        let err = parse_catalog(r#"{"triggers": [], "actions": []}"#).unwrap_err();
        assert_eq!(err.to_string(), "empty trigger catalog");
    }

    #[test]
    fn rejects_duplicate_ids() {
        let doc = r#"{
          "triggers": [{"id": "x", "function_name": "a", "channel": "c", "category": "k", "description": "d"}],
          "actions": [{"id": "x", "function_name": "b", "channel": "c", "category": "k", "description": "d"}]
        }"#;
        let err = parse_catalog(doc).unwrap_err();
        assert!(matches!(err, CatalogError::DuplicateId(ref id) if id == "x"));
        assert!(err.to_string().contains("`x`"));
    }

    #[test]
    fn rejects_action_with_ingredients() {
        let doc = r#"{
          "triggers": [{"id": "t", "function_name": "a", "channel": "c", "category": "k", "description": "d"}],
          "actions": [{"id": "a", "function_name": "b", "channel": "c", "category": "k", "description": "d",
                       "ingredients": [{"slug": "X", "data_type": "String"}]}]
        }"#;
        assert!(matches!(
            parse_catalog(doc),
            Err(CatalogError::IngredientsOnAction(id)) if id == "a"
        ));
    }

    #[test]
    fn syntax_error_reports_path_and_line() {
        let doc = "{\n  \"triggers\": [\n    {\"id\": 5}\n  ],\n  \"actions\": []\n}";
        match parse_catalog(doc).unwrap_err() {
            CatalogError::Syntax { path, line, .. } => {
                assert_eq!(path, "triggers[0].id");
                assert_eq!(line, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_type_becomes_other() {
        assert_eq!(
            DataType::parse("Location"),
            DataType::Other("Location".into())
        );
        assert_eq!(DataType::parse("date_with_time"), DataType::DateWithTime);
    }

    #[test]
    fn undeclared_category_rejected() {
        let doc = r#"{
          "categories": ["News"],
          "triggers": [{"id": "t", "function_name": "a", "channel": "c", "category": "Sports", "description": "d"}],
          "actions": [{"id": "a", "function_name": "b", "channel": "c", "category": "News", "description": "d"}]
        }"#;
        assert!(matches!(
            parse_catalog(doc),
            Err(CatalogError::UnknownCategory { .. })
        ));
    }

    #[test]
    fn duplicate_slug_rejected() {
        let doc = r#"{
          "triggers": [{"id": "t", "function_name": "a", "channel": "c", "category": "k", "description": "d",
                        "ingredients": [{"slug": "X", "data_type": "String"}, {"slug": "X", "data_type": "Number"}]}],
          "actions": [{"id": "a", "function_name": "b", "channel": "c", "category": "k", "description": "d"}]
        }"#;
        assert!(matches!(
            parse_catalog(doc),
            Err(CatalogError::DuplicateSlug { .. })
        ));
    }

    #[test]
    fn lookup_paths() {
        let catalog = parse_catalog(ARTICLE_NOTE).unwrap();
        let t = &catalog.triggers()[0];
        assert_eq!(catalog.lookup(&t.id, None).unwrap(), t);
        assert!(matches!(
            catalog.lookup("nope", None),
            Err(CatalogError::NotFound(id)) if id == "nope"
        ));
        let a = &catalog.actions()[0];
        assert!(matches!(
            catalog.lookup(&a.id, Some(FunctionKind::Trigger)),
            Err(CatalogError::KindMismatch { .. })
        ));
    }

    #[test]
    fn serialize_round_trip() {
        let catalog = parse_catalog(ARTICLE_NOTE).unwrap();
        let again = parse_catalog(&catalog.to_json()).unwrap();
        assert_eq!(catalog, again);
    }
}
