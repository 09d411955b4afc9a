//! Retrieval and end-to-end metrics over prediction/gold record sets.
//!
//! Records are first scored one by one into [`RecordOutcome`]s; every
//! aggregate metric is a plain function over a slice of outcomes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::agents::{AppletConfig, BindingSource, PipelineRun};
use crate::catalog::{Catalog, FunctionEntry, FunctionKind};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("no records to evaluate")]
    Empty,
    #[error("K must be at least 1")]
    InvalidK,
    #[error("{predictions} predictions for {golds} gold records")]
    CountMismatch { predictions: usize, golds: usize },
    #[error("record {index}: prediction is for `{prediction}` but gold is for `{gold}`")]
    QueryMismatch {
        index: usize,
        prediction: String,
        gold: String,
    },
    #[error("record {index}: gold {kind} id `{id}` is not in the catalog")]
    UnknownGoldId { index: usize, kind: FunctionKind, id: String },
    #[error("record {0}: prediction has no ranked pairs")]
    NoPairs(usize),
    #[error("metric invariant violated: {0}")]
    Invariant(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    #[default]
    Gold,
    Noisy,
    OneShot,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Gold => "gold",
            Split::Noisy => "noisy",
            Split::OneShot => "one_shot",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldRecord {
    pub query: String,
    pub true_trigger_id: String,
    pub true_action_id: String,
    #[serde(default)]
    pub reference_categories: BTreeSet<String>,
    #[serde(default)]
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RankedPair {
    pub trigger_id: String,
    pub action_id: String,
}

/// What the system produced for one query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub query: String,
    /// Best first; the head is the system's answer.
    pub ranked_pairs: Vec<RankedPair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub applet: Option<AppletConfig>,
    /// 1-based rank of the true trigger among the retrieved triggers, when
    /// known explicitly. Otherwise derived from `trigger_candidates`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trigger_rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action_rank: Option<usize>,
    /// Retrieved trigger ids, best first.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trigger_candidates: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub action_candidates: Vec<String>,
}

impl PredictionRecord {
    pub fn from_run(run: &PipelineRun) -> Self {
        PredictionRecord {
            query: run.query.clone(),
            ranked_pairs: run
                .ranked_pairs()
                .into_iter()
                .map(|(trigger_id, action_id)| RankedPair { trigger_id, action_id })
                .collect(),
            applet: run.applet().cloned(),
            trigger_rank: None,
            action_rank: None,
            trigger_candidates: run.trigger_candidates.iter().map(|c| c.entry_id.clone()).collect(),
            action_candidates: run.action_candidates.iter().map(|c| c.entry_id.clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Trigger,
    Action,
    Joint,
}

/// Per-record facts every metric is computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordOutcome {
    pub split: Split,
    pub trigger_rank: Option<usize>,
    pub action_rank: Option<usize>,
    /// Rank of the true pair in the prediction's ranked pairs.
    pub pair_rank: Option<usize>,
    /// The top-1 trigger is correct.
    pub trigger_correct: bool,
    pub action_correct: bool,
    /// Present when the prediction carries an applet.
    pub faithfulness: Option<f64>,
    /// Present when there is an applet and reference categories.
    pub on_topic: Option<bool>,
}

impl RecordOutcome {
    /// Joint rank: both items are within K exactly when the worse of the
    /// two ranks is.
    pub fn joint_rank(&self) -> Option<usize> {
        Some(self.trigger_rank?.max(self.action_rank?))
    }

    fn rank(&self, side: Side) -> Option<usize> {
        match side {
            Side::Trigger => self.trigger_rank,
            Side::Action => self.action_rank,
            Side::Joint => self.joint_rank(),
        }
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn nonempty(records: &[RecordOutcome]) -> Result<(), EvalError> {
    if records.is_empty() {
        Err(EvalError::Empty)
    } else {
        Ok(())
    }
}

/// Share of records whose true item(s) are ranked within `k`.
pub fn recall_at_k(records: &[RecordOutcome], k: usize, side: Side) -> Result<f64, EvalError> {
    if k == 0 {
        return Err(EvalError::InvalidK);
    }
    nonempty(records)?;
    Ok(mean(records.iter().map(|r| match r.rank(side) {
        Some(rank) if rank <= k => 1.0,
        _ => 0.0,
    })))
}

/// Mean reciprocal rank with ranks beyond `k` (or unknown) counting 0.
pub fn mrr_at_k(records: &[RecordOutcome], k: usize, side: Side) -> Result<f64, EvalError> {
    if k == 0 {
        return Err(EvalError::InvalidK);
    }
    nonempty(records)?;
    Ok(mean(records.iter().map(|r| reciprocal(r.rank(side), k))))
}

/// Mean reciprocal rank of the true pair in the predicted pair ranking.
pub fn pair_mrr_at_k(records: &[RecordOutcome], k: usize) -> Result<f64, EvalError> {
    if k == 0 {
        return Err(EvalError::InvalidK);
    }
    nonempty(records)?;
    Ok(mean(records.iter().map(|r| reciprocal(r.pair_rank, k))))
}

fn reciprocal(rank: Option<usize>, k: usize) -> f64 {
    match rank {
        Some(rank) if rank >= 1 && rank <= k => 1.0 / rank as f64,
        _ => 0.0,
    }
}

/// 1 when both top-1 functions are right, 0.5 when exactly one is, else 0.
pub fn goal_accuracy(record: &RecordOutcome) -> f64 {
    match (record.trigger_correct, record.action_correct) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.5,
        (false, false) => 0.0,
    }
}

pub fn mean_goal_accuracy(records: &[RecordOutcome]) -> Result<f64, EvalError> {
    nonempty(records)?;
    Ok(mean(records.iter().map(goal_accuracy)))
}

fn indicator_mean(records: &[RecordOutcome], f: impl Fn(&RecordOutcome) -> bool) -> Result<f64, EvalError> {
    nonempty(records)?;
    Ok(mean(records.iter().map(|r| if f(r) { 1.0 } else { 0.0 })))
}

pub fn joint_accuracy(records: &[RecordOutcome]) -> Result<f64, EvalError> {
    indicator_mean(records, |r| r.trigger_correct && r.action_correct)
}

pub fn trigger_accuracy(records: &[RecordOutcome]) -> Result<f64, EvalError> {
    indicator_mean(records, |r| r.trigger_correct)
}

pub fn action_accuracy(records: &[RecordOutcome]) -> Result<f64, EvalError> {
    indicator_mean(records, |r| r.action_correct)
}

/// Share of records with goal accuracy of at least 0.5.
pub fn success_rate(records: &[RecordOutcome]) -> Result<f64, EvalError> {
    indicator_mean(records, |r| goal_accuracy(r) >= 0.5)
}

/// Share of the applet's schema claims that hold in the catalog.
///
/// An ingredient binding claims that its ingredient exists on the trigger
/// and its field exists on the action; a static binding claims its field
/// exists; each trigger configuration value claims its field exists on the
/// trigger. No claims means fully faithful.
pub fn faithfulness(applet: &AppletConfig, catalog: &Catalog) -> f64 {
    let trigger = catalog.lookup(applet.trigger_id(), Some(FunctionKind::Trigger)).ok();
    let action = catalog.lookup(applet.action_id(), Some(FunctionKind::Action)).ok();
    let has_field = |e: Option<&FunctionEntry>, slug: &str| e.is_some_and(|e| e.field(slug).is_some());
    let mut total = 0usize;
    let mut verified = 0usize;
    let mut claim = |ok: bool| {
        total += 1;
        verified += usize::from(ok);
    };
    for b in applet.bindings() {
        if b.source == BindingSource::Ingredient {
            claim(trigger.is_some_and(|t| t.ingredient(&b.value).is_some()));
        }
        claim(has_field(action, &b.field_slug));
    }
    for slug in applet.trigger.field_values.keys() {
        claim(has_field(trigger, slug));
    }
    if total == 0 {
        1.0
    } else {
        verified as f64 / total as f64
    }
}

/// Whether both selected functions belong to the reference categories.
pub fn on_topic(applet: &AppletConfig, reference: &BTreeSet<String>, catalog: &Catalog) -> bool {
    let category = |id: &str| catalog.get(id).map(|e| e.category.as_str());
    [applet.trigger_id(), applet.action_id()]
        .into_iter()
        .all(|id| category(id).is_some_and(|c| reference.contains(c)))
}

/// Mean faithfulness over records that carry an applet.
pub fn mean_faithfulness(records: &[RecordOutcome]) -> Option<f64> {
    let values: Vec<f64> = records.iter().filter_map(|r| r.faithfulness).collect();
    (!values.is_empty()).then(|| mean(values.into_iter()))
}

/// Share of on-topic applets among records that have an applet and
/// reference categories.
pub fn topic_adherence(records: &[RecordOutcome]) -> Option<f64> {
    let values: Vec<bool> = records.iter().filter_map(|r| r.on_topic).collect();
    (!values.is_empty()).then(|| mean(values.into_iter().map(|b| if b { 1.0 } else { 0.0 })))
}

/// How predicted and true functions are compared.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum MatchLevel {
    /// Function ids must be equal.
    #[default]
    Function,
    /// Parent channels must be equal.
    Service,
}

fn same(catalog: &Catalog, level: MatchLevel, predicted: &str, truth: &str) -> bool {
    match level {
        MatchLevel::Function => predicted == truth,
        MatchLevel::Service => match (catalog.get(predicted), catalog.get(truth)) {
            (Some(p), Some(t)) => p.channel == t.channel,
            _ => false,
        },
    }
}

fn position(catalog: &Catalog, level: MatchLevel, list: &[String], truth: &str) -> Option<usize> {
    list.iter().position(|id| same(catalog, level, id, truth)).map(|i| i + 1)
}

/// Scores one prediction against its gold record.
pub fn score_record(
    prediction: &PredictionRecord,
    gold: &GoldRecord,
    catalog: &Catalog,
    level: MatchLevel,
) -> RecordOutcome {
    let top = prediction.ranked_pairs.first();
    let trigger_correct = top.is_some_and(|p| same(catalog, level, &p.trigger_id, &gold.true_trigger_id));
    let action_correct = top.is_some_and(|p| same(catalog, level, &p.action_id, &gold.true_action_id));
    let pair_rank = prediction
        .ranked_pairs
        .iter()
        .position(|p| {
            same(catalog, level, &p.trigger_id, &gold.true_trigger_id)
                && same(catalog, level, &p.action_id, &gold.true_action_id)
        })
        .map(|i| i + 1);
    let trigger_rank = prediction
        .trigger_rank
        .or_else(|| position(catalog, level, &prediction.trigger_candidates, &gold.true_trigger_id));
    let action_rank = prediction
        .action_rank
        .or_else(|| position(catalog, level, &prediction.action_candidates, &gold.true_action_id));
    let faithfulness = prediction.applet.as_ref().map(|a| faithfulness(a, catalog));
    let on_topic = match &prediction.applet {
        Some(a) if !gold.reference_categories.is_empty() => Some(on_topic(a, &gold.reference_categories, catalog)),
        _ => None,
    };
    RecordOutcome {
        split: gold.split,
        trigger_rank,
        action_rank,
        pair_rank,
        trigger_correct,
        action_correct,
        faithfulness,
        on_topic,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SideValues {
    pub trigger: f64,
    pub action: f64,
    pub joint: f64,
}

/// Every metric for one group of records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitMetrics {
    pub records: usize,
    pub recall_at: BTreeMap<usize, SideValues>,
    pub mrr_at: BTreeMap<usize, SideValues>,
    pub pair_mrr_at: BTreeMap<usize, f64>,
    pub trigger_acc: f64,
    pub action_acc: f64,
    pub joint_acc: f64,
    pub goal_acc: f64,
    pub success_rate: f64,
    /// Absent when no record carries an applet.
    pub faithfulness: Option<f64>,
    /// Absent when no record has both an applet and reference categories.
    pub topic_adherence: Option<f64>,
}

impl SplitMetrics {
    pub fn compute(records: &[RecordOutcome], ks: &[usize]) -> Result<Self, EvalError> {
        nonempty(records)?;
        let mut recall_at = BTreeMap::new();
        let mut mrr_at = BTreeMap::new();
        let mut pair_mrr_at = BTreeMap::new();
        for &k in ks {
            let sides = |f: fn(&[RecordOutcome], usize, Side) -> Result<f64, EvalError>| -> Result<SideValues, EvalError> {
                Ok(SideValues {
                    trigger: f(records, k, Side::Trigger)?,
                    action: f(records, k, Side::Action)?,
                    joint: f(records, k, Side::Joint)?,
                })
            };
            recall_at.insert(k, sides(recall_at_k)?);
            mrr_at.insert(k, sides(mrr_at_k)?);
            pair_mrr_at.insert(k, pair_mrr_at_k(records, k)?);
        }
        Ok(SplitMetrics {
            records: records.len(),
            recall_at,
            mrr_at,
            pair_mrr_at,
            trigger_acc: trigger_accuracy(records)?,
            action_acc: action_accuracy(records)?,
            joint_acc: joint_accuracy(records)?,
            goal_acc: mean_goal_accuracy(records)?,
            success_rate: success_rate(records)?,
            faithfulness: mean_faithfulness(records),
            topic_adherence: topic_adherence(records),
        })
    }

    /// Checks the relations that hold between the metrics by construction.
    pub fn validate(&self) -> Result<(), EvalError> {
        const EPS: f64 = 1e-12;
        let fail = |m: String| Err(EvalError::Invariant(m));
        let mut unit_values = vec![
            ("trigger_acc", self.trigger_acc),
            ("action_acc", self.action_acc),
            ("joint_acc", self.joint_acc),
            ("goal_acc", self.goal_acc),
            ("success_rate", self.success_rate),
        ];
        unit_values.extend(self.faithfulness.map(|v| ("faithfulness", v)));
        unit_values.extend(self.topic_adherence.map(|v| ("topic_adherence", v)));
        for (name, v) in unit_values {
            if !(v.is_finite() && (-EPS..=1.0 + EPS).contains(&v)) {
                return fail(format!("{name} = {v} is outside [0, 1]"));
            }
        }
        if self.success_rate + EPS < self.goal_acc {
            return fail(format!("success rate {} < goal accuracy {}", self.success_rate, self.goal_acc));
        }
        if self.goal_acc + EPS < self.joint_acc {
            return fail(format!("goal accuracy {} < joint accuracy {}", self.goal_acc, self.joint_acc));
        }
        for (k, r) in &self.recall_at {
            if r.joint > r.trigger.min(r.action) + EPS {
                return fail(format!("joint recall@{k} {} exceeds a side's recall", r.joint));
            }
            if let Some(m) = self.mrr_at.get(k) {
                for (name, mrr, rec) in [
                    ("trigger", m.trigger, r.trigger),
                    ("action", m.action, r.action),
                    ("joint", m.joint, r.joint),
                ] {
                    if mrr > rec + EPS {
                        return fail(format!("{name} MRR@{k} {mrr} exceeds recall@{k} {rec}"));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub level: String,
    pub overall: SplitMetrics,
    pub per_split: BTreeMap<Split, SplitMetrics>,
}

impl MetricsReport {
    pub fn validate(&self) -> Result<(), EvalError> {
        self.overall.validate()?;
        for (split, m) in &self.per_split {
            m.validate()
                .map_err(|e| EvalError::Invariant(format!("{} split: {e}", split.as_str())))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Human-readable summary table.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let mut groups: Vec<(&str, &SplitMetrics)> = vec![("overall", &self.overall)];
        groups.extend(self.per_split.iter().map(|(s, m)| (s.as_str(), m)));
        let fmt_opt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
        let _ = writeln!(out, "match level: {}", self.level);
        for (name, m) in groups {
            let _ = writeln!(out, "\n[{name}] records={}", m.records);
            let _ = writeln!(out, "{:<18}{:>10}{:>10}{:>10}", "metric", "trigger", "action", "joint");
            for (k, r) in &m.recall_at {
                let _ = writeln!(out, "{:<18}{:>10.4}{:>10.4}{:>10.4}", format!("Recall@{k}"), r.trigger, r.action, r.joint);
            }
            for (k, r) in &m.mrr_at {
                let _ = writeln!(out, "{:<18}{:>10.4}{:>10.4}{:>10.4}", format!("MRR@{k}"), r.trigger, r.action, r.joint);
            }
            for (k, v) in &m.pair_mrr_at {
                let _ = writeln!(out, "{:<18}{:>30.4}", format!("Pair MRR@{k}"), v);
            }
            for (label, v) in [
                ("Trigger accuracy", m.trigger_acc),
                ("Action accuracy", m.action_acc),
                ("Joint accuracy", m.joint_acc),
                ("Goal accuracy", m.goal_acc),
                ("Success rate", m.success_rate),
            ] {
                let _ = writeln!(out, "{label:<18}{v:>30.4}");
            }
            let _ = writeln!(out, "{:<18}{:>30}", "Faithfulness", fmt_opt(m.faithfulness));
            let _ = writeln!(out, "{:<18}{:>30}", "Topic adherence", fmt_opt(m.topic_adherence));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalOptions {
    pub ks: Vec<usize>,
    pub level: MatchLevel,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            ks: vec![1, 3, 5],
            level: MatchLevel::Function,
        }
    }
}

/// Scores predictions against golds (joined by position, with matching
/// queries) and aggregates every metric overall and per split. The report
/// is validated before it is returned.
pub fn evaluate_run(
    predictions: &[PredictionRecord],
    golds: &[GoldRecord],
    catalog: &Catalog,
    options: &EvalOptions,
) -> Result<MetricsReport, EvalError> {
    if predictions.is_empty() || golds.is_empty() {
        return Err(EvalError::Empty);
    }
    if options.ks.contains(&0) {
        return Err(EvalError::InvalidK);
    }
    if predictions.len() != golds.len() {
        return Err(EvalError::CountMismatch {
            predictions: predictions.len(),
            golds: golds.len(),
        });
    }
    let mut outcomes = Vec::with_capacity(golds.len());
    for (index, (p, g)) in predictions.iter().zip(golds).enumerate() {
        let index = index + 1;
        if p.query != g.query {
            return Err(EvalError::QueryMismatch {
                index,
                prediction: p.query.clone(),
                gold: g.query.clone(),
            });
        }
        for (kind, id) in [
            (FunctionKind::Trigger, &g.true_trigger_id),
            (FunctionKind::Action, &g.true_action_id),
        ] {
            if catalog.lookup(id, Some(kind)).is_err() {
                return Err(EvalError::UnknownGoldId {
                    index,
                    kind,
                    id: id.clone(),
                });
            }
        }
        if p.ranked_pairs.is_empty() {
            return Err(EvalError::NoPairs(index));
        }
        if p.applet.is_some() && g.reference_categories.is_empty() {
            log::warn!("record {index}: no reference categories; excluded from topic adherence");
        }
        outcomes.push(score_record(p, g, catalog, options.level));
    }
    let overall = SplitMetrics::compute(&outcomes, &options.ks)?;
    let mut per_split = BTreeMap::new();
    let splits: BTreeSet<Split> = outcomes.iter().map(|o| o.split).collect();
    for split in splits {
        let subset: Vec<RecordOutcome> = outcomes.iter().filter(|o| o.split == split).cloned().collect();
        per_split.insert(split, SplitMetrics::compute(&subset, &options.ks)?);
    }
    let report = MetricsReport {
        level: match options.level {
            MatchLevel::Function => "function".into(),
            MatchLevel::Service => "service".into(),
        },
        overall,
        per_split,
    };
    report.validate()?;
    Ok(report)
}

/// Reads line-delimited JSON records, skipping blank lines.
pub fn read_jsonl<T: DeserializeOwned>(reader: impl BufRead) -> Result<Vec<T>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| EvalError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

/// Writes one compact JSON document per line.
pub fn write_jsonl<T: Serialize>(mut out: impl Write, records: &[T]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
