//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use appletgen_core::{
    build_index, parse_catalog, Catalog, EmbeddingProvider, Engine, FunctionKind, HashedBagOfWords, PipelineConfig,
    SynonymTable,
};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const STOCK_QUERY: &str = "Change the light to green if stock price rises";

pub const QUERIES: &[&str] = &[
    STOCK_QUERY,
    "Text me when it will rain tomorrow",
    "Post my new instagram photos to twitter",
    "Add a row to a spreadsheet for every new email",
    "Blink the lights when the door opens",
];

const VOCAB: &[&str] = &[
    "light", "stock", "price", "email", "photo", "tweet", "weather", "rain", "door", "music", "track", "note",
    "calendar", "event", "file", "folder", "message", "channel", "temperature", "motion", "sleep", "step", "goal",
    "video", "feed", "news", "post", "share", "save", "add", "turn", "send", "create", "upload", "lock", "rises",
];

/// The shipped synthetic catalog.
pub fn synthetic_catalog() -> Catalog {
    parse_catalog(include_str!("../../../data/synthetic_catalog.json")).expect("shipped catalog parses")
}

/// A seeded random catalog with `n` triggers and `n` actions.
pub fn random_catalog(n: usize, seed: u64) -> Catalog {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut phrase = |lo: usize, hi: usize| {
        let len = rng.random_range(lo..=hi);
        (0..len).map(|_| *VOCAB.choose(&mut rng).unwrap()).collect::<Vec<_>>().join(" ")
    };
    let mut side = |prefix: &str| -> Vec<serde_json::Value> {
        (0..n)
            .map(|i| {
                serde_json::json!({
                    "id": format!("{prefix}.f{i:06}"),
                    "function_name": phrase(1, 3),
                    "channel": "Svc",
                    "category": "Misc",
                    "description": phrase(4, 12),
                })
            })
            .collect()
    };
    let triggers = side("trg");
    let actions = side("act");
    parse_catalog(&serde_json::json!({"triggers": triggers, "actions": actions}).to_string())
        .expect("generated catalog parses")
}

/// An engine over `catalog` with the deterministic embedder and no model.
pub fn offline_engine(catalog: Catalog, dim: usize) -> Engine {
    let provider: Arc<dyn EmbeddingProvider> = Arc::new(HashedBagOfWords::new(dim));
    let ti = build_index(&catalog, FunctionKind::Trigger, provider.as_ref()).expect("trigger index");
    let ai = build_index(&catalog, FunctionKind::Action, provider.as_ref()).expect("action index");
    Engine::new(
        Arc::new(catalog),
        Arc::new(ti),
        Arc::new(ai),
        provider.clone(),
        provider,
        Arc::new(SynonymTable::default_table()),
        None,
        PipelineConfig::default(),
    )
    .expect("valid engine")
}
