use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{dot, EmbedError, EmbeddingProvider, EmbeddingVector, Role};
use crate::catalog::{render_text, Catalog, FunctionKind};

#[derive(Debug, thiserror::Error)]
pub enum IndexError {
    #[error("empty {0} catalog")]
    EmptyCatalog(FunctionKind),
    #[error("embedding entry `{entry_id}`: {source}")]
    Provider {
        entry_id: String,
        #[source]
        source: EmbedError,
    },
    #[error("embedding query: {0}")]
    Query(#[source] EmbedError),
    #[error("dimension mismatch: index has {expected}, got {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("k must be at least 1")]
    InvalidK,
    #[error("corrupt vector file: {0}")]
    Corrupt(String),
    #[error("vector file is for {found} entries, expected {expected}")]
    KindMismatch {
        expected: FunctionKind,
        found: FunctionKind,
    },
    #[error("vector file entry `{0}` is not a catalog entry of this kind")]
    UnknownId(String),
    #[error("catalog entry `{0}` has no vector")]
    MissingEntry(String),
    #[error("duplicate vector for `{0}`")]
    DuplicateId(String),
    #[error("vector file I/O: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingRecord {
    pub entry_id: String,
    pub vector: EmbeddingVector,
}

/// A retrieved catalog entry with its cosine similarity and 1-based rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub entry_id: String,
    pub similarity: f64,
    pub rank: usize,
}

/// Exact cosine index over one side of the catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorIndex {
    kind: FunctionKind,
    dim: usize,
    records: Vec<EmbeddingRecord>,
}

impl VectorIndex {
    pub fn new(
        kind: FunctionKind,
        dim: usize,
        records: Vec<EmbeddingRecord>,
    ) -> Result<Self, IndexError> {
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            if r.vector.dim() != dim {
                return Err(IndexError::DimMismatch {
                    expected: dim,
                    found: r.vector.dim(),
                });
            }
            if !seen.insert(r.entry_id.as_str()) {
                return Err(IndexError::DuplicateId(r.entry_id.clone()));
            }
        }
        Ok(VectorIndex { kind, dim, records })
    }

    pub fn kind(&self) -> FunctionKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn records(&self) -> &[EmbeddingRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Returns the `min(k, len)` most similar entries. Ties in similarity
    /// are broken by ascending entry id so results are stable.
    pub fn search(&self, query: &EmbeddingVector, k: usize) -> Result<Vec<Candidate>, IndexError> {
        if k == 0 {
            return Err(IndexError::InvalidK);
        }
        if query.dim() != self.dim {
            return Err(IndexError::DimMismatch {
                expected: self.dim,
                found: query.dim(),
            });
        }
        let mut scored: Vec<(f64, &str)> = self
            .records
            .iter()
            .map(|r| {
                let sim = dot(r.vector.as_slice(), query.as_slice()).clamp(-1.0, 1.0);
                (sim, r.entry_id.as_str())
            })
            .collect();
        let order = |a: &(f64, &str), b: &(f64, &str)| -> Ordering {
            b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1))
        };
        let take = k.min(scored.len());
        if take < scored.len() {
            scored.select_nth_unstable_by(take, order);
            scored.truncate(take);
        }
        scored.sort_unstable_by(order);
        Ok(scored
            .into_iter()
            .enumerate()
            .map(|(i, (similarity, id))| Candidate {
                entry_id: id.to_string(),
                similarity,
                rank: i + 1,
            })
            .collect())
    }

    /// Embeds `text` as a query with `provider` and searches.
    pub fn search_text(
        &self,
        provider: &dyn EmbeddingProvider,
        text: &str,
        k: usize,
    ) -> Result<Vec<Candidate>, IndexError> {
        let query = provider.embed(text, Role::Query).map_err(IndexError::Query)?;
        self.search(&query, k)
    }

    /// Checks that the index holds exactly one vector per catalog entry of its kind.
    pub fn check_against(&self, catalog: &Catalog) -> Result<(), IndexError> {
        let ids: HashSet<&str> = catalog
            .entries(self.kind)
            .iter()
            .map(|e| e.id.as_str())
            .collect();
        for r in &self.records {
            if !ids.contains(r.entry_id.as_str()) {
                return Err(IndexError::UnknownId(r.entry_id.clone()));
            }
        }
        if self.records.len() != ids.len() {
            let have: HashSet<&str> = self.records.iter().map(|r| r.entry_id.as_str()).collect();
            let missing = catalog
                .entries(self.kind)
                .iter()
                .find(|e| !have.contains(e.id.as_str()))
                .map(|e| e.id.clone())
                .unwrap_or_default();
            return Err(IndexError::MissingEntry(missing));
        }
        Ok(())
    }
}

const EMBED_BATCH: usize = 64;

/// Embeds every catalog entry of `kind` (rendered with
/// [`render_text`], role `Document`) into a new index.
pub fn build_index(
    catalog: &Catalog,
    kind: FunctionKind,
    provider: &dyn EmbeddingProvider,
) -> Result<VectorIndex, IndexError> {
    let entries = catalog.entries(kind);
    if entries.is_empty() {
        return Err(IndexError::EmptyCatalog(kind));
    }
    let dim = provider.dim();
    let mut records = Vec::with_capacity(entries.len());
    for chunk in entries.chunks(EMBED_BATCH) {
        let texts: Vec<String> = chunk.iter().map(render_text).collect();
        let vectors = provider
            .embed_batch(&texts, Role::Document)
            .map_err(|source| IndexError::Provider {
                entry_id: chunk[0].id.clone(),
                source,
            })?;
        if vectors.len() != chunk.len() {
            return Err(IndexError::Provider {
                entry_id: chunk[0].id.clone(),
                source: EmbedError::BadResponse(format!(
                    "expected {} vectors, got {}",
                    chunk.len(),
                    vectors.len()
                )),
            });
        }
        for (entry, vector) in chunk.iter().zip(vectors) {
            if vector.dim() != dim {
                return Err(IndexError::Provider {
                    entry_id: entry.id.clone(),
                    source: EmbedError::DimMismatch {
                        expected: dim,
                        found: vector.dim(),
                    },
                });
            }
            records.push(EmbeddingRecord {
                entry_id: entry.id.clone(),
                vector,
            });
        }
    }
    VectorIndex::new(kind, dim, records)
}
