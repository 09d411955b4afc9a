//! Unit-normalized embeddings, embedding providers and exact cosine retrieval.

mod file;
mod hashed;
mod index;
mod remote;

pub use file::{export_vectors, export_vectors_text, import_vectors, VECTOR_MAGIC, VECTOR_TEXT_MAGIC};
pub use hashed::HashedBagOfWords;
pub use index::{build_index, Candidate, EmbeddingRecord, IndexError, VectorIndex};
pub use remote::{RemoteEmbeddingConfig, RemoteEmbeddingProvider};

use serde::{Deserialize, Serialize};

/// Tolerance on the L2 norm of vectors produced by [`EmbeddingVector::normalize`].
pub const NORM_TOLERANCE: f64 = 1e-6;

/// Looser norm tolerance accepted for vectors read from files written by
/// external tooling.
pub const IMPORT_NORM_TOLERANCE: f64 = 1e-4;

#[derive(Debug, thiserror::Error)]
pub enum EmbedError {
    #[error("cannot embed empty text")]
    EmptyText,
    #[error("text contains no tokens to embed")]
    NoTokens,
    #[error("vector has zero or non-finite norm")]
    Degenerate,
    #[error("vector norm {norm} is not within {tolerance} of 1")]
    NotNormalized { norm: f64, tolerance: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("embedding provider unavailable: {0}")]
    Unavailable(String),
    #[error("malformed provider response: {0}")]
    BadResponse(String),
}

/// Whether a text is a user query or a catalog document. Remote encoders
/// may apply different prefixes per role.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Query,
    Document,
}

/// A unit-length embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector(Vec<f32>);

impl EmbeddingVector {
    /// L2-normalizes `values` (accumulating in f64).
    pub fn normalize(values: Vec<f32>) -> Result<Self, EmbedError> {
        let norm = l2_norm(&values);
        if !norm.is_finite() || norm == 0.0 {
            return Err(EmbedError::Degenerate);
        }
        let values = values
            .into_iter()
            .map(|v| (f64::from(v) / norm) as f32)
            .collect();
        Ok(EmbeddingVector(values))
    }

    /// Wraps values that are already unit-length, checking the norm.
    pub fn from_unit(values: Vec<f32>, tolerance: f64) -> Result<Self, EmbedError> {
        let norm = l2_norm(&values);
        if !norm.is_finite() || (norm - 1.0).abs() > tolerance {
            return Err(EmbedError::NotNormalized { norm, tolerance });
        }
        Ok(EmbeddingVector(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.0)
    }
}

fn l2_norm(values: &[f32]) -> f64 {
    values
        .iter()
        .map(|&v| f64::from(v) * f64::from(v))
        .sum::<f64>()
        .sqrt()
}

/// Cosine similarity of two unit vectors: their dot product, clamped to [-1, 1].
pub fn cosine(u: &EmbeddingVector, v: &EmbeddingVector) -> Result<f64, EmbedError> {
    if u.dim() != v.dim() {
        return Err(EmbedError::DimMismatch {
            expected: u.dim(),
            found: v.dim(),
        });
    }
    Ok(dot(u.as_slice(), v.as_slice()).clamp(-1.0, 1.0))
}

pub(crate) fn dot(u: &[f32], v: &[f32]) -> f64 {
    u.iter()
        .zip(v)
        .map(|(&a, &b)| f64::from(a) * f64::from(b))
        .sum()
}

/// Source of embeddings. One provider instance serves one side (triggers or
/// actions) even when two instances share a backing model.
pub trait EmbeddingProvider: Send + Sync {
    fn dim(&self) -> usize;

    fn embed_batch(&self, texts: &[String], role: Role) -> Result<Vec<EmbeddingVector>, EmbedError>;

    fn embed(&self, text: &str, role: Role) -> Result<EmbeddingVector, EmbedError> {
        let mut out = self.embed_batch(&[text.to_string()], role)?;
        out.pop()
            .ok_or_else(|| EmbedError::BadResponse("provider returned no vector".into()))
    }
}
