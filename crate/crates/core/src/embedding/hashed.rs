use super::{EmbedError, EmbeddingProvider, EmbeddingVector, Role};

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
const SIGN_SEED: u64 = 0x9e37_79b9_7f4a_7c15;

/// Deterministic hashed bag-of-words embedder.
///
/// Texts are split on non-alphanumeric characters and lowercased; each token
/// adds ±1 to one of `dim` buckets (bucket and sign come from two independent
/// FNV-1a hashes) and the sum is L2-normalized. Needs no model or network,
/// and texts sharing vocabulary get positive cosine similarity.
#[derive(Debug, Clone)]
pub struct HashedBagOfWords {
    dim: usize,
}

impl HashedBagOfWords {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        HashedBagOfWords { dim }
    }

    pub fn embed_text(&self, text: &str) -> Result<EmbeddingVector, EmbedError> {
        if text.is_empty() {
            return Err(EmbedError::EmptyText);
        }
        let mut acc = vec![0f32; self.dim];
        let mut any = false;
        for token in tokenize(text) {
            any = true;
            let bucket = (fnv1a(FNV_OFFSET, token.as_bytes()) % self.dim as u64) as usize;
            let sign = if fnv1a(FNV_OFFSET ^ SIGN_SEED, token.as_bytes()) & 1 == 0 {
                1.0
            } else {
                -1.0
            };
            acc[bucket] += sign;
        }
        if !any {
            return Err(EmbedError::NoTokens);
        }
        // Colliding tokens with opposite signs can cancel to zero.
        EmbeddingVector::normalize(acc).map_err(|_| EmbedError::NoTokens)
    }
}

impl EmbeddingProvider for HashedBagOfWords {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_batch(&self, texts: &[String], _role: Role) -> Result<Vec<EmbeddingVector>, EmbedError> {
        texts.iter().map(|t| self.embed_text(t)).collect()
    }
}

fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

fn fnv1a(seed: u64, bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(seed, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}
