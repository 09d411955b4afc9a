mod common;

use std::io::Cursor;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use appletgen_core::embedding::{
    export_vectors, export_vectors_text, import_vectors, EmbedError, EmbeddingRecord, IndexError,
    RemoteEmbeddingConfig, RemoteEmbeddingProvider,
};
use appletgen_core::{build_index, EmbeddingProvider, EmbeddingVector, FunctionKind, Role, VectorIndex};
use common::*;
use proptest::prelude::*;

/// Exhaustive reference: score every record with a plain f64 dot product,
/// sort everything by (similarity desc, id asc), keep the first k.
fn brute_force(records: &[(String, Vec<f32>)], query: &[f32], k: usize) -> Vec<(String, f64)> {
    let mut all: Vec<(String, f64)> = records
        .iter()
        .map(|(id, v)| {
            let mut s = 0.0f64;
            for i in 0..v.len() {
                s += f64::from(v[i]) * f64::from(query[i]);
            }
            (id.clone(), s.clamp(-1.0, 1.0))
        })
        .collect();
    all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

/// (dim, records, queries, k)
type IndexCase = (usize, Vec<(String, Vec<f32>)>, Vec<Vec<f32>>, usize);

/// Random index with deliberately repeated vectors so that exact ties occur.
fn arb_index() -> impl Strategy<Value = IndexCase> {
    (16usize..=64, 1usize..=200, 1usize..=20).prop_flat_map(|(dim, n, k)| {
        let vec = prop::collection::vec(-8i8..=8, dim);
        (
            Just(dim),
            prop::collection::vec((vec.clone(), 0usize..4), n),
            prop::collection::vec(vec, 3),
            Just(k),
        )
            .prop_map(|(dim, raw, queries, k)| {
                let mut records: Vec<(String, Vec<f32>)> = Vec::with_capacity(raw.len());
                for (i, (v, dup)) in raw.into_iter().enumerate() {
                    // A quarter of the records copy an earlier vector.
                    let values = if dup == 0 && i > 0 {
                        records[i / 2].1.clone()
                    } else {
                        let mut f: Vec<f32> = v.into_iter().map(f32::from).collect();
                        if f.iter().all(|x| *x == 0.0) {
                            f[0] = 1.0;
                        }
                        EmbeddingVector::normalize(f).unwrap().as_slice().to_vec()
                    };
                    records.push((format!("e{:03}", (i * 7919) % 1000), values));
                }
                records.sort_by(|a, b| a.0.cmp(&b.0));
                records.dedup_by(|a, b| a.0 == b.0);
                let queries = queries
                    .into_iter()
                    .map(|q| {
                        let mut f: Vec<f32> = q.into_iter().map(f32::from).collect();
                        if f.iter().all(|x| *x == 0.0) {
                            f[dim - 1] = 1.0;
                        }
                        EmbeddingVector::normalize(f).unwrap().as_slice().to_vec()
                    })
                    .collect();
                (dim, records, queries, k)
            })
    })
}

fn to_index(kind: FunctionKind, dim: usize, records: &[(String, Vec<f32>)]) -> VectorIndex {
    let recs = records
        .iter()
        .map(|(id, v)| EmbeddingRecord {
            entry_id: id.clone(),
            vector: EmbeddingVector::from_unit(v.clone(), 1e-4).unwrap(),
        })
        .collect();
    VectorIndex::new(kind, dim, recs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn search_equals_exhaustive_sort((dim, records, queries, k) in arb_index()) {
        let index = to_index(FunctionKind::Trigger, dim, &records);
        for q in &queries {
            let got = index.search(&EmbeddingVector::from_unit(q.clone(), 1e-4).unwrap(), k).unwrap();
            let want = brute_force(&records, q, k);
            prop_assert_eq!(got.len(), want.len());
            for (i, (c, (id, sim))) in got.iter().zip(&want).enumerate() {
                prop_assert_eq!(&c.entry_id, id);
                prop_assert_eq!(c.similarity.to_bits(), sim.to_bits());
                prop_assert_eq!(c.rank, i + 1);
            }
        }
    }

    #[test]
    fn vector_files_round_trip((dim, records, _q, _k) in arb_index(), text in any::<bool>()) {
        let index = to_index(FunctionKind::Action, dim, &records);
        let mut buf = Vec::new();
        if text {
            export_vectors_text(&index, &mut buf).unwrap();
        } else {
            export_vectors(&index, &mut buf).unwrap();
        }
        let back = import_vectors(Cursor::new(buf), None).unwrap();
        prop_assert_eq!(back, index);
    }
}

#[test]
fn vector_file_rejects_corruption() {
    let catalog = synthetic();
    let index = build_index(&catalog, FunctionKind::Trigger, &appletgen_core::HashedBagOfWords::new(16)).unwrap();
    let mut buf = Vec::new();
    export_vectors(&index, &mut buf).unwrap();

    let truncated = &buf[..buf.len() - 3];
    assert!(matches!(import_vectors(Cursor::new(truncated), None), Err(IndexError::Corrupt(_))));

    let mut trailing = buf.clone();
    trailing.extend_from_slice(b"junk");
    assert!(matches!(import_vectors(Cursor::new(trailing), None), Err(IndexError::Corrupt(_))));

    let wrong_kind = import_vectors(Cursor::new(&buf), Some(&catalog)).map(|i| i.kind());
    assert_eq!(wrong_kind.unwrap(), FunctionKind::Trigger);

    let mut text = Vec::new();
    export_vectors_text(&index, &mut text).unwrap();
    let text = String::from_utf8(text).unwrap();
    let bad_norm = text.replacen(" 0", " 5", 1);
    assert!(import_vectors(Cursor::new(bad_norm), None).is_err());
    let other = appletgen_core::parse_catalog(ARTICLE_NOTE).unwrap();
    assert!(matches!(
        import_vectors(Cursor::new(text.as_bytes()), Some(&other)),
        Err(IndexError::UnknownId(_))
    ));
}

fn vectors_response(n: usize, dim: usize) -> String {
    let vectors: Vec<Vec<f32>> = (0..n)
        .map(|i| (0..dim).map(|j| ((i + j) % 5) as f32 + 0.5).collect())
        .collect();
    serde_json::json!({ "vectors": vectors }).to_string()
}

fn texts_in(body: &str) -> usize {
    let v: serde_json::Value = serde_json::from_str(body).unwrap();
    v["texts"].as_array().unwrap().len()
}

#[test]
fn remote_provider_normalizes_and_sends_model_role_and_token() {
    let seen = Arc::new(std::sync::Mutex::new(Vec::new()));
    let log = seen.clone();
    let url = serve(move |req| {
        log.lock().unwrap().push(req.clone());
        (200, vectors_response(texts_in(&req.body), 8))
    });
    let mut config = RemoteEmbeddingConfig::new(url, 8);
    config.model = Some("trigger-encoder".into());
    config.token = Some("secret".into());
    let provider = RemoteEmbeddingProvider::new(config);
    let texts: Vec<String> = (0..3).map(|i| format!("text {i}")).collect();
    let out = provider.embed_batch(&texts, Role::Document).unwrap();
    assert_eq!(out.len(), 3);
    assert!(out.iter().all(|v| (v.norm() - 1.0).abs() < 1e-6 && v.dim() == 8));
    let reqs = seen.lock().unwrap();
    let body: serde_json::Value = serde_json::from_str(&reqs[0].body).unwrap();
    assert_eq!(body["model"], "trigger-encoder");
    assert_eq!(body["role"], "document");
    assert!(reqs[0].head.to_ascii_lowercase().contains("authorization: bearer secret"));
}

#[test]
fn remote_provider_batches_large_requests() {
    let calls = Arc::new(AtomicUsize::new(0));
    let counter = calls.clone();
    let url = serve(move |req| {
        counter.fetch_add(1, Ordering::SeqCst);
        let n = texts_in(&req.body);
        assert!(n <= 4);
        (200, vectors_response(n, 8))
    });
    let mut config = RemoteEmbeddingConfig::new(url, 8);
    config.batch_size = 4;
    let provider = RemoteEmbeddingProvider::new(config);
    let texts: Vec<String> = (0..10).map(|i| format!("t{i}")).collect();
    assert_eq!(provider.embed_batch(&texts, Role::Query).unwrap().len(), 10);
    assert_eq!(calls.load(Ordering::SeqCst), 3);
}

#[test]
fn remote_provider_dimension_mismatch_is_an_error() {
    let url = serve(|req| (200, vectors_response(texts_in(&req.body), 512)));
    let provider = RemoteEmbeddingProvider::new(RemoteEmbeddingConfig::new(url, 768));
    assert!(matches!(
        provider.embed("hello", Role::Query),
        Err(EmbedError::DimMismatch { expected: 768, found: 512 })
    ));
}

#[test]
fn remote_provider_offline_is_unavailable() {
    let mut config = RemoteEmbeddingConfig::new(dead_url(), 8);
    config.retries = 0;
    let provider = RemoteEmbeddingProvider::new(config);
    assert!(matches!(provider.embed("hello", Role::Query), Err(EmbedError::Unavailable(_))));
}

#[test]
fn remote_provider_rejects_wrong_vector_count() {
    let url = serve(|_| (200, vectors_response(1, 8)));
    let provider = RemoteEmbeddingProvider::new(RemoteEmbeddingConfig::new(url, 8));
    let texts = vec!["a".to_string(), "b".to_string()];
    assert!(matches!(provider.embed_batch(&texts, Role::Query), Err(EmbedError::BadResponse(_))));
}
