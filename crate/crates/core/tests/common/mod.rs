#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::Arc;
use std::thread;

use appletgen_core::agents::SelectionDecision;
use appletgen_core::{
    build_index, parse_catalog, Catalog, EmbeddingProvider, Engine, FunctionKind, HashedBagOfWords, LlmBackend,
    PipelineConfig, ScriptedBackend, SynonymTable,
};

pub const SYNTHETIC: &str = include_str!("../../../../data/synthetic_catalog.json");
pub const ARTICLE_NOTE: &str = include_str!("../../../../data/article_note_catalog.json");
pub const STOCK_SCRIPT: &str = include_str!("../../../../data/scripts/stock_example.json");
pub const EXTENDED_SYNONYMS: &str = include_str!("../../../../data/synonyms_extended.json");
pub const STOCK_QUERY: &str = "Change the light to green if stock price rises";
pub const DIM: usize = 256;

pub fn synthetic() -> Catalog {
    parse_catalog(SYNTHETIC).expect("synthetic catalog parses")
}

pub fn engine_with(catalog: Catalog, backend: Option<Arc<dyn LlmBackend>>, config: PipelineConfig) -> Engine {
    let provider: Arc<dyn EmbeddingProvider> = Arc::new(HashedBagOfWords::new(DIM));
    let ti = build_index(&catalog, FunctionKind::Trigger, provider.as_ref()).unwrap();
    let ai = build_index(&catalog, FunctionKind::Action, provider.as_ref()).unwrap();
    Engine::new(
        Arc::new(catalog),
        Arc::new(ti),
        Arc::new(ai),
        provider.clone(),
        provider,
        Arc::new(SynonymTable::from_json(EXTENDED_SYNONYMS).unwrap()),
        backend,
        config,
    )
    .unwrap()
}

pub fn scripted(json: &str) -> Option<Arc<dyn LlmBackend>> {
    Some(Arc::new(ScriptedBackend::from_json(json).expect("script parses")))
}

/// A script whose verifier returns the given scores in order (the last
/// repeats); every other agent has no entry and falls back to retrieval.
pub fn verifier_script(scores: &[f64]) -> String {
    let turns: Vec<serde_json::Value> = scores
        .iter()
        .map(|s| {
            serde_json::json!({
                "thinking": "scripted verdict",
                "decision": {
                    "binding_quality": s, "completeness": s, "executability": s,
                    "score": s, "critique": format!("scripted score {s}")
                }
            })
        })
        .collect();
    serde_json::json!({ "default": { "verifier": turns } }).to_string()
}

/// An override happens only when the agreement ratio reaches the threshold
/// and the model picked a different function; otherwise retrieval's choice
/// stands.
pub fn assert_override_sound(decisions: &[SelectionDecision]) {
    for d in decisions {
        if d.overrode {
            assert!(d.ratio.is_some_and(|r| r >= d.threshold), "override below threshold: {d:?}");
            assert_ne!(Some(&d.rag_choice), d.llm_choice.as_ref(), "{d:?}");
            assert_eq!(Some(&d.final_choice), d.llm_choice.as_ref(), "{d:?}");
        } else {
            assert_eq!(d.final_choice, d.rag_choice, "{d:?}");
        }
    }
}

/// A captured HTTP request.
#[derive(Debug, Clone)]
pub struct Request {
    pub head: String,
    pub body: String,
}

fn read_request(stream: &mut TcpStream) -> Option<Request> {
    let mut reader = BufReader::new(stream.try_clone().ok()?);
    let mut head = String::new();
    let mut content_length = 0usize;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).ok()? == 0 {
            return None;
        }
        if line == "\r\n" {
            break;
        }
        if let Some((name, value)) = line.split_once(':') {
            if name.eq_ignore_ascii_case("content-length") {
                content_length = value.trim().parse().ok()?;
            }
        }
        head.push_str(&line);
    }
    let mut body = vec![0u8; content_length];
    reader.read_exact(&mut body).ok()?;
    Some(Request {
        head,
        body: String::from_utf8(body).ok()?,
    })
}

/// Serves requests with `handler`, which returns a status code and a JSON
/// body. Each connection gets its own thread. Returns the base URL.
pub fn serve(handler: impl Fn(&Request) -> (u16, String) + Send + Sync + 'static) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let handler = Arc::new(handler);
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let handler = handler.clone();
            thread::spawn(move || {
                let Some(req) = read_request(&mut stream) else { return };
                let (status, body) = handler(&req);
                let _ = write!(
                    stream,
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                );
            });
        }
    });
    format!("http://{addr}/")
}

/// A URL on which nothing listens.
pub fn dead_url() -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    format!("http://{addr}/")
}
