//! Splitting a model reply into its reasoning trace and decision block.

use serde::de::DeserializeOwned;

#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub thinking: String,
    pub decision: T,
}

/// Extracts the decision object from a reply: the last ```json fenced
/// block if there is one, otherwise the outermost `{...}` span. Text before
/// the block is returned as the reasoning trace.
pub fn parse_reply<T: DeserializeOwned>(reply: &str) -> Result<Parsed<T>, String> {
    let (before, block) = split_block(reply).ok_or("reply has no decision block")?;
    let decision = serde_json::from_str(block).map_err(|e| format!("decision block: {e}"))?;
    Ok(Parsed {
        thinking: before.trim().to_string(),
        decision,
    })
}

fn split_block(reply: &str) -> Option<(&str, &str)> {
    if let Some(start) = reply.rfind("```json") {
        let body_start = start + "```json".len();
        let body_len = reply[body_start..].find("```")?;
        return Some((&reply[..start], reply[body_start..body_start + body_len].trim()));
    }
    let open = reply.find('{')?;
    let close = reply.rfind('}')?;
    (close > open).then(|| (&reply[..open], &reply[open..=close]))
}
