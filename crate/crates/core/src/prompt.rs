//! Prompt cards: one prompt/context/response exchange with its category.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::classifier::PromptCategory;

/// Text shown in place of a prompt's content once the author redacts it.
pub const REDACTION_MARKER: &str = "[redacted by author]";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PromptId(pub String);

impl PromptId {
    /// Session-local ids are `p1`, `p2`, ... in issuance order.
    pub fn nth(n: usize) -> Self {
        PromptId(format!("p{n}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for PromptId {
    fn from(s: &str) -> Self {
        PromptId(s.to_owned())
    }
}

impl fmt::Display for PromptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptRecord {
    pub id: PromptId,
    pub issued_at: u64,
    #[serde(rename = "prompt")]
    pub prompt_text: String,
    #[serde(rename = "context", default, skip_serializing_if = "Option::is_none")]
    pub context_text: Option<String>,
    #[serde(rename = "response")]
    pub response_text: String,
    pub category: PromptCategory,
    #[serde(rename = "model")]
    pub model_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regeneration_of: Option<PromptId>,
    pub redacted: bool,
}

impl PromptRecord {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: PromptId,
        issued_at: u64,
        prompt_text: String,
        context_text: Option<String>,
        response_text: String,
        category: PromptCategory,
        model_id: String,
        regeneration_of: Option<PromptId>,
    ) -> Self {
        PromptRecord {
            id,
            issued_at,
            prompt_text,
            context_text,
            response_text,
            category,
            model_id,
            regeneration_of,
            redacted: false,
        }
    }

    /// Replaces the prompt's content with the redaction marker. Category,
    /// model and lineage stay.
    pub(crate) fn redact(&mut self) {
        self.prompt_text = REDACTION_MARKER.to_owned();
        self.response_text = REDACTION_MARKER.to_owned();
        if self.context_text.is_some() {
            self.context_text = Some(REDACTION_MARKER.to_owned());
        }
        self.redacted = true;
    }
}

/// Lookup over a session's prompt list.
pub fn find<'a>(prompts: &'a [PromptRecord], id: &PromptId) -> Option<&'a PromptRecord> {
    prompts.iter().find(|p| &p.id == id)
}

/// Walks `regeneration_of` back to the root. Returns `None` when the chain
/// references an unknown prompt or loops.
pub fn regeneration_chain<'a>(
    prompts: &'a [PromptRecord],
    id: &PromptId,
) -> Option<Vec<&'a PromptRecord>> {
    let mut chain = Vec::new();
    let mut cursor = Some(id.clone());
    while let Some(current) = cursor {
        let record = find(prompts, &current)?;
        if chain.iter().any(|r: &&PromptRecord| r.id == record.id) {
            return None;
        }
        chain.push(record);
        cursor = record.regeneration_of.clone();
    }
    Some(chain)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str, parent: Option<&str>) -> PromptRecord {
        PromptRecord::new(
            id.into(),
            0,
            "p".into(),
            None,
            "r".into(),
            PromptCategory::Edit,
            "m".into(),
            parent.map(PromptId::from),
        )
    }

    #[test]
    fn chains_walk_to_root() {
        let prompts = vec![
            record("p1", None),
            record("p2", Some("p1")),
            record("p3", Some("p2")),
        ];
        let chain = regeneration_chain(&prompts, &"p3".into()).unwrap();
        let ids: Vec<_> = chain.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["p3", "p2", "p1"]);
    }

    #[test]
    fn cyclic_chain_is_rejected() {
        let prompts = vec![record("p1", Some("p2")), record("p2", Some("p1"))];
        assert!(regeneration_chain(&prompts, &"p1".into()).is_none());
    }

    #[test]
    fn redaction_keeps_category() {
        let mut r = record("p1", None);
        r.context_text = Some("ctx".into());
        r.redact();
        assert!(r.redacted);
        assert_eq!(r.prompt_text, REDACTION_MARKER);
        assert_eq!(r.context_text.as_deref(), Some(REDACTION_MARKER));
        assert_eq!(r.category, PromptCategory::Edit);
    }
}
