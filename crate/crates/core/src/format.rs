//! Session file, schema version 1.
//!
//! ```text
//! { "version": 1,
//!   "text": "...",
//!   "spans":   [ { "start", "end", "label", "prompt_id"?, "verbatim" } ],
//!   "prompts": [ { "id", "issued_at", "prompt", "context"?, "response",
//!                  "category", "model", "regeneration_of"?, "redacted" } ],
//!   "events":  [ { "seq", "timestamp", "kind", "payload" } ] }
//! ```
//!
//! Export is canonical: fixed key order, two-space indentation, trailing
//! newline, offsets in Unicode scalar values. The same bytes are the storage
//! format of the session service.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attribution::{AttributedDocument, Span};
use crate::log::{EventLog, ProvenanceEvent};
use crate::prompt::PromptRecord;
use crate::session::{new_session_id, IntegrityError, SessionState};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionFile {
    pub version: u64,
    pub text: String,
    pub spans: Vec<Span>,
    pub prompts: Vec<PromptRecord>,
    pub events: Vec<ProvenanceEvent>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImportError {
    #[error("could not parse session file: {0}")]
    Parse(String),
    #[error("unsupported session file version {0}")]
    SchemaVersionUnsupported(u64),
    #[error(transparent)]
    Integrity(#[from] IntegrityError),
}

impl SessionFile {
    pub fn from_state(state: &SessionState) -> Self {
        SessionFile {
            version: SCHEMA_VERSION,
            text: state.document().text().to_owned(),
            spans: state.document().spans().to_vec(),
            prompts: state.prompts().to_vec(),
            events: state.log().events().to_vec(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("session file serializes");
        out.push(b'\n');
        out
    }

    pub fn parse(bytes: &[u8]) -> Result<Self, ImportError> {
        let value: serde_json::Value =
            serde_json::from_slice(bytes).map_err(|e| ImportError::Parse(e.to_string()))?;
        match value.get("version").and_then(|v| v.as_u64()) {
            Some(SCHEMA_VERSION) => {}
            Some(other) => return Err(ImportError::SchemaVersionUnsupported(other)),
            None => return Err(ImportError::Parse("missing or non-integer version".into())),
        }
        serde_json::from_value(value).map_err(|e| ImportError::Parse(e.to_string()))
    }

    pub fn into_state(self, session_id: impl Into<String>) -> Result<SessionState, ImportError> {
        let document = AttributedDocument::from_parts(self.text, self.spans)
            .map_err(|e| IntegrityError(format!("spans: {e}")))?;
        let log = EventLog::from_events(self.events)
            .map_err(|e| IntegrityError(format!("events: {e}")))?;
        Ok(SessionState::from_parts(
            session_id,
            document,
            self.prompts,
            log,
        )?)
    }
}

pub fn export_session(state: &SessionState) -> Vec<u8> {
    SessionFile::from_state(state).to_bytes()
}

/// Parses and validates a session file under a fresh session id.
pub fn import_session(bytes: &[u8]) -> Result<SessionState, ImportError> {
    import_session_as(bytes, new_session_id())
}

pub fn import_session_as(
    bytes: &[u8],
    session_id: impl Into<String>,
) -> Result<SessionState, ImportError> {
    SessionFile::parse(bytes)?.into_state(session_id)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_session_export() {
        let bytes = export_session(&SessionState::new("x"));
        assert_eq!(
            String::from_utf8(bytes).unwrap(),
            "{\n  \"version\": 1,\n  \"text\": \"\",\n  \"spans\": [],\n  \"prompts\": [],\n  \"events\": []\n}\n"
        );
    }

    #[test]
    fn version_and_parse_errors() {
        assert_eq!(
            import_session(br#"{"version":2,"text":"","spans":[],"prompts":[],"events":[]}"#),
            Err(ImportError::SchemaVersionUnsupported(2))
        );
        assert!(matches!(
            import_session(b"{not json"),
            Err(ImportError::Parse(_))
        ));
        assert!(matches!(
            import_session(
                br#"{"version":1,"text":"","spans":[],"prompts":[],"events":[],"extra":0}"#
            ),
            Err(ImportError::Parse(_))
        ));
    }

    #[test]
    fn overlapping_spans_fail_integrity() {
        let file = br#"{"version":1,"text":"abcd","spans":[
            {"start":0,"end":3,"label":"human","verbatim":false},
            {"start":2,"end":4,"label":"ai_written","verbatim":false}],
            "prompts":[],"events":[]}"#;
        assert!(matches!(
            import_session(file),
            Err(ImportError::Integrity(_))
        ));
    }
}
