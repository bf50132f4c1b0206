//! Append-only, totally ordered log of a writing session.
//!
//! Events are numbered from 1 with no gaps. Ordering is by `seq`; timestamps
//! are informational and never consulted by [`replay`]. Corrections are new
//! events (`ManualUnlabel`, `PromptRedacted`), never edits of old ones.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attribution::{AttributedDocument, AttributionError, AttributionLabel};
use crate::classifier::{ClassifiedBy, PromptCategory};
use crate::prompt::{self, PromptId, PromptRecord};

/// Characters that close a unit of writing for the timeline.
pub const SENTENCE_TERMINATORS: [char; 4] = ['.', '!', '?', '\n'];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    PromptIssued,
    ResponseReceived,
    AiPaste,
    HumanEdit,
    SentenceCompleted,
    ManualLabel,
    ManualUnlabel,
    Regenerated,
    PromptRedacted,
}

impl EventKind {
    /// Kinds that count as one applied mutation towards a session revision.
    /// A regeneration is counted through its `PromptIssued`.
    pub fn is_mutation(self) -> bool {
        matches!(
            self,
            EventKind::PromptIssued
                | EventKind::AiPaste
                | EventKind::HumanEdit
                | EventKind::ManualLabel
                | EventKind::ManualUnlabel
                | EventKind::PromptRedacted
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case", deny_unknown_fields)]
pub enum HumanEdit {
    Insert {
        pos: usize,
        text: String,
    },
    Delete {
        start: usize,
        end: usize,
    },
    Replace {
        start: usize,
        end: usize,
        text: String,
    },
}

impl HumanEdit {
    pub fn apply(&self, doc: &mut AttributedDocument) -> Result<(), AttributionError> {
        match self {
            HumanEdit::Insert { pos, text } => doc.insert_text(*pos, text),
            HumanEdit::Delete { start, end } => doc.delete_range(*start, *end),
            HumanEdit::Replace { start, end, text } => doc.replace_range(*start, *end, text),
        }
    }

    /// Text typed by this edit, if any.
    pub fn inserted(&self) -> Option<&str> {
        match self {
            HumanEdit::Insert { text, .. } | HumanEdit::Replace { text, .. } => Some(text),
            HumanEdit::Delete { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum EventBody {
    PromptIssued {
        prompt_id: PromptId,
        category: PromptCategory,
        classified_by: ClassifiedBy,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        regeneration_of: Option<PromptId>,
    },
    ResponseReceived {
        prompt_id: PromptId,
    },
    AiPaste {
        pos: usize,
        text: String,
        prompt_id: PromptId,
        verbatim: bool,
    },
    HumanEdit(HumanEdit),
    /// `at` is the offset of the terminator in the text after the edit.
    SentenceCompleted {
        at: usize,
    },
    ManualLabel {
        start: usize,
        end: usize,
        label: AttributionLabel,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        prompt_id: Option<PromptId>,
    },
    ManualUnlabel {
        start: usize,
        end: usize,
    },
    Regenerated {
        prompt_id: PromptId,
        regeneration_of: PromptId,
    },
    PromptRedacted {
        prompt_id: PromptId,
        /// Author's statement that the hidden prompt was used, if given.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        acknowledgment: Option<String>,
    },
}

impl EventBody {
    pub fn kind(&self) -> EventKind {
        match self {
            EventBody::PromptIssued { .. } => EventKind::PromptIssued,
            EventBody::ResponseReceived { .. } => EventKind::ResponseReceived,
            EventBody::AiPaste { .. } => EventKind::AiPaste,
            EventBody::HumanEdit(_) => EventKind::HumanEdit,
            EventBody::SentenceCompleted { .. } => EventKind::SentenceCompleted,
            EventBody::ManualLabel { .. } => EventKind::ManualLabel,
            EventBody::ManualUnlabel { .. } => EventKind::ManualUnlabel,
            EventBody::Regenerated { .. } => EventKind::Regenerated,
            EventBody::PromptRedacted { .. } => EventKind::PromptRedacted,
        }
    }

    /// Prompt ids this event requires to have been issued earlier.
    fn references(&self) -> Vec<&PromptId> {
        match self {
            EventBody::PromptIssued {
                regeneration_of, ..
            } => regeneration_of.iter().collect(),
            EventBody::ResponseReceived { prompt_id }
            | EventBody::AiPaste { prompt_id, .. }
            | EventBody::PromptRedacted { prompt_id, .. } => vec![prompt_id],
            EventBody::ManualLabel { prompt_id, .. } => prompt_id.iter().collect(),
            EventBody::Regenerated {
                prompt_id,
                regeneration_of,
            } => vec![prompt_id, regeneration_of],
            EventBody::HumanEdit(_)
            | EventBody::SentenceCompleted { .. }
            | EventBody::ManualUnlabel { .. } => Vec::new(),
        }
    }

    fn validate(&self) -> Result<(), LogError> {
        let invalid = |m: &str| Err(LogError::InvalidPayload(m.to_owned()));
        let range = |start: &usize, end: &usize| start < end;
        match self {
            EventBody::HumanEdit(HumanEdit::Insert { text, .. })
            | EventBody::AiPaste { text, .. }
                if text.is_empty() =>
            {
                invalid("text must not be empty")
            }
            EventBody::HumanEdit(HumanEdit::Replace { start, end, text })
                if text.is_empty() || !range(start, end) =>
            {
                invalid("replace needs a non-empty range and text")
            }
            EventBody::HumanEdit(HumanEdit::Delete { start, end })
            | EventBody::ManualUnlabel { start, end }
                if !range(start, end) =>
            {
                invalid("range must be non-empty")
            }
            EventBody::ManualLabel {
                start, end, label, ..
            } => {
                if !range(start, end) {
                    invalid("range must be non-empty")
                } else if *label == AttributionLabel::Human {
                    invalid("manual label cannot be human")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceEvent {
    pub seq: u64,
    pub timestamp: u64,
    #[serde(flatten)]
    pub body: EventBody,
}

impl ProvenanceEvent {
    pub fn kind(&self) -> EventKind {
        self.body.kind()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogError {
    #[error("invalid payload: {0}")]
    InvalidPayload(String),
    #[error("event references prompt {0} before it was issued")]
    DanglingPromptRef(PromptId),
    #[error("unknown prompt {0}")]
    UnknownPrompt(PromptId),
    #[error("prompt {0} is already redacted")]
    AlreadyRedacted(PromptId),
    #[error("expected seq {expected}, found {found}")]
    SeqGap { expected: u64, found: u64 },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventLog {
    events: Vec<ProvenanceEvent>,
    issued: HashSet<PromptId>,
    redacted: HashSet<PromptId>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuilds a log from stored events, re-validating every invariant.
    pub fn from_events(events: Vec<ProvenanceEvent>) -> Result<Self, LogError> {
        let mut log = EventLog::new();
        for event in events {
            let expected = log.next_seq();
            if event.seq != expected {
                return Err(LogError::SeqGap {
                    expected,
                    found: event.seq,
                });
            }
            log.append(event.body, event.timestamp)?;
        }
        Ok(log)
    }

    pub fn events(&self) -> &[ProvenanceEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn next_seq(&self) -> u64 {
        self.events.len() as u64 + 1
    }

    pub fn is_issued(&self, id: &PromptId) -> bool {
        self.issued.contains(id)
    }

    pub fn is_redacted(&self, id: &PromptId) -> bool {
        self.redacted.contains(id)
    }

    /// Number of mutation events, which is the session revision.
    pub fn mutation_count(&self) -> u64 {
        self.events
            .iter()
            .filter(|e| e.kind().is_mutation())
            .count() as u64
    }

    /// Appends an event and returns its seq.
    pub fn append(&mut self, body: EventBody, timestamp: u64) -> Result<u64, LogError> {
        body.validate()?;
        for id in body.references() {
            if !self.issued.contains(id) {
                return Err(LogError::DanglingPromptRef(id.clone()));
            }
        }
        match &body {
            EventBody::PromptIssued { prompt_id, .. } if self.issued.contains(prompt_id) => {
                return Err(LogError::InvalidPayload(format!(
                    "prompt {prompt_id} issued twice"
                )));
            }
            EventBody::PromptIssued { prompt_id, .. } => {
                self.issued.insert(prompt_id.clone());
            }
            EventBody::PromptRedacted { prompt_id, .. }
                if !self.redacted.insert(prompt_id.clone()) =>
            {
                return Err(LogError::AlreadyRedacted(prompt_id.clone()));
            }
            _ => {}
        }
        let seq = self.next_seq();
        self.events.push(ProvenanceEvent {
            seq,
            timestamp,
            body,
        });
        Ok(seq)
    }

    pub fn redact_prompt(
        &mut self,
        prompt_id: &PromptId,
        acknowledgment: Option<String>,
        timestamp: u64,
    ) -> Result<u64, LogError> {
        if !self.issued.contains(prompt_id) {
            return Err(LogError::UnknownPrompt(prompt_id.clone()));
        }
        if self.redacted.contains(prompt_id) {
            return Err(LogError::AlreadyRedacted(prompt_id.clone()));
        }
        self.append(
            EventBody::PromptRedacted {
                prompt_id: prompt_id.clone(),
                acknowledgment,
            },
            timestamp,
        )
    }

    /// Whether the author acknowledged a redacted prompt's use.
    pub fn redaction_acknowledged(&self, prompt_id: &PromptId) -> bool {
        self.events.iter().any(|e| {
            matches!(&e.body, EventBody::PromptRedacted { prompt_id: p, acknowledgment: Some(_) } if p == prompt_id)
        })
    }
}

/// Terminators in `text`, each of which completes one unit of writing.
pub fn count_terminators(text: &str) -> usize {
    text.chars()
        .filter(|c| SENTENCE_TERMINATORS.contains(c))
        .count()
}

/// Number of `SentenceCompleted` events owed for one human insert that turned
/// `old_text` into `new_text` at `insert_pos`.
pub fn detect_sentence_completions(old_text: &str, new_text: &str, insert_pos: usize) -> usize {
    let inserted = new_text
        .chars()
        .count()
        .saturating_sub(old_text.chars().count());
    new_text
        .chars()
        .skip(insert_pos)
        .take(inserted)
        .filter(|c| SENTENCE_TERMINATORS.contains(c))
        .count()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("replay diverged at seq {seq}: {reason}")]
pub struct ReplayDivergence {
    pub seq: u64,
    pub reason: String,
}

/// Re-executes the document mutations in `events` from an empty document.
/// Any prefix of a valid log replays to the state after that prefix.
pub fn replay(
    events: &[ProvenanceEvent],
    prompts: &[PromptRecord],
) -> Result<AttributedDocument, ReplayDivergence> {
    let mut doc = AttributedDocument::new();
    for event in events {
        let diverged = |reason: String| ReplayDivergence {
            seq: event.seq,
            reason,
        };
        let lookup = |id: &PromptId| {
            prompt::find(prompts, id).ok_or_else(|| diverged(format!("unknown prompt {id}")))
        };
        let result = match &event.body {
            EventBody::HumanEdit(edit) => edit.apply(&mut doc),
            EventBody::AiPaste {
                pos,
                text,
                prompt_id,
                verbatim,
            } => {
                let record = lookup(prompt_id)?;
                // A redacted response can no longer be checked; trust the log.
                if !record.redacted && record.response_text.contains(text.as_str()) != *verbatim {
                    return Err(diverged(format!(
                        "verbatim flag disagrees with the response of {prompt_id}"
                    )));
                }
                doc.paste_with_verbatim(*pos, text, prompt_id.clone(), *verbatim)
            }
            EventBody::ManualLabel {
                start,
                end,
                label,
                prompt_id,
            } => {
                if let Some(id) = prompt_id {
                    lookup(id)?;
                }
                doc.manual_label_id(*start, *end, *label, prompt_id.clone())
            }
            EventBody::ManualUnlabel { start, end } => doc.manual_unlabel(*start, *end),
            EventBody::PromptIssued { .. }
            | EventBody::ResponseReceived { .. }
            | EventBody::SentenceCompleted { .. }
            | EventBody::Regenerated { .. }
            | EventBody::PromptRedacted { .. } => Ok(()),
        };
        result.map_err(|e| diverged(e.to_string()))?;
    }
    Ok(doc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlyphCategory {
    Writing,
    PromptEdit,
    PromptGenerate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimelineGlyph {
    pub seq: u64,
    pub category: GlyphCategory,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_id: Option<PromptId>,
}

/// One glyph per completed sentence and per issued prompt, in seq order.
pub fn timeline_view(log: &EventLog) -> Vec<TimelineGlyph> {
    log.events()
        .iter()
        .filter_map(|e| match &e.body {
            EventBody::SentenceCompleted { .. } => Some(TimelineGlyph {
                seq: e.seq,
                category: GlyphCategory::Writing,
                prompt_id: None,
            }),
            EventBody::PromptIssued {
                prompt_id,
                category,
                ..
            } => Some(TimelineGlyph {
                seq: e.seq,
                category: match category {
                    PromptCategory::Edit => GlyphCategory::PromptEdit,
                    PromptCategory::Generate => GlyphCategory::PromptGenerate,
                },
                prompt_id: Some(prompt_id.clone()),
            }),
            _ => None,
        })
        .collect()
}
