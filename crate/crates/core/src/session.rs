//! A writing session: the attributed document, its prompts and its event log,
//! advanced one revision-checked operation at a time.
//!
//! Invariant: `document == replay(log, prompts)` and
//! `revision == log.mutation_count()` after every successful operation. A
//! failed operation leaves the session unchanged and logs nothing.

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::{self, SummaryStats};
use crate::attribution::{AttributedDocument, AttributionError, AttributionLabel};
use crate::classifier::{self, ClassifiedBy, ClassifierError};
use crate::gateway::{CompletionRequest, Gateway, GatewayError};
use crate::log::{self, EventBody, EventLog, HumanEdit, LogError, SENTENCE_TERMINATORS};
use crate::prompt::{self, PromptId, PromptRecord};

/// A client request against a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Op {
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
    Paste {
        pos: usize,
        text: String,
        prompt_id: PromptId,
    },
    Label {
        start: usize,
        end: usize,
        label: AttributionLabel,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        prompt_id: Option<PromptId>,
    },
    Unlabel {
        start: usize,
        end: usize,
    },
    IssuePrompt {
        prompt_text: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        context_text: Option<String>,
    },
    Regenerate {
        prompt_id: PromptId,
    },
    Redact {
        prompt_id: PromptId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        acknowledgment: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error("expected revision {expected}, session is at {actual}")]
    RevisionConflict { expected: u64, actual: u64 },
    #[error(transparent)]
    Attribution(#[from] AttributionError),
    #[error("unknown prompt {0}")]
    UnknownPrompt(PromptId),
    #[error("prompt {0} is redacted")]
    AlreadyRedacted(PromptId),
    #[error("prompt text is empty")]
    EmptyPrompt,
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Log(LogError),
}

impl From<LogError> for SessionError {
    fn from(e: LogError) -> Self {
        match e {
            LogError::UnknownPrompt(id) | LogError::DanglingPromptRef(id) => {
                SessionError::UnknownPrompt(id)
            }
            LogError::AlreadyRedacted(id) => SessionError::AlreadyRedacted(id),
            other => SessionError::Log(other),
        }
    }
}

impl From<ClassifierError> for SessionError {
    fn from(_: ClassifierError) -> Self {
        SessionError::EmptyPrompt
    }
}

/// Why stored session parts don't form a consistent session.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("integrity check failed: {0}")]
pub struct IntegrityError(pub String);

#[derive(Debug, Clone, PartialEq)]
pub struct Applied {
    pub revision: u64,
    /// The record created by `IssuePrompt` or `Regenerate`.
    pub prompt: Option<PromptRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionState {
    session_id: String,
    document: AttributedDocument,
    prompts: Vec<PromptRecord>,
    log: EventLog,
    revision: u64,
}

/// 128 random bits, hex encoded.
pub fn new_session_id() -> String {
    let mut bytes = [0u8; 16];
    rand::rngs::OsRng.fill_bytes(&mut bytes);
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl SessionState {
    pub fn new(session_id: impl Into<String>) -> Self {
        SessionState {
            session_id: session_id.into(),
            document: AttributedDocument::new(),
            prompts: Vec::new(),
            log: EventLog::new(),
            revision: 0,
        }
    }

    /// Reassembles a session from stored parts and checks every invariant,
    /// including that the log replays to the stored document.
    pub fn from_parts(
        session_id: impl Into<String>,
        document: AttributedDocument,
        prompts: Vec<PromptRecord>,
        log: EventLog,
    ) -> Result<Self, IntegrityError> {
        let fail = |m: String| Err(IntegrityError(m));
        let issued: Vec<_> = log
            .events()
            .iter()
            .filter_map(|e| match &e.body {
                EventBody::PromptIssued {
                    prompt_id,
                    category,
                    regeneration_of,
                    ..
                } => Some((prompt_id, category, regeneration_of)),
                _ => None,
            })
            .collect();
        if issued.len() != prompts.len() {
            return fail(format!(
                "{} prompts stored but {} issued in the log",
                prompts.len(),
                issued.len()
            ));
        }
        for ((id, category, regeneration_of), record) in issued.iter().zip(&prompts) {
            if *id != &record.id
                || **category != record.category
                || *regeneration_of != &record.regeneration_of
            {
                return fail(format!(
                    "prompt {} disagrees with its PromptIssued event",
                    record.id
                ));
            }
            if record.redacted != log.is_redacted(&record.id) {
                return fail(format!(
                    "redaction state of {} disagrees with the log",
                    record.id
                ));
            }
            if record.redacted
                && (record.prompt_text != prompt::REDACTION_MARKER
                    || record.response_text != prompt::REDACTION_MARKER)
            {
                return fail(format!(
                    "redacted prompt {} still carries content",
                    record.id
                ));
            }
            if record.prompt_text.is_empty() {
                return fail(format!("prompt {} has empty text", record.id));
            }
        }
        for e in log.events() {
            if let EventBody::Regenerated {
                prompt_id,
                regeneration_of,
            } = &e.body
            {
                let ok = prompt::find(&prompts, prompt_id)
                    .is_some_and(|p| p.regeneration_of.as_ref() == Some(regeneration_of));
                if !ok {
                    return fail(format!(
                        "regeneration record for {prompt_id} is inconsistent"
                    ));
                }
            }
        }
        let replayed =
            log::replay(log.events(), &prompts).map_err(|e| IntegrityError(e.to_string()))?;
        if replayed != document {
            return fail("event log does not replay to the stored document".into());
        }
        let revision = log.mutation_count();
        Ok(SessionState {
            session_id: session_id.into(),
            document,
            prompts,
            log,
            revision,
        })
    }

    pub fn session_id(&self) -> &str {
        &self.session_id
    }

    pub fn document(&self) -> &AttributedDocument {
        &self.document
    }

    pub fn prompts(&self) -> &[PromptRecord] {
        &self.prompts
    }

    pub fn prompt(&self, id: &PromptId) -> Option<&PromptRecord> {
        prompt::find(&self.prompts, id)
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn stats(&self) -> SummaryStats {
        analytics::summarize(&self.document, &self.prompts)
    }

    pub fn timeline(&self) -> Vec<log::TimelineGlyph> {
        log::timeline_view(&self.log)
    }

    /// Applies `op` if the caller has seen the current revision.
    pub fn apply_op(
        &mut self,
        expected_revision: u64,
        op: Op,
        gateway: &Gateway,
        now: u64,
    ) -> Result<Applied, SessionError> {
        if expected_revision != self.revision {
            return Err(SessionError::RevisionConflict {
                expected: expected_revision,
                actual: self.revision,
            });
        }
        let prompt = match op {
            Op::Insert { pos, text } => self.human_edit(HumanEdit::Insert { pos, text }, now)?,
            Op::Delete { start, end } => self.human_edit(HumanEdit::Delete { start, end }, now)?,
            Op::Replace { start, end, text } => {
                self.human_edit(HumanEdit::Replace { start, end, text }, now)?
            }
            Op::Paste {
                pos,
                text,
                prompt_id,
            } => self.paste(pos, text, prompt_id, now)?,
            Op::Label {
                start,
                end,
                label,
                prompt_id,
            } => self.label(start, end, label, prompt_id, now)?,
            Op::Unlabel { start, end } => {
                let mut doc = self.document.clone();
                doc.manual_unlabel(start, end)?;
                self.log
                    .append(EventBody::ManualUnlabel { start, end }, now)?;
                self.document = doc;
                None
            }
            Op::IssuePrompt {
                prompt_text,
                context_text,
            } => Some(self.issue_prompt(prompt_text, context_text, gateway, now)?),
            Op::Regenerate { prompt_id } => Some(self.regenerate(&prompt_id, gateway, now)?),
            Op::Redact {
                prompt_id,
                acknowledgment,
            } => {
                self.redact(&prompt_id, acknowledgment, now)?;
                None
            }
        };
        self.revision += 1;
        debug_assert_eq!(self.revision, self.log.mutation_count());
        Ok(Applied {
            revision: self.revision,
            prompt,
        })
    }

    fn human_edit(
        &mut self,
        edit: HumanEdit,
        now: u64,
    ) -> Result<Option<PromptRecord>, SessionError> {
        let mut doc = self.document.clone();
        edit.apply(&mut doc)?;
        let at = match &edit {
            HumanEdit::Insert { pos, .. } | HumanEdit::Replace { start: pos, .. } => *pos,
            HumanEdit::Delete { .. } => 0,
        };
        let terminators: Vec<usize> = edit
            .inserted()
            .unwrap_or("")
            .chars()
            .enumerate()
            .filter(|(_, c)| SENTENCE_TERMINATORS.contains(c))
            .map(|(i, _)| at + i)
            .collect();
        self.log.append(EventBody::HumanEdit(edit), now)?;
        for at in terminators {
            self.log.append(EventBody::SentenceCompleted { at }, now)?;
        }
        self.document = doc;
        Ok(None)
    }

    fn paste(
        &mut self,
        pos: usize,
        text: String,
        prompt_id: PromptId,
        now: u64,
    ) -> Result<Option<PromptRecord>, SessionError> {
        let record = self
            .prompt(&prompt_id)
            .ok_or_else(|| SessionError::UnknownPrompt(prompt_id.clone()))?;
        let verbatim = !record.redacted && record.response_text.contains(text.as_str());
        let mut doc = self.document.clone();
        doc.paste_with_verbatim(pos, &text, prompt_id.clone(), verbatim)?;
        self.log.append(
            EventBody::AiPaste {
                pos,
                text,
                prompt_id,
                verbatim,
            },
            now,
        )?;
        self.document = doc;
        Ok(None)
    }

    fn label(
        &mut self,
        start: usize,
        end: usize,
        label: AttributionLabel,
        prompt_id: Option<PromptId>,
        now: u64,
    ) -> Result<Option<PromptRecord>, SessionError> {
        if let Some(id) = &prompt_id {
            if self.prompt(id).is_none() {
                return Err(SessionError::UnknownPrompt(id.clone()));
            }
        }
        let mut doc = self.document.clone();
        doc.manual_label_id(start, end, label, prompt_id.clone())?;
        self.log.append(
            EventBody::ManualLabel {
                start,
                end,
                label,
                prompt_id,
            },
            now,
        )?;
        self.document = doc;
        Ok(None)
    }

    fn issue_prompt(
        &mut self,
        prompt_text: String,
        context_text: Option<String>,
        gateway: &Gateway,
        now: u64,
    ) -> Result<PromptRecord, SessionError> {
        if prompt_text.trim().is_empty() {
            return Err(SessionError::EmptyPrompt);
        }
        let request = CompletionRequest::new(
            prompt_text.clone(),
            context_text.clone(),
            gateway.default_params(),
        )?;
        let response = gateway.complete(&request)?;
        let (category, classified_by) = classifier::classify(&prompt_text, gateway)?;
        let record = PromptRecord::new(
            PromptId::nth(self.prompts.len() + 1),
            now,
            prompt_text,
            context_text,
            response,
            category,
            request.params().model_id.clone(),
            None,
        );
        self.record_prompt(record.clone(), classified_by, now)?;
        Ok(record)
    }

    /// Re-issues a prompt. The new record inherits the original's category.
    pub fn regenerate(
        &mut self,
        prompt_id: &PromptId,
        gateway: &Gateway,
        now: u64,
    ) -> Result<PromptRecord, SessionError> {
        let original = self
            .prompt(prompt_id)
            .ok_or_else(|| SessionError::UnknownPrompt(prompt_id.clone()))?
            .clone();
        if original.redacted {
            return Err(SessionError::AlreadyRedacted(prompt_id.clone()));
        }
        let request = CompletionRequest::new(
            original.prompt_text.clone(),
            original.context_text.clone(),
            gateway.default_params(),
        )?;
        let response = gateway.complete(&request)?;
        let classified_by = self
            .classified_by(prompt_id)
            .unwrap_or(ClassifiedBy::Heuristic);
        let record = PromptRecord::new(
            PromptId::nth(self.prompts.len() + 1),
            now,
            original.prompt_text,
            original.context_text,
            response,
            original.category,
            request.params().model_id.clone(),
            Some(prompt_id.clone()),
        );
        self.record_prompt(record.clone(), classified_by, now)?;
        self.log.append(
            EventBody::Regenerated {
                prompt_id: record.id.clone(),
                regeneration_of: prompt_id.clone(),
            },
            now,
        )?;
        Ok(record)
    }

    fn record_prompt(
        &mut self,
        record: PromptRecord,
        classified_by: ClassifiedBy,
        now: u64,
    ) -> Result<(), SessionError> {
        self.log.append(
            EventBody::PromptIssued {
                prompt_id: record.id.clone(),
                category: record.category,
                classified_by,
                regeneration_of: record.regeneration_of.clone(),
            },
            now,
        )?;
        self.log.append(
            EventBody::ResponseReceived {
                prompt_id: record.id.clone(),
            },
            now,
        )?;
        self.prompts.push(record);
        Ok(())
    }

    fn redact(
        &mut self,
        prompt_id: &PromptId,
        acknowledgment: Option<String>,
        now: u64,
    ) -> Result<(), SessionError> {
        let idx = self
            .prompts
            .iter()
            .position(|p| &p.id == prompt_id)
            .ok_or_else(|| SessionError::UnknownPrompt(prompt_id.clone()))?;
        self.log.redact_prompt(prompt_id, acknowledgment, now)?;
        self.prompts[idx].redact();
        Ok(())
    }

    fn classified_by(&self, prompt_id: &PromptId) -> Option<ClassifiedBy> {
        self.log.events().iter().find_map(|e| match &e.body {
            EventBody::PromptIssued {
                prompt_id: p,
                classified_by,
                ..
            } if p == prompt_id => Some(*classified_by),
            _ => None,
        })
    }
}
