//! Provenance tracking for human–AI co-writing.
//!
//! The crate keeps a character-level record of who wrote what ([`attribution`]),
//! an append-only replayable history of the session ([`log`]), prompt handling
//! ([`gateway`], [`classifier`]), statistics ([`analytics`]), policy checks and
//! disclosure reports ([`conformance`]), and a file-backed HTTP session service
//! ([`session`], [`store`], [`service`]).

pub mod analytics;
pub mod attribution;
pub mod classifier;
pub mod conformance;
pub mod format;
pub mod gateway;
pub mod log;
pub mod prompt;
pub mod service;
pub mod session;
pub mod store;

pub use analytics::{summarize, SummaryStats};
pub use attribution::{AttributedDocument, AttributionError, AttributionLabel, Span};
pub use classifier::{ClassifiedBy, PromptCategory};
pub use conformance::{check, render_disclosure, ConformanceReport, PolicyProfile, ReportFormat};
pub use format::{export_session, import_session, ImportError};
pub use gateway::{CompletionRequest, Gateway, GatewayError, GenerationParams};
pub use log::{EventBody, EventKind, EventLog, ProvenanceEvent};
pub use prompt::{PromptId, PromptRecord};
pub use session::{Op, SessionError, SessionState};
