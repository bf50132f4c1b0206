//! Edit-vs-Generate prompt categorization.
//!
//! The primary route asks the language model with a fixed soft prompt. When
//! the gateway fails or the reply can't be parsed, a keyword heuristic decides
//! instead, so [`classify`] is total.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gateway::{CompletionRequest, Gateway};

/// The classification soft prompt. The prompt text is appended to it.
pub const SOFT_PROMPT: &str = "For the input text, reply 'Edit' or 'Generate' if the text intends to edit existing text or generate new text. Consider paraphrasing an existing text, or grammatical and spelling check as an Edit. Input sentence - ";

/// Words that mark a prompt as asking for editorial help.
pub const EDIT_KEYWORDS: [&str; 13] = [
    "fix",
    "correct",
    "rephrase",
    "paraphrase",
    "rewrite",
    "shorten",
    "proofread",
    "grammar",
    "spelling",
    "edit",
    "revise",
    "condense",
    "polish",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptCategory {
    Edit,
    Generate,
}

impl PromptCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            PromptCategory::Edit => "edit",
            PromptCategory::Generate => "generate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifiedBy {
    Llm,
    Heuristic,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifierError {
    #[error("prompt text is empty")]
    EmptyPrompt,
    #[error("could not read a category from reply {0:?}")]
    Unparseable(String),
}

pub fn classification_query(prompt_text: &str) -> Result<String, ClassifierError> {
    if prompt_text.trim().is_empty() {
        return Err(ClassifierError::EmptyPrompt);
    }
    Ok(format!("{SOFT_PROMPT}{prompt_text}"))
}

pub fn parse_category(reply: &str) -> Result<PromptCategory, ClassifierError> {
    let lower = reply.to_lowercase();
    match (lower.contains("edit"), lower.contains("generate")) {
        (true, false) => Ok(PromptCategory::Edit),
        (false, true) => Ok(PromptCategory::Generate),
        _ => Err(ClassifierError::Unparseable(reply.to_owned())),
    }
}

pub fn heuristic_category(prompt_text: &str) -> Result<PromptCategory, ClassifierError> {
    if prompt_text.trim().is_empty() {
        return Err(ClassifierError::EmptyPrompt);
    }
    let is_edit = prompt_text
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .any(|w| EDIT_KEYWORDS.contains(&w.to_lowercase().as_str()));
    Ok(if is_edit {
        PromptCategory::Edit
    } else {
        PromptCategory::Generate
    })
}

/// Classifies through the gateway, falling back to the heuristic on any
/// transport failure or unreadable reply.
pub fn classify(
    prompt_text: &str,
    gateway: &Gateway,
) -> Result<(PromptCategory, ClassifiedBy), ClassifierError> {
    let query = classification_query(prompt_text)?;
    let request = CompletionRequest::new(query, None, gateway.default_params());
    let llm = request
        .ok()
        .and_then(|req| gateway.complete(&req).ok())
        .and_then(|reply| parse_category(&reply).ok());
    match llm {
        Some(category) => Ok((category, ClassifiedBy::Llm)),
        None => {
            tracing::debug!("classification fell back to keyword heuristic");
            Ok((heuristic_category(prompt_text)?, ClassifiedBy::Heuristic))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{GatewayError, ProviderPayload, ScriptedTransport, Transport};

    #[test]
    fn query_appends_prompt() {
        let q = classification_query("Summarize this").unwrap();
        assert_eq!(
            q,
            "For the input text, reply 'Edit' or 'Generate' if the text intends to edit existing text or generate new text. Consider paraphrasing an existing text, or grammatical and spelling check as an Edit. Input sentence - Summarize this"
        );
        assert!(q.contains("reply 'Edit' or 'Generate'"));
        assert_eq!(classification_query(""), Err(ClassifierError::EmptyPrompt));
    }

    #[test]
    fn parse_replies() {
        assert_eq!(parse_category("Edit"), Ok(PromptCategory::Edit));
        assert_eq!(parse_category("  GENERATE."), Ok(PromptCategory::Generate));
        assert!(matches!(
            parse_category("banana"),
            Err(ClassifierError::Unparseable(_))
        ));
        assert!(parse_category("Edit or Generate").is_err());
    }

    #[test]
    fn heuristic_examples() {
        use PromptCategory::*;
        assert_eq!(
            heuristic_category("Fix grammatical errors in this paragraph"),
            Ok(Edit)
        );
        assert_eq!(heuristic_category("Paraphrase the selected text"), Ok(Edit));
        assert_eq!(
            heuristic_category("Write an opening scene about a lighthouse keeper"),
            Ok(Generate)
        );
        // Whole words only.
        assert_eq!(
            heuristic_category("Write about a prefix tree"),
            Ok(Generate)
        );
        assert_eq!(heuristic_category("REWRITE, please"), Ok(Edit));
        assert_eq!(heuristic_category(""), Err(ClassifierError::EmptyPrompt));
        assert_eq!(heuristic_category(" \t"), Err(ClassifierError::EmptyPrompt));
    }

    struct Failing;
    impl Transport for Failing {
        fn send(&self, _: &ProviderPayload) -> Result<String, GatewayError> {
            Err(GatewayError::Transport("offline".into()))
        }
    }

    #[test]
    fn classify_uses_llm_reply() {
        let gw = Gateway::new(ScriptedTransport::always("Edit"));
        assert_eq!(
            classify("continue the story", &gw),
            Ok((PromptCategory::Edit, ClassifiedBy::Llm))
        );
    }

    #[test]
    fn classify_falls_back() {
        let gw = Gateway::new(Failing);
        assert_eq!(
            classify("rewrite the ending", &gw),
            Ok((PromptCategory::Edit, ClassifiedBy::Heuristic))
        );
        let gw = Gateway::new(ScriptedTransport::always("both maybe"));
        assert_eq!(
            classify("tell me a story", &gw),
            Ok((PromptCategory::Generate, ClassifiedBy::Heuristic))
        );
    }
}
