//! Character-level attribution of a document's text.
//!
//! Every character carries exactly one [`AttributionLabel`]. The document
//! stores that labeling as a normalized run-length list of [`Span`]s: sorted,
//! disjoint, gap-free over `[0, len)`, with no two adjacent spans sharing the
//! same `(label, prompt_link, verbatim)` triple.
//!
//! All offsets are counted in Unicode scalar values, never bytes.
//!
//! Mutations are atomic: they validate first and leave the document untouched
//! when they return an error. Clone the document for a snapshot.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prompt::{PromptId, PromptRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributionLabel {
    Human,
    AiWritten,
    AiInfluenced,
}

impl AttributionLabel {
    pub const ALL: [AttributionLabel; 3] = [
        AttributionLabel::Human,
        AttributionLabel::AiWritten,
        AttributionLabel::AiInfluenced,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AttributionLabel::Human => "human",
            AttributionLabel::AiWritten => "ai_written",
            AttributionLabel::AiInfluenced => "ai_influenced",
        }
    }
}

/// The attribution carried by a single character.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Attribution {
    pub label: AttributionLabel,
    pub prompt_link: Option<PromptId>,
    pub verbatim: bool,
}

impl Attribution {
    pub fn human() -> Self {
        Attribution {
            label: AttributionLabel::Human,
            prompt_link: None,
            verbatim: false,
        }
    }

    /// Whether the triple satisfies the span invariants (Human spans carry no
    /// link and are never verbatim; only linked AI-written text is verbatim).
    pub fn is_well_formed(&self) -> bool {
        match self.label {
            AttributionLabel::Human => self.prompt_link.is_none() && !self.verbatim,
            AttributionLabel::AiWritten => !self.verbatim || self.prompt_link.is_some(),
            AttributionLabel::AiInfluenced => !self.verbatim,
        }
    }
}

/// A maximal run of identically attributed characters, `[start, end)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub label: AttributionLabel,
    #[serde(rename = "prompt_id", default, skip_serializing_if = "Option::is_none")]
    pub prompt_link: Option<PromptId>,
    pub verbatim: bool,
}

impl Span {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    pub fn attribution(&self) -> Attribution {
        Attribution {
            label: self.label,
            prompt_link: self.prompt_link.clone(),
            verbatim: self.verbatim,
        }
    }

    fn with(start: usize, end: usize, attr: &Attribution) -> Self {
        Span {
            start,
            end,
            label: attr.label,
            prompt_link: attr.prompt_link.clone(),
            verbatim: attr.verbatim,
        }
    }

    fn same_attribution(&self, other: &Span) -> bool {
        self.label == other.label
            && self.prompt_link == other.prompt_link
            && self.verbatim == other.verbatim
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AttributionError {
    #[error("offset {offset} out of bounds for document of length {len}")]
    OutOfBounds { offset: usize, len: usize },
    #[error("inserted text must not be empty")]
    EmptyText,
    #[error("range [{start}, {end}) is empty")]
    EmptyRange { start: usize, end: usize },
    #[error("manual labels must be ai_written or ai_influenced; use unlabel for human")]
    InvalidLabel,
}

/// Why a span list fails to describe a valid attribution of its text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TilingViolation {
    #[error("span {index} is empty or inverted")]
    EmptySpan { index: usize },
    #[error("span {index} does not start where the previous one ended")]
    Gap { index: usize },
    #[error("spans cover {covered} characters but the text has {len}")]
    Coverage { covered: usize, len: usize },
    #[error("spans {index} and {next} share an attribution and should be merged", next = .index + 1)]
    NotNormalized { index: usize },
    #[error("span {index} has an inconsistent label/link/verbatim combination")]
    IllFormed { index: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AttributedDocument {
    text: String,
    len: usize,
    spans: Vec<Span>,
}

impl AttributedDocument {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuilds a document from stored parts, checking every tiling invariant.
    pub fn from_parts(text: String, spans: Vec<Span>) -> Result<Self, TilingViolation> {
        let len = text.chars().count();
        check_tiling(&spans, len)?;
        Ok(AttributedDocument { text, len, spans })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Length in Unicode scalar values.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn spans(&self) -> &[Span] {
        &self.spans
    }

    /// The characters in `[start, end)`, clamped to the document.
    pub fn slice(&self, start: usize, end: usize) -> String {
        self.text
            .chars()
            .skip(start)
            .take(end.saturating_sub(start))
            .collect()
    }

    /// Per-character attribution, expanded from the span list.
    pub fn char_attributions(&self) -> Vec<Attribution> {
        let mut out = Vec::with_capacity(self.len);
        for span in &self.spans {
            let attr = span.attribution();
            out.extend(std::iter::repeat_n(attr, span.len()));
        }
        out
    }

    /// Inserts human-typed text at `pos`.
    pub fn insert_text(&mut self, pos: usize, text: &str) -> Result<(), AttributionError> {
        self.check_pos(pos)?;
        if text.is_empty() {
            return Err(AttributionError::EmptyText);
        }
        self.splice(pos, pos, Some(text), &Attribution::human());
        Ok(())
    }

    pub fn delete_range(&mut self, start: usize, end: usize) -> Result<(), AttributionError> {
        self.check_range(start, end)?;
        self.splice(start, end, Some(""), &Attribution::human());
        Ok(())
    }

    /// Replaces `[start, end)` with human-typed text. Characters outside the
    /// range keep whatever attribution they had.
    pub fn replace_range(
        &mut self,
        start: usize,
        end: usize,
        text: &str,
    ) -> Result<(), AttributionError> {
        self.check_range(start, end)?;
        if text.is_empty() {
            return Err(AttributionError::EmptyText);
        }
        self.splice(start, end, Some(text), &Attribution::human());
        Ok(())
    }

    /// Inserts text copied from `prompt`'s response. The text is AI-written and
    /// linked regardless of content; it is `verbatim` only when it occurs as a
    /// contiguous substring of the response.
    pub fn paste_ai_response(
        &mut self,
        pos: usize,
        text: &str,
        prompt: &PromptRecord,
    ) -> Result<(), AttributionError> {
        let verbatim = prompt.response_text.contains(text);
        self.paste_with_verbatim(pos, text, prompt.id.clone(), verbatim)
    }

    /// Paste with an already-decided verbatim flag. Used by replay when the
    /// source response is no longer available.
    pub(crate) fn paste_with_verbatim(
        &mut self,
        pos: usize,
        text: &str,
        prompt_id: PromptId,
        verbatim: bool,
    ) -> Result<(), AttributionError> {
        self.check_pos(pos)?;
        if text.is_empty() {
            return Err(AttributionError::EmptyText);
        }
        let attr = Attribution {
            label: AttributionLabel::AiWritten,
            prompt_link: Some(prompt_id),
            verbatim,
        };
        self.splice(pos, pos, Some(text), &attr);
        Ok(())
    }

    /// Marks `[start, end)` as AI-written or AI-influenced, overwriting any
    /// previous attribution. Passing the linked record proves it exists.
    pub fn manual_label(
        &mut self,
        start: usize,
        end: usize,
        label: AttributionLabel,
        prompt: Option<&PromptRecord>,
    ) -> Result<(), AttributionError> {
        self.manual_label_id(start, end, label, prompt.map(|p| p.id.clone()))
    }

    pub(crate) fn manual_label_id(
        &mut self,
        start: usize,
        end: usize,
        label: AttributionLabel,
        prompt_link: Option<PromptId>,
    ) -> Result<(), AttributionError> {
        if label == AttributionLabel::Human {
            return Err(AttributionError::InvalidLabel);
        }
        self.check_range(start, end)?;
        let attr = Attribution {
            label,
            prompt_link,
            verbatim: false,
        };
        self.splice(start, end, None, &attr);
        Ok(())
    }

    /// Returns `[start, end)` to Human and drops any prompt links there.
    pub fn manual_unlabel(&mut self, start: usize, end: usize) -> Result<(), AttributionError> {
        self.check_range(start, end)?;
        self.splice(start, end, None, &Attribution::human());
        Ok(())
    }

    pub fn label_at(
        &self,
        pos: usize,
    ) -> Result<(AttributionLabel, Option<&PromptId>), AttributionError> {
        if pos >= self.len {
            return Err(AttributionError::OutOfBounds {
                offset: pos,
                len: self.len,
            });
        }
        // The span list tiles the text, so a containing span always exists.
        let idx = self.spans.partition_point(|s| s.end <= pos);
        let span = &self.spans[idx];
        Ok((span.label, span.prompt_link.as_ref()))
    }

    /// All spans linked to `prompt_id`, in document order.
    pub fn ranges_for_prompt(&self, prompt_id: &PromptId) -> Vec<(usize, usize, AttributionLabel)> {
        self.spans
            .iter()
            .filter(|s| s.prompt_link.as_ref() == Some(prompt_id))
            .map(|s| (s.start, s.end, s.label))
            .collect()
    }

    fn check_pos(&self, pos: usize) -> Result<(), AttributionError> {
        if pos > self.len {
            Err(AttributionError::OutOfBounds {
                offset: pos,
                len: self.len,
            })
        } else {
            Ok(())
        }
    }

    fn check_range(&self, start: usize, end: usize) -> Result<(), AttributionError> {
        if end > self.len {
            return Err(AttributionError::OutOfBounds {
                offset: end,
                len: self.len,
            });
        }
        if start >= end {
            return Err(AttributionError::EmptyRange { start, end });
        }
        Ok(())
    }

    /// Core edit: characters `[start, end)` are replaced by `new_text` (or kept
    /// in place when `new_text` is `None`) and the resulting run takes `attr`.
    /// Callers have validated the range.
    fn splice(&mut self, start: usize, end: usize, new_text: Option<&str>, attr: &Attribution) {
        let new_len = match new_text {
            Some(t) => t.chars().count(),
            None => end - start,
        };
        if let Some(t) = new_text {
            let b_start = byte_offset(&self.text, start);
            let b_end = b_start + byte_offset(&self.text[b_start..], end - start);
            self.text.replace_range(b_start..b_end, t);
        }

        // Position after the edit of an original offset `p >= end`.
        let shift = |p: usize| p - end + start + new_len;
        let run = Span::with(start, start + new_len, attr);
        let mut out: Vec<Span> = Vec::with_capacity(self.spans.len() + 2);
        let mut run_pending = new_len > 0;
        for span in &self.spans {
            if span.end <= start {
                push_merged(&mut out, span.clone());
                continue;
            }
            if span.start < start {
                let mut left = span.clone();
                left.end = start;
                push_merged(&mut out, left);
            }
            if span.end > end {
                if run_pending {
                    push_merged(&mut out, run.clone());
                    run_pending = false;
                }
                let mut right = span.clone();
                right.start = shift(span.start.max(end));
                right.end = shift(span.end);
                push_merged(&mut out, right);
            }
        }
        if run_pending {
            push_merged(&mut out, run);
        }

        self.len = self.len - (end - start) + new_len;
        self.spans = out;
        debug_assert!(check_tiling(&self.spans, self.len).is_ok());
    }
}

fn push_merged(out: &mut Vec<Span>, span: Span) {
    if span.is_empty() {
        return;
    }
    if let Some(last) = out.last_mut() {
        if last.end == span.start && last.same_attribution(&span) {
            last.end = span.end;
            return;
        }
    }
    out.push(span);
}

fn byte_offset(s: &str, chars: usize) -> usize {
    s.char_indices().nth(chars).map_or(s.len(), |(b, _)| b)
}

/// Checks that `spans` is a valid normalized tiling of a text of `len` chars.
pub fn check_tiling(spans: &[Span], len: usize) -> Result<(), TilingViolation> {
    let mut cursor = 0;
    for (index, span) in spans.iter().enumerate() {
        if span.start >= span.end {
            return Err(TilingViolation::EmptySpan { index });
        }
        if span.start != cursor {
            return Err(TilingViolation::Gap { index });
        }
        if !span.attribution().is_well_formed() {
            return Err(TilingViolation::IllFormed { index });
        }
        if index > 0 && spans[index - 1].same_attribution(span) {
            return Err(TilingViolation::NotNormalized { index: index - 1 });
        }
        cursor = span.end;
    }
    if cursor != len {
        return Err(TilingViolation::Coverage {
            covered: cursor,
            len,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::PromptCategory;

    fn prompt(id: &str, response: &str) -> PromptRecord {
        PromptRecord::new(
            PromptId::from(id),
            0,
            "continue".into(),
            None,
            response.into(),
            PromptCategory::Generate,
            "mock".into(),
            None,
        )
    }

    fn human(text: &str) -> AttributedDocument {
        let mut doc = AttributedDocument::new();
        doc.insert_text(0, text).unwrap();
        doc
    }

    fn ai(text: &str, p: &PromptRecord) -> AttributedDocument {
        let mut doc = AttributedDocument::new();
        doc.paste_ai_response(0, text, p).unwrap();
        doc
    }

    fn shape(doc: &AttributedDocument) -> Vec<(usize, usize, AttributionLabel)> {
        doc.spans()
            .iter()
            .map(|s| (s.start, s.end, s.label))
            .collect()
    }

    use AttributionLabel::{AiInfluenced, AiWritten, Human};

    #[test]
    fn new_document_is_empty() {
        let doc = AttributedDocument::new();
        assert_eq!(doc.text(), "");
        assert!(doc.spans().is_empty());
        let doc = human("a");
        assert_eq!(shape(&doc), vec![(0, 1, Human)]);
    }

    #[test]
    fn insert_merges_same_label() {
        let mut doc = human("abcd");
        doc.insert_text(2, "XY").unwrap();
        assert_eq!(doc.text(), "abXYcd");
        assert_eq!(shape(&doc), vec![(0, 6, Human)]);
    }

    #[test]
    fn insert_splits_ai_span() {
        let p = prompt("p1", "rain");
        let mut doc = ai("rain", &p);
        doc.insert_text(2, "!!").unwrap();
        assert_eq!(doc.text(), "ra!!in");
        assert_eq!(
            shape(&doc),
            vec![(0, 2, AiWritten), (2, 4, Human), (4, 6, AiWritten)]
        );
        assert!(doc.spans()[0].verbatim && doc.spans()[2].verbatim);
    }

    #[test]
    fn append_leaves_ai_span_untouched() {
        let p = prompt("p1", "rain");
        let mut doc = ai("rain", &p);
        doc.insert_text(4, " fell").unwrap();
        assert_eq!(shape(&doc), vec![(0, 4, AiWritten), (4, 9, Human)]);
        assert_eq!(doc.spans()[0].prompt_link, Some(PromptId::from("p1")));
    }

    #[test]
    fn insert_errors() {
        let mut doc = human("ab");
        assert_eq!(
            doc.insert_text(3, "x"),
            Err(AttributionError::OutOfBounds { offset: 3, len: 2 })
        );
        assert_eq!(doc.insert_text(1, ""), Err(AttributionError::EmptyText));
        assert_eq!(doc.text(), "ab");
    }

    #[test]
    fn delete_cases() {
        let mut doc = human("abcdef");
        doc.delete_range(1, 3).unwrap();
        assert_eq!(doc.text(), "adef");
        assert_eq!(shape(&doc), vec![(0, 4, Human)]);

        let p = prompt("p1", "abcdef");
        let mut doc = ai("abcdef", &p);
        doc.delete_range(2, 4).unwrap();
        assert_eq!(shape(&doc), vec![(0, 4, AiWritten)]);
        assert_eq!(doc.spans()[0].prompt_link, Some(PromptId::from("p1")));

        let mut doc = human("abc");
        doc.paste_ai_response(3, "def", &p).unwrap();
        doc.delete_range(2, 4).unwrap();
        assert_eq!(doc.text(), "abef");
        assert_eq!(shape(&doc), vec![(0, 2, Human), (2, 4, AiWritten)]);
    }

    #[test]
    fn delete_errors() {
        let mut doc = human("abc");
        assert_eq!(
            doc.delete_range(2, 2),
            Err(AttributionError::EmptyRange { start: 2, end: 2 })
        );
        assert!(matches!(
            doc.delete_range(1, 4),
            Err(AttributionError::OutOfBounds { .. })
        ));
    }

    #[test]
    fn replace_reattributes_only_the_edited_part() {
        let p = prompt("p1", "stormy");
        let mut doc = ai("stormy", &p);
        doc.replace_range(2, 4, "zz").unwrap();
        assert_eq!(doc.text(), "stzzmy");
        assert_eq!(
            shape(&doc),
            vec![(0, 2, AiWritten), (2, 4, Human), (4, 6, AiWritten)]
        );

        let mut doc = ai("stormy", &p);
        doc.replace_range(0, 6, "calm").unwrap();
        assert_eq!(shape(&doc), vec![(0, 4, Human)]);
        assert!(doc.ranges_for_prompt(&p.id).is_empty());

        let mut doc = human("hello");
        doc.replace_range(1, 3, "EYY").unwrap();
        assert_eq!(shape(&doc), vec![(0, 6, Human)]);
    }

    #[test]
    fn paste_verbatim_detection() {
        let p = prompt("p1", "The rain began. It did not stop. Nobody minded.");
        let mut doc = human("Intro ");
        doc.paste_ai_response(6, &p.response_text, &p).unwrap();
        assert_eq!(doc.spans()[1].label, AiWritten);
        assert!(doc.spans()[1].verbatim);

        let mut doc = AttributedDocument::new();
        doc.paste_ai_response(0, "It did not stop.", &p).unwrap();
        assert!(doc.spans()[0].verbatim);

        let mut doc = AttributedDocument::new();
        doc.paste_ai_response(0, "The rain ended. It did not stop.", &p)
            .unwrap();
        let span = &doc.spans()[0];
        assert_eq!(span.label, AiWritten);
        assert!(!span.verbatim);
        assert_eq!(span.prompt_link, Some(PromptId::from("p1")));
    }

    #[test]
    fn paste_inside_other_prompt_keeps_both_links() {
        let p1 = prompt("p1", "aaaa");
        let p2 = prompt("p2", "bb");
        let mut doc = ai("aaaa", &p1);
        doc.paste_ai_response(2, "bb", &p2).unwrap();
        let links: Vec<_> = doc
            .spans()
            .iter()
            .map(|s| s.prompt_link.clone().unwrap().0)
            .collect();
        assert_eq!(links, vec!["p1", "p2", "p1"]);
    }

    #[test]
    fn manual_label_cases() {
        let p = prompt("p1", "x");
        let mut doc = human("the old pier sighed");
        doc.manual_label(5, 9, AiInfluenced, Some(&p)).unwrap();
        assert_eq!(
            shape(&doc),
            vec![(0, 5, Human), (5, 9, AiInfluenced), (9, 19, Human)]
        );
        assert_eq!(doc.label_at(6).unwrap(), (AiInfluenced, Some(&p.id)));

        let mut doc = human("abcdef");
        doc.manual_label(0, 3, AiWritten, None).unwrap();
        assert_eq!(doc.spans()[0].prompt_link, None);
        assert!(!doc.spans()[0].verbatim);

        let mut doc = ai("abcdef", &prompt("p1", "abcdef"));
        doc.manual_label(4, 6, AiInfluenced, None).unwrap();
        assert_eq!(shape(&doc), vec![(0, 4, AiWritten), (4, 6, AiInfluenced)]);

        assert_eq!(
            doc.manual_label(0, 1, Human, None),
            Err(AttributionError::InvalidLabel)
        );
    }

    #[test]
    fn manual_label_is_idempotent() {
        let mut doc = human("abcdefgh");
        doc.manual_label(2, 5, AiInfluenced, None).unwrap();
        let once = doc.clone();
        doc.manual_label(2, 5, AiInfluenced, None).unwrap();
        assert_eq!(doc, once);
    }

    #[test]
    fn unlabel_cases() {
        let p = prompt("p1", "abcdef");
        let mut doc = ai("abcdef", &p);
        doc.manual_unlabel(2, 4).unwrap();
        assert_eq!(
            shape(&doc),
            vec![(0, 2, AiWritten), (2, 4, Human), (4, 6, AiWritten)]
        );

        let mut doc = human("abc");
        let before = doc.clone();
        doc.manual_unlabel(0, 2).unwrap();
        assert_eq!(doc, before);

        let mut doc = ai("abcdef", &p);
        doc.manual_label(1, 2, AiInfluenced, None).unwrap();
        doc.manual_unlabel(0, 6).unwrap();
        assert_eq!(shape(&doc), vec![(0, 6, Human)]);
    }

    #[test]
    fn label_at_bounds() {
        let p = prompt("p1", "xyz");
        let mut doc = human("ab");
        doc.paste_ai_response(2, "xyz", &p).unwrap();
        assert_eq!(doc.label_at(0).unwrap(), (Human, None));
        assert_eq!(doc.label_at(3).unwrap(), (AiWritten, Some(&p.id)));
        assert_eq!(
            doc.label_at(5),
            Err(AttributionError::OutOfBounds { offset: 5, len: 5 })
        );
    }

    #[test]
    fn ranges_for_prompt_after_partial_overwrite() {
        let p = prompt("p1", "abcdefgh");
        let mut doc = ai("abcdefgh", &p);
        doc.replace_range(3, 5, "Z").unwrap();
        assert_eq!(
            doc.ranges_for_prompt(&p.id),
            vec![(0, 3, AiWritten), (4, 7, AiWritten)]
        );
        assert!(doc.ranges_for_prompt(&PromptId::from("p9")).is_empty());

        let mut doc = human("abcdefgh");
        doc.manual_label(1, 4, AiInfluenced, Some(&p)).unwrap();
        assert_eq!(doc.ranges_for_prompt(&p.id), vec![(1, 4, AiInfluenced)]);
    }

    #[test]
    fn offsets_count_unicode_scalars() {
        let p = prompt("p1", "ab");
        let mut doc = ai("ab", &p);
        doc.insert_text(0, "é").unwrap();
        assert_eq!(shape(&doc), vec![(0, 1, Human), (1, 3, AiWritten)]);
        doc.insert_text(2, "🌧").unwrap();
        assert_eq!(doc.text(), "éa🌧b");
        assert_eq!(doc.len(), 4);
        doc.delete_range(2, 3).unwrap();
        assert_eq!(doc.text(), "éab");
        assert_eq!(shape(&doc), vec![(0, 1, Human), (1, 3, AiWritten)]);
    }

    #[test]
    fn from_parts_rejects_bad_tilings() {
        let s = |start, end, label| Span {
            start,
            end,
            label,
            prompt_link: None,
            verbatim: false,
        };
        assert!(AttributedDocument::from_parts("abcd".into(), vec![s(0, 4, Human)]).is_ok());
        assert_eq!(
            AttributedDocument::from_parts("abcd".into(), vec![s(0, 3, Human), s(2, 4, AiWritten)]),
            Err(TilingViolation::Gap { index: 1 })
        );
        assert_eq!(
            AttributedDocument::from_parts("abcd".into(), vec![s(0, 2, Human), s(2, 4, Human)]),
            Err(TilingViolation::NotNormalized { index: 0 })
        );
        assert_eq!(
            AttributedDocument::from_parts("abcd".into(), vec![s(0, 3, Human)]),
            Err(TilingViolation::Coverage { covered: 3, len: 4 })
        );
        let mut bad = s(0, 4, Human);
        bad.prompt_link = Some("p1".into());
        assert_eq!(
            AttributedDocument::from_parts("abcd".into(), vec![bad]),
            Err(TilingViolation::IllFormed { index: 0 })
        );
    }
}
