//! Summary statistics: how much of the text each label holds, and how many
//! prompts of each category were issued.

use serde::{Deserialize, Serialize};

use crate::attribution::{AttributedDocument, AttributionLabel};
use crate::classifier::PromptCategory;
use crate::prompt::PromptRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Chars,
    Words,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts {
    pub human: usize,
    pub ai_written: usize,
    pub ai_influenced: usize,
}

impl LabelCounts {
    pub fn get(&self, label: AttributionLabel) -> usize {
        match label {
            AttributionLabel::Human => self.human,
            AttributionLabel::AiWritten => self.ai_written,
            AttributionLabel::AiInfluenced => self.ai_influenced,
        }
    }

    fn add(&mut self, label: AttributionLabel, n: usize) {
        match label {
            AttributionLabel::Human => self.human += n,
            AttributionLabel::AiWritten => self.ai_written += n,
            AttributionLabel::AiInfluenced => self.ai_influenced += n,
        }
    }

    pub fn total(&self) -> usize {
        self.human + self.ai_written + self.ai_influenced
    }

    /// Per-label shares; all zero when there is nothing to count.
    pub fn fractions(&self) -> LabelFractions {
        let total = self.total();
        let share = |n: usize| {
            if total == 0 {
                0.0
            } else {
                n as f64 / total as f64
            }
        };
        LabelFractions {
            human: share(self.human),
            ai_written: share(self.ai_written),
            ai_influenced: share(self.ai_influenced),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LabelFractions {
    pub human: f64,
    pub ai_written: f64,
    pub ai_influenced: f64,
}

impl LabelFractions {
    pub fn get(&self, label: AttributionLabel) -> f64 {
        match label {
            AttributionLabel::Human => self.human,
            AttributionLabel::AiWritten => self.ai_written,
            AttributionLabel::AiInfluenced => self.ai_influenced,
        }
    }

    pub fn sum(&self) -> f64 {
        self.human + self.ai_written + self.ai_influenced
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptCounts {
    pub edit: usize,
    pub generate: usize,
}

impl PromptCounts {
    pub fn total(&self) -> usize {
        self.edit + self.generate
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub char_fraction: LabelFractions,
    pub word_fraction: LabelFractions,
    pub char_counts: LabelCounts,
    pub word_counts: LabelCounts,
    pub prompt_counts: PromptCounts,
    pub total_chars: usize,
    pub total_words: usize,
}

impl SummaryStats {
    pub fn fractions(&self, basis: Basis) -> &LabelFractions {
        match basis {
            Basis::Chars => &self.char_fraction,
            Basis::Words => &self.word_fraction,
        }
    }

    pub fn counts(&self, basis: Basis) -> &LabelCounts {
        match basis {
            Basis::Chars => &self.char_counts,
            Basis::Words => &self.word_counts,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordLabel {
    pub start: usize,
    pub end: usize,
    pub label: AttributionLabel,
}

/// Words are maximal runs of non-whitespace. A word takes the label held by a
/// strict majority of its characters, or Human when no label has one.
pub fn word_labels(doc: &AttributedDocument) -> Vec<WordLabel> {
    let labels: Vec<AttributionLabel> = doc
        .char_attributions()
        .into_iter()
        .map(|a| a.label)
        .collect();
    let mut words = Vec::new();
    let mut start = None;
    let chars: Vec<char> = doc.text().chars().collect();
    for i in 0..=chars.len() {
        let in_word = i < chars.len() && !chars[i].is_whitespace();
        match (in_word, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                words.push(WordLabel {
                    start: s,
                    end: i,
                    label: majority(&labels[s..i]),
                });
                start = None;
            }
            _ => {}
        }
    }
    words
}

fn majority(labels: &[AttributionLabel]) -> AttributionLabel {
    let mut counts = LabelCounts::default();
    for l in labels {
        counts.add(*l, 1);
    }
    AttributionLabel::ALL
        .into_iter()
        .find(|l| counts.get(*l) * 2 > labels.len())
        .unwrap_or(AttributionLabel::Human)
}

pub fn char_counts(doc: &AttributedDocument) -> LabelCounts {
    let mut counts = LabelCounts::default();
    for span in doc.spans() {
        counts.add(span.label, span.len());
    }
    counts
}

pub fn word_counts(doc: &AttributedDocument) -> LabelCounts {
    let mut counts = LabelCounts::default();
    for w in word_labels(doc) {
        counts.add(w.label, 1);
    }
    counts
}

pub fn prompt_counts(prompts: &[PromptRecord]) -> PromptCounts {
    let mut counts = PromptCounts::default();
    for p in prompts {
        match p.category {
            PromptCategory::Edit => counts.edit += 1,
            PromptCategory::Generate => counts.generate += 1,
        }
    }
    counts
}

pub fn summarize(doc: &AttributedDocument, prompts: &[PromptRecord]) -> SummaryStats {
    let char_counts = char_counts(doc);
    let word_counts = word_counts(doc);
    SummaryStats {
        char_fraction: char_counts.fractions(),
        word_fraction: word_counts.fractions(),
        total_chars: char_counts.total(),
        total_words: word_counts.total(),
        char_counts,
        word_counts,
        prompt_counts: prompt_counts(prompts),
    }
}
