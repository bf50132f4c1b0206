//! Policy profiles, conformance checks and the static disclosure report.
//!
//! A [`PolicyProfile`] is plain data (loadable from a JSON file) describing the
//! checkable parts of an AI-assisted-writing policy. [`check`] measures a
//! session against it; it never blocks or alters the writing.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::{Basis, SummaryStats};
use crate::attribution::AttributionLabel;
use crate::classifier::PromptCategory;
use crate::log::{EventBody, GlyphCategory, TimelineGlyph};
use crate::prompt::{PromptId, REDACTION_MARKER};
use crate::session::SessionState;

pub const COLOR_AI_WRITTEN: &str = "#F5A623";
pub const COLOR_AI_INFLUENCED: &str = "#7ED321";
pub const COLOR_GENERATE: &str = "#9013FE";
pub const COLOR_EDIT: &str = "#4A90D9";

pub const RULE_AI_FRACTION: &str = "ai-fraction";
pub const RULE_GENERATE_PROMPT_LIST: &str = "generate-prompt-list";
pub const RULE_AI_HIGHLIGHTING: &str = "ai-highlighting";
pub const RULE_INFLUENCE_DISCLOSURE: &str = "influence-disclosure";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FractionScope {
    AiWritten,
    AiWrittenAndInfluenced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyProfile {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_ai_fraction: Option<f64>,
    #[serde(default = "default_basis")]
    pub fraction_basis: Basis,
    #[serde(default = "default_scope")]
    pub fraction_scope: FractionScope,
    #[serde(default)]
    pub require_generate_prompt_list: bool,
    /// Only Generate prompts with at least this many linked characters in the
    /// document must be listed. Absent means every Generate prompt.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generate_list_min_chars: Option<usize>,
    #[serde(default)]
    pub require_ai_highlighting: bool,
    #[serde(default)]
    pub require_influence_disclosure: bool,
}

fn default_basis() -> Basis {
    Basis::Words
}

fn default_scope() -> FractionScope {
    FractionScope::AiWritten
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyError {
    #[error("max_ai_fraction must lie in [0, 1]")]
    FractionOutOfRange,
    #[error("policy name is empty")]
    EmptyName,
    #[error("could not read policy: {0}")]
    Load(String),
    #[error("unknown policy {0:?}")]
    Unknown(String),
}

impl PolicyProfile {
    /// A profile with every rule disabled.
    pub fn named(name: impl Into<String>) -> Self {
        PolicyProfile {
            name: name.into(),
            max_ai_fraction: None,
            fraction_basis: default_basis(),
            fraction_scope: default_scope(),
            require_generate_prompt_list: false,
            generate_list_min_chars: None,
            require_ai_highlighting: false,
            require_influence_disclosure: false,
        }
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        if self.name.is_empty() {
            return Err(PolicyError::EmptyName);
        }
        if let Some(f) = self.max_ai_fraction {
            if !(0.0..=1.0).contains(&f) {
                return Err(PolicyError::FractionOutOfRange);
            }
        }
        Ok(())
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, PolicyError> {
        let profile: PolicyProfile =
            serde_json::from_slice(bytes).map_err(|e| PolicyError::Load(e.to_string()))?;
        profile.validate()?;
        Ok(profile)
    }

    pub fn load(path: &Path) -> Result<Self, PolicyError> {
        let bytes = std::fs::read(path)
            .map_err(|e| PolicyError::Load(format!("{}: {e}", path.display())))?;
        Self::from_json(&bytes)
    }
}

pub fn builtin_policies() -> Vec<PolicyProfile> {
    vec![
        PolicyProfile {
            max_ai_fraction: Some(0.05),
            fraction_basis: Basis::Words,
            fraction_scope: FractionScope::AiWritten,
            ..PolicyProfile::named("authors-guild")
        },
        PolicyProfile {
            require_generate_prompt_list: true,
            ..PolicyProfile::named("acm-style")
        },
        PolicyProfile {
            require_influence_disclosure: true,
            require_ai_highlighting: true,
            ..PolicyProfile::named("acl-style")
        },
    ]
}

/// A builtin name, or else a path to a policy file.
pub fn resolve_policy(name_or_path: &str) -> Result<PolicyProfile, PolicyError> {
    if let Some(p) = builtin_policies()
        .into_iter()
        .find(|p| p.name == name_or_path)
    {
        return Ok(p);
    }
    let path = Path::new(name_or_path);
    if path.exists() {
        PolicyProfile::load(path)
    } else {
        Err(PolicyError::Unknown(name_or_path.to_owned()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingStatus {
    Pass,
    Fail,
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub rule: String,
    pub status: FindingStatus,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measured: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformanceReport {
    pub policy: String,
    pub findings: Vec<Finding>,
    pub overall: FindingStatus,
}

impl ConformanceReport {
    pub fn passed(&self) -> bool {
        self.overall == FindingStatus::Pass
    }

    pub fn finding(&self, rule: &str) -> Option<&Finding> {
        self.findings.iter().find(|f| f.rule == rule)
    }
}

fn basis_name(basis: Basis) -> &'static str {
    match basis {
        Basis::Chars => "characters",
        Basis::Words => "words",
    }
}

/// Share of the scoped labels on the given basis.
pub fn measured_fraction(
    stats: &SummaryStats,
    basis: Basis,
    scope: FractionScope,
) -> (usize, usize, f64) {
    let counts = stats.counts(basis);
    let part = match scope {
        FractionScope::AiWritten => counts.ai_written,
        FractionScope::AiWrittenAndInfluenced => counts.ai_written + counts.ai_influenced,
    };
    let total = counts.total();
    let fraction = if total == 0 {
        0.0
    } else {
        part as f64 / total as f64
    };
    (part, total, fraction)
}

pub fn check(session: &SessionState, policy: &PolicyProfile) -> ConformanceReport {
    let stats = session.stats();
    let mut findings = Vec::new();

    if let Some(limit) = policy.max_ai_fraction {
        let (part, total, measured) =
            measured_fraction(&stats, policy.fraction_basis, policy.fraction_scope);
        let scope = match policy.fraction_scope {
            FractionScope::AiWritten => "AI-written",
            FractionScope::AiWrittenAndInfluenced => "AI-written or AI-influenced",
        };
        findings.push(Finding {
            rule: RULE_AI_FRACTION.into(),
            status: if measured > limit {
                FindingStatus::Fail
            } else {
                FindingStatus::Pass
            },
            detail: format!(
                "{part} of {total} {} {scope} ({measured:.4}, limit {limit:.4})",
                basis_name(policy.fraction_basis)
            ),
            measured: Some(measured),
            threshold: Some(limit),
        });
    }

    if policy.require_generate_prompt_list {
        let doc = session.document();
        let required: Vec<_> = session
            .prompts()
            .iter()
            .filter(|p| p.category == PromptCategory::Generate)
            .filter(|p| {
                policy.generate_list_min_chars.is_none_or(|min| {
                    let linked: usize = doc
                        .ranges_for_prompt(&p.id)
                        .iter()
                        .map(|(s, e, _)| e - s)
                        .sum();
                    linked >= min
                })
            })
            .collect();
        let hidden: Vec<&str> = required
            .iter()
            .filter(|p| p.redacted && !session.log().redaction_acknowledged(&p.id))
            .map(|p| p.id.as_str())
            .collect();
        let (status, detail) = if required.is_empty() {
            (FindingStatus::Pass, "no generative prompts".to_owned())
        } else if hidden.is_empty() {
            (
                FindingStatus::Pass,
                format!("generative prompts listed: {}", required.len()),
            )
        } else {
            (
                FindingStatus::Fail,
                format!(
                    "generative prompts redacted without acknowledgment: {}",
                    hidden.join(", ")
                ),
            )
        };
        findings.push(Finding {
            rule: RULE_GENERATE_PROMPT_LIST.into(),
            status,
            detail,
            measured: None,
            threshold: None,
        });
    }

    if policy.require_ai_highlighting {
        let ai_spans: Vec<_> = session
            .document()
            .spans()
            .iter()
            .filter(|s| s.label == AttributionLabel::AiWritten)
            .collect();
        let unlinked = ai_spans.iter().filter(|s| s.prompt_link.is_none()).count();
        let manually_marked = session.log().events().iter().any(|e| {
            matches!(
                &e.body,
                EventBody::ManualLabel {
                    label: AttributionLabel::AiWritten,
                    prompt_id: None,
                    ..
                }
            )
        });
        let (status, detail) = if unlinked > 0 && !manually_marked {
            (
                FindingStatus::Fail,
                format!("AI-written spans without a prompt link or manual label: {unlinked}"),
            )
        } else {
            (
                FindingStatus::Pass,
                format!("AI-written spans highlighted: {}", ai_spans.len()),
            )
        };
        findings.push(Finding {
            rule: RULE_AI_HIGHLIGHTING.into(),
            status,
            detail,
            measured: None,
            threshold: None,
        });
    }

    if policy.require_influence_disclosure {
        let counts = stats.counts(policy.fraction_basis);
        let fraction = stats.fractions(policy.fraction_basis).ai_influenced;
        let finding = if stats.char_counts.ai_influenced > 0 {
            Finding {
                rule: RULE_INFLUENCE_DISCLOSURE.into(),
                status: FindingStatus::Info,
                detail: format!(
                    "AI-influenced text present: {} of {} {}; disclose AI-generated ideas",
                    counts.ai_influenced,
                    counts.total(),
                    basis_name(policy.fraction_basis)
                ),
                measured: Some(fraction),
                threshold: None,
            }
        } else {
            Finding {
                rule: RULE_INFLUENCE_DISCLOSURE.into(),
                status: FindingStatus::Pass,
                detail: "no AI-influenced text".into(),
                measured: None,
                threshold: None,
            }
        };
        findings.push(finding);
    }

    let overall = if findings.iter().any(|f| f.status == FindingStatus::Fail) {
        FindingStatus::Fail
    } else {
        FindingStatus::Pass
    };
    ConformanceReport {
        policy: policy.name.clone(),
        findings,
        overall,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Markdown,
    Html,
    Structured,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unsupported report format {0:?} (expected markdown, html or structured)")]
pub struct UnsupportedFormat(pub String);

impl std::str::FromStr for ReportFormat {
    type Err = UnsupportedFormat;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "html" => Ok(ReportFormat::Html),
            "structured" | "json" => Ok(ReportFormat::Structured),
            other => Err(UnsupportedFormat(other.to_owned())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    pub label: AttributionLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_id: Option<PromptId>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkedRange {
    pub start: usize,
    pub end: usize,
    pub label: AttributionLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptEntry {
    pub id: PromptId,
    pub category: PromptCategory,
    pub prompt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
    pub response: String,
    pub redacted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regeneration_of: Option<PromptId>,
    pub linked_ranges: Vec<LinkedRange>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimelineSummary {
    pub writing: usize,
    pub edit_prompts: usize,
    pub generate_prompts: usize,
    /// One letter per glyph in order: `W` writing, `E` edit, `G` generate.
    pub sequence: String,
}

impl TimelineSummary {
    pub fn from_glyphs(glyphs: &[TimelineGlyph]) -> Self {
        let mut summary = TimelineSummary {
            writing: 0,
            edit_prompts: 0,
            generate_prompts: 0,
            sequence: String::with_capacity(glyphs.len()),
        };
        for g in glyphs {
            let c = match g.category {
                GlyphCategory::Writing => {
                    summary.writing += 1;
                    'W'
                }
                GlyphCategory::PromptEdit => {
                    summary.edit_prompts += 1;
                    'E'
                }
                GlyphCategory::PromptGenerate => {
                    summary.generate_prompts += 1;
                    'G'
                }
            };
            summary.sequence.push(c);
        }
        summary
    }

    pub fn line(&self) -> String {
        format!(
            "Timeline: writing {}, edit prompts {}, generate prompts {} [{}]",
            self.writing, self.edit_prompts, self.generate_prompts, self.sequence
        )
    }
}

/// Everything a static report shows, derived purely from a session snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisclosureReport {
    pub text: Vec<Segment>,
    pub stats: SummaryStats,
    pub prompts: Vec<PromptEntry>,
    pub timeline: TimelineSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conformance: Option<ConformanceReport>,
}

impl DisclosureReport {
    pub fn build(session: &SessionState, conformance: Option<ConformanceReport>) -> Self {
        let doc = session.document();
        let text = doc
            .spans()
            .iter()
            .map(|s| Segment {
                start: s.start,
                end: s.end,
                label: s.label,
                prompt_id: s.prompt_link.clone(),
                text: doc.slice(s.start, s.end),
            })
            .collect();
        let prompts = session
            .prompts()
            .iter()
            .map(|p| PromptEntry {
                id: p.id.clone(),
                category: p.category,
                prompt: if p.redacted {
                    REDACTION_MARKER.into()
                } else {
                    p.prompt_text.clone()
                },
                context: if p.redacted {
                    p.context_text.as_ref().map(|_| REDACTION_MARKER.into())
                } else {
                    p.context_text.clone()
                },
                response: if p.redacted {
                    REDACTION_MARKER.into()
                } else {
                    p.response_text.clone()
                },
                redacted: p.redacted,
                regeneration_of: p.regeneration_of.clone(),
                linked_ranges: doc
                    .ranges_for_prompt(&p.id)
                    .into_iter()
                    .map(|(start, end, label)| LinkedRange { start, end, label })
                    .collect(),
            })
            .collect();
        DisclosureReport {
            text,
            stats: session.stats(),
            prompts,
            timeline: TimelineSummary::from_glyphs(&session.timeline()),
            conformance,
        }
    }

    pub fn render(&self, format: ReportFormat) -> Vec<u8> {
        match format {
            ReportFormat::Markdown => self.markdown().into_bytes(),
            ReportFormat::Html => self.html().into_bytes(),
            ReportFormat::Structured => {
                let mut out = serde_json::to_vec_pretty(self).expect("report serializes");
                out.push(b'\n');
                out
            }
        }
    }

    fn markdown(&self) -> String {
        let mut out = String::from("# AI assistance disclosure\n\n## Text\n\n");
        if self.text.is_empty() {
            out.push_str("_(empty document)_\n");
        } else {
            for seg in &self.text {
                match seg.label {
                    AttributionLabel::Human => out.push_str(&seg.text),
                    AttributionLabel::AiWritten => {
                        let _ = write!(out, "⟦AI⟧{}⟦/AI⟧", seg.text);
                    }
                    AttributionLabel::AiInfluenced => {
                        let _ = write!(out, "⟦INF⟧{}⟦/INF⟧", seg.text);
                    }
                }
            }
            out.push('\n');
        }

        out.push_str("\n## Statistics\n\n");
        out.push_str("| Basis | Author-written | AI-written | AI-influenced | Total |\n");
        out.push_str("|---|---|---|---|---|\n");
        for (name, basis) in [("Characters", Basis::Chars), ("Words", Basis::Words)] {
            let c = self.stats.counts(basis);
            let f = self.stats.fractions(basis);
            let _ = writeln!(
                out,
                "| {name} | {} | {} | {} | {} |",
                pct(f.human, c.human),
                pct(f.ai_written, c.ai_written),
                pct(f.ai_influenced, c.ai_influenced),
                c.total()
            );
        }
        let _ = writeln!(
            out,
            "\nPrompts: {} edit, {} generate\n",
            self.stats.prompt_counts.edit, self.stats.prompt_counts.generate
        );

        out.push_str("## Prompts\n\n");
        if self.prompts.is_empty() {
            out.push_str("_(no prompts)_\n");
        }
        for (i, p) in self.prompts.iter().enumerate() {
            let _ = writeln!(
                out,
                "{}. **{}** ({}): {}",
                i + 1,
                p.id,
                p.category.as_str(),
                p.prompt
            );
            if let Some(ctx) = &p.context {
                let _ = writeln!(out, "   - context: {ctx}");
            }
            let _ = writeln!(out, "   - response: {}", p.response);
            if let Some(parent) = &p.regeneration_of {
                let _ = writeln!(out, "   - regeneration of {parent}");
            }
            let _ = writeln!(out, "   - linked text: {}", ranges_text(&p.linked_ranges));
        }

        if let Some(report) = &self.conformance {
            let _ = writeln!(out, "\n## Policy: {}\n", report.policy);
            for f in &report.findings {
                let _ = writeln!(
                    out,
                    "- {} **{}**: {}",
                    f.rule,
                    status_str(f.status),
                    f.detail
                );
            }
            let _ = writeln!(out, "\nOverall: {}", status_str(report.overall));
        }

        let _ = write!(out, "\n## Timeline\n\n{}\n", self.timeline.line());
        out
    }

    fn html(&self) -> String {
        let mut out = String::from(
            "<!DOCTYPE html>\n<html>\n<head><meta charset=\"utf-8\"><title>AI assistance disclosure</title></head>\n<body>\n<h1>AI assistance disclosure</h1>\n<h2>Text</h2>\n<div class=\"annotated\" style=\"white-space:pre-wrap\">",
        );
        for seg in &self.text {
            let color = match seg.label {
                AttributionLabel::Human => {
                    out.push_str(&escape(&seg.text));
                    continue;
                }
                AttributionLabel::AiWritten => COLOR_AI_WRITTEN,
                AttributionLabel::AiInfluenced => COLOR_AI_INFLUENCED,
            };
            let _ = write!(
                out,
                "<mark data-start=\"{}\" data-end=\"{}\" data-label=\"{}\"",
                seg.start,
                seg.end,
                seg.label.as_str()
            );
            if let Some(id) = &seg.prompt_id {
                let _ = write!(out, " data-prompt=\"{}\"", escape(id.as_str()));
            }
            let _ = write!(
                out,
                " style=\"background-color:{color}\">{}</mark>",
                escape(&seg.text)
            );
        }
        out.push_str("</div>\n<h2>Statistics</h2>\n<table>\n<tr><th>Basis</th><th>Author-written</th><th>AI-written</th><th>AI-influenced</th><th>Total</th></tr>\n");
        for (name, basis) in [("Characters", Basis::Chars), ("Words", Basis::Words)] {
            let c = self.stats.counts(basis);
            let f = self.stats.fractions(basis);
            let _ = writeln!(
                out,
                "<tr><td>{name}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td></tr>",
                pct(f.human, c.human),
                pct(f.ai_written, c.ai_written),
                pct(f.ai_influenced, c.ai_influenced),
                c.total()
            );
        }
        let _ = writeln!(
            out,
            "</table>\n<p>Prompts: {} edit, {} generate</p>\n<h2>Prompts</h2>\n<ol>",
            self.stats.prompt_counts.edit, self.stats.prompt_counts.generate
        );
        for p in &self.prompts {
            let color = match p.category {
                PromptCategory::Edit => COLOR_EDIT,
                PromptCategory::Generate => COLOR_GENERATE,
            };
            let _ = write!(
                out,
                "<li data-prompt=\"{}\" style=\"border-right:4px solid {color}\"><strong>{}</strong> ({}): {}",
                escape(p.id.as_str()),
                escape(p.id.as_str()),
                p.category.as_str(),
                escape(&p.prompt)
            );
            if let Some(ctx) = &p.context {
                let _ = write!(out, "<br>context: {}", escape(ctx));
            }
            let _ = write!(out, "<br>response: {}", escape(&p.response));
            if let Some(parent) = &p.regeneration_of {
                let _ = write!(out, "<br>regeneration of {}", escape(parent.as_str()));
            }
            let _ = writeln!(
                out,
                "<br>linked text: {}</li>",
                ranges_text(&p.linked_ranges)
            );
        }
        out.push_str("</ol>\n");
        if let Some(report) = &self.conformance {
            let _ = writeln!(out, "<h2>Policy: {}</h2>\n<ul>", escape(&report.policy));
            for f in &report.findings {
                let _ = writeln!(
                    out,
                    "<li>{} <strong>{}</strong>: {}</li>",
                    f.rule,
                    status_str(f.status),
                    escape(&f.detail)
                );
            }
            let _ = writeln!(out, "</ul>\n<p>Overall: {}</p>", status_str(report.overall));
        }
        let _ = write!(
            out,
            "<h2>Timeline</h2>\n<p>{}</p>\n</body>\n</html>\n",
            escape(&self.timeline.line())
        );
        out
    }
}

/// Renders the disclosure report for a session snapshot.
pub fn render_disclosure(session: &SessionState, format: ReportFormat) -> Vec<u8> {
    DisclosureReport::build(session, None).render(format)
}

fn pct(fraction: f64, count: usize) -> String {
    format!("{:.1}% ({count})", fraction * 100.0)
}

fn status_str(status: FindingStatus) -> &'static str {
    match status {
        FindingStatus::Pass => "pass",
        FindingStatus::Fail => "fail",
        FindingStatus::Info => "info",
    }
}

fn ranges_text(ranges: &[LinkedRange]) -> String {
    if ranges.is_empty() {
        return "none".into();
    }
    ranges
        .iter()
        .map(|r| format!("[{}, {}) {}", r.start, r.end, r.label.as_str()))
        .collect::<Vec<_>>()
        .join(", ")
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{Gateway, ScriptedTransport};
    use crate::session::Op;

    #[test]
    fn builtins_match_their_rules() {
        let all = builtin_policies();
        let get = |n: &str| all.iter().find(|p| p.name == n).unwrap();
        assert_eq!(get("authors-guild").max_ai_fraction, Some(0.05));
        assert_eq!(get("authors-guild").fraction_basis, Basis::Words);
        assert_eq!(
            get("authors-guild").fraction_scope,
            FractionScope::AiWritten
        );
        assert!(get("acm-style").require_generate_prompt_list);
        assert!(get("acl-style").require_influence_disclosure);
        assert!(get("acl-style").require_ai_highlighting);
        assert!(all.iter().all(|p| p.validate().is_ok()));
    }

    #[test]
    fn policy_files_parse_and_validate() {
        let p = PolicyProfile::from_json(
            br#"{"name":"house","max_ai_fraction":0.2,"fraction_basis":"chars"}"#,
        )
        .unwrap();
        assert_eq!(p.fraction_basis, Basis::Chars);
        assert!(!p.require_ai_highlighting);
        assert_eq!(
            PolicyProfile::from_json(br#"{"name":"x","max_ai_fraction":1.5}"#),
            Err(PolicyError::FractionOutOfRange)
        );
        assert!(matches!(
            resolve_policy("nope"),
            Err(PolicyError::Unknown(_))
        ));
    }

    #[test]
    fn format_names() {
        assert_eq!("html".parse::<ReportFormat>(), Ok(ReportFormat::Html));
        assert!("pdf".parse::<ReportFormat>().is_err());
    }

    #[test]
    fn edit_only_session_passes_acm() {
        let gw = Gateway::new(ScriptedTransport::from_pairs([(
            "fix the grammar",
            "Fixed.",
        )]));
        let mut s = SessionState::new("s");
        s.apply_op(
            0,
            Op::IssuePrompt {
                prompt_text: "fix the grammar".into(),
                context_text: None,
            },
            &gw,
            0,
        )
        .unwrap();
        let acm = resolve_policy("acm-style").unwrap();
        let report = check(&s, &acm);
        assert!(report.passed());
        let f = report.finding(RULE_GENERATE_PROMPT_LIST).unwrap();
        assert_eq!(f.detail, "no generative prompts");
        assert_eq!(report.findings.len(), 1);
    }

    #[test]
    fn influence_is_informational() {
        let gw = Gateway::new(ScriptedTransport::default());
        let mut s = SessionState::new("s");
        s.apply_op(
            0,
            Op::Insert {
                pos: 0,
                text: "one two three".into(),
            },
            &gw,
            0,
        )
        .unwrap();
        let acl = resolve_policy("acl-style").unwrap();
        assert!(check(&s, &acl).passed());
        s.apply_op(
            1,
            Op::Label {
                start: 0,
                end: 3,
                label: AttributionLabel::AiInfluenced,
                prompt_id: None,
            },
            &gw,
            0,
        )
        .unwrap();
        let report = check(&s, &acl);
        assert!(report.passed());
        assert_eq!(
            report.finding(RULE_INFLUENCE_DISCLOSURE).unwrap().status,
            FindingStatus::Info
        );
        assert_eq!(report.findings.len(), 2);
    }

    #[test]
    fn html_escapes_text() {
        let gw = Gateway::new(ScriptedTransport::default());
        let mut s = SessionState::new("s");
        s.apply_op(
            0,
            Op::Insert {
                pos: 0,
                text: "<b>&".into(),
            },
            &gw,
            0,
        )
        .unwrap();
        let html = String::from_utf8(render_disclosure(&s, ReportFormat::Html)).unwrap();
        assert!(html.contains("&lt;b&gt;&amp;"));
    }
}
