//! Render the disclosure report for a session in each format.
//!
//! `cargo run --example disclosure_report -- html > report.html`

use provenance_core::conformance::{check, resolve_policy, DisclosureReport};
use provenance_core::gateway::{Gateway, ScriptedTransport};
use provenance_core::{Op, ReportFormat, SessionState};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let format: ReportFormat = std::env::args()
        .nth(1)
        .as_deref()
        .unwrap_or("markdown")
        .parse()?;
    let gw = Gateway::new(ScriptedTransport::from_pairs([
        ("continue the story", "The lamp went out."),
        ("fix the grammar", "She was late."),
    ]));
    let mut s = SessionState::new("report");
    let ops = [
        Op::Insert {
            pos: 0,
            text: "Her were late. ".into(),
        },
        Op::IssuePrompt {
            prompt_text: "continue the story".into(),
            context_text: None,
        },
        Op::Paste {
            pos: 15,
            text: "The lamp went out.".into(),
            prompt_id: "p1".into(),
        },
        Op::IssuePrompt {
            prompt_text: "fix the grammar".into(),
            context_text: Some("Her were late.".into()),
        },
        Op::Replace {
            start: 0,
            end: 14,
            text: "She was late.".into(),
        },
        Op::Redact {
            prompt_id: "p2".into(),
            acknowledgment: Some("grammar help only".into()),
        },
    ];
    for (t, op) in ops.into_iter().enumerate() {
        s.apply_op(s.revision(), op, &gw, 1_000 * t as u64)?;
    }
    let conformance = check(&s, &resolve_policy("acm-style")?);
    let bytes = DisclosureReport::build(&s, Some(conformance)).render(format);
    print!("{}", String::from_utf8(bytes)?);
    Ok(())
}
