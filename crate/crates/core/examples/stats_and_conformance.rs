//! Measure how much of a draft is AI-written and check it against policies.

use std::path::Path;

use provenance_core::conformance::{builtin_policies, check, PolicyProfile};
use provenance_core::gateway::{Gateway, ScriptedTransport};
use provenance_core::{AttributionLabel, Op, SessionState};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let gw = Gateway::new(ScriptedTransport::from_pairs([(
        "continue the story",
        "The rain began. Somewhere below, a bell rang twice.",
    )]));
    let mut s = SessionState::new("demo");
    s.apply_op(
        0,
        Op::Insert {
            pos: 0,
            text: "Mara walked to the pier with her brother. ".into(),
        },
        &gw,
        1,
    )?;
    s.apply_op(
        1,
        Op::IssuePrompt {
            prompt_text: "continue the story".into(),
            context_text: None,
        },
        &gw,
        2,
    )?;
    s.apply_op(
        2,
        Op::Paste {
            pos: 42,
            text: "The rain began.".into(),
            prompt_id: "p1".into(),
        },
        &gw,
        3,
    )?;
    s.apply_op(
        3,
        Op::Label {
            start: 0,
            end: 4,
            label: AttributionLabel::AiInfluenced,
            prompt_id: None,
        },
        &gw,
        4,
    )?;

    let stats = s.stats();
    println!("{} chars, {} words", stats.total_chars, stats.total_words);
    for label in AttributionLabel::ALL {
        println!(
            "  {:<13} chars {:.3}  words {:.3}",
            label.as_str(),
            stats.char_fraction.get(label),
            stats.word_fraction.get(label)
        );
    }

    let custom = PolicyProfile::load(
        &Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/strict-policy.json"),
    )?;
    for policy in builtin_policies().into_iter().chain([custom]) {
        let report = check(&s, &policy);
        println!("{}: {:?}", report.policy, report.overall);
        for f in &report.findings {
            println!("  {:<22} {:?}  {}", f.rule, f.status, f.detail);
        }
    }
    Ok(())
}
