//! Rebuild any earlier state of a session from a prefix of its event log.

use provenance_core::gateway::{Gateway, ScriptedTransport};
use provenance_core::log::replay;
use provenance_core::{Op, SessionState};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let gw = Gateway::new(ScriptedTransport::from_pairs([(
        "continue the story",
        "The rain began.",
    )]));
    let mut s = SessionState::new("demo");
    let ops = [
        Op::Insert {
            pos: 0,
            text: "Night fell. ".into(),
        },
        Op::IssuePrompt {
            prompt_text: "continue the story".into(),
            context_text: None,
        },
        Op::Paste {
            pos: 12,
            text: "The rain began.".into(),
            prompt_id: "p1".into(),
        },
        Op::Delete { start: 0, end: 12 },
        Op::Insert {
            pos: 15,
            text: " It did not stop.".into(),
        },
    ];
    for (t, op) in ops.into_iter().enumerate() {
        s.apply_op(s.revision(), op, &gw, t as u64 * 1_000)?;
    }

    let events = s.log().events();
    for cut in 0..=events.len() {
        let doc = replay(&events[..cut], s.prompts())?;
        let last = cut
            .checked_sub(1)
            .map(|i| format!("{:?}", events[i].body.kind()))
            .unwrap_or("start".into());
        println!("after {cut:>2} events ({last:<18}) {:?}", doc.text());
    }
    assert_eq!(&replay(events, s.prompts())?, s.document());
    Ok(())
}
