//! Export a session, import it back, and see a tampered file rejected.

use provenance_core::gateway::{Gateway, SyntheticTransport};
use provenance_core::{export_session, import_session, ImportError, Op, SessionState};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let gw = Gateway::new(SyntheticTransport::new(7));
    let mut s = SessionState::new("original");
    s.apply_op(
        0,
        Op::Insert {
            pos: 0,
            text: "A quiet start. ".into(),
        },
        &gw,
        1,
    )?;
    let p = s
        .apply_op(
            1,
            Op::IssuePrompt {
                prompt_text: "continue the story".into(),
                context_text: None,
            },
            &gw,
            2,
        )?
        .prompt
        .expect("issuing a prompt returns its record");
    let first_sentence: String = p
        .response_text
        .split_inclusive('.')
        .next()
        .unwrap_or("")
        .to_owned();
    s.apply_op(
        2,
        Op::Paste {
            pos: 15,
            text: first_sentence,
            prompt_id: p.id.clone(),
        },
        &gw,
        3,
    )?;
    s.apply_op(
        3,
        Op::Redact {
            prompt_id: p.id,
            acknowledgment: None,
        },
        &gw,
        4,
    )?;

    let bytes = export_session(&s);
    println!("{}", String::from_utf8_lossy(&bytes));

    let back = import_session(&bytes)?;
    assert_eq!(export_session(&back), bytes);
    println!(
        "re-export is byte-identical; imported as {}",
        back.session_id()
    );

    let tampered = String::from_utf8(bytes)?.replacen("A quiet", "A loud", 1);
    match import_session(tampered.as_bytes()) {
        Err(ImportError::Integrity(e)) => println!("tampered file rejected: {e}"),
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
