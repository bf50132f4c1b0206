//! Paste an AI response, rewrite part of it by hand, and watch the spans.

use provenance_core::{AttributedDocument, AttributionLabel, PromptCategory, PromptRecord};

fn show(doc: &AttributedDocument) {
    println!("{:?}", doc.text());
    for s in doc.spans() {
        let link = s.prompt_link.as_ref().map(|p| p.as_str()).unwrap_or("-");
        println!(
            "  [{:>2},{:>2}) {:<13} prompt={link} verbatim={} {:?}",
            s.start,
            s.end,
            s.label.as_str(),
            s.verbatim,
            doc.slice(s.start, s.end)
        );
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let prompt = PromptRecord::new(
        "p1".into(),
        0,
        "continue the story".into(),
        None,
        "The rain began.".into(),
        PromptCategory::Generate,
        "mock".into(),
        None,
    );

    let mut doc = AttributedDocument::new();
    doc.insert_text(0, "Night fell. ")?;
    doc.paste_ai_response(12, "The rain began.", &prompt)?;
    show(&doc);

    // Typing over AI text makes those characters human-written.
    doc.replace_range(16, 20, "snow")?;
    show(&doc);

    // The author marks their own opening as shaped by the AI's idea.
    doc.manual_label(0, 11, AttributionLabel::AiInfluenced, Some(&prompt))?;
    show(&doc);

    println!("ranges for p1: {:?}", doc.ranges_for_prompt(&prompt.id));
    Ok(())
}
