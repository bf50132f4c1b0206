//! Drive the language-model gateway with scripted and seeded transports.
//!
//! With LLM_ENDPOINT and LLM_API_KEY set, `cargo run --example gateway_mock live`
//! sends the same request to a real OpenAI-compatible endpoint.

use std::path::Path;

use provenance_core::gateway::{suggested_interactions, ScriptedTransport, SyntheticTransport};
use provenance_core::{CompletionRequest, Gateway};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/script.json");
    let scripted = Gateway::new(ScriptedTransport::load(&fixture)?);
    let synthetic = Gateway::new(SyntheticTransport::new(42));

    let request = CompletionRequest::new(
        "continue the story",
        Some("The ferry left at dawn.".into()),
        scripted.default_params(),
    )?;
    println!("message: {:?}", request.message());
    println!(
        "payload: {}",
        String::from_utf8(request.payload().to_bytes())?
    );

    // Repeated prompts walk through the scripted replies, then repeat the last.
    for _ in 0..3 {
        println!("scripted:  {}", scripted.complete(&request)?);
    }
    // Same seed and request, same prose.
    println!("synthetic: {}", synthetic.complete(&request)?);
    println!("synthetic: {}", synthetic.complete(&request)?);

    if std::env::args().any(|a| a == "live") {
        match Gateway::live_from_env().complete(&request) {
            Ok(reply) => println!("live:      {reply}"),
            Err(e) => println!("live:      {e}"),
        }
    }

    println!("suggested interactions:");
    for s in suggested_interactions() {
        println!("  {s}");
    }
    Ok(())
}
