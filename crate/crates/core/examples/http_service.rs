//! Start the session service on a scripted transport and talk to it.
//!
//! The same server runs from the command line with
//! `provenance serve --transport mock:examples/data/script.json`.

use std::path::Path;

use provenance_core::service::{serve, ServiceConfig, TransportChoice};
use serde_json::{json, Value};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let store = std::env::temp_dir().join(format!("provenance-example-{}", std::process::id()));
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/script.json");
    let service = serve(ServiceConfig {
        port: 0,
        host: "127.0.0.1".into(),
        store_dir: store.clone(),
        transport: TransportChoice::Mock(fixture),
    })
    .await?;
    let base = service.url();
    println!("listening on {base}");
    let http = reqwest::Client::new();

    let created: Value = http
        .post(format!("{base}/sessions"))
        .send()
        .await?
        .json()
        .await?;
    let id = created["session_id"]
        .as_str()
        .unwrap_or_default()
        .to_owned();
    let session = format!("{base}/sessions/{id}");

    let prompt: Value = http
        .post(format!("{session}/prompts"))
        .json(&json!({"prompt_text": "continue the story"}))
        .send()
        .await?
        .json()
        .await?;
    println!(
        "prompt {} ({}): {}",
        prompt["id"], prompt["category"], prompt["response"]
    );

    let ops = [
        json!({"expected_revision": 1, "op": {"type": "paste", "pos": 0, "text": "The rain began.", "prompt_id": "p1"}}),
        json!({"expected_revision": 2, "op": {"type": "insert", "pos": 15, "text": " Nobody moved."}}),
        // Stale revision: rejected with 409, nothing changes.
        json!({"expected_revision": 2, "op": {"type": "insert", "pos": 0, "text": "x"}}),
    ];
    for op in ops {
        let resp = http.post(format!("{session}/ops")).json(&op).send().await?;
        println!("op -> {} {}", resp.status(), resp.text().await?);
    }

    let stats: Value = http
        .get(format!("{session}/stats"))
        .send()
        .await?
        .json()
        .await?;
    println!("char fractions: {}", stats["char_fraction"]);
    let report = http
        .get(format!("{session}/report?format=markdown"))
        .send()
        .await?
        .text()
        .await?;
    println!("{report}");

    service.shutdown().await?;
    std::fs::remove_dir_all(store)?;
    Ok(())
}
