//! Classify prompts as Edit or Generate, with and without a model.

use provenance_core::classifier::{classification_query, classify, heuristic_category};
use provenance_core::gateway::{Gateway, ScriptedTransport};

fn main() {
    let prompts = [
        "Fix the grammar in this paragraph",
        "Write an opening line for a mystery",
        "Paraphrase the second sentence",
        "Describe the harbor at night",
    ];

    println!(
        "query sent to the model:\n  {}\n",
        classification_query(prompts[0]).unwrap()
    );

    // A model that answers "Generate" to everything, to show the reply is
    // trusted when it parses.
    let always_generate = Gateway::new(ScriptedTransport::always("Generate."));
    // A model that answers nonsense, so classification falls back to keywords.
    let confused = Gateway::new(ScriptedTransport::always("banana"));

    for p in prompts {
        let (a, by_a) = classify(p, &always_generate).unwrap();
        let (b, by_b) = classify(p, &confused).unwrap();
        println!(
            "{p:<40} heuristic={:<8} model={:<8} ({by_a:?}) fallback={:<8} ({by_b:?})",
            heuristic_category(p).unwrap().as_str(),
            a.as_str(),
            b.as_str()
        );
    }
}
