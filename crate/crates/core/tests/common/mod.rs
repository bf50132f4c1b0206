#![allow(dead_code)]

//! Test-only brute-force oracle and a seeded random-session generator.
//!
//! The oracle keeps one attribution per character in a flat array and shares
//! no code with the span implementation.

use provenance_core::attribution::{AttributionLabel, Span};
use provenance_core::gateway::{Gateway, SyntheticTransport};
use provenance_core::prompt::PromptId;
use provenance_core::session::{Op, SessionState};
use provenance_core::AttributedDocument;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharAttr {
    pub label: AttributionLabel,
    pub link: Option<String>,
    pub verbatim: bool,
}

impl CharAttr {
    fn human() -> Self {
        CharAttr {
            label: AttributionLabel::Human,
            link: None,
            verbatim: false,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct CharOracle {
    pub text: Vec<char>,
    pub attrs: Vec<CharAttr>,
}

impl CharOracle {
    pub fn len(&self) -> usize {
        self.text.len()
    }

    fn splice(&mut self, start: usize, end: usize, text: &str, attr: CharAttr) {
        let chars: Vec<char> = text.chars().collect();
        let n = chars.len();
        self.text.splice(start..end, chars);
        self.attrs.splice(start..end, std::iter::repeat_n(attr, n));
    }

    pub fn insert(&mut self, pos: usize, text: &str) {
        self.splice(pos, pos, text, CharAttr::human());
    }

    pub fn delete(&mut self, start: usize, end: usize) {
        self.splice(start, end, "", CharAttr::human());
    }

    pub fn replace(&mut self, start: usize, end: usize, text: &str) {
        self.splice(start, end, text, CharAttr::human());
    }

    pub fn paste(&mut self, pos: usize, text: &str, prompt: &str, response: Option<&str>) {
        // Brute-force substring test over scalar windows.
        let verbatim = response.is_some_and(|r| {
            let r: Vec<char> = r.chars().collect();
            let t: Vec<char> = text.chars().collect();
            t.len() <= r.len() && r.windows(t.len()).any(|w| w == t.as_slice())
        });
        self.splice(
            pos,
            pos,
            text,
            CharAttr {
                label: AttributionLabel::AiWritten,
                link: Some(prompt.to_owned()),
                verbatim,
            },
        );
    }

    pub fn label(&mut self, start: usize, end: usize, label: AttributionLabel, link: Option<&str>) {
        for a in &mut self.attrs[start..end] {
            *a = CharAttr {
                label,
                link: link.map(str::to_owned),
                verbatim: false,
            };
        }
    }

    pub fn unlabel(&mut self, start: usize, end: usize) {
        for a in &mut self.attrs[start..end] {
            *a = CharAttr::human();
        }
    }

    /// Groups equal neighbours into spans.
    pub fn spans(&self) -> Vec<Span> {
        let mut out: Vec<Span> = Vec::new();
        for (i, a) in self.attrs.iter().enumerate() {
            match out.last_mut() {
                Some(last)
                    if last.label == a.label
                        && last.prompt_link.as_ref().map(|p| p.0.as_str()) == a.link.as_deref()
                        && last.verbatim == a.verbatim =>
                {
                    last.end = i + 1
                }
                _ => out.push(Span {
                    start: i,
                    end: i + 1,
                    label: a.label,
                    prompt_link: a.link.as_deref().map(PromptId::from),
                    verbatim: a.verbatim,
                }),
            }
        }
        out
    }

    pub fn text_string(&self) -> String {
        self.text.iter().collect()
    }

    pub fn matches(&self, doc: &AttributedDocument) -> bool {
        doc.text() == self.text_string() && doc.spans() == self.spans().as_slice()
    }
}

/// One generated session plus everything needed to check it.
pub struct FuzzSession {
    pub seed: u64,
    pub session: SessionState,
    /// Document after each successful op (index 0 is the empty start).
    pub snapshots: Vec<AttributedDocument>,
    /// Log length after each successful op (index 0 is 0).
    pub log_lengths: Vec<usize>,
    pub ops_attempted: usize,
    pub tiling_failures: usize,
    pub oracle_mismatches: usize,
    /// Errors that should not happen for an in-range op.
    pub unexpected_errors: Vec<String>,
}

const PROMPTS: &[&str] = &[
    "continue the story",
    "fix the grammar",
    "summarize",
    "paraphrase this paragraph",
    "describe the harbor at night",
    "introduce a new character",
];

const WORDS: &[&str] = &[
    "the", "rain", "é", "über", "🌧", "walked", "slowly", ".", "!", "?", "\n", " ", "lamp", "she",
    "said", ",", "quiet", "日本",
];

fn random_text(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(1..=5);
    let mut s = String::new();
    for _ in 0..n {
        s.push_str(WORDS[rng.gen_range(0..WORDS.len())]);
        if rng.gen_bool(0.5) {
            s.push(' ');
        }
    }
    s
}

fn range(rng: &mut ChaCha8Rng, len: usize) -> (usize, usize) {
    let start = rng.gen_range(0..len);
    let max = (len - start).min(40);
    let end = start + rng.gen_range(1..=max);
    (start, end)
}

pub const MAX_DOC_CHARS: usize = 500;

/// Drives a random session of up to `max_ops` operations, checking tiling and
/// the character oracle after every step.
pub fn fuzz_session(seed: u64, max_ops: usize) -> FuzzSession {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gateway = Gateway::new(SyntheticTransport::new(seed));
    let mut session = SessionState::new(format!("fuzz-{seed}"));
    let mut oracle = CharOracle::default();
    let ops = rng.gen_range(1..=max_ops);
    let mut out = FuzzSession {
        seed,
        session: SessionState::new(""),
        snapshots: vec![AttributedDocument::new()],
        log_lengths: vec![0],
        ops_attempted: ops,
        tiling_failures: 0,
        oracle_mismatches: 0,
        unexpected_errors: Vec::new(),
    };
    let mut clock = 1_700_000_000_000u64;

    for _ in 0..ops {
        clock += rng.gen_range(0..5_000);
        let len = oracle.len();
        let prompts: Vec<_> = session.prompts().to_vec();
        let choice = rng.gen_range(0..100);
        let too_long = len > MAX_DOC_CHARS - 60;

        // Each arm yields the op plus a closure-free oracle update plan.
        enum Plan {
            Insert(usize, String),
            Delete(usize, usize),
            Replace(usize, usize, String),
            Paste(usize, String, String, Option<String>),
            Label(usize, usize, AttributionLabel, Option<String>),
            Unlabel(usize, usize),
            NoDocChange,
            ExpectError,
        }

        let (op, plan) = if too_long && len > 0 && choice < 60 {
            let (s, e) = range(&mut rng, len);
            (Op::Delete { start: s, end: e }, Plan::Delete(s, e))
        } else if choice < 30 || len == 0 && choice < 50 {
            let pos = rng.gen_range(0..=len);
            let text = random_text(&mut rng);
            (
                Op::Insert {
                    pos,
                    text: text.clone(),
                },
                Plan::Insert(pos, text),
            )
        } else if choice < 40 && len > 0 {
            let (s, e) = range(&mut rng, len);
            (Op::Delete { start: s, end: e }, Plan::Delete(s, e))
        } else if choice < 52 && len > 0 {
            let (s, e) = range(&mut rng, len);
            let text = random_text(&mut rng);
            (
                Op::Replace {
                    start: s,
                    end: e,
                    text: text.clone(),
                },
                Plan::Replace(s, e, text),
            )
        } else if choice < 68 && !prompts.is_empty() {
            let p = &prompts[rng.gen_range(0..prompts.len())];
            let resp: Vec<char> = p.response_text.chars().collect();
            let a = rng.gen_range(0..resp.len());
            let b = rng.gen_range(a + 1..=resp.len());
            let mut text: Vec<char> = resp[a..b].to_vec();
            if rng.gen_bool(0.25) {
                let i = rng.gen_range(0..text.len());
                text[i] = if text[i] == 'Z' { 'Q' } else { 'Z' };
            }
            let text: String = text.into_iter().collect();
            let pos = rng.gen_range(0..=len);
            let response = (!p.redacted).then(|| p.response_text.clone());
            (
                Op::Paste {
                    pos,
                    text: text.clone(),
                    prompt_id: p.id.clone(),
                },
                Plan::Paste(pos, text, p.id.0.clone(), response),
            )
        } else if choice < 76 && len > 0 {
            let (s, e) = range(&mut rng, len);
            let label = if rng.gen_bool(0.5) {
                AttributionLabel::AiWritten
            } else {
                AttributionLabel::AiInfluenced
            };
            let link = if !prompts.is_empty() && rng.gen_bool(0.6) {
                Some(prompts[rng.gen_range(0..prompts.len())].id.clone())
            } else {
                None
            };
            let plan_link = link.as_ref().map(|l| l.0.clone());
            (
                Op::Label {
                    start: s,
                    end: e,
                    label,
                    prompt_id: link,
                },
                Plan::Label(s, e, label, plan_link),
            )
        } else if choice < 84 && len > 0 {
            let (s, e) = range(&mut rng, len);
            (Op::Unlabel { start: s, end: e }, Plan::Unlabel(s, e))
        } else if choice < 92 {
            let prompt = PROMPTS[rng.gen_range(0..PROMPTS.len())].to_owned();
            let context = (len > 3 && rng.gen_bool(0.4)).then(|| {
                let (s, e) = range(&mut rng, len);
                session.document().slice(s, e)
            });
            (
                Op::IssuePrompt {
                    prompt_text: prompt,
                    context_text: context.filter(|c| !c.is_empty()),
                },
                Plan::NoDocChange,
            )
        } else if choice < 95 && !prompts.is_empty() {
            let p = &prompts[rng.gen_range(0..prompts.len())];
            if p.redacted {
                (
                    Op::Regenerate {
                        prompt_id: p.id.clone(),
                    },
                    Plan::ExpectError,
                )
            } else {
                (
                    Op::Regenerate {
                        prompt_id: p.id.clone(),
                    },
                    Plan::NoDocChange,
                )
            }
        } else if choice < 97 && !prompts.is_empty() {
            let p = &prompts[rng.gen_range(0..prompts.len())];
            let ack = rng.gen_bool(0.5).then(|| "used for drafting".to_owned());
            let plan = if p.redacted {
                Plan::ExpectError
            } else {
                Plan::NoDocChange
            };
            (
                Op::Redact {
                    prompt_id: p.id.clone(),
                    acknowledgment: ack,
                },
                plan,
            )
        } else {
            // Deliberately out of range.
            (
                Op::Delete {
                    start: len,
                    end: len + 3,
                },
                Plan::ExpectError,
            )
        };

        let before = session.clone();
        let expect_error = matches!(plan, Plan::ExpectError);
        let rev = session.revision();
        match session.apply_op(rev, op.clone(), &gateway, clock) {
            Ok(_) => {
                if expect_error {
                    out.unexpected_errors
                        .push(format!("seed {seed}: {op:?} should have failed"));
                }
                match plan {
                    Plan::Insert(p, t) => oracle.insert(p, &t),
                    Plan::Delete(s, e) => oracle.delete(s, e),
                    Plan::Replace(s, e, t) => oracle.replace(s, e, &t),
                    Plan::Paste(p, t, id, r) => oracle.paste(p, &t, &id, r.as_deref()),
                    Plan::Label(s, e, l, link) => oracle.label(s, e, l, link.as_deref()),
                    Plan::Unlabel(s, e) => oracle.unlabel(s, e),
                    Plan::NoDocChange | Plan::ExpectError => {}
                }
                out.snapshots.push(session.document().clone());
                out.log_lengths.push(session.log().len());
            }
            Err(e) => {
                if !expect_error {
                    out.unexpected_errors
                        .push(format!("seed {seed}: {op:?} failed: {e}"));
                }
                if session != before {
                    out.unexpected_errors
                        .push(format!("seed {seed}: failed op mutated state"));
                }
            }
        }

        let doc = session.document();
        if provenance_core::attribution::check_tiling(doc.spans(), doc.len()).is_err() {
            out.tiling_failures += 1;
        }
        if !oracle.matches(doc) {
            out.oracle_mismatches += 1;
        }
    }
    out.session = session;
    out
}
