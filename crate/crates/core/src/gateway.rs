//! Language-model access behind a small [`Transport`] trait.
//!
//! A request is composed into a single provider message (`context`, a blank
//! line, then `prompt`) and sent through whichever transport the gateway was
//! built with. Tests and offline runs use [`ScriptedTransport`] or
//! [`SyntheticTransport`]; [`LiveTransport`] talks to an OpenAI-compatible
//! chat-completions endpoint configured from the environment.

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const ENV_ENDPOINT: &str = "LLM_ENDPOINT";
pub const ENV_API_KEY: &str = "LLM_API_KEY";
pub const ENV_MODEL: &str = "LLM_MODEL";

pub const DEFAULT_MAX_TOKENS: u32 = 512;
pub const DEFAULT_TEMPERATURE: f64 = 0.7;

const SUGGESTED: [&str; 5] = [
    "summarize",
    "elaborate",
    "enumerate",
    "introduce",
    "conclude",
];

/// Standardized composition interactions offered by the prompt wizard.
pub fn suggested_interactions() -> &'static [&'static str] {
    &SUGGESTED
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GatewayError {
    #[error("invalid request: {0}")]
    InvalidRequest(&'static str),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("provider refused the request: {0}")]
    ProviderRefusal(String),
    #[error("request timed out")]
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    pub model_id: String,
    pub max_tokens: u32,
    pub temperature: f64,
}

impl GenerationParams {
    pub fn for_model(model_id: impl Into<String>) -> Self {
        GenerationParams {
            model_id: model_id.into(),
            max_tokens: DEFAULT_MAX_TOKENS,
            temperature: DEFAULT_TEMPERATURE,
        }
    }
}

impl Default for GenerationParams {
    fn default() -> Self {
        Self::for_model("mock")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionRequest {
    prompt_text: String,
    context_text: Option<String>,
    params: GenerationParams,
}

impl CompletionRequest {
    pub fn new(
        prompt_text: impl Into<String>,
        context_text: Option<String>,
        params: GenerationParams,
    ) -> Result<Self, GatewayError> {
        let prompt_text = prompt_text.into();
        if prompt_text.is_empty() {
            return Err(GatewayError::InvalidRequest("prompt_text is empty"));
        }
        if context_text.as_deref() == Some("") {
            return Err(GatewayError::InvalidRequest(
                "context_text is present but empty",
            ));
        }
        if params.max_tokens == 0 {
            return Err(GatewayError::InvalidRequest("max_tokens must be positive"));
        }
        if !(params.temperature >= 0.0 && params.temperature.is_finite()) {
            return Err(GatewayError::InvalidRequest(
                "temperature must be non-negative",
            ));
        }
        Ok(CompletionRequest {
            prompt_text,
            context_text,
            params,
        })
    }

    pub fn prompt_text(&self) -> &str {
        &self.prompt_text
    }

    pub fn context_text(&self) -> Option<&str> {
        self.context_text.as_deref()
    }

    pub fn params(&self) -> &GenerationParams {
        &self.params
    }

    /// The single provider message: context, a blank line, then the prompt.
    pub fn message(&self) -> String {
        match &self.context_text {
            Some(ctx) => format!("{ctx}\n\n{}", self.prompt_text),
            None => self.prompt_text.clone(),
        }
    }

    pub fn payload(&self) -> ProviderPayload {
        ProviderPayload {
            model: self.params.model_id.clone(),
            max_tokens: self.params.max_tokens,
            temperature: self.params.temperature,
            message: self.message(),
        }
    }
}

/// What actually goes over the wire for one completion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProviderPayload {
    pub model: String,
    pub max_tokens: u32,
    pub temperature: f64,
    pub message: String,
}

impl ProviderPayload {
    /// OpenAI-style chat body, serialized with a fixed key order.
    pub fn to_bytes(&self) -> Vec<u8> {
        #[derive(Serialize)]
        struct Message<'a> {
            role: &'a str,
            content: &'a str,
        }
        #[derive(Serialize)]
        struct Body<'a> {
            model: &'a str,
            messages: [Message<'a>; 1],
            max_tokens: u32,
            temperature: f64,
        }
        let body = Body {
            model: &self.model,
            messages: [Message {
                role: "user",
                content: &self.message,
            }],
            max_tokens: self.max_tokens,
            temperature: self.temperature,
        };
        serde_json::to_vec(&body).expect("payload serializes")
    }
}

pub trait Transport: Send + Sync {
    fn send(&self, payload: &ProviderPayload) -> Result<String, GatewayError>;
}

#[derive(Clone)]
pub struct Gateway {
    transport: Arc<dyn Transport>,
    params: GenerationParams,
}

impl std::fmt::Debug for Gateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gateway")
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

impl Gateway {
    pub fn new(transport: impl Transport + 'static) -> Self {
        Gateway {
            transport: Arc::new(transport),
            params: GenerationParams::default(),
        }
    }

    pub fn with_params(mut self, params: GenerationParams) -> Self {
        self.params = params;
        self
    }

    /// Live transport configured from `LLM_ENDPOINT`, `LLM_API_KEY` and
    /// `LLM_MODEL`.
    pub fn live_from_env() -> Self {
        let transport = LiveTransport::from_env();
        let model = std::env::var(ENV_MODEL).unwrap_or_else(|_| "gpt-4".to_owned());
        Gateway::new(transport).with_params(GenerationParams::for_model(model))
    }

    pub fn default_params(&self) -> GenerationParams {
        self.params.clone()
    }

    pub fn complete(&self, request: &CompletionRequest) -> Result<String, GatewayError> {
        self.transport.send(&request.payload())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptEntry {
    pub prompt: String,
    pub response: String,
}

/// Fixture format for [`ScriptedTransport`].
///
/// ```json
/// { "responses": [ { "prompt": "continue the story", "response": "The rain began." } ],
///   "default": "optional reply for unmatched messages" }
/// ```
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptFixture {
    #[serde(default)]
    pub responses: Vec<ScriptEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<String>,
}

/// Replies from a fixed prompt→response table.
///
/// An entry matches when the provider message equals its `prompt`, or ends
/// with a blank line followed by it (the prompt sent with a context). Repeated
/// entries for the same prompt are served in order; the last one repeats.
/// Unmatched messages get the `default` reply or a transport error.
#[derive(Debug, Default)]
pub struct ScriptedTransport {
    fixture: ScriptFixture,
    served: Mutex<HashMap<String, usize>>,
}

impl ScriptedTransport {
    pub fn new(fixture: ScriptFixture) -> Self {
        ScriptedTransport {
            fixture,
            served: Mutex::new(HashMap::new()),
        }
    }

    pub fn from_pairs<I, P, R>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (P, R)>,
        P: Into<String>,
        R: Into<String>,
    {
        Self::new(ScriptFixture {
            responses: pairs
                .into_iter()
                .map(|(p, r)| ScriptEntry {
                    prompt: p.into(),
                    response: r.into(),
                })
                .collect(),
            default: None,
        })
    }

    /// Replies `reply` to everything.
    pub fn always(reply: impl Into<String>) -> Self {
        Self::new(ScriptFixture {
            responses: Vec::new(),
            default: Some(reply.into()),
        })
    }

    pub fn with_default(mut self, reply: impl Into<String>) -> Self {
        self.fixture.default = Some(reply.into());
        self
    }

    pub fn load(path: &Path) -> Result<Self, GatewayError> {
        let bytes = std::fs::read(path)
            .map_err(|e| GatewayError::Transport(format!("{}: {e}", path.display())))?;
        let fixture: ScriptFixture = serde_json::from_slice(&bytes)
            .map_err(|e| GatewayError::Transport(format!("{}: {e}", path.display())))?;
        Ok(Self::new(fixture))
    }

    fn matches(message: &str, prompt: &str) -> bool {
        message == prompt
            || message
                .strip_suffix(prompt)
                .is_some_and(|head| head.ends_with("\n\n"))
    }
}

impl Transport for ScriptedTransport {
    fn send(&self, payload: &ProviderPayload) -> Result<String, GatewayError> {
        let candidates: Vec<&ScriptEntry> = self
            .fixture
            .responses
            .iter()
            .filter(|e| Self::matches(&payload.message, &e.prompt))
            .collect();
        if let Some(first) = candidates.first() {
            let mut served = self.served.lock().expect("script counter poisoned");
            let n = served.entry(first.prompt.clone()).or_insert(0);
            let reply = candidates[(*n).min(candidates.len() - 1)].response.clone();
            *n += 1;
            return Ok(reply);
        }
        self.fixture
            .default
            .clone()
            .ok_or_else(|| GatewayError::Transport("no scripted response for message".into()))
    }
}

/// Deterministic pseudo-prose: the reply depends only on the seed and the
/// payload bytes.
#[derive(Debug, Clone, Copy)]
pub struct SyntheticTransport {
    seed: u64,
}

const VOCAB: &[&str] = &[
    "rain",
    "harbor",
    "light",
    "keeper",
    "storm",
    "quiet",
    "the",
    "a",
    "over",
    "under",
    "slowly",
    "bright",
    "window",
    "sea",
    "old",
    "pier",
    "night",
    "walked",
    "listened",
    "remembered",
    "and",
    "of",
    "wind",
    "letters",
    "morning",
    "stone",
    "river",
    "voice",
    "shadow",
    "garden",
];

impl SyntheticTransport {
    pub fn new(seed: u64) -> Self {
        SyntheticTransport { seed }
    }
}

/// FNV-1a, used to fold payload bytes into the RNG seed.
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(*b)).wrapping_mul(0x0100_0000_01b3)
    })
}

impl Transport for SyntheticTransport {
    fn send(&self, payload: &ProviderPayload) -> Result<String, GatewayError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ fnv1a(&payload.to_bytes()));
        let sentences = rng.gen_range(1..=3);
        let mut out = String::new();
        for i in 0..sentences {
            if i > 0 {
                out.push(' ');
            }
            let words = rng.gen_range(4..=10);
            for w in 0..words {
                let word = VOCAB.choose(&mut rng).expect("vocab is non-empty");
                if w == 0 {
                    let mut chars = word.chars();
                    if let Some(c) = chars.next() {
                        out.extend(c.to_uppercase());
                        out.push_str(chars.as_str());
                    }
                } else {
                    out.push(' ');
                    out.push_str(word);
                }
            }
            out.push('.');
        }
        Ok(out)
    }
}

/// OpenAI-compatible chat completions over HTTPS.
#[derive(Debug, Clone)]
pub struct LiveTransport {
    endpoint: Option<String>,
    api_key: Option<String>,
    timeout: Duration,
}

impl LiveTransport {
    pub fn new(endpoint: Option<String>, api_key: Option<String>) -> Self {
        LiveTransport {
            endpoint,
            api_key,
            timeout: Duration::from_secs(60),
        }
    }

    pub fn from_env() -> Self {
        let non_empty = |k| std::env::var(k).ok().filter(|v: &String| !v.is_empty());
        Self::new(non_empty(ENV_ENDPOINT), non_empty(ENV_API_KEY))
    }
}

impl Transport for LiveTransport {
    fn send(&self, payload: &ProviderPayload) -> Result<String, GatewayError> {
        let endpoint = self
            .endpoint
            .as_deref()
            .ok_or_else(|| GatewayError::Transport(format!("{ENV_ENDPOINT} is not set")))?;
        let key = self
            .api_key
            .as_deref()
            .ok_or_else(|| GatewayError::Transport(format!("{ENV_API_KEY} is not set")))?;
        let client = reqwest::blocking::Client::builder()
            .timeout(self.timeout)
            .build()
            .map_err(|e| GatewayError::Transport(e.to_string()))?;
        let response = client
            .post(endpoint)
            .bearer_auth(key)
            .header(reqwest::header::CONTENT_TYPE, "application/json")
            .body(payload.to_bytes())
            .send()
            .map_err(|e| {
                if e.is_timeout() {
                    GatewayError::Timeout
                } else {
                    GatewayError::Transport(e.to_string())
                }
            })?;
        let status = response.status();
        let body: serde_json::Value = response
            .json()
            .map_err(|e| GatewayError::Transport(e.to_string()))?;
        if status.is_client_error() && (status.as_u16() == 401 || status.as_u16() == 403) {
            return Err(GatewayError::Transport(format!(
                "authentication failed: {status}"
            )));
        }
        if !status.is_success() {
            return Err(GatewayError::ProviderRefusal(body.to_string()));
        }
        body.pointer("/choices/0/message/content")
            .and_then(|v| v.as_str())
            .map(str::to_owned)
            .ok_or_else(|| GatewayError::ProviderRefusal(body.to_string()))
    }
}
