//! HTTP verifier client for hosted compile/judge services.
//!
//! Wire contract: one POST per predicate at `/syntax`, `/consistency` and
//! `/critique` with JSON body `{question, statement, critique?}`; the
//! service answers `{"pass": true|false, "detail": "..."}`. The client
//! retries with exponential backoff and raises
//! [`VerifierError::Unavailable`] once retries are exhausted.

use super::{CritiqueView, Judgment, Question, VerifierBackend, VerifierError};
use serde::{Deserialize, Serialize};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RemoteConfig {
    pub base_url: String,
    /// Per-request timeout in seconds.
    pub timeout_secs: u64,
    /// Attempts per predicate call (first try plus retries).
    pub max_attempts: u32,
    /// Initial backoff, doubled after each failed attempt.
    pub backoff_ms: u64,
    /// Maximum concurrent in-flight requests.
    pub max_in_flight: usize,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        Self {
            base_url: "http://127.0.0.1:8080".to_string(),
            timeout_secs: 30,
            max_attempts: 3,
            backoff_ms: 100,
            max_in_flight: 8,
        }
    }
}

#[derive(Serialize)]
struct PredicateRequest<'a> {
    question: &'a str,
    statement: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    critique: Option<String>,
}

#[derive(Deserialize)]
struct PredicateResponse {
    pass: bool,
    #[serde(default)]
    detail: String,
}

struct Gate {
    slots: Mutex<usize>,
    freed: Condvar,
}

impl Gate {
    fn new(capacity: usize) -> Self {
        Self { slots: Mutex::new(capacity.max(1)), freed: Condvar::new() }
    }

    fn acquire(&self) -> GateGuard<'_> {
        let mut slots = self.slots.lock().expect("gate lock");
        while *slots == 0 {
            slots = self.freed.wait(slots).expect("gate lock");
        }
        *slots -= 1;
        GateGuard { gate: self }
    }
}

struct GateGuard<'a> {
    gate: &'a Gate,
}

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        *self.gate.slots.lock().expect("gate lock") += 1;
        self.gate.freed.notify_one();
    }
}

pub struct RemoteBackend {
    config: RemoteConfig,
    client: reqwest::blocking::Client,
    gate: Gate,
}

impl RemoteBackend {
    pub fn new(config: RemoteConfig) -> Result<Self, VerifierError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| VerifierError::unavailable("remote", format!("client build: {e}")))?;
        let gate = Gate::new(config.max_in_flight);
        Ok(Self { config, client, gate })
    }

    pub fn with_base_url(base_url: impl Into<String>) -> Result<Self, VerifierError> {
        Self::new(RemoteConfig { base_url: base_url.into(), ..RemoteConfig::default() })
    }

    fn post(&self, path: &str, body: &PredicateRequest<'_>) -> Result<Judgment, VerifierError> {
        let url = format!("{}{}", self.config.base_url.trim_end_matches('/'), path);
        let _slot = self.gate.acquire();
        let mut backoff = Duration::from_millis(self.config.backoff_ms);
        let mut last_error = String::new();
        for attempt in 0..self.config.max_attempts {
            if attempt > 0 {
                std::thread::sleep(backoff);
                backoff *= 2;
            }
            match self.client.post(&url).json(body).send() {
                Ok(resp) if resp.status().is_success() => {
                    let parsed: PredicateResponse = resp.json().map_err(|e| {
                        VerifierError::unavailable("remote", format!("bad response body: {e}"))
                    })?;
                    return Ok(Judgment { pass: parsed.pass, detail: parsed.detail });
                }
                Ok(resp) => last_error = format!("HTTP {} from {url}", resp.status()),
                Err(e) => last_error = format!("{e}"),
            }
        }
        Err(VerifierError::unavailable(
            "remote",
            format!("{} attempts failed, last: {last_error}", self.config.max_attempts),
        ))
    }
}

impl VerifierBackend for RemoteBackend {
    fn id(&self) -> &str {
        "remote"
    }

    fn syntax_check(&self, statement: &str) -> Result<Judgment, VerifierError> {
        self.post("/syntax", &PredicateRequest { question: "", statement, critique: None })
    }

    fn consistency_check(
        &self,
        question: &Question,
        statement: &str,
    ) -> Result<Judgment, VerifierError> {
        self.post(
            "/consistency",
            &PredicateRequest { question: &question.text, statement, critique: None },
        )
    }

    fn critique_check(
        &self,
        question: &Question,
        statement: &str,
        critique: CritiqueView<'_>,
    ) -> Result<Judgment, VerifierError> {
        // The critique travels with its verdict as the final line, the same
        // shape it has inside a transcript round.
        let text = if critique.text.is_empty() {
            critique.verdict.keyword().to_string()
        } else {
            format!("{}\n{}", critique.text, critique.verdict.keyword())
        };
        self.post(
            "/critique",
            &PredicateRequest { question: &question.text, statement, critique: Some(text) },
        )
    }
}
