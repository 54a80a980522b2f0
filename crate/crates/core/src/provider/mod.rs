//! Completion backends and the retry loop over malformed output.
//!
//! A [`Provider`] wraps any [`Backend`] with an admission gate (bounding
//! in-flight calls) and a [`CallLedger`]. [`Provider::complete_validated`]
//! re-issues a request until its completion parses, counting every
//! transport error or parse failure as one failed attempt.

mod gate;
mod http;
mod ledger;
pub mod mock;

pub use gate::AdmissionGate;
pub use http::{HttpBackend, HttpConfig};
pub use ledger::{CallLedger, TagCounts};
pub use mock::{FixtureRecord, MockBackend, SyntheticResponder};

use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::prompt::ParseFailure;

/// Request tags used by the pipeline. Ledgers and fixtures key on these.
pub mod tags {
    pub const NOMINAL_DIMENSIONS: &str = "dimensions.nominal";
    pub const ORDINAL_DIMENSIONS: &str = "dimensions.ordinal";
    pub const RESPONSE: &str = "response";
    pub const SUMMARIZE: &str = "summarize";
    pub const DIMENSION_VALUES: &str = "dimension.values";
    pub const REVISE: &str = "revise";
    pub const SUGGEST_DIMENSION: &str = "dimension.suggest";

    pub const ALL: [&str; 7] = [
        NOMINAL_DIMENSIONS,
        ORDINAL_DIMENSIONS,
        RESPONSE,
        SUMMARIZE,
        DIMENSION_VALUES,
        REVISE,
        SUGGEST_DIMENSION,
    ];
}

/// Hex SHA-256 of a prompt, the fixture lookup key.
pub fn prompt_hash(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub prompt: String,
    pub max_tokens: u32,
    pub temperature: f64,
    pub tag: String,
}

impl CompletionRequest {
    pub fn new(tag: &str, prompt: impl Into<String>, max_tokens: u32, temperature: f64) -> Self {
        Self {
            prompt: prompt.into(),
            max_tokens: max_tokens.max(1),
            temperature,
            tag: tag.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionResult {
    pub text: String,
    pub latency: Duration,
    pub attempt: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransportErrorKind {
    Timeout,
    Connection,
    Status(u16),
    Protocol,
    NoFixture,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("transport error ({kind:?}): {message}")]
pub struct TransportError {
    pub kind: TransportErrorKind,
    pub message: String,
}

impl TransportError {
    pub fn new(kind: TransportErrorKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum AttemptFailure {
    Transport(TransportError),
    Parse(ParseFailure),
}

impl fmt::Display for AttemptFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttemptFailure::Transport(e) => e.fmt(f),
            AttemptFailure::Parse(e) => write!(f, "parse failure: {e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("{tag}: gave up after {attempts} failed attempts; last: {last}")]
pub struct ExhaustedError {
    pub tag: String,
    pub attempts: usize,
    pub last: AttemptFailure,
}

/// Something that turns a prompt into completion text.
pub trait Backend: Send + Sync {
    fn complete(&self, req: &CompletionRequest) -> Result<String, TransportError>;
}

impl<B: Backend + ?Sized> Backend for Arc<B> {
    fn complete(&self, req: &CompletionRequest) -> Result<String, TransportError> {
        (**self).complete(req)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Validated<T> {
    pub value: T,
    pub result: CompletionResult,
}

/// Shared, cheaply cloneable completion client.
#[derive(Clone)]
pub struct Provider {
    backend: Arc<dyn Backend>,
    gate: Arc<AdmissionGate>,
    ledger: Arc<CallLedger>,
    extra_ledgers: Vec<Arc<CallLedger>>,
}

impl fmt::Debug for Provider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Provider")
            .field("max_in_flight", &self.gate.capacity())
            .field("ledger", &self.ledger.totals())
            .finish()
    }
}

impl Provider {
    pub fn new(backend: impl Backend + 'static, max_in_flight: usize) -> Self {
        Self::from_arc(Arc::new(backend), max_in_flight)
    }

    pub fn from_arc(backend: Arc<dyn Backend>, max_in_flight: usize) -> Self {
        Self {
            backend,
            gate: Arc::new(AdmissionGate::new(max_in_flight)),
            ledger: Arc::new(CallLedger::new()),
            extra_ledgers: Vec::new(),
        }
    }

    pub fn ledger(&self) -> &CallLedger {
        &self.ledger
    }

    pub fn max_in_flight(&self) -> usize {
        self.gate.capacity()
    }

    /// A handle sharing backend, gate and ledger that also records into
    /// `extra`. Used for per-run accounting.
    #[must_use]
    pub fn tracked(&self, extra: Arc<CallLedger>) -> Self {
        let mut p = self.clone();
        p.extra_ledgers.push(extra);
        p
    }

    fn ledgers(&self) -> impl Iterator<Item = &CallLedger> {
        std::iter::once(&*self.ledger).chain(self.extra_ledgers.iter().map(|l| &**l))
    }

    fn attempt(&self, req: &CompletionRequest) -> (Result<String, TransportError>, Duration) {
        let _permit = self.gate.acquire();
        let started = Instant::now();
        let out = self.backend.complete(req);
        (out, started.elapsed())
    }

    /// One backend call, recorded in the ledger.
    pub fn complete(&self, req: &CompletionRequest) -> Result<CompletionResult, TransportError> {
        self.ledgers().for_each(|l| l.begin(&req.tag));
        let (out, latency) = self.attempt(req);
        self.ledgers().for_each(|l| l.settle(&req.tag, out.is_ok()));
        out.map(|text| CompletionResult {
            text,
            latency,
            attempt: 1,
        })
    }

    /// Calls the backend up to `retry_limit` times until `parse` accepts the
    /// completion.
    pub fn complete_validated<T, F>(
        &self,
        req: &CompletionRequest,
        parse: F,
        retry_limit: usize,
    ) -> Result<Validated<T>, ExhaustedError>
    where
        F: Fn(&str) -> Result<T, ParseFailure>,
    {
        let limit = retry_limit.max(1);
        let mut last = None;
        for attempt in 1..=limit {
            self.ledgers().for_each(|l| l.begin(&req.tag));
            let (out, latency) = self.attempt(req);
            let parsed = match out {
                Ok(text) => match parse(&text) {
                    Ok(value) => Ok((value, text)),
                    Err(e) => Err(AttemptFailure::Parse(e)),
                },
                Err(e) => Err(AttemptFailure::Transport(e)),
            };
            self.ledgers()
                .for_each(|l| l.settle(&req.tag, parsed.is_ok()));
            match parsed {
                Ok((value, text)) => {
                    return Ok(Validated {
                        value,
                        result: CompletionResult {
                            text,
                            latency,
                            attempt,
                        },
                    })
                }
                Err(failure) => last = Some(failure),
            }
        }
        Err(ExhaustedError {
            tag: req.tag.clone(),
            attempts: limit,
            last: last.expect("at least one attempt"),
        })
    }
}
