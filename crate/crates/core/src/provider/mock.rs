//! Deterministic backends for tests, benches and offline runs.
//!
//! Lookup order for a request: the tag's script queue, an exact fixture
//! (tag + prompt hash), the tag's default fixture, then the fallback
//! responder. A miss on all four is a `NoFixture` transport error.

use std::collections::{HashMap, VecDeque};
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use super::{prompt_hash, tags, Backend, CompletionRequest, TransportError, TransportErrorKind};

/// One record of a fixture directory. See `fixtures/README.md`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureRecord {
    pub tag: String,
    /// Literal prompt; hashed at load time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_sha256: Option<String>,
    pub completion: String,
}

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error("reading fixtures: {0}")]
    Io(#[from] std::io::Error),
    #[error("fixture file {file}: {message}")]
    Format { file: String, message: String },
}

#[derive(Debug, Clone)]
enum Scripted {
    Text(String),
    Fail(String),
}

/// Last-resort source of completions for requests no fixture covers.
pub trait Fallback: Send + Sync {
    fn respond(&self, req: &CompletionRequest) -> Option<String>;
}

impl<F> Fallback for F
where
    F: Fn(&CompletionRequest) -> Option<String> + Send + Sync,
{
    fn respond(&self, req: &CompletionRequest) -> Option<String> {
        self(req)
    }
}

type Responder = Arc<dyn Fallback>;

#[derive(Default)]
pub struct MockBackend {
    exact: HashMap<(String, String), String>,
    defaults: HashMap<String, String>,
    scripts: Mutex<HashMap<String, VecDeque<Scripted>>>,
    fallback: Option<Responder>,
    latency: Option<Duration>,
}

impl MockBackend {
    pub fn new() -> Self {
        Self::default()
    }

    #[must_use]
    pub fn with_fixture(mut self, tag: &str, prompt: &str, completion: &str) -> Self {
        self.exact.insert(
            (tag.to_string(), prompt_hash(prompt)),
            completion.to_string(),
        );
        self
    }

    /// Completion for any prompt under `tag` that has no exact fixture.
    #[must_use]
    pub fn with_default(mut self, tag: &str, completion: &str) -> Self {
        self.defaults
            .insert(tag.to_string(), completion.to_string());
        self
    }

    /// Completions handed out in order, one per call, before any fixture.
    #[must_use]
    pub fn with_script<I, S>(self, tag: &str, outputs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.scripts
            .lock()
            .entry(tag.to_string())
            .or_default()
            .extend(outputs.into_iter().map(|s| Scripted::Text(s.into())));
        self
    }

    /// Queues `count` transport failures for `tag`.
    #[must_use]
    pub fn with_failures(self, tag: &str, count: usize) -> Self {
        self.scripts
            .lock()
            .entry(tag.to_string())
            .or_default()
            .extend((0..count).map(|i| Scripted::Fail(format!("scripted failure {i}"))));
        self
    }

    #[must_use]
    pub fn with_fallback(mut self, responder: impl Fallback + 'static) -> Self {
        self.fallback = Some(Arc::new(responder));
        self
    }

    /// Sleeps this long inside every call, to mimic network latency.
    #[must_use]
    pub fn with_latency(mut self, latency: Duration) -> Self {
        self.latency = Some(latency);
        self
    }

    pub fn add_record(&mut self, record: FixtureRecord) {
        let hash = record
            .prompt_sha256
            .clone()
            .or_else(|| record.prompt.as_deref().map(prompt_hash));
        match hash {
            Some(h) => {
                self.exact.insert((record.tag, h), record.completion);
            }
            None => {
                self.defaults.insert(record.tag, record.completion);
            }
        }
    }

    /// Loads every `*.json` file in `dir` (sorted by name; later files win).
    /// A file holds one [`FixtureRecord`] or an array of them; other JSON
    /// files without a `tag` field are skipped.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self, FixtureError> {
        let mut mock = Self::new();
        let mut paths: Vec<_> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "json"))
            .collect();
        paths.sort();
        for path in paths {
            let text = std::fs::read_to_string(&path)?;
            let file = path.display().to_string();
            let value: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| FixtureError::Format {
                    file: file.clone(),
                    message: e.to_string(),
                })?;
            let items = match value {
                serde_json::Value::Array(items) => items,
                serde_json::Value::Object(ref o) if o.contains_key("tag") => vec![value],
                _ => continue,
            };
            for item in items {
                let record: FixtureRecord =
                    serde_json::from_value(item).map_err(|e| FixtureError::Format {
                        file: file.clone(),
                        message: e.to_string(),
                    })?;
                mock.add_record(record);
            }
        }
        Ok(mock)
    }
}

impl Backend for MockBackend {
    fn complete(&self, req: &CompletionRequest) -> Result<String, TransportError> {
        if let Some(latency) = self.latency {
            std::thread::sleep(latency);
        }
        let scripted = self
            .scripts
            .lock()
            .get_mut(&req.tag)
            .and_then(VecDeque::pop_front);
        match scripted {
            Some(Scripted::Text(t)) => return Ok(t),
            Some(Scripted::Fail(m)) => {
                return Err(TransportError::new(TransportErrorKind::Connection, m))
            }
            None => {}
        }
        let key = (req.tag.clone(), prompt_hash(&req.prompt));
        if let Some(t) = self.exact.get(&key) {
            return Ok(t.clone());
        }
        if let Some(t) = self.defaults.get(&req.tag) {
            return Ok(t.clone());
        }
        if let Some(t) = self.fallback.as_ref().and_then(|f| f.respond(req)) {
            return Ok(t);
        }
        Err(TransportError::new(
            TransportErrorKind::NoFixture,
            format!("no fixture for tag {} prompt {}", req.tag, &key.1[..12]),
        ))
    }
}

const NOMINAL_POOL: [&str; 16] = [
    "Genre",
    "Tone",
    "Setting",
    "Style",
    "Perspective",
    "Mood",
    "Pacing",
    "Voice",
    "Theme",
    "Era",
    "Audience",
    "Conflict",
    "Protagonist",
    "Imagery",
    "Ending",
    "Format",
];

const ORDINAL_POOL: [&str; 12] = [
    "Creativity",
    "Imagination",
    "Suspense",
    "Realism",
    "Concreteness",
    "Humor",
    "Formality",
    "Subjectivity",
    "Intensity",
    "Optimism",
    "Complexity",
    "Whimsy",
];

/// Generates well-formed completions for every pipeline request tag,
/// derived only from the prompt text, so runs are reproducible.
#[derive(Debug, Clone, Copy, Default)]
pub struct SyntheticResponder {
    /// Extra dimensions and values beyond what the prompt asks for.
    pub oversupply: usize,
}

impl SyntheticResponder {
    pub fn oversupplied(extra: usize) -> Self {
        Self { oversupply: extra }
    }
}

impl Fallback for SyntheticResponder {
    fn respond(&self, req: &CompletionRequest) -> Option<String> {
        let p = req.prompt.as_str();
        let out = match req.tag.as_str() {
            tags::NOMINAL_DIMENSIONS => {
                let cat = number_before(p, " nominal dimensions and associated")?;
                let val = number_before(p, " possible values")?;
                let entries: Vec<String> = NOMINAL_POOL
                    .iter()
                    .cycle()
                    .take(cat + self.oversupply)
                    .enumerate()
                    .map(|(i, name)| {
                        let name = if i < NOMINAL_POOL.len() {
                            name.to_string()
                        } else {
                            format!("{name} {}", i / NOMINAL_POOL.len() + 1)
                        };
                        json_entry(&name, &labels(&name, val + self.oversupply))
                    })
                    .collect();
                format!("{{\n{}\n}}", entries.join(",\n"))
            }
            tags::ORDINAL_DIMENSIONS => {
                let cat = number_before(p, " ordinal dimensions")?;
                let entries: Vec<String> = ORDINAL_POOL
                    .iter()
                    .take(cat + self.oversupply)
                    .map(|name| json_entry(name, &crate::model::ORDINAL_LEVELS.map(str::to_string)))
                    .collect();
                format!("{{\n{}\n}}", entries.join(",\n"))
            }
            tags::DIMENSION_VALUES => {
                let name = between(p, "list the nominal dimension \"", "\"")?;
                let val = number_before(p, " possible values")?;
                format!("{{\n{}\n}}", json_entry(name, &labels(name, val)))
            }
            tags::RESPONSE => {
                let reqs = p.rsplit("Requirements: ").next().unwrap_or("");
                let tags_line = reqs.lines().collect::<Vec<_>>().join("; ");
                format!(
                    "Draft {}. A piece written to order: {tags_line}. It closes on a quiet note.",
                    &prompt_hash(p)[..8]
                )
            }
            tags::REVISE => {
                let text = between(p, "This is the context: ", "\n---end context ---")?;
                let extra = p.lines().last().unwrap_or("");
                format!("{text} Revised for {extra}.")
            }
            tags::SUMMARIZE => {
                let text = between(p, "Text is: ", "\n####")?;
                let words: Vec<&str> = text.split_whitespace().collect();
                let mut keywords: Vec<&str> = words
                    .iter()
                    .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()))
                    .filter(|w| w.len() > 3)
                    .take(5)
                    .collect();
                if keywords.is_empty() {
                    keywords.push("text");
                }
                serde_json::json!({
                    "Key Words": keywords,
                    "Summary": words.iter().take(12).copied().collect::<Vec<_>>().join(" "),
                    "Structure": "Opening-Middle-Close",
                    "Title": format!("Piece {}", &prompt_hash(text)[..6]),
                })
                .to_string()
            }
            tags::SUGGEST_DIMENSION => NOMINAL_POOL
                .iter()
                .chain(ORDINAL_POOL.iter())
                .find(|name| !p.contains(&format!("\n{name}(")))?
                .to_string(),
            _ => return None,
        };
        Some(out)
    }
}

impl MockBackend {
    /// A mock that answers every request synthetically.
    pub fn synthetic() -> Self {
        Self::new().with_fallback(SyntheticResponder::default())
    }
}

/// The integer written just before `marker`, e.g. `5` in "list 5 nominal".
/// Occurrences of `marker` not preceded by a number are skipped.
fn number_before(text: &str, marker: &str) -> Option<usize> {
    text.match_indices(marker).find_map(|(at, _)| {
        let head = &text[..at];
        let start = head
            .rfind(|c: char| !c.is_ascii_digit())
            .map_or(0, |i| i + 1);
        head[start..].parse().ok()
    })
}

fn between<'a>(text: &'a str, open: &str, close: &str) -> Option<&'a str> {
    let start = text.find(open)? + open.len();
    let len = text[start..].find(close)?;
    Some(&text[start..start + len])
}

fn labels(name: &str, count: usize) -> Vec<String> {
    (1..=count)
        .map(|i| format!("{name} {}", variant(i)))
        .collect()
}

fn variant(i: usize) -> String {
    const WORDS: [&str; 10] = [
        "Alpha", "Bravo", "Cedar", "Delta", "Ember", "Fjord", "Garnet", "Harbor", "Iris", "Juniper",
    ];
    let word = WORDS[(i - 1) % WORDS.len()];
    match (i - 1) / WORDS.len() {
        0 => word.to_string(),
        n => format!("{word} {}", n + 1),
    }
}

fn json_entry(name: &str, values: &[String]) -> String {
    let values: Vec<String> = values
        .iter()
        .map(|v| serde_json::Value::String(v.clone()).to_string())
        .collect();
    format!(
        "{}: [{}]",
        serde_json::Value::String(name.to_string()),
        values.join(", ")
    )
}
