use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::model::{fold, Dimension, DimensionKind, SummaryBundle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParseFailureKind {
    /// Not a single well-formed JSON object of the expected shape.
    Malformed,
    /// Fewer entries than requested.
    WrongCount,
    MissingField,
    InvalidValue,
    Empty,
}

impl ParseFailureKind {
    fn label(self) -> &'static str {
        match self {
            ParseFailureKind::Malformed => "malformed object",
            ParseFailureKind::WrongCount => "wrong entry count",
            ParseFailureKind::MissingField => "missing field",
            ParseFailureKind::InvalidValue => "invalid value",
            ParseFailureKind::Empty => "empty completion",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
pub struct ParseFailure {
    pub kind: ParseFailureKind,
    pub message: String,
}

impl fmt::Display for ParseFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.label(), self.message)
    }
}

impl ParseFailure {
    pub fn new(kind: ParseFailureKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }
}

/// The slice from the first `{` to the last `}`, dropping code fences or
/// chatty prose around the object.
pub fn extract_object(raw: &str) -> Result<&str, ParseFailure> {
    let start = raw.find('{');
    let end = raw.rfind('}');
    match (start, end) {
        (Some(s), Some(e)) if e > s => Ok(&raw[s..=e]),
        _ => Err(ParseFailure::new(
            ParseFailureKind::Malformed,
            "no enclosing brace pair",
        )),
    }
}

fn parse_object(raw: &str) -> Result<Map<String, Value>, ParseFailure> {
    let body = extract_object(raw)?;
    match serde_json::from_str::<Value>(body) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(ParseFailure::new(
            ParseFailureKind::Malformed,
            "top level is not an object",
        )),
        Err(e) => Err(ParseFailure::new(
            ParseFailureKind::Malformed,
            e.to_string(),
        )),
    }
}

fn text_array(key: &str, value: &Value) -> Result<Vec<String>, ParseFailure> {
    let Value::Array(items) = value else {
        return Err(ParseFailure::new(
            ParseFailureKind::Malformed,
            format!("{key:?} is not an array"),
        ));
    };
    items
        .iter()
        .map(|v| match v {
            Value::String(s) => Ok(s.clone()),
            _ => Err(ParseFailure::new(
                ParseFailureKind::Malformed,
                format!("{key:?} holds a non-text value"),
            )),
        })
        .collect()
}

/// Parses a `{"Name": ["v1", ...], ...}` completion into dimensions.
///
/// Names are de-duplicated case-insensitively. Extra entries beyond
/// `expected_count` are dropped; fewer is a failure. Ordinal entries keep only
/// their names; values become the canonical five levels.
pub fn parse_dimension_object(
    raw: &str,
    kind: DimensionKind,
    expected_count: usize,
    value_cap: usize,
) -> Result<Vec<Dimension>, ParseFailure> {
    let map = parse_object(raw)?;
    let mut seen = HashSet::new();
    let mut dims = Vec::with_capacity(expected_count);
    for (name, value) in &map {
        let labels = text_array(name, value)?;
        if name.trim().is_empty() {
            return Err(ParseFailure::new(
                ParseFailureKind::InvalidValue,
                "empty dimension name",
            ));
        }
        if !seen.insert(fold(name)) {
            continue;
        }
        let dim = match kind {
            DimensionKind::Ordinal => Dimension::ordinal(name),
            DimensionKind::Nominal => Dimension::nominal(name, labels, value_cap),
        }
        .map_err(|e| ParseFailure::new(ParseFailureKind::InvalidValue, e.to_string()))?;
        dims.push(dim);
    }
    if dims.len() < expected_count {
        return Err(ParseFailure::new(
            ParseFailureKind::WrongCount,
            format!("expected {expected_count} dimensions, got {}", dims.len()),
        ));
    }
    dims.truncate(expected_count);
    Ok(dims)
}

fn field<'a>(map: &'a Map<String, Value>, wanted: &str) -> Option<&'a Value> {
    let squash = |s: &str| {
        s.chars()
            .filter(|c| c.is_alphanumeric())
            .collect::<String>()
            .to_lowercase()
    };
    let wanted = squash(wanted);
    map.iter()
        .find(|(k, _)| squash(k) == wanted)
        .map(|(_, v)| v)
}

fn text_field(map: &Map<String, Value>, name: &str) -> Result<String, ParseFailure> {
    match field(map, name) {
        None => Err(ParseFailure::new(ParseFailureKind::MissingField, name)),
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(ParseFailure::new(
            ParseFailureKind::Malformed,
            format!("{name} is not text"),
        )),
    }
}

/// Parses the four-field summarization object. Over-cap fields are
/// truncated; missing or empty fields fail.
pub fn parse_summary_object(raw: &str) -> Result<SummaryBundle, ParseFailure> {
    let map = parse_object(raw)?;
    let keywords = match field(&map, "Key Words") {
        None => {
            return Err(ParseFailure::new(
                ParseFailureKind::MissingField,
                "Key Words",
            ))
        }
        Some(Value::String(s)) => s.split(',').map(str::to_string).collect(),
        Some(v) => text_array("Key Words", v)?,
    };
    let summary = text_field(&map, "Summary")?;
    let structure = text_field(&map, "Structure")?;
    let title = text_field(&map, "Title")?;
    SummaryBundle::capped(keywords, &summary, &structure, &title)
        .map_err(|e| ParseFailure::new(ParseFailureKind::InvalidValue, e.to_string()))
}

/// A bare dimension name from a free-text completion: the first non-empty
/// line, without quotes, trailing punctuation, a leading `Label:` or a
/// `(Kind):[...]` tail.
pub fn parse_dimension_name(raw: &str) -> Result<String, ParseFailure> {
    let line = raw
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .ok_or_else(|| ParseFailure::new(ParseFailureKind::Empty, "no dimension name"))?;
    let mut name = line;
    if let Some(idx) = name.find('(') {
        name = &name[..idx];
    } else if let Some(idx) = name.find(":[") {
        name = &name[..idx];
    } else if let Some((_, tail)) = name.split_once(':') {
        if !tail.trim().is_empty() {
            name = tail;
        }
    }
    let name = name.trim_matches(|c: char| {
        c.is_whitespace() || matches!(c, '"' | '\'' | '`' | '*' | '.' | ':' | ',')
    });
    if name.is_empty() {
        return Err(ParseFailure::new(
            ParseFailureKind::Empty,
            "no dimension name",
        ));
    }
    Ok(name.to_string())
}

pub fn parse_text(raw: &str) -> Result<String, ParseFailure> {
    let text = raw.trim();
    if text.is_empty() {
        Err(ParseFailure::new(ParseFailureKind::Empty, "no text"))
    } else {
        Ok(text.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{word_count, ORDINAL_LEVELS};

    #[test]
    fn unclosed_brace_is_malformed() {
        let err = parse_dimension_object("{ unclosed", DimensionKind::Nominal, 1, 8).unwrap_err();
        assert_eq!(err.kind, ParseFailureKind::Malformed);
        assert!(err.to_string().starts_with("malformed object"));
    }

    #[test]
    fn fenced_object_is_extracted() {
        let raw = "Sure! Here you go:\n```json\n{\"Mood\": [\"Calm\", \"Sad\"]}\n```";
        let dims = parse_dimension_object(raw, DimensionKind::Nominal, 1, 8).unwrap();
        assert_eq!(dims[0].name(), "Mood");
    }

    #[test]
    fn undersupply_fails_and_oversupply_truncates() {
        let raw = r#"{"A": ["x","y"], "B": ["x","y"], "C": ["x","y"]}"#;
        let err = parse_dimension_object(raw, DimensionKind::Nominal, 4, 8).unwrap_err();
        assert_eq!(err.kind, ParseFailureKind::WrongCount);
        let dims = parse_dimension_object(raw, DimensionKind::Nominal, 2, 8).unwrap();
        assert_eq!(
            dims.iter().map(Dimension::name).collect::<Vec<_>>(),
            ["A", "B"]
        );
    }

    #[test]
    fn ordinal_values_are_forced_canonical() {
        let raw = r#"{"Realism": ["most", "least"]}"#;
        let dims = parse_dimension_object(raw, DimensionKind::Ordinal, 1, 8).unwrap();
        assert_eq!(dims[0].labels().collect::<Vec<_>>(), ORDINAL_LEVELS);
    }

    #[test]
    fn non_text_values_are_malformed() {
        let raw = r#"{"A": [1, 2]}"#;
        let err = parse_dimension_object(raw, DimensionKind::Nominal, 1, 8).unwrap_err();
        assert_eq!(err.kind, ParseFailureKind::Malformed);
        assert!(parse_dimension_object("[1]", DimensionKind::Nominal, 1, 8).is_err());
    }

    #[test]
    fn duplicate_names_collapse() {
        let raw = r#"{"Tone": ["a","b"], "tone": ["c","d"]}"#;
        let err = parse_dimension_object(raw, DimensionKind::Nominal, 2, 8).unwrap_err();
        assert_eq!(err.kind, ParseFailureKind::WrongCount);
    }

    #[test]
    fn missing_title_fails() {
        let raw = r#"{"Key Words": ["a"], "Summary": "s", "Structure": "a-b"}"#;
        let err = parse_summary_object(raw).unwrap_err();
        assert_eq!(err.kind, ParseFailureKind::MissingField);
        assert_eq!(err.to_string(), "missing field: Title");
    }

    #[test]
    fn long_summary_is_truncated_to_twenty_words() {
        // 25 words; the first 20 are kept verbatim.
        let sentence = "one two three four five six seven eight nine ten eleven twelve \
                        thirteen fourteen fifteen sixteen seventeen eighteen nineteen twenty \
                        twentyone twentytwo twentythree twentyfour twentyfive";
        assert_eq!(word_count(sentence), 25);
        let raw = format!(
            r#"{{"Key Words": ["a"], "Summary": "{sentence}", "Structure": "a-b", "Title": "T"}}"#
        );
        let bundle = parse_summary_object(&raw).unwrap();
        assert_eq!(
            bundle.summary,
            "one two three four five six seven eight nine ten eleven twelve thirteen fourteen \
             fifteen sixteen seventeen eighteen nineteen twenty"
        );
    }

    #[test]
    fn dimension_names_are_cleaned() {
        assert_eq!(parse_dimension_name("Tone").unwrap(), "Tone");
        assert_eq!(parse_dimension_name("\n \"Tone\".\n").unwrap(), "Tone");
        assert_eq!(
            parse_dimension_name("New dimension: Pacing").unwrap(),
            "Pacing"
        );
        assert_eq!(
            parse_dimension_name("Pacing(Ordinal):[least, less]").unwrap(),
            "Pacing"
        );
        assert!(parse_dimension_name("  \n ").is_err());
    }

    #[test]
    fn text_must_be_nonempty() {
        assert_eq!(parse_text("  hi \n").unwrap(), "hi");
        assert_eq!(parse_text(" ").unwrap_err().kind, ParseFailureKind::Empty);
    }
}
