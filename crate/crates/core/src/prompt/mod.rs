//! Prompt templates and the parsers for the structured outputs they ask for.
//!
//! Templates live in `templates/` as plain UTF-8 with `{{name}}`
//! placeholders. Rendered prompts are joined with single newlines; a line
//! holding only `####` separates the top-level segments.

mod parse;

pub use parse::{
    extract_object, parse_dimension_name, parse_dimension_object, parse_summary_object, parse_text,
    ParseFailure, ParseFailureKind,
};

use serde::{Deserialize, Serialize};

use crate::model::{Dimension, DimensionKind, Requirement};

const DIMENSION_DEF: &str = include_str!("../../templates/dimension_def.txt");
const DIMENSION_CONCLUSION: &str = include_str!("../../templates/dimension_conclusion.txt");
const NOMINAL_DIMENSION_DEF: &str = include_str!("../../templates/nominal_dimension_def.txt");
const ORDINAL_DIMENSION_DEF: &str = include_str!("../../templates/ordinal_dimension_def.txt");
const WORD_LIMIT: &str = include_str!("../../templates/word_limit.txt");
const PREVIOUS_CONTEXT_PREFIX: &str = include_str!("../../templates/previous_context_prefix.txt");
const EXISTING_DIMENSION_PREFIX: &str =
    include_str!("../../templates/existing_dimension_prefix.txt");
const NOMINAL_GENERATION: &str = include_str!("../../templates/nominal_dimension_generation.txt");
const ORDINAL_GENERATION: &str = include_str!("../../templates/ordinal_dimension_generation.txt");
const RESPONSE_GENERATION: &str = include_str!("../../templates/response_generation.txt");
const NEW_DIMENSION_GENERATION: &str = include_str!("../../templates/new_dimension_generation.txt");
const SUMMARIZATION: &str = include_str!("../../templates/summarization.txt");
const DIMENSION_VALUES_GENERATION: &str =
    include_str!("../../templates/dimension_values_generation.txt");
const REVISION: &str = include_str!("../../templates/revision.txt");

/// Separator line between top-level prompt segments.
pub const SEPARATOR: &str = "####";

/// Word limit baked into the verbatim `wordLimit` constant.
pub const DEFAULT_WORD_LIMIT: usize = 150;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PromptConstant {
    DimensionDef,
    DimensionConclusion,
    NominalDimensionDef,
    OrdinalDimensionDef,
    WordLimit,
}

impl PromptConstant {
    pub const ALL: [PromptConstant; 5] = [
        PromptConstant::DimensionDef,
        PromptConstant::DimensionConclusion,
        PromptConstant::NominalDimensionDef,
        PromptConstant::OrdinalDimensionDef,
        PromptConstant::WordLimit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PromptConstant::DimensionDef => "dimensionDef",
            PromptConstant::DimensionConclusion => "dimensionConclusion",
            PromptConstant::NominalDimensionDef => "nominalDimensionDef",
            PromptConstant::OrdinalDimensionDef => "ordinalDimensionDef",
            PromptConstant::WordLimit => "wordLimit",
        }
    }

    /// Fully composed text. `WordLimit` uses [`DEFAULT_WORD_LIMIT`].
    pub fn text(self) -> String {
        match self {
            PromptConstant::DimensionDef => template(DIMENSION_DEF).to_string(),
            PromptConstant::DimensionConclusion => template(DIMENSION_CONCLUSION).to_string(),
            PromptConstant::NominalDimensionDef => compose_def(NOMINAL_DIMENSION_DEF),
            PromptConstant::OrdinalDimensionDef => compose_def(ORDINAL_DIMENSION_DEF),
            PromptConstant::WordLimit => word_limit(DEFAULT_WORD_LIMIT),
        }
    }
}

fn compose_def(body: &str) -> String {
    fill(
        body,
        &[
            ("dimensionDef", template(DIMENSION_DEF)),
            ("dimensionConclusion", template(DIMENSION_CONCLUSION)),
        ],
    )
}

pub fn word_limit(words: usize) -> String {
    fill(WORD_LIMIT, &[("wordLimit", &words.to_string())])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PromptKind {
    NominalDims,
    OrdinalDims,
    Response,
    NewDimension,
    Summarization,
    DimensionValues,
    Revision,
}

/// What the parser should expect back for a rendered prompt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum ExpectedShape {
    DimensionObject { kind: DimensionKind, count: usize },
    SummaryObject,
    DimensionName,
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub kind: PromptKind,
    pub text: String,
    pub expected_shape: ExpectedShape,
}

/// Optional grounding text added in front of a prompt.
#[derive(Debug, Clone, Copy, Default)]
pub struct PromptContext<'a> {
    pub context: Option<&'a str>,
    pub highlight: Option<&'a str>,
}

impl<'a> PromptContext<'a> {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new(context: &'a str, highlight: &'a str) -> Self {
        Self {
            context: Some(context),
            highlight: Some(highlight),
        }
    }

    /// The background text for the context prefix: editor context followed
    /// by the highlighted selection on its own line. `None` when both are
    /// blank.
    fn background(&self) -> Option<String> {
        let parts: Vec<&str> = [self.context, self.highlight]
            .into_iter()
            .flatten()
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect();
        if parts.is_empty() {
            None
        } else {
            Some(parts.join("\n"))
        }
    }
}

pub fn previous_context_prefix(background: &str) -> String {
    fill(PREVIOUS_CONTEXT_PREFIX, &[("background", background)])
}

/// Renders `Name(Kind):[v1, v2, ...]` for each dimension, one per line.
pub fn existing_dimension_prefix(existing: &[Dimension]) -> String {
    let lines: Vec<String> = existing
        .iter()
        .map(|d| {
            format!(
                "{}({}):[{}]",
                d.name(),
                d.kind().display_name(),
                d.labels().collect::<Vec<_>>().join(", ")
            )
        })
        .collect();
    fill(
        EXISTING_DIMENSION_PREFIX,
        &[("currentDimensions", &lines.join("\n"))],
    )
}

fn join_segments(segments: &[&str]) -> String {
    segments.join(&format!("\n{SEPARATOR}\n"))
}

fn with_context(ctx: PromptContext<'_>, body: String) -> String {
    match ctx.background() {
        Some(bg) => join_segments(&[&previous_context_prefix(&bg), &body]),
        None => body,
    }
}

fn format_rows(cat_num: usize, val_num: usize) -> String {
    let first = format!("\"<dimension name #1>\":[<{val_num} values for this dimension>]");
    let last = format!("\"<dimension name #{cat_num}>\" : [<{val_num} values for this dimension>]");
    match cat_num {
        0 | 1 => first,
        2 => format!("{first},\n{last}"),
        _ => format!("{first},\n...,\n{last}"),
    }
}

pub fn render_nominal_dims(
    prompt: &str,
    cat_num: usize,
    val_num: usize,
    ctx: PromptContext<'_>,
) -> RenderedPrompt {
    debug_assert!(cat_num >= 1 && val_num >= 2);
    let body = fill(
        NOMINAL_GENERATION,
        &[
            (
                "nominalDimensionDef",
                &PromptConstant::NominalDimensionDef.text(),
            ),
            ("catNum", &cat_num.to_string()),
            ("valNum", &val_num.to_string()),
            ("prompt", prompt),
            ("formatRows", &format_rows(cat_num, val_num)),
        ],
    );
    RenderedPrompt {
        kind: PromptKind::NominalDims,
        text: with_context(ctx, body),
        expected_shape: ExpectedShape::DimensionObject {
            kind: DimensionKind::Nominal,
            count: cat_num,
        },
    }
}

pub fn render_ordinal_dims(prompt: &str, cat_num: usize, ctx: PromptContext<'_>) -> RenderedPrompt {
    debug_assert!(cat_num >= 1);
    let body = fill(
        ORDINAL_GENERATION,
        &[
            (
                "ordinalDimensionDef",
                &PromptConstant::OrdinalDimensionDef.text(),
            ),
            ("catNum", &cat_num.to_string()),
            ("prompt", prompt),
        ],
    );
    RenderedPrompt {
        kind: PromptKind::OrdinalDims,
        text: with_context(ctx, body),
        expected_shape: ExpectedShape::DimensionObject {
            kind: DimensionKind::Ordinal,
            count: cat_num,
        },
    }
}

/// `Name: Label` lines in the requirement's declaration order.
pub fn requirement_lines(req: &Requirement) -> String {
    req.tags().join("\n")
}

pub fn render_response(
    prompt: &str,
    req: &Requirement,
    ctx: PromptContext<'_>,
    words: usize,
) -> RenderedPrompt {
    let body = fill(
        RESPONSE_GENERATION,
        &[
            ("prompt", prompt),
            ("requirements", &requirement_lines(req)),
        ],
    );
    RenderedPrompt {
        kind: PromptKind::Response,
        text: join_segments(&[&word_limit(words), &with_context(ctx, body)]),
        expected_shape: ExpectedShape::Text,
    }
}

pub fn render_new_dimension(
    prompt: &str,
    existing: &[Dimension],
    ctx: PromptContext<'_>,
) -> RenderedPrompt {
    let body = fill(
        NEW_DIMENSION_GENERATION,
        &[
            ("prompt", prompt),
            (
                "existingDimensionPrefix",
                &existing_dimension_prefix(existing),
            ),
        ],
    );
    RenderedPrompt {
        kind: PromptKind::NewDimension,
        text: with_context(ctx, body),
        expected_shape: ExpectedShape::DimensionName,
    }
}

pub fn render_summarization(full_text: &str) -> RenderedPrompt {
    RenderedPrompt {
        kind: PromptKind::Summarization,
        text: fill(SUMMARIZATION, &[("text", full_text)]),
        expected_shape: ExpectedShape::SummaryObject,
    }
}

/// Value generation for a dimension the user named: the nominal template
/// specialized to one entry with a fixed name.
pub fn render_dimension_values(
    prompt: &str,
    name: &str,
    val_num: usize,
    ctx: PromptContext<'_>,
) -> RenderedPrompt {
    let body = fill(
        DIMENSION_VALUES_GENERATION,
        &[
            (
                "nominalDimensionDef",
                &PromptConstant::NominalDimensionDef.text(),
            ),
            ("name", name),
            ("valNum", &val_num.to_string()),
            ("prompt", prompt),
        ],
    );
    RenderedPrompt {
        kind: PromptKind::DimensionValues,
        text: with_context(ctx, body),
        expected_shape: ExpectedShape::DimensionObject {
            kind: DimensionKind::Nominal,
            count: 1,
        },
    }
}

/// Minimal-delta revision of an existing response toward one extra
/// `Name: Label` constraint.
pub fn render_revision(
    full_text: &str,
    dimension: &str,
    label: &str,
    words: usize,
) -> RenderedPrompt {
    let body = fill(
        REVISION,
        &[("requirement", &format!("{dimension}: {label}"))],
    );
    RenderedPrompt {
        kind: PromptKind::Revision,
        text: join_segments(&[
            &word_limit(words),
            &previous_context_prefix(full_text.trim()),
            &body,
        ]),
        expected_shape: ExpectedShape::Text,
    }
}

/// Drops the trailing newline editors leave at the end of template files.
fn template(raw: &str) -> &str {
    raw.strip_suffix('\n').unwrap_or(raw)
}

/// Single-pass `{{name}}` substitution. Substituted values are never
/// rescanned, so user text containing braces passes through untouched.
///
/// Panics on a placeholder with no binding: templates are compiled in, so
/// that is a programming error.
fn fill(raw: &str, vars: &[(&str, &str)]) -> String {
    let src = template(raw);
    let mut out = String::with_capacity(src.len() + 256);
    let mut rest = src;
    while let Some(start) = rest.find("{{") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        let end = after
            .find("}}")
            .unwrap_or_else(|| panic!("unterminated placeholder in template"));
        let key = &after[..end];
        let value = vars
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .unwrap_or_else(|| panic!("unbound template placeholder {{{{{key}}}}}"));
        out.push_str(value);
        rest = &after[end + 2..];
    }
    out.push_str(rest);
    out
}

/// Trims trailing whitespace on every line and at the end of the text.
/// Golden comparisons are made on normalized text.
pub fn normalize_whitespace(text: &str) -> String {
    text.lines()
        .map(str::trim_end)
        .collect::<Vec<_>>()
        .join("\n")
        .trim_end()
        .to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fill_is_single_pass() {
        assert_eq!(fill("a {{x}} b", &[("x", "{{x}}")]), "a {{x}} b");
    }

    #[test]
    #[should_panic(expected = "unbound")]
    fn fill_panics_on_unbound() {
        fill("{{nope}}", &[]);
    }

    #[test]
    fn composed_constants_contain_both_parts() {
        let nominal = PromptConstant::NominalDimensionDef.text();
        assert!(nominal.starts_with(&PromptConstant::DimensionDef.text()));
        assert!(nominal.ends_with(&PromptConstant::DimensionConclusion.text()));
        assert_eq!(
            PromptConstant::WordLimit.text(),
            "Limit the response to 150 words"
        );
    }

    #[test]
    fn single_dimension_format_block_has_no_ellipsis() {
        let r = render_nominal_dims("x", 1, 2, PromptContext::none());
        assert!(!r.text.contains("...,"));
        assert!(r
            .text
            .contains("\"<dimension name #1>\":[<2 values for this dimension>]\n}"));
        assert!(!r.text.contains("#1>\" :"));
    }

    #[test]
    fn context_prefix_leads_the_prompt() {
        let ctx = "It's full of surprises, that can make us smile or frown.";
        let r = render_nominal_dims("x", 5, 6, PromptContext::new(ctx, ""));
        assert!(r.text.starts_with("This is the context:"));
        assert!(r.text.contains("---end context ---\n####\n"));
    }

    #[test]
    fn empty_context_adds_no_prefix() {
        let req = Requirement::new().with("Genre", "Comedy");
        let r = render_response("p", &req, PromptContext::new("  ", ""), 150);
        assert!(!r.text.contains("This is the context:"));
        assert_eq!(
            r.text,
            "Limit the response to 150 words\n####\nPrompt: p\n####\nRequirements: Genre: Comedy"
        );
    }

    #[test]
    fn highlight_is_appended_inside_the_context_segment() {
        let req = Requirement::new().with("Mood", "Calm");
        let r = render_response(
            "continue the poem",
            &req,
            PromptContext::new("The sea was quiet.", "A tidal wave meets the crescent moon"),
            150,
        );
        let start = r.text.find("This is the context:").unwrap();
        let end = r.text.find("---end context ---").unwrap();
        let segment = &r.text[start..end];
        assert!(segment.contains("The sea was quiet."));
        assert!(segment.contains("A tidal wave meets the crescent moon"));
    }

    #[test]
    fn single_existing_dimension_gives_one_line() {
        let d = Dimension::nominal("Mood", ["Calm", "Sad"], 8).unwrap();
        let prefix = existing_dimension_prefix(&[d]);
        assert_eq!(
            prefix,
            "These are the current existing dimensions and their values:\nMood(Nominal):[Calm, Sad]"
        );
    }

    #[test]
    fn summarization_renders_for_one_word() {
        let r = render_summarization("Hi");
        assert!(r.text.contains("Text is: Hi\n"));
        assert!(r
            .text
            .contains("Don't include any text other than the json"));
        assert_eq!(r.expected_shape, ExpectedShape::SummaryObject);
    }

    #[test]
    fn revision_carries_text_and_single_constraint() {
        let r = render_revision("Old story.", "Time Period", "Victorian", 150);
        assert_eq!(
            r.text,
            "Limit the response to 150 words\n####\nThis is the context: Old story.\n---end context ---\n####\nRevise the text to satisfy the following additional requirement\nTime Period: Victorian"
        );
    }

    #[test]
    fn normalization_trims_line_ends() {
        assert_eq!(normalize_whitespace("a  \nb\t\n\n"), "a\nb");
    }
}
