#![allow(dead_code)]

use std::path::PathBuf;

use dspace_core::model::{Dimension, Requirement};
use dspace_core::prompt::{
    existing_dimension_prefix, previous_context_prefix, render_new_dimension, render_nominal_dims,
    render_ordinal_dims, render_response, render_summarization, PromptContext,
};

pub const RABBIT: &str = "write a story about a rabbit";
pub const TIME_TRAVEL: &str = "Write a story about time travelling";
pub const UNIVERSE_LYRICS: &str = "Write a song lyrics about the universe";
pub const BACKGROUND: &str = "It's full of surprises, that can make us smile or frown. But it always has something to teach us when we look around.";

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn fixtures_dir() -> PathBuf {
    crate_dir().join("fixtures")
}

pub fn raw_fixture(name: &str) -> String {
    std::fs::read_to_string(fixtures_dir().join("raw").join(name)).unwrap()
}

pub fn golden(name: &str) -> String {
    std::fs::read_to_string(crate_dir().join("tests/golden").join(name)).unwrap()
}

pub fn rabbit_requirement() -> Requirement {
    Requirement::new()
        .with("Genre", "Comedy")
        .with("Tone", "Frightening")
        .with("Setting", "Medieval Times")
        .with("Style", "Short Story")
        .with("Perspective", "Third-Person Omniscient (Narrator)")
        .with("Creativity", "more")
        .with("Imagination", "most")
        .with("Grammatical Accuracy", "less")
        .with("Originality", "less")
        .with("Presentation Style", "less")
}

pub fn campus_dimensions() -> Vec<Dimension> {
    vec![
        Dimension::nominal(
            "Setting",
            ["Campuse Stadium", "Football Locker Room", "Victory Parade"],
            8,
        )
        .unwrap(),
        Dimension::ordinal("Engagingness").unwrap(),
    ]
}

/// Every golden file paired with the prompt rendered from the same inputs.
pub fn golden_cases() -> Vec<(&'static str, String)> {
    let none = PromptContext::none();
    let ctx = PromptContext {
        context: Some(BACKGROUND),
        highlight: None,
    };
    let story = raw_fixture("futuristic_rabbit.txt");
    vec![
        (
            "previous_context_prefix.txt",
            previous_context_prefix(BACKGROUND),
        ),
        (
            "existing_dimension_prefix.txt",
            existing_dimension_prefix(&campus_dimensions()),
        ),
        (
            "nominal_rabbit.txt",
            render_nominal_dims(RABBIT, 5, 6, none).text,
        ),
        (
            "nominal_rabbit_context.txt",
            render_nominal_dims(RABBIT, 5, 6, ctx).text,
        ),
        (
            "ordinal_rabbit.txt",
            render_ordinal_dims(RABBIT, 5, none).text,
        ),
        (
            "nominal_time_travel.txt",
            render_nominal_dims(TIME_TRAVEL, 5, 6, none).text,
        ),
        (
            "ordinal_time_travel.txt",
            render_ordinal_dims(TIME_TRAVEL, 5, none).text,
        ),
        (
            "nominal_universe_lyrics.txt",
            render_nominal_dims(UNIVERSE_LYRICS, 5, 6, none).text,
        ),
        (
            "ordinal_universe_lyrics.txt",
            render_ordinal_dims(UNIVERSE_LYRICS, 5, none).text,
        ),
        (
            "response_rabbit.txt",
            render_response(RABBIT, &rabbit_requirement(), none, 150).text,
        ),
        (
            "response_rabbit_context.txt",
            render_response(RABBIT, &rabbit_requirement(), ctx, 150).text,
        ),
        (
            "new_dimension_rabbit.txt",
            render_new_dimension(RABBIT, &campus_dimensions(), ctx).text,
        ),
        (
            "summarization_futuristic_rabbit.txt",
            render_summarization(story.trim()).text,
        ),
    ]
}
