mod common;

use dspace_core::prompt::{normalize_whitespace, PromptConstant};

use common::{golden, golden_cases};

#[test]
fn rendered_prompts_match_golden_files() {
    let mut mismatched = Vec::new();
    for (file, rendered) in golden_cases() {
        if normalize_whitespace(&rendered) != normalize_whitespace(&golden(file)) {
            eprintln!("--- {file}\n{rendered}\n---");
            mismatched.push(file);
        }
    }
    assert!(mismatched.is_empty(), "mismatched: {mismatched:?}");
}

#[test]
fn every_golden_file_is_checked() {
    let dir = common::crate_dir().join("tests/golden");
    let mut on_disk: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".txt"))
        .collect();
    on_disk.sort();
    let mut covered: Vec<String> = golden_cases()
        .into_iter()
        .map(|(f, _)| f.to_string())
        .collect();
    covered.sort();
    assert_eq!(on_disk, covered);
}

#[test]
fn composed_constants_appear_inside_generation_prompts() {
    let nominal = golden("nominal_rabbit.txt");
    let ordinal = golden("ordinal_rabbit.txt");
    assert!(nominal.starts_with(&PromptConstant::NominalDimensionDef.text()));
    assert!(ordinal.starts_with(&PromptConstant::OrdinalDimensionDef.text()));
    assert!(golden("response_rabbit.txt").starts_with(&PromptConstant::WordLimit.text()));
}

#[test]
fn summarization_prompt_forbids_extra_text() {
    for (file, rendered) in golden_cases() {
        if file.starts_with("summarization") {
            assert!(rendered.contains("Don't include any text other than the json"));
        }
    }
}
