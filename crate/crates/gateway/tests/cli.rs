use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dspace_core::store::Store;

const RABBIT: &str = "Write a story about a rabbit";

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn dspace(args: &[&str], store: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dspace"))
        .arg("generate")
        .args(args)
        .arg("--store")
        .arg(store)
        .env_remove("DSE_STORE_PATH")
        .env_remove("DSE_API_KEY")
        .output()
        .unwrap()
}

#[test]
fn fixture_run_is_byte_identical_across_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures();
    let args = [
        "--prompt",
        RABBIT,
        "--responses",
        "3",
        "--seed",
        "42",
        "--fixtures",
        fx.to_str().unwrap(),
    ];
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let out = dspace(&args, &a);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dspace(&args, &b).status.success());

    let stats: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(stats["produced"], 3);
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    let store = Store::load(&a).unwrap();
    assert_eq!(store.spaces().next().unwrap().nodes.len(), 3);
}

#[test]
fn zero_responses_is_a_bad_request() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("s.json");
    let out = dspace(
        &["--prompt", RABBIT, "--responses", "0", "--synthetic"],
        &store,
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("badRequest"));
    assert!(!store.exists());
}

#[test]
fn aborted_run_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let empty = tempfile::tempdir().unwrap();
    let store = dir.path().join("s.json");
    let out = dspace(
        &[
            "--prompt",
            RABBIT,
            "--responses",
            "2",
            "--fixtures",
            empty.path().to_str().unwrap(),
        ],
        &store,
    );
    assert!(!out.status.success());
    let stats: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(stats["aborted"].is_string());
    assert!(!store.exists());
}

#[test]
fn context_file_reaches_the_space() {
    let dir = tempfile::tempdir().unwrap();
    let ctx = dir.path().join("ctx.txt");
    std::fs::write(&ctx, "Earlier chapters of the draft.").unwrap();
    let store = dir.path().join("s.json");
    let out = dspace(
        &[
            "--prompt",
            RABBIT,
            "--responses",
            "2",
            "--synthetic",
            "--context-file",
            ctx.to_str().unwrap(),
        ],
        &store,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let store = Store::load(&store).unwrap();
    assert_eq!(
        store.spaces().next().unwrap().context,
        "Earlier chapters of the draft."
    );
}
