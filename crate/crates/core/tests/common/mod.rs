#![allow(dead_code)]

pub mod bake_oracle;
pub mod criteria;
pub mod schema;

use std::path::{Path, PathBuf};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn fixture(rel: &str) -> PathBuf {
    fixtures().join(rel)
}

pub fn read(rel: &str) -> String {
    let path = fixture(rel);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_keyframer")
}

/// Sorted list of `*.txt` files under `responses/`.
pub fn response_files() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(fixture("responses"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    files.sort();
    files
}

pub fn session_fixtures() -> Vec<PathBuf> {
    (1..=5).map(|i| fixture(&format!("replay/session-{i}.json"))).collect()
}
