#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

pub fn fixture(name: &str) -> PathBuf {
    fixtures().join(name)
}

pub fn cgforge() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cgforge"));
    c.env_remove("CGFORGE_SEED").env_remove("RUST_LOG");
    c
}

pub fn run(args: &[&str]) -> Output {
    cgforge().args(args).output().expect("binary runs")
}

pub fn ok_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

pub fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 path")
}

/// Runs the full pipeline on the fixtures into `out`.
pub fn pipeline(out: &Path, extra: &[&str]) -> Output {
    cgforge()
        .arg("pipeline")
        .arg("--schema")
        .arg(fixture("tables.json"))
        .arg("--train")
        .arg(fixture("train.json"))
        .arg("--dev")
        .arg(fixture("dev.json"))
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
}
