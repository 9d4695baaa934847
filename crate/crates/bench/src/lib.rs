//! Shared loading for the benchmarks.

use std::path::{Path, PathBuf};

use cgforge::dataset::{load_dialogues, load_schema_catalog, Catalog, Interaction};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

/// The fixture catalog with its train and dev splits.
pub fn load() -> (Catalog, Vec<Interaction>, Vec<Interaction>) {
    let dir = fixtures();
    let catalog = load_schema_catalog(&dir.join("tables.json")).expect("fixture catalog");
    let split = |name: &str| {
        load_dialogues(&dir.join(name), &catalog)
            .expect("fixture split")
            .interactions
    };
    let (train, dev) = (split("train.json"), split("dev.json"));
    (catalog, train, dev)
}
