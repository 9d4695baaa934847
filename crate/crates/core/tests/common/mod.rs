#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};
use std::path::PathBuf;

use cgforge::dataset::{load_dialogues, load_schema_catalog, Candidate, Catalog, Interaction};
use cgforge::drafter::{draft_candidates, Generator};
use cgforge::linker::{filter_dataset, LinkerConfig};
use cgforge::patterns::{collect_patterns, PatternLibrary};
use cgforge::recombine::{generate_candidates, GenerateConfig};
use cgforge::schema::Schema;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn catalog() -> Catalog {
    load_schema_catalog(&fixture("tables.json")).expect("fixture catalog")
}

pub fn schema(db: &str) -> Schema {
    catalog().remove(db).expect("fixture db")
}

pub fn dialogues(name: &str, catalog: &Catalog) -> Vec<Interaction> {
    let d = load_dialogues(&fixture(name), catalog).expect("fixture dialogues");
    assert!(d.rejects.is_empty(), "{:?}", d.rejects);
    d.interactions
}

pub fn train() -> (Catalog, Vec<Interaction>) {
    let c = catalog();
    let t = dialogues("train.json", &c);
    (c, t)
}

/// Question ids the fixture marks as context-dependent.
pub fn labeled_dependent(name: &str) -> BTreeSet<String> {
    let text = std::fs::read_to_string(fixture(name)).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    let mut out = BTreeSet::new();
    for rec in json.as_array().unwrap() {
        let id = rec["id"].as_str().unwrap();
        for (k, t) in rec["interaction"].as_array().unwrap().iter().enumerate() {
            if t["dependent"].as_bool() == Some(true) {
                out.insert(format!("{id}/{}", k + 1));
            }
        }
    }
    out
}

pub fn library(catalog: &Catalog, train: &[Interaction]) -> PatternLibrary {
    let f = filter_dataset(train, catalog, &LinkerConfig::default());
    let dep: HashSet<String> = f.dependent.into_iter().collect();
    collect_patterns(train, &dep, catalog).0
}

/// Every consecutive gold pair in `its`.
pub fn gold_pairs(its: &[Interaction]) -> Vec<(String, &Interaction, usize)> {
    its.iter()
        .flat_map(|it| (1..it.turns.len()).map(move |k| (it.question_id(k + 1), it, k)))
        .collect()
}

/// Drafted candidates generated from the fixture splits.
pub fn candidates() -> (Catalog, Vec<Candidate>) {
    let (c, train) = train();
    let lib = library(&c, &train);
    let dev = dialogues("dev.json", &c);
    let (mut cands, _) = generate_candidates(&lib, &dev, &c, &GenerateConfig::default());
    draft_candidates(&mut cands, &c, &Generator::Rule).unwrap();
    (c, cands)
}

pub mod fills;
pub mod gen;
