//! The deduplicated template library built from training dialogues.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::diff::{diff_asts, DiffOutcome, NotIncremental};
use super::template::{anonymize, component_tags, ModificationTemplate};
use crate::dataset::{Catalog, Interaction};
use crate::sql::{template_of, TemplateHash};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternLibrary {
    pub templates: BTreeMap<TemplateHash, ModificationTemplate>,
    /// Templates of every training query, with occurrence counts.
    pub base_templates: BTreeMap<TemplateHash, usize>,
    /// `(base template, modification template)` pairs seen in training.
    pub combos_seen: BTreeSet<(TemplateHash, TemplateHash)>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NoveltyError {
    /// The base or the modification template never occurs in training.
    #[error("template {0} never occurs in training")]
    UnknownTemplate(TemplateHash),
}

impl PatternLibrary {
    /// Whether the pair was never seen together, given that each part was.
    pub fn is_novel(&self, base: &TemplateHash, m: &TemplateHash) -> Result<bool, NoveltyError> {
        if !self.base_templates.contains_key(base) {
            return Err(NoveltyError::UnknownTemplate(base.clone()));
        }
        if !self.templates.contains_key(m) {
            return Err(NoveltyError::UnknownTemplate(m.clone()));
        }
        Ok(!self.combos_seen.contains(&(base.clone(), m.clone())))
    }

    /// Tag counts over templates, weighted by support.
    pub fn tag_counts(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for t in self.templates.values() {
            for tag in component_tags(t) {
                *out.entry(tag).or_insert(0) += t.support;
            }
        }
        out
    }

    fn merge(mut self, other: PatternLibrary) -> PatternLibrary {
        for (h, t) in other.templates {
            self.templates
                .entry(h)
                .and_modify(|mine| mine.support += t.support)
                .or_insert(t);
        }
        for (h, n) in other.base_templates {
            *self.base_templates.entry(h).or_insert(0) += n;
        }
        self.combos_seen.extend(other.combos_seen);
        self
    }
}

/// Counts of how the turns fed to [`collect_patterns`] were used.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectReport {
    pub interactions: usize,
    pub turns: usize,
    pub dependent_turns: usize,
    /// Dependent turns that produced a modification.
    pub modifications: usize,
    pub not_incremental: BTreeMap<String, usize>,
    pub templates: usize,
    pub base_templates: usize,
    pub combos_seen: usize,
}

#[derive(Default)]
struct Partial {
    lib: PatternLibrary,
    /// Pairs from turns outside `dependent`; kept only if their template
    /// makes it into the library.
    other_combos: BTreeSet<(TemplateHash, TemplateHash)>,
    report: CollectReport,
}

impl Partial {
    fn merge(mut self, o: Partial) -> Partial {
        self.lib = self.lib.merge(o.lib);
        self.other_combos.extend(o.other_combos);
        let (r, s) = (&mut self.report, o.report);
        r.interactions += s.interactions;
        r.turns += s.turns;
        r.dependent_turns += s.dependent_turns;
        r.modifications += s.modifications;
        for (k, v) in s.not_incremental {
            *r.not_incremental.entry(k).or_insert(0) += v;
        }
        self
    }
}

fn reason_name(r: NotIncremental) -> &'static str {
    match r {
        NotIncremental::Identical => "identical",
        NotIncremental::TooManyClauses => "too_many_clauses",
        NotIncremental::TopicChange => "topic_change",
    }
}

fn collect_one(it: &Interaction, dependent: &HashSet<String>, catalog: &Catalog) -> Partial {
    let mut p = Partial::default();
    let Some(schema) = catalog.get(&it.db_id) else {
        log::warn!("interaction {}: unknown database {}", it.id, it.db_id);
        return p;
    };
    p.report.interactions = 1;
    let bases: Vec<TemplateHash> = it
        .turns
        .iter()
        .map(|t| template_of(&t.ast, schema).hash)
        .collect();
    for h in &bases {
        *p.lib.base_templates.entry(h.clone()).or_insert(0) += 1;
    }
    p.report.turns = it.turns.len();
    for k in 1..it.turns.len() {
        let is_dep = dependent.contains(&it.question_id(k + 1));
        let (prev, cur) = (&it.turns[k - 1].ast, &it.turns[k].ast);
        if is_dep {
            p.report.dependent_turns += 1;
        }
        match diff_asts(prev, cur) {
            DiffOutcome::Modification(m) => {
                let mut t = anonymize(&m, prev, schema);
                let combo = (bases[k - 1].clone(), t.hash.clone());
                if is_dep {
                    p.report.modifications += 1;
                    t.support = 1;
                    p.lib
                        .templates
                        .entry(t.hash.clone())
                        .and_modify(|x| x.support += 1)
                        .or_insert(t);
                    p.lib.combos_seen.insert(combo);
                } else {
                    p.other_combos.insert(combo);
                }
            }
            DiffOutcome::NotIncremental(r) if is_dep => {
                *p.report
                    .not_incremental
                    .entry(reason_name(r).to_string())
                    .or_insert(0) += 1;
            }
            DiffOutcome::NotIncremental(_) => {}
        }
    }
    p
}

/// Builds the library from training interactions. Templates come from the
/// turns listed in `dependent` (question ids); base templates from every
/// training query. Combinations are recorded for every consecutive training
/// pair whose modification template is in the library, so that no training
/// question can look novel against its own library.
pub fn collect_patterns(
    train: &[Interaction],
    dependent: &HashSet<String>,
    catalog: &Catalog,
) -> (PatternLibrary, CollectReport) {
    let p = train
        .par_iter()
        .map(|it| collect_one(it, dependent, catalog))
        .reduce(Partial::default, Partial::merge);
    let Partial {
        mut lib,
        other_combos,
        mut report,
    } = p;
    for combo in other_combos {
        if lib.templates.contains_key(&combo.1) {
            lib.combos_seen.insert(combo);
        }
    }
    report.templates = lib.templates.len();
    report.base_templates = lib.base_templates.len();
    report.combos_seen = lib.combos_seen.len();
    (lib, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Turn;
    use crate::schema::tests::airlines_schema;
    use crate::sql::parse_sql;

    fn interaction(id: &str, queries: &[&str]) -> Interaction {
        let s = airlines_schema();
        Interaction {
            id: id.into(),
            db_id: s.db_id.clone(),
            turns: queries
                .iter()
                .map(|q| Turn {
                    utterance: String::new(),
                    gold_sql: q.to_string(),
                    ast: parse_sql(q, &s).unwrap(),
                })
                .collect(),
        }
    }

    fn catalog() -> Catalog {
        let s = airlines_schema();
        Catalog::from([(s.db_id.clone(), s)])
    }

    #[test]
    fn same_shape_twice_is_one_template_with_support_two() {
        let a = interaction(
            "a",
            &[
                "SELECT Airline FROM AIRLINES",
                "SELECT Airline FROM AIRLINES WHERE Country = 'USA'",
            ],
        );
        let b = interaction(
            "b",
            &[
                "SELECT SourceAirport FROM FLIGHTS",
                "SELECT SourceAirport FROM FLIGHTS WHERE DestAirport = 'APG'",
            ],
        );
        let dep: HashSet<String> = ["a/2".to_string(), "b/2".to_string()].into();
        let (lib, report) = collect_patterns(&[a, b], &dep, &catalog());
        assert_eq!(lib.templates.len(), 1);
        assert_eq!(lib.templates.values().next().unwrap().support, 2);
        assert_eq!(report.modifications, 2);
        // SELECT text-col FROM t, for both interactions.
        assert_eq!(lib.combos_seen.len(), 1);
    }

    #[test]
    fn novelty() {
        let h = |s: &str| TemplateHash(s.into());
        let mut lib = PatternLibrary::default();
        for b in ["B1", "B2"] {
            lib.base_templates.insert(h(b), 1);
        }
        for m in ["M1", "M2"] {
            lib.templates.insert(
                h(m),
                ModificationTemplate {
                    edits: vec![],
                    slots: vec![],
                    constraints: vec![],
                    hash: h(m),
                    support: 1,
                },
            );
        }
        lib.combos_seen = [(h("B1"), h("M1")), (h("B2"), h("M2"))].into();
        assert_eq!(lib.is_novel(&h("B1"), &h("M2")), Ok(true));
        assert_eq!(lib.is_novel(&h("B1"), &h("M1")), Ok(false));
        assert_eq!(
            lib.is_novel(&h("B3"), &h("M1")),
            Err(NoveltyError::UnknownTemplate(h("B3")))
        );
    }

    #[test]
    fn independent_turns_only_add_combinations_of_known_templates() {
        let a = interaction(
            "a",
            &[
                "SELECT Airline FROM AIRLINES",
                "SELECT Airline FROM AIRLINES WHERE Country = 'USA'",
            ],
        );
        let b = interaction(
            "b",
            &[
                "SELECT DISTINCT Country FROM AIRLINES",
                "SELECT DISTINCT Country FROM AIRLINES WHERE Airline = 'x'",
            ],
        );
        let c = interaction(
            "c",
            &[
                "SELECT Airline FROM AIRLINES",
                "SELECT Airline FROM AIRLINES LIMIT 3",
            ],
        );
        let dep: HashSet<String> = ["a/2".to_string()].into();
        let (lib, _) = collect_patterns(&[a, b, c], &dep, &catalog());
        assert_eq!(lib.templates.len(), 1);
        // b's pair uses the library template; c's does not.
        assert_eq!(lib.combos_seen.len(), 2);
    }
}
