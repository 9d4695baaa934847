//! Candidate generation: every development turn whose template is known
//! from training, combined with every library template it was never seen
//! with.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fill::enumerate_fills;
use super::lint::{default_rules, lint, LintRule};
use crate::dataset::{
    candidate_id, BasePrefix, Candidate, Catalog, DialogueTurn, Interaction, Status,
};
use crate::patterns::{
    anonymize, apply_modification, diff_asts, instantiate, DiffOutcome, ModificationTemplate,
    PatternLibrary,
};
use crate::schema::Schema;
use crate::sql::{print_sql_spans, template_of, Clause, Query, TemplateHash};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerateConfig {
    pub seed: u64,
    /// Fills tried per (base turn, template) pair; `None` tries them all.
    pub cap_per_pair: Option<usize>,
    pub rules: Vec<LintRule>,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            cap_per_pair: Some(3),
            rules: default_rules(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerateReport {
    pub base_turns: usize,
    /// Development turns whose template never occurs in training.
    pub unknown_base_template: usize,
    pub pairs: usize,
    pub not_novel_pairs: usize,
    pub fills: usize,
    pub candidates: usize,
    /// Fills (or pairs, for `no_fill`) dropped, by reason.
    pub rejections: BTreeMap<String, usize>,
}

struct Base<'a> {
    interaction: &'a Interaction,
    turn: usize,
    schema: &'a Schema,
    hash: TemplateHash,
}

impl Base<'_> {
    fn ast(&self) -> &Query {
        &self.interaction.turns[self.turn].ast
    }

    fn prefix(&self) -> BasePrefix {
        BasePrefix {
            interaction_id: self.interaction.id.clone(),
            turns: self.interaction.turns[..=self.turn]
                .iter()
                .map(|t| DialogueTurn {
                    utterance: t.utterance.clone(),
                    query: t.gold_sql.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Default)]
struct PairOut {
    candidates: Vec<Candidate>,
    fills: usize,
    rejections: BTreeMap<String, usize>,
}

impl PairOut {
    fn reject(&mut self, reason: impl Into<String>) {
        *self.rejections.entry(reason.into()).or_insert(0) += 1;
    }
}

fn highlight(new: &Query, clauses: &[Clause]) -> (String, Vec<(usize, usize)>) {
    let (text, spans) = print_sql_spans(new);
    let ranges = spans
        .into_iter()
        .filter(|(c, _)| clauses.contains(c))
        .map(|(_, r)| (r.start, r.end))
        .collect();
    (text, ranges)
}

fn run_pair(base: &Base<'_>, t: &ModificationTemplate, config: &GenerateConfig) -> PairOut {
    let mut out = PairOut::default();
    let fills = match enumerate_fills(t, base.ast(), base.schema, config.seed, config.cap_per_pair)
    {
        Ok(f) => f,
        Err(_) => {
            out.reject("no_fill");
            return out;
        }
    };
    for fill in fills {
        out.fills += 1;
        let m = instantiate(t, &fill);
        let new = match apply_modification(base.ast(), &m) {
            Ok(q) => q,
            Err(_) => {
                out.reject("apply_error");
                continue;
            }
        };
        if let Some(v) = lint(&new, &config.rules).first() {
            out.reject(format!("lint:{}", v.rule));
            continue;
        }
        // The combination has to be what a later diff would call it.
        let m = match diff_asts(base.ast(), &new) {
            DiffOutcome::Modification(m2)
                if anonymize(&m2, base.ast(), base.schema).hash == t.hash =>
            {
                m2
            }
            _ => {
                out.reject("diff_mismatch");
                continue;
            }
        };
        let clauses: Vec<Clause> = m.clauses().collect();
        let (new_sql, highlight) = highlight(&new, &clauses);
        let prefix = base.prefix();
        out.candidates.push(Candidate {
            id: candidate_id(&base.interaction.db_id, &prefix, &new_sql),
            db_id: base.interaction.db_id.clone(),
            base: prefix,
            new_sql,
            base_template_hash: base.hash.clone(),
            modification_template_hash: t.hash.clone(),
            modification: m,
            highlight,
            draft_utterance: String::new(),
            draft_source: None,
            status: Status::Pending,
            final_utterance: None,
            reviews: Vec::new(),
        });
    }
    out
}

/// Generates candidates from the development interactions in `base_pool`.
/// Output is sorted by id and deduplicated, so it depends only on the
/// inputs and the seed.
pub fn generate_candidates(
    library: &PatternLibrary,
    base_pool: &[Interaction],
    catalog: &Catalog,
    config: &GenerateConfig,
) -> (Vec<Candidate>, GenerateReport) {
    let mut report = GenerateReport::default();
    let mut bases = Vec::new();
    for it in base_pool {
        let Some(schema) = catalog.get(&it.db_id) else {
            *report
                .rejections
                .entry("unknown_database".into())
                .or_insert(0) += it.turns.len();
            continue;
        };
        for (k, turn) in it.turns.iter().enumerate() {
            let hash = template_of(&turn.ast, schema).hash;
            if library.base_templates.contains_key(&hash) {
                bases.push(Base {
                    interaction: it,
                    turn: k,
                    schema,
                    hash,
                });
            } else {
                report.unknown_base_template += 1;
            }
        }
    }
    report.base_turns = bases.len();
    let mut pairs = Vec::new();
    for b in &bases {
        for t in library.templates.values() {
            match library.is_novel(&b.hash, &t.hash) {
                Ok(true) => pairs.push((b, t)),
                _ => report.not_novel_pairs += 1,
            }
        }
    }
    report.pairs = pairs.len();
    let outs: Vec<PairOut> = pairs
        .par_iter()
        .map(|(b, t)| run_pair(b, t, config))
        .collect();
    let mut candidates = Vec::new();
    for o in outs {
        report.fills += o.fills;
        for (k, v) in o.rejections {
            *report.rejections.entry(k).or_insert(0) += v;
        }
        candidates.extend(o.candidates);
    }
    candidates
        .sort_by(|a, b| (&a.id, &a.base.interaction_id).cmp(&(&b.id, &b.base.interaction_id)));
    let before = candidates.len();
    candidates.dedup_by(|a, b| a.id == b.id);
    if before > candidates.len() {
        report
            .rejections
            .insert("duplicate".into(), before - candidates.len());
    }
    report.candidates = candidates.len();
    (candidates, report)
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;
    use crate::dataset::Turn;
    use crate::patterns::collect_patterns;
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
                    utterance: format!("say {q}"),
                    gold_sql: q.to_string(),
                    ast: parse_sql(q, &s).unwrap(),
                })
                .collect(),
        }
    }

    fn setup() -> (PatternLibrary, Catalog) {
        let s = airlines_schema();
        let catalog = Catalog::from([(s.db_id.clone(), s)]);
        let train = [
            interaction(
                "a",
                &[
                    "SELECT Airline FROM AIRLINES",
                    "SELECT Airline FROM AIRLINES WHERE Country = 'USA'",
                ],
            ),
            interaction(
                "b",
                &[
                    "SELECT uid FROM AIRLINES",
                    "SELECT uid FROM AIRLINES ORDER BY uid DESC",
                ],
            ),
        ];
        let dep: HashSet<String> = ["a/2".to_string(), "b/2".to_string()].into();
        (collect_patterns(&train, &dep, &catalog).0, catalog)
    }

    #[test]
    fn novel_pairs_only() {
        let (lib, catalog) = setup();
        let dev = [interaction("d", &["SELECT Airline FROM AIRLINES"])];
        let cfg = GenerateConfig {
            cap_per_pair: None,
            ..Default::default()
        };
        let (cands, report) = generate_candidates(&lib, &dev, &catalog, &cfg);
        // The WHERE template was seen on this base; ORDER BY over a number
        // column was not, and AIRLINES has one number column.
        assert_eq!(report.base_turns, 1);
        assert_eq!(report.not_novel_pairs, 1);
        assert_eq!(cands.len(), 1);
        assert_eq!(
            cands[0].new_sql,
            "SELECT AIRLINES.Airline FROM AIRLINES ORDER BY AIRLINES.uid DESC"
        );
        let (s, e) = cands[0].highlight[0];
        assert_eq!(&cands[0].new_sql[s..e], "ORDER BY AIRLINES.uid DESC");
        assert_eq!(cands[0].base.turns.len(), 1);
        for c in &cands {
            assert_eq!(
                lib.is_novel(&c.base_template_hash, &c.modification_template_hash),
                Ok(true)
            );
        }
    }

    #[test]
    fn cap_bounds_each_pair_and_output_is_stable() {
        let (lib, catalog) = setup();
        let dev = [interaction("d", &["SELECT uid FROM AIRLINES"])];
        let cfg = GenerateConfig {
            cap_per_pair: Some(2),
            seed: 7,
            ..Default::default()
        };
        let (a, report) = generate_candidates(&lib, &dev, &catalog, &cfg);
        assert_eq!(report.fills, 2);
        assert!(a.len() <= 2);
        let (b, _) = generate_candidates(&lib, &dev, &catalog, &cfg);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn unknown_base_templates_are_counted() {
        let (lib, catalog) = setup();
        let dev = [interaction("d", &["SELECT count(*) FROM FLIGHTS"])];
        let (cands, report) = generate_candidates(&lib, &dev, &catalog, &GenerateConfig::default());
        assert!(cands.is_empty());
        assert_eq!(report.unknown_base_template, 1);
    }
}
