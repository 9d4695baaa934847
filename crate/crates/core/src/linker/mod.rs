//! Schema linking by n-gram matching, and the context-dependence filter
//! built on it: a follow-up question depends on its history when the gold
//! query uses a schema item mentioned earlier in the dialogue but not in
//! the question itself.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Catalog, Interaction};
use crate::schema::{Schema, SchemaItem};
use crate::sql::visit::{Name, WalkNames};
use crate::sql::Query;

/// Every tunable of the matcher.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinkerConfig {
    /// Shortest item-name token that may produce a partial match.
    pub min_partial_len: usize,
    pub strip_plurals: bool,
    /// Also match the catalog's natural-language names.
    pub natural_names: bool,
}

impl Default for LinkerConfig {
    fn default() -> Self {
        Self {
            min_partial_len: 4,
            strip_plurals: true,
            natural_names: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchKind {
    Exact,
    Partial,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Mention {
    pub schema_item: SchemaItem,
    /// Token range `[start, end)` in the tokenized question.
    pub span: (usize, usize),
    pub kind: MatchKind,
}

fn singular(w: &str) -> String {
    let n = w.len();
    if n <= 3 || !w.ends_with('s') || w.ends_with("ss") {
        return w.to_string();
    }
    if n > 4 && w.ends_with("ies") {
        return format!("{}y", &w[..n - 3]);
    }
    if w.ends_with("es") {
        let stem = &w[..n - 2];
        if ["s", "x", "z", "ch", "sh"]
            .iter()
            .any(|s| stem.ends_with(s))
        {
            return stem.to_string();
        }
    }
    w[..n - 1].to_string()
}

/// Lowercases, splits on anything that is not a letter or digit, and
/// optionally strips plural endings.
pub fn tokenize(text: &str, config: &LinkerConfig) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| {
            if config.strip_plurals {
                singular(t)
            } else {
                t.to_string()
            }
        })
        .collect()
}

/// Token sequences that name `item`: its original name with underscores
/// split, and its natural-language name.
fn name_forms(schema: &Schema, item: SchemaItem, config: &LinkerConfig) -> Vec<Vec<String>> {
    let (name, natural) = match item {
        SchemaItem::Table(t) => (&schema.tables[t].name, &schema.tables[t].natural_name),
        SchemaItem::Column(c) => (&schema.columns[c].name, &schema.columns[c].natural_name),
    };
    let mut forms = vec![tokenize(name, config)];
    if config.natural_names {
        if let Some(n) = natural {
            forms.push(tokenize(n, config));
        }
    }
    forms.retain(|f| !f.is_empty());
    forms.dedup();
    forms
}

fn find_ngram(haystack: &[String], needle: &[String]) -> Vec<usize> {
    if needle.is_empty() || needle.len() > haystack.len() {
        return Vec::new();
    }
    (0..=haystack.len() - needle.len())
        .filter(|&i| haystack[i..i + needle.len()] == *needle)
        .collect()
}

fn link_tokens(
    tokens: &[String],
    schema: &Schema,
    restrict_to: &BTreeSet<SchemaItem>,
    config: &LinkerConfig,
) -> Vec<Mention> {
    let mut out = BTreeSet::new();
    for &item in restrict_to {
        let forms = name_forms(schema, item, config);
        let mut exact = false;
        for f in &forms {
            for start in find_ngram(tokens, f) {
                exact = true;
                out.insert(Mention {
                    schema_item: item,
                    span: (start, start + f.len()),
                    kind: MatchKind::Exact,
                });
            }
        }
        if exact {
            continue;
        }
        let parts: BTreeSet<&String> = forms
            .iter()
            .flatten()
            .filter(|t| t.chars().count() >= config.min_partial_len)
            .collect();
        for (i, tok) in tokens.iter().enumerate() {
            if parts.contains(tok) {
                out.insert(Mention {
                    schema_item: item,
                    span: (i, i + 1),
                    kind: MatchKind::Partial,
                });
            }
        }
    }
    let mut v: Vec<Mention> = out.into_iter().collect();
    v.sort_by_key(|m| (m.span.0, m.span.1, m.schema_item));
    v
}

/// Mentions of the items in `restrict_to`, ordered by span start. An item
/// with an exact occurrence gets no partial mentions.
pub fn link_mentions(
    question: &str,
    schema: &Schema,
    restrict_to: &BTreeSet<SchemaItem>,
    config: &LinkerConfig,
) -> Vec<Mention> {
    link_tokens(&tokenize(question, config), schema, restrict_to, config)
}

/// Tables and columns a query uses anywhere, nested queries included.
pub fn query_items(q: &Query, schema: &Schema) -> BTreeSet<SchemaItem> {
    let mut out = BTreeSet::new();
    for n in q.names() {
        match n {
            Name::Table(t) => out.extend(schema.table_index(&t).map(SchemaItem::Table)),
            Name::Column { table, column } => out.extend(
                schema
                    .lookup_column(&table, &column)
                    .map(SchemaItem::Column),
            ),
            Name::Value(_) => {}
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependenceVerdict {
    pub s: BTreeSet<SchemaItem>,
    pub s_c: BTreeSet<SchemaItem>,
    pub s_p: BTreeSet<SchemaItem>,
    pub dependent: bool,
}

fn linked(
    text: &str,
    schema: &Schema,
    s: &BTreeSet<SchemaItem>,
    config: &LinkerConfig,
) -> BTreeSet<SchemaItem> {
    link_mentions(text, schema, s, config)
        .into_iter()
        .map(|m| m.schema_item)
        .collect()
}

/// Verdict for the 1-based `turn` of `it`.
pub fn classify_dependence(
    turn: usize,
    it: &Interaction,
    schema: &Schema,
    config: &LinkerConfig,
) -> DependenceVerdict {
    let k = turn - 1;
    let s = query_items(&it.turns[k].ast, schema);
    let s_c = linked(&it.turns[k].utterance, schema, &s, config);
    let mut s_p = BTreeSet::new();
    for prev in &it.turns[..k] {
        s_p.extend(linked(&prev.utterance, schema, &s, config));
    }
    let dependent = s_p.difference(&s_c).next().is_some();
    DependenceVerdict {
        s,
        s_c,
        s_p,
        dependent,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DbCounts {
    pub dependent: usize,
    pub independent: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub dependent_count: usize,
    pub independent_count: usize,
    pub per_db: BTreeMap<String, DbCounts>,
    /// Question ids (`interaction/turn`), in dataset order.
    pub dependent: Vec<String>,
    pub independent: Vec<String>,
}

/// Partitions every turn; first turns are always independent.
pub fn filter_dataset(
    dialogues: &[Interaction],
    catalog: &Catalog,
    config: &LinkerConfig,
) -> FilterReport {
    let verdicts: Vec<(String, String, bool)> = dialogues
        .par_iter()
        .flat_map_iter(|it| {
            let schema = catalog.get(&it.db_id);
            (1..=it.turns.len()).map(move |t| {
                let dep = t > 1
                    && schema.is_some_and(|s| classify_dependence(t, it, s, config).dependent);
                (it.db_id.clone(), it.question_id(t), dep)
            })
        })
        .collect();
    let mut r = FilterReport::default();
    for (db, qid, dep) in verdicts {
        let counts = r.per_db.entry(db).or_default();
        if dep {
            counts.dependent += 1;
            r.dependent.push(qid);
        } else {
            counts.independent += 1;
            r.independent.push(qid);
        }
    }
    r.dependent_count = r.dependent.len();
    r.independent_count = r.independent.len();
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Turn;
    use crate::schema::tests::airlines_schema;
    use crate::sql::parse_sql;

    fn cfg() -> LinkerConfig {
        LinkerConfig::default()
    }

    fn all(s: &Schema) -> BTreeSet<SchemaItem> {
        s.items().into_iter().collect()
    }

    #[test]
    fn tokens() {
        assert_eq!(
            tokenize("Show all airlines, matches or classes!", &cfg()),
            vec!["show", "all", "airline", "match", "or", "class"]
        );
        assert_eq!(tokenize("bus gas", &cfg()), vec!["bus", "gas"]);
        assert_eq!(tokenize("countries", &cfg()), vec!["country"]);
    }

    #[test]
    fn single_token_exact() {
        let s = airlines_schema();
        let m = link_mentions("what is its abbreviation", &s, &all(&s), &cfg());
        assert_eq!(
            m,
            vec![Mention {
                schema_item: SchemaItem::Column(3),
                span: (3, 4),
                kind: MatchKind::Exact
            }]
        );
    }

    #[test]
    fn multi_token_and_partial() {
        let s = airlines_schema();
        let only = |i| BTreeSet::from([SchemaItem::Column(i)]);
        // "source airport" is a contiguous bigram of the question.
        let m = link_mentions("flights from the source airport APG", &s, &only(7), &cfg());
        assert_eq!(m[0].kind, MatchKind::Exact);
        assert_eq!(m[0].span, (3, 5));
        // Only one token of "destination airport" occurs.
        let m = link_mentions("which airport", &s, &only(8), &cfg());
        assert_eq!(
            m,
            vec![Mention {
                schema_item: SchemaItem::Column(8),
                span: (1, 2),
                kind: MatchKind::Partial
            }]
        );
        assert!(link_mentions("which airport", &s, &BTreeSet::new(), &cfg()).is_empty());
    }

    fn interaction(turns: &[(&str, &str)]) -> Interaction {
        let s = airlines_schema();
        Interaction {
            id: "i".into(),
            db_id: s.db_id.clone(),
            turns: turns
                .iter()
                .map(|(u, q)| Turn {
                    utterance: u.to_string(),
                    gold_sql: q.to_string(),
                    ast: parse_sql(q, &s).unwrap(),
                })
                .collect(),
        }
    }

    #[test]
    fn history_dependence() {
        let s = airlines_schema();
        let it = interaction(&[
            (
                "Which airline name is JetBlue Airways?",
                "SELECT Airline FROM AIRLINES WHERE Airline = 'JetBlue Airways'",
            ),
            (
                "What is its abbreviation?",
                "SELECT Abbreviation FROM AIRLINES WHERE Airline = 'JetBlue Airways'",
            ),
            (
                "What is the abbreviation of the airline named JetBlue Airways in the airlines table?",
                "SELECT Abbreviation FROM AIRLINES WHERE Airline = 'JetBlue Airways'",
            ),
        ]);
        let v1 = classify_dependence(1, &it, &s, &cfg());
        assert!(v1.s_p.is_empty() && !v1.dependent);
        let v2 = classify_dependence(2, &it, &s, &cfg());
        assert!(v2.s_p.contains(&SchemaItem::Column(2)));
        assert!(!v2.s_c.contains(&SchemaItem::Column(2)));
        assert!(v2.dependent);
        let v3 = classify_dependence(3, &it, &s, &cfg());
        assert!(!v3.dependent);
        let catalog = Catalog::from([(s.db_id.clone(), s.clone())]);
        let r = filter_dataset(&[it], &catalog, &cfg());
        assert_eq!(r.dependent, vec!["i/2"]);
        assert_eq!(r.independent_count, 2);
    }
}
