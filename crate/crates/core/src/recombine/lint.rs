//! Validity rules for generated queries.
//!
//! A rule is a [`Matcher`] over one query level; the query violates the
//! rule when the matcher holds. Rules are plain data so that a JSON file can
//! extend or replace the defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::DatasetError;
use crate::sql::{Clause, CmpOp, Logic, Operand, Predicate, Query, ValUnit};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Matcher {
    All {
        of: Vec<Matcher>,
    },
    Any {
        of: Vec<Matcher>,
    },
    Not {
        matcher: Box<Matcher>,
    },
    HasClause {
        clause: Clause,
    },
    /// Some SELECT item is aggregated.
    SelectHasAggregate,
    /// The same condition occurs twice in WHERE or HAVING, the second time
    /// joined by AND.
    DuplicateCondition,
    /// An ORDER BY key is a column that a conjunctive WHERE pins to a single
    /// value with `=`.
    OrderByFixedByEquality,
}

impl Matcher {
    pub fn matches(&self, q: &Query) -> bool {
        match self {
            Self::All { of } => of.iter().all(|m| m.matches(q)),
            Self::Any { of } => of.iter().any(|m| m.matches(q)),
            Self::Not { matcher } => !matcher.matches(q),
            Self::HasClause { clause } => has_clause(q, *clause),
            Self::SelectHasAggregate => q.select.items.iter().any(ValUnit::has_agg),
            Self::DuplicateCondition => duplicated(&q.where_clause) || duplicated(&q.having),
            Self::OrderByFixedByEquality => order_fixed(q),
        }
    }
}

fn has_clause(q: &Query, c: Clause) -> bool {
    match c {
        Clause::Select => !q.select.items.is_empty(),
        Clause::From => !q.from.tables.is_empty(),
        Clause::Where => !q.where_clause.is_empty(),
        Clause::GroupBy => !q.group_by.is_empty(),
        Clause::Having => !q.having.is_empty(),
        Clause::OrderBy => !q.order_by.is_empty(),
        Clause::Limit => q.limit.is_some(),
        Clause::SetOp => q.set_op.is_some(),
    }
}

fn duplicated(p: &Predicate) -> bool {
    p.items.iter().enumerate().skip(1).any(|(j, later)| {
        later.link == Logic::And
            && p.items[..j]
                .iter()
                .any(|earlier| earlier.cond == later.cond)
    })
}

fn order_fixed(q: &Query) -> bool {
    if q.where_clause.links().any(|l| l == Logic::Or) {
        return false;
    }
    let pinned: Vec<&ValUnit> = q
        .where_clause
        .conditions()
        .filter(|c| c.op == CmpOp::Eq && matches!(c.right, Operand::Value(_)) && !c.left.has_agg())
        .map(|c| &c.left)
        .collect();
    q.order_by.iter().any(|o| pinned.contains(&&o.expr))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LintRule {
    pub id: String,
    pub description: String,
    pub matcher: Matcher,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub rule: String,
    /// `query` for the top level, `query/nested[i]` and deeper for
    /// subqueries in [`Query::nested`] order.
    pub location: String,
}

fn not(m: Matcher) -> Matcher {
    Matcher::Not {
        matcher: Box::new(m),
    }
}

fn has(clause: Clause) -> Matcher {
    Matcher::HasClause { clause }
}

pub fn default_rules() -> Vec<LintRule> {
    vec![
        LintRule {
            id: "agg-select-with-orderby-no-groupby".into(),
            description: "aggregate in SELECT with ORDER BY but no GROUP BY".into(),
            matcher: Matcher::All {
                of: vec![
                    Matcher::SelectHasAggregate,
                    has(Clause::OrderBy),
                    not(has(Clause::GroupBy)),
                ],
            },
        },
        LintRule {
            id: "duplicate-condition".into(),
            description: "the same condition on both sides of AND".into(),
            matcher: Matcher::DuplicateCondition,
        },
        LintRule {
            id: "orderby-fixed-by-equality".into(),
            description: "ORDER BY a column already fixed by an equality in WHERE".into(),
            matcher: Matcher::OrderByFixedByEquality,
        },
        LintRule {
            id: "having-without-groupby".into(),
            description: "HAVING without GROUP BY".into(),
            matcher: Matcher::All {
                of: vec![has(Clause::Having), not(has(Clause::GroupBy))],
            },
        },
    ]
}

/// Reads a JSON array of rules.
pub fn load_rules(path: &Path) -> Result<Vec<LintRule>, DatasetError> {
    let text = std::fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| DatasetError::Json {
        path: path.into(),
        source: e,
    })
}

fn lint_at(q: &Query, location: &str, rules: &[LintRule], out: &mut Vec<Violation>) {
    for r in rules {
        if r.matcher.matches(q) {
            out.push(Violation {
                rule: r.id.clone(),
                location: location.to_string(),
            });
        }
    }
    for (i, sub) in q.nested().into_iter().enumerate() {
        lint_at(sub, &format!("{location}/nested[{i}]"), rules, out);
    }
}

/// Every violation, top level first, then subqueries depth first.
pub fn lint(q: &Query, rules: &[LintRule]) -> Vec<Violation> {
    let mut out = Vec::new();
    lint_at(q, "query", rules, &mut out);
    out
}
