//! Why a prediction for a follow-up question is wrong: it missed what the
//! new question changed, what it inherited from the previous one, or both.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::components::decompose;
use crate::patterns::{diff_asts, DiffOutcome};
use crate::sql::Query;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCategory {
    Correct,
    ContextInfo,
    ModificationInfo,
    Both,
}

impl ErrorCategory {
    pub fn name(self) -> &'static str {
        match self {
            Self::Correct => "correct",
            Self::ContextInfo => "context_info",
            Self::ModificationInfo => "modification_info",
            Self::Both => "both",
        }
    }
}

/// How the category is decided, recorded in every report.
pub const CATEGORY_RULE: &str = "atoms are the elements of the select, from, where, group_by, \
having, order_by, limit and set-operation components (values erased); the modification is the \
atoms gold_cur adds to or drops from gold_prev, the context the atoms they share; a wrong \
prediction misses the modification if it lacks an added atom or keeps a dropped one, and misses \
the context if it lacks a shared atom; a wrong prediction that misses neither, or whose gold pair \
is not an incremental edit, counts as modification_info";

/// Content atoms of a query: every component element, tagged with its
/// component.
pub fn atoms(q: &Query) -> BTreeSet<String> {
    let c = decompose(q);
    let mut out = BTreeSet::new();
    let mut add = |tag: &str, items: &[String]| {
        for (i, x) in items.iter().enumerate() {
            // Keep repeated elements distinct.
            let n = items[..i].iter().filter(|y| *y == x).count();
            out.insert(format!("{tag}#{n}:{x}"));
        }
    };
    add("select", &c.select);
    add("from", &c.from);
    add("where", &c.where_);
    add("group_by", &c.group_by);
    add("order_by", &c.order_by);
    if let Some(s) = &c.iuen {
        add("iuen", std::slice::from_ref(s));
    }
    if c.keywords.contains("distinct") {
        add("select", &["distinct".to_string()]);
    }
    out
}

/// `pred` is `None` when the prediction does not parse.
pub fn categorize_error(
    pred: Option<&Query>,
    exact: bool,
    gold_cur: &Query,
    gold_prev: Option<&Query>,
) -> ErrorCategory {
    if exact {
        return ErrorCategory::Correct;
    }
    let Some(prev) = gold_prev else {
        return ErrorCategory::ModificationInfo;
    };
    if !matches!(diff_asts(prev, gold_cur), DiffOutcome::Modification(_)) {
        return ErrorCategory::ModificationInfo;
    }
    let (cur, prev) = (atoms(gold_cur), atoms(prev));
    let pred = pred.map(atoms).unwrap_or_default();
    let added: BTreeSet<&String> = cur.difference(&prev).collect();
    let removed: BTreeSet<&String> = prev.difference(&cur).collect();
    let shared: BTreeSet<&String> = cur.intersection(&prev).collect();
    let mod_missing =
        added.iter().any(|a| !pred.contains(*a)) || removed.iter().any(|r| pred.contains(*r));
    let ctx_missing = shared.iter().any(|s| !pred.contains(*s));
    match (mod_missing, ctx_missing) {
        (true, true) => ErrorCategory::Both,
        (false, true) => ErrorCategory::ContextInfo,
        _ => ErrorCategory::ModificationInfo,
    }
}
