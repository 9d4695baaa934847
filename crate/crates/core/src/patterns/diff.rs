//! Top-down, clause-by-clause difference between two consecutive queries.

use serde::{Deserialize, Serialize};

use super::edit::{Edit, Fragment, Modification};
use crate::sql::*;

/// Why a pair of queries was not turned into a modification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NotIncremental {
    Identical,
    TooManyClauses,
    TopicChange,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiffOutcome {
    Modification(Modification),
    NotIncremental(NotIncremental),
}

impl DiffOutcome {
    pub fn modification(self) -> Option<Modification> {
        match self {
            Self::Modification(m) => Some(m),
            Self::NotIncremental(_) => None,
        }
    }
}

/// Largest number of differing top-level clauses still treated as a
/// modification of the previous query.
pub const MAX_CHANGED_CLAUSES: usize = 2;

fn common_prefix<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

/// Diff of two lists as (removed suffix, added suffix) after their longest
/// common prefix. Both empty means equal.
fn list_diff<T: PartialEq + Clone>(prev: &[T], cur: &[T]) -> (Vec<T>, Vec<T>) {
    let p = common_prefix(prev, cur);
    (prev[p..].to_vec(), cur[p..].to_vec())
}

fn edit_of(removed: Option<Fragment>, added: Option<Fragment>) -> Option<Edit> {
    match (removed, added) {
        (None, None) => None,
        (None, Some(a)) => Some(Edit::add(a)),
        (Some(r), None) => Some(Edit::remove(r)),
        (Some(r), Some(a)) => Some(Edit::replace(r, a)),
    }
}

fn nonempty<T>(v: Vec<T>, wrap: fn(Vec<T>) -> Fragment) -> Option<Fragment> {
    if v.is_empty() {
        None
    } else {
        Some(wrap(v))
    }
}

fn select_edit(prev: &SelectClause, cur: &SelectClause) -> Option<Edit> {
    if prev == cur {
        return None;
    }
    if prev.distinct != cur.distinct {
        return Some(Edit::replace(
            Fragment::Select(prev.clone()),
            Fragment::Select(cur.clone()),
        ));
    }
    let (r, a) = list_diff(&prev.items, &cur.items);
    let wrap = |items: Vec<ValUnit>| {
        (!items.is_empty()).then_some(Fragment::Select(SelectClause {
            distinct: cur.distinct,
            items,
        }))
    };
    edit_of(wrap(r), wrap(a))
}

fn from_edit(prev: &FromClause, cur: &FromClause) -> Option<Edit> {
    if prev == cur {
        return None;
    }
    let extends = |short: &FromClause, long: &FromClause| {
        long.tables.len() > short.tables.len()
            && long.tables.starts_with(&short.tables)
            && long.conds.starts_with(&short.conds)
    };
    let tail = |short: &FromClause, long: &FromClause| FromClause {
        tables: long.tables[short.tables.len()..].to_vec(),
        conds: long.conds[short.conds.len()..].to_vec(),
    };
    if extends(prev, cur) {
        Some(Edit::add(Fragment::From(tail(prev, cur))))
    } else if extends(cur, prev) {
        Some(Edit::remove(Fragment::From(tail(cur, prev))))
    } else {
        Some(Edit::replace(
            Fragment::From(prev.clone()),
            Fragment::From(cur.clone()),
        ))
    }
}

fn pred_edit(
    prev: &Predicate,
    cur: &Predicate,
    wrap: fn(Vec<PredItem>) -> Fragment,
) -> Option<Edit> {
    let (r, a) = list_diff(&prev.items, &cur.items);
    edit_of(nonempty(r, wrap), nonempty(a, wrap))
}

fn option_edit<T: PartialEq + Clone>(
    prev: &Option<T>,
    cur: &Option<T>,
    wrap: fn(T) -> Fragment,
) -> Option<Edit> {
    if prev == cur {
        return None;
    }
    edit_of(prev.clone().map(wrap), cur.clone().map(wrap))
}

/// Compares `prev` and `cur` clause by clause. Inside list-shaped clauses
/// the edit covers only the part after the longest common prefix, so a
/// changed condition yields that condition rather than the whole WHERE.
pub fn diff_asts(prev: &Query, cur: &Query) -> DiffOutcome {
    let edits: Vec<Edit> = [
        select_edit(&prev.select, &cur.select),
        from_edit(&prev.from, &cur.from),
        pred_edit(&prev.where_clause, &cur.where_clause, Fragment::Where),
        {
            let (r, a) = list_diff(&prev.group_by, &cur.group_by);
            edit_of(
                nonempty(r, Fragment::GroupBy),
                nonempty(a, Fragment::GroupBy),
            )
        },
        pred_edit(&prev.having, &cur.having, Fragment::Having),
        {
            let (r, a) = list_diff(&prev.order_by, &cur.order_by);
            edit_of(
                nonempty(r, Fragment::OrderBy),
                nonempty(a, Fragment::OrderBy),
            )
        },
        option_edit(&prev.limit, &cur.limit, Fragment::Limit),
        option_edit(&prev.set_op, &cur.set_op, Fragment::SetOp),
    ]
    .into_iter()
    .flatten()
    .collect();

    if edits.is_empty() {
        return DiffOutcome::NotIncremental(NotIncremental::Identical);
    }
    if edits.len() > MAX_CHANGED_CLAUSES {
        return DiffOutcome::NotIncremental(NotIncremental::TooManyClauses);
    }
    let lower = |f: &FromClause| -> Vec<String> {
        f.table_names().map(|t| t.to_ascii_lowercase()).collect()
    };
    let (pt, ct) = (lower(&prev.from), lower(&cur.from));
    let disjoint = !pt.is_empty() && !ct.is_empty() && !pt.iter().any(|t| ct.contains(t));
    if disjoint && prev.select != cur.select {
        return DiffOutcome::NotIncremental(NotIncremental::TopicChange);
    }
    let m = Modification { edits };
    debug_assert_eq!(
        super::apply_modification(prev, &m).as_ref(),
        Ok(cur),
        "diff does not reconstruct {}",
        print_sql(cur)
    );
    DiffOutcome::Modification(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::{apply_modification, Action};
    use crate::schema::tests::airlines_schema;

    fn q(s: &str) -> Query {
        parse_sql(s, &airlines_schema()).unwrap()
    }

    fn only_edit(prev: &str, cur: &str) -> Edit {
        let m = diff_asts(&q(prev), &q(cur))
            .modification()
            .expect("a modification");
        assert_eq!(m.edits.len(), 1, "{m}");
        m.edits[0].clone()
    }

    #[test]
    fn identical_queries_are_not_incremental() {
        let a = q("SELECT Airline FROM AIRLINES");
        assert_eq!(
            diff_asts(&a, &a),
            DiffOutcome::NotIncremental(NotIncremental::Identical)
        );
    }

    #[test]
    fn where_added() {
        let e = only_edit(
            "SELECT Airline FROM AIRLINES",
            "SELECT Airline FROM AIRLINES WHERE Country = 'USA'",
        );
        assert_eq!((e.clause, e.action), (Clause::Where, Action::Add));
        assert_eq!(
            e.added.unwrap().to_string(),
            "WHERE AIRLINES.Country = 'USA'"
        );
    }

    #[test]
    fn order_replaced() {
        let e = only_edit(
            "SELECT Airline FROM AIRLINES ORDER BY Country ASC",
            "SELECT Airline FROM AIRLINES ORDER BY Airline DESC",
        );
        assert_eq!((e.clause, e.action), (Clause::OrderBy, Action::Replace));
        assert_eq!(
            e.removed.unwrap().to_string(),
            "ORDER BY AIRLINES.Country ASC"
        );
        assert_eq!(
            e.added.unwrap().to_string(),
            "ORDER BY AIRLINES.Airline DESC"
        );
    }

    #[test]
    fn changed_condition_is_the_minimal_node() {
        let e = only_edit(
            "SELECT Airline FROM AIRLINES WHERE Country = 'USA' AND Abbreviation = 'UA'",
            "SELECT Airline FROM AIRLINES WHERE Country = 'USA' AND Abbreviation = 'AA'",
        );
        assert_eq!(e.action, Action::Replace);
        assert_eq!(
            e.removed.unwrap().to_string(),
            "WHERE AIRLINES.Abbreviation = 'UA'"
        );
    }

    #[test]
    fn join_extension_is_a_from_add() {
        let prev = q("SELECT Airline FROM AIRLINES WHERE Country = 'USA'");
        let cur = q("SELECT T1.Airline FROM AIRLINES AS T1 JOIN FLIGHTS AS T2 ON T1.uid = T2.Airline WHERE T1.Country = 'USA' AND T2.FlightNo > 10");
        let m = diff_asts(&prev, &cur).modification().unwrap();
        assert_eq!(m.edits.len(), 2);
        assert_eq!(
            (m.edits[0].clause, m.edits[0].action),
            (Clause::From, Action::Add)
        );
        assert_eq!(apply_modification(&prev, &m).unwrap(), cur);
    }

    #[test]
    fn thresholds() {
        let prev = q("SELECT Airline FROM AIRLINES");
        let cur = q("SELECT count(*) FROM AIRLINES WHERE Country = 'USA' ORDER BY Airline ASC");
        assert_eq!(
            diff_asts(&prev, &cur),
            DiffOutcome::NotIncremental(NotIncremental::TooManyClauses)
        );
        let cur = q("SELECT FlightNo FROM FLIGHTS");
        assert_eq!(
            diff_asts(&prev, &cur),
            DiffOutcome::NotIncremental(NotIncremental::TopicChange)
        );
    }

    #[test]
    fn removals_keep_the_removed_part() {
        let e = only_edit(
            "SELECT Airline FROM AIRLINES ORDER BY Country ASC LIMIT 3",
            "SELECT Airline FROM AIRLINES ORDER BY Country ASC",
        );
        assert_eq!((e.clause, e.action), (Clause::Limit, Action::Remove));
        assert_eq!(e.removed, Some(Fragment::Limit(3)));
    }
}
