use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sql::printer::{col_units, from_clause, order_items, select_items};
use crate::sql::visit::{NameMut, WalkNames};
use crate::sql::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Add,
    Remove,
    Replace,
}

impl Action {
    pub fn name(self) -> &'static str {
        match self {
            Self::Add => "add",
            Self::Remove => "remove",
            Self::Replace => "replace",
        }
    }
}

/// A piece of one clause. List-shaped clauses carry a suffix of the list;
/// predicate suffixes keep the link that joined them to what came before.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fragment {
    Select(SelectClause),
    From(FromClause),
    Where(Vec<PredItem>),
    GroupBy(Vec<ColUnit>),
    Having(Vec<PredItem>),
    OrderBy(Vec<OrderItem>),
    Limit(u64),
    SetOp(SetOp),
}

impl Fragment {
    pub fn clause(&self) -> Clause {
        match self {
            Self::Select(_) => Clause::Select,
            Self::From(_) => Clause::From,
            Self::Where(_) => Clause::Where,
            Self::GroupBy(_) => Clause::GroupBy,
            Self::Having(_) => Clause::Having,
            Self::OrderBy(_) => Clause::OrderBy,
            Self::Limit(_) => Clause::Limit,
            Self::SetOp(_) => Clause::SetOp,
        }
    }
}

fn linked_items(items: &[PredItem]) -> String {
    items
        .iter()
        .enumerate()
        .map(|(k, i)| {
            let cond = printer::condition(&i.cond);
            match (k, i.link) {
                (0, Logic::And) => cond,
                (_, Logic::And) => format!("AND {cond}"),
                (_, Logic::Or) => format!("OR {cond}"),
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

impl fmt::Display for Fragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Select(s) => {
                let d = if s.distinct { "DISTINCT " } else { "" };
                write!(f, "SELECT {d}{}", select_items(&s.items))
            }
            Self::From(fr) => {
                if fr.tables.is_empty() {
                    let conds: Vec<String> = fr.conds.iter().map(printer::condition).collect();
                    write!(f, "ON {}", conds.join(" AND "))
                } else {
                    write!(f, "FROM {}", from_clause(fr))
                }
            }
            Self::Where(items) => write!(f, "WHERE {}", linked_items(items)),
            Self::GroupBy(cols) => write!(f, "GROUP BY {}", col_units(cols)),
            Self::Having(items) => write!(f, "HAVING {}", linked_items(items)),
            Self::OrderBy(items) => write!(f, "ORDER BY {}", order_items(items)),
            Self::Limit(n) => write!(f, "LIMIT {n}"),
            Self::SetOp(s) => write!(f, "{} {}", s.kind.keyword(), print_sql(&s.right)),
        }
    }
}

impl WalkNames for Fragment {
    fn walk_names_mut(&mut self, nested: bool, f: &mut dyn FnMut(NameMut<'_>)) {
        match self {
            Self::Select(s) => s.walk_names_mut(nested, f),
            Self::From(fr) => fr.walk_names_mut(nested, f),
            Self::Where(items) | Self::Having(items) => items.walk_names_mut(nested, f),
            Self::GroupBy(cols) => cols.walk_names_mut(nested, f),
            Self::OrderBy(items) => items.walk_names_mut(nested, f),
            Self::Limit(_) => {}
            Self::SetOp(s) => s.walk_names_mut(nested, f),
        }
    }
}

/// One clause-level change. `removed` is the part of the previous query
/// that goes away, `added` the part that takes its place; exactly the
/// fields implied by `action` are present.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edit {
    pub clause: Clause,
    pub action: Action,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub removed: Option<Fragment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub added: Option<Fragment>,
}

impl Edit {
    pub fn add(added: Fragment) -> Self {
        Self {
            clause: added.clause(),
            action: Action::Add,
            removed: None,
            added: Some(added),
        }
    }

    pub fn remove(removed: Fragment) -> Self {
        Self {
            clause: removed.clause(),
            action: Action::Remove,
            removed: Some(removed),
            added: None,
        }
    }

    pub fn replace(removed: Fragment, added: Fragment) -> Self {
        Self {
            clause: added.clause(),
            action: Action::Replace,
            removed: Some(removed),
            added: Some(added),
        }
    }

    /// Checks that the fragments agree with `clause` and `action`.
    pub fn check(&self) -> Result<(), String> {
        let (want_removed, want_added) = match self.action {
            Action::Add => (false, true),
            Action::Remove => (true, false),
            Action::Replace => (true, true),
        };
        if self.removed.is_some() != want_removed || self.added.is_some() != want_added {
            return Err(format!(
                "{} edit with the wrong fragments",
                self.action.name()
            ));
        }
        for frag in self.removed.iter().chain(&self.added) {
            if frag.clause() != self.clause {
                return Err(format!(
                    "{} fragment in a {} edit",
                    frag.clause(),
                    self.clause
                ));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Edit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.clause, self.action.name())?;
        if let Some(r) = &self.removed {
            write!(f, " -[{r}]")?;
        }
        if let Some(a) = &self.added {
            write!(f, " +[{a}]")?;
        }
        Ok(())
    }
}

impl WalkNames for Edit {
    fn walk_names_mut(&mut self, nested: bool, f: &mut dyn FnMut(NameMut<'_>)) {
        if let Some(r) = &mut self.removed {
            r.walk_names_mut(nested, f);
        }
        if let Some(a) = &mut self.added {
            a.walk_names_mut(nested, f);
        }
    }
}

/// The edits turning one query into the next, in clause order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Modification {
    pub edits: Vec<Edit>,
}

impl Modification {
    pub fn clauses(&self) -> impl Iterator<Item = Clause> + '_ {
        self.edits.iter().map(|e| e.clause)
    }
}

impl fmt::Display for Modification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.edits.iter().map(|e| e.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

impl WalkNames for Modification {
    fn walk_names_mut(&mut self, nested: bool, f: &mut dyn FnMut(NameMut<'_>)) {
        for e in &mut self.edits {
            e.walk_names_mut(nested, f);
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ApplyError {
    #[error("malformed edit: {0}")]
    Malformed(String),
    #[error("cannot remove {0}: the base query has no matching part")]
    Missing(Clause),
    #[error("cannot add {0}: the base query already has one")]
    Occupied(Clause),
    #[error("result is not a valid query: {0}")]
    Invalid(String),
}

fn strip_suffix<T: PartialEq + Clone>(list: &[T], suffix: &[T]) -> Option<Vec<T>> {
    if suffix.len() > list.len() || list[list.len() - suffix.len()..] != *suffix {
        return None;
    }
    Some(list[..list.len() - suffix.len()].to_vec())
}

fn edit_pred(
    base: &Predicate,
    e: &Edit,
    items_of: fn(&Fragment) -> Option<&Vec<PredItem>>,
) -> Result<Predicate, ApplyError> {
    let mut items = base.items.clone();
    if let Some(r) = &e.removed {
        let r = items_of(r).ok_or(ApplyError::Malformed("fragment kind".into()))?;
        items = strip_suffix(&items, r)
            .or_else(|| {
                // The first kept item may have been normalized to AND.
                let mut rr = r.clone();
                if let Some(first) = rr.first_mut() {
                    first.link = Logic::And;
                }
                if rr.len() == items.len() && items == rr {
                    Some(Vec::new())
                } else {
                    None
                }
            })
            .ok_or(ApplyError::Missing(e.clause))?;
    }
    if let Some(a) = &e.added {
        let a = items_of(a).ok_or(ApplyError::Malformed("fragment kind".into()))?;
        items.extend(a.iter().cloned());
    }
    let mut p = Predicate { items };
    p.normalize();
    Ok(p)
}

fn list_edit<T: PartialEq + Clone>(
    base: &[T],
    e: &Edit,
    get: impl Fn(&Fragment) -> Option<&Vec<T>>,
) -> Result<Vec<T>, ApplyError> {
    let mut items = base.to_vec();
    if let Some(r) = &e.removed {
        let r = get(r).ok_or(ApplyError::Malformed("fragment kind".into()))?;
        items = strip_suffix(&items, r).ok_or(ApplyError::Missing(e.clause))?;
    }
    if let Some(a) = &e.added {
        let a = get(a).ok_or(ApplyError::Malformed("fragment kind".into()))?;
        items.extend(a.iter().cloned());
    }
    Ok(items)
}

/// Applies a modification to `base`: additions append to the clause
/// (conjoined with AND for predicates), removals take a matching suffix
/// away, replacements do both. The result is canonicalized and validated.
pub fn apply_modification(base: &Query, m: &Modification) -> Result<Query, ApplyError> {
    let mut q = base.clone();
    for e in &m.edits {
        e.check().map_err(ApplyError::Malformed)?;
        match e.clause {
            Clause::Select => {
                let items = list_edit(&q.select.items, e, |f| match f {
                    Fragment::Select(s) => Some(&s.items),
                    _ => None,
                })?;
                if e.action == Action::Replace {
                    if let Some(Fragment::Select(s)) = &e.added {
                        q.select.distinct = s.distinct;
                    }
                }
                if let (Action::Remove, Some(Fragment::Select(s))) = (e.action, &e.removed) {
                    if s.distinct != q.select.distinct {
                        return Err(ApplyError::Missing(Clause::Select));
                    }
                }
                q.select.items = items;
            }
            Clause::From => {
                let tables = list_edit(&q.from.tables, e, |f| match f {
                    Fragment::From(fr) => Some(&fr.tables),
                    _ => None,
                })?;
                let conds = list_edit(&q.from.conds, e, |f| match f {
                    Fragment::From(fr) => Some(&fr.conds),
                    _ => None,
                })?;
                if e.action == Action::Add {
                    let before: Vec<String> = q
                        .from
                        .table_names()
                        .map(|t| t.to_ascii_lowercase())
                        .collect();
                    let Some(Fragment::From(a)) = &e.added else {
                        unreachable!()
                    };
                    if a.table_names()
                        .any(|t| before.contains(&t.to_ascii_lowercase()))
                    {
                        return Err(ApplyError::Occupied(Clause::From));
                    }
                }
                q.from = FromClause { tables, conds };
            }
            Clause::Where => {
                q.where_clause = edit_pred(&q.where_clause, e, |f| match f {
                    Fragment::Where(i) => Some(i),
                    _ => None,
                })?;
            }
            Clause::Having => {
                q.having = edit_pred(&q.having, e, |f| match f {
                    Fragment::Having(i) => Some(i),
                    _ => None,
                })?;
            }
            Clause::GroupBy => {
                q.group_by = list_edit(&q.group_by, e, |f| match f {
                    Fragment::GroupBy(c) => Some(c),
                    _ => None,
                })?;
            }
            Clause::OrderBy => {
                q.order_by = list_edit(&q.order_by, e, |f| match f {
                    Fragment::OrderBy(o) => Some(o),
                    _ => None,
                })?;
            }
            Clause::Limit => {
                if let Some(r) = &e.removed {
                    if *r != Fragment::Limit(q.limit.ok_or(ApplyError::Missing(Clause::Limit))?) {
                        return Err(ApplyError::Missing(Clause::Limit));
                    }
                    q.limit = None;
                }
                if let Some(Fragment::Limit(n)) = &e.added {
                    if q.limit.is_some() {
                        return Err(ApplyError::Occupied(Clause::Limit));
                    }
                    q.limit = Some(*n);
                }
            }
            Clause::SetOp => {
                if let Some(r) = &e.removed {
                    match &q.set_op {
                        Some(s) if Fragment::SetOp(s.clone()) == *r => q.set_op = None,
                        _ => return Err(ApplyError::Missing(Clause::SetOp)),
                    }
                }
                if let Some(Fragment::SetOp(s)) = &e.added {
                    if q.set_op.is_some() {
                        return Err(ApplyError::Occupied(Clause::SetOp));
                    }
                    q.set_op = Some(s.clone());
                }
            }
        }
    }
    canonicalize(&mut q);
    validate(&q).map_err(ApplyError::Invalid)?;
    Ok(q)
}
