//! Constraint-respecting slot fills.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::hash::stable_hash;
use crate::patterns::{
    substitute, Binding, Constraint, Edit, Fragment, ModificationTemplate, SlotFill,
};
use crate::schema::Schema;
use crate::sql::visit::{Name, WalkNames};
use crate::sql::{print_sql, FromClause, Query, SelectClause, SlotKind, Value};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FillError {
    #[error("no fill: {0}")]
    NoFill(String),
}

fn no_fill(msg: impl Into<String>) -> FillError {
    FillError::NoFill(msg.into())
}

fn suffix<T: Clone>(list: &[T], n: usize) -> Option<Vec<T>> {
    (n <= list.len()).then(|| list[list.len() - n..].to_vec())
}

/// The part of `base` a removal fragment must match: the trailing
/// elements of the same clause, as many as the fragment holds.
fn base_part(base: &Query, frag: &Fragment) -> Option<Fragment> {
    Some(match frag {
        Fragment::Select(s) => Fragment::Select(SelectClause {
            distinct: base.select.distinct,
            items: suffix(&base.select.items, s.items.len())?,
        }),
        Fragment::From(f) => Fragment::From(FromClause {
            tables: suffix(&base.from.tables, f.tables.len())?,
            conds: suffix(&base.from.conds, f.conds.len())?,
        }),
        Fragment::Where(items) => {
            let mut part = suffix(&base.where_clause.items, items.len())?;
            // A suffix that is the whole predicate carries the normalized
            // first link; take the template's so that both spell it alike.
            if part.len() == base.where_clause.len() {
                if let (Some(p), Some(t)) = (part.first_mut(), items.first()) {
                    p.link = t.link;
                }
            }
            Fragment::Where(part)
        }
        Fragment::Having(items) => {
            let mut part = suffix(&base.having.items, items.len())?;
            if part.len() == base.having.len() {
                if let (Some(p), Some(t)) = (part.first_mut(), items.first()) {
                    p.link = t.link;
                }
            }
            Fragment::Having(part)
        }
        Fragment::GroupBy(c) => Fragment::GroupBy(suffix(&base.group_by, c.len())?),
        Fragment::OrderBy(o) => Fragment::OrderBy(suffix(&base.order_by, o.len())?),
        Fragment::Limit(_) => Fragment::Limit(base.limit?),
        Fragment::SetOp(_) => Fragment::SetOp(base.set_op.clone()?),
    })
}

fn bind(fill: &mut SlotFill, slot: &str, b: Binding) -> Result<(), FillError> {
    match fill.assignment.get(slot) {
        Some(existing) if *existing != b => Err(no_fill(format!("{slot} bound twice"))),
        Some(_) => Ok(()),
        None => {
            fill.assignment.insert(slot.to_string(), b);
            Ok(())
        }
    }
}

/// Binds every slot that occurs in a removal fragment to the matching part
/// of `base`.
fn unify_removals(t: &ModificationTemplate, base: &Query) -> Result<SlotFill, FillError> {
    let mut fill = SlotFill::default();
    let removals: Vec<&Fragment> = t
        .edits
        .iter()
        .filter_map(|e: &Edit| e.removed.as_ref())
        .collect();
    for frag in &removals {
        let part = base_part(base, frag)
            .ok_or_else(|| no_fill(format!("base has no {} to remove", frag.clause())))?;
        let (tn, bn) = (frag.names(), part.names());
        if tn.len() != bn.len() {
            return Err(no_fill(format!("{} shape differs", frag.clause())));
        }
        for (a, b) in tn.into_iter().zip(bn) {
            match (a, b) {
                (Name::Table(s), Name::Table(x)) => bind(&mut fill, &s, Binding::Table(x))?,
                (
                    Name::Column {
                        table: ts,
                        column: cs,
                    },
                    Name::Column { table, column },
                ) => {
                    bind(&mut fill, &ts, Binding::Table(table))?;
                    bind(&mut fill, &cs, Binding::Column(column))?;
                }
                (Name::Value(s), Name::Value(v)) => bind(&mut fill, &s.raw, Binding::Value(v))?,
                _ => return Err(no_fill(format!("{} shape differs", frag.clause()))),
            }
        }
    }
    for frag in removals {
        let mut concrete = frag.clone();
        substitute(&mut concrete, &fill);
        if Some(concrete) != base_part(base, frag) {
            return Err(no_fill(format!(
                "{} does not match the base",
                frag.clause()
            )));
        }
    }
    Ok(fill)
}

struct Search<'a> {
    t: &'a ModificationTemplate,
    schema: &'a Schema,
    base_tables: Vec<String>,
    order: Vec<usize>,
    out: Vec<SlotFill>,
}

impl Search<'_> {
    fn table_index(&self, fill: &SlotFill, slot: &str) -> Option<usize> {
        self.schema.table_index(fill.table(slot)?)
    }

    fn column_index(&self, fill: &SlotFill, slot: &str) -> Option<usize> {
        let table = self.t.table_of(slot)?;
        self.schema
            .column_index(self.table_index(fill, table)?, fill.column(slot)?)
    }

    /// Checks every constraint whose slots are all assigned, plus type and
    /// injectivity for the assigned slots.
    fn consistent(&self, fill: &SlotFill) -> bool {
        let mut tables = Vec::new();
        let mut columns = Vec::new();
        for decl in &self.t.slots {
            match decl.kind {
                SlotKind::Table => {
                    if let Some(ti) = fill
                        .table(&decl.name)
                        .map(|_| self.table_index(fill, &decl.name))
                    {
                        match ti {
                            Some(ti) if !tables.contains(&ti) => tables.push(ti),
                            _ => return false,
                        }
                    }
                }
                SlotKind::Column(ty) => {
                    if fill.column(&decl.name).is_some() {
                        match self.column_index(fill, &decl.name) {
                            Some(ci)
                                if !columns.contains(&ci) && self.schema.columns[ci].ty == ty =>
                            {
                                columns.push(ci)
                            }
                            _ => return false,
                        }
                    }
                }
                SlotKind::Value => {}
            }
        }
        for c in &self.t.constraints {
            let ok = match c {
                Constraint::ColumnOf { .. } => true,
                Constraint::InBase { table } => fill
                    .table(table)
                    .is_none_or(|x| self.base_tables.contains(&x.to_ascii_lowercase())),
                Constraint::NewTable { table } => fill
                    .table(table)
                    .is_none_or(|x| !self.base_tables.contains(&x.to_ascii_lowercase())),
                Constraint::PrimaryKey { column } => {
                    fill.column(column).is_none()
                        || self
                            .column_index(fill, column)
                            .is_some_and(|i| self.schema.is_primary_key(i))
                }
                Constraint::ForeignKey { from, to } => match (fill.column(from), fill.column(to)) {
                    (Some(_), Some(_)) => {
                        match (self.column_index(fill, from), self.column_index(fill, to)) {
                            (Some(a), Some(b)) => self.schema.is_foreign_key(a, b),
                            _ => false,
                        }
                    }
                    _ => true,
                },
            };
            if !ok {
                return false;
            }
        }
        true
    }

    fn candidates(&self, fill: &SlotFill, slot: usize) -> Vec<Binding> {
        let decl = &self.t.slots[slot];
        match decl.kind {
            SlotKind::Table => {
                let in_base = self.t.constraints.contains(&Constraint::InBase {
                    table: decl.name.clone(),
                });
                self.schema
                    .tables
                    .iter()
                    .filter(|tb| {
                        self.base_tables.contains(&tb.name.to_ascii_lowercase()) == in_base
                    })
                    .map(|tb| Binding::Table(tb.name.clone()))
                    .collect()
            }
            SlotKind::Column(ty) => {
                let Some(ti) = self
                    .t
                    .table_of(&decl.name)
                    .and_then(|ts| self.table_index(fill, ts))
                else {
                    return Vec::new();
                };
                self.schema
                    .columns_of(ti)
                    .filter(|&ci| self.schema.columns[ci].ty == ty)
                    .map(|ci| Binding::Column(self.schema.columns[ci].name.clone()))
                    .collect()
            }
            SlotKind::Value => vec![Binding::Value(Value::placeholder())],
        }
    }

    fn run(&mut self, fill: &mut SlotFill, k: usize) {
        if k == self.order.len() {
            self.out.push(fill.clone());
            return;
        }
        let slot = self.order[k];
        let name = self.t.slots[slot].name.clone();
        for b in self.candidates(fill, slot) {
            fill.assignment.insert(name.clone(), b);
            if self.consistent(fill) {
                self.run(fill, k + 1);
            }
            fill.assignment.remove(&name);
        }
    }
}

/// Every fill of `t` against `base` that satisfies the template's
/// constraints, in a fixed order. Slots inside removal fragments are bound
/// to the part of `base` being removed; values that are not bound that way
/// get the placeholder literal.
pub fn all_fills(
    t: &ModificationTemplate,
    base: &Query,
    schema: &Schema,
) -> Result<Vec<SlotFill>, FillError> {
    let start = unify_removals(t, base)?;
    let base_tables: Vec<String> = base
        .from
        .table_names()
        .map(|x| x.to_ascii_lowercase())
        .collect();
    let order: Vec<usize> = (0..t.slots.len())
        .filter(|&i| !start.assignment.contains_key(&t.slots[i].name))
        .collect();
    let mut search = Search {
        t,
        schema,
        base_tables,
        order,
        out: Vec::new(),
    };
    if !search.consistent(&start) {
        return Err(no_fill("the removed part breaks a constraint"));
    }
    let mut fill = start;
    search.run(&mut fill, 0);
    if search.out.is_empty() {
        let needs: Vec<String> = t.slots.iter().map(|s| s.to_string()).collect();
        return Err(no_fill(format!(
            "no schema items satisfy [{}]",
            needs.join(", ")
        )));
    }
    Ok(search.out)
}

/// Seed for one (base, template) pair, so that samples do not depend on
/// the order pairs are visited in.
fn pair_seed(seed: u64, base: &Query, t: &ModificationTemplate) -> u64 {
    let h = stable_hash(&format!("{seed}|{}|{}", print_sql(base), t.hash));
    u64::from_str_radix(&h, 16).expect("hex digest")
}

/// At most `cap` fills drawn uniformly without replacement from
/// [`all_fills`], kept in enumeration order. `None` means no cap.
pub fn enumerate_fills(
    t: &ModificationTemplate,
    base: &Query,
    schema: &Schema,
    seed: u64,
    cap: Option<usize>,
) -> Result<Vec<SlotFill>, FillError> {
    let all = all_fills(t, base, schema)?;
    match cap {
        Some(cap) if cap < all.len() => {
            let mut rng = ChaCha8Rng::seed_from_u64(pair_seed(seed, base, t));
            let mut idx = rand::seq::index::sample(&mut rng, all.len(), cap).into_vec();
            idx.sort_unstable();
            Ok(idx.into_iter().map(|i| all[i].clone()).collect())
        }
        _ => Ok(all),
    }
}
