//! Independent enumeration of the fills a template admits.

use std::collections::BTreeSet;

use cgforge::patterns::*;
use cgforge::schema::Schema;
use cgforge::sql::visit::{Name, WalkNames};
use cgforge::sql::*;

/// Slots that occur in a removed fragment.
fn removal_slots(t: &ModificationTemplate) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for e in &t.edits {
        if let Some(r) = &e.removed {
            for n in r.names() {
                match n {
                    Name::Table(x) => {
                        out.insert(x);
                    }
                    Name::Column { table, column } => {
                        out.insert(table);
                        out.insert(column);
                    }
                    Name::Value(v) => {
                        out.insert(v.raw);
                    }
                }
            }
        }
    }
    out
}

/// Does every removal of the filled template take away the end of the
/// matching base clause?
fn removals_match(t: &ModificationTemplate, fill: &SlotFill, base: &Query) -> bool {
    let m = instantiate(t, fill);
    m.edits.iter().all(|e| match &e.removed {
        None => true,
        Some(r) => {
            apply_modification(
                base,
                &Modification {
                    edits: vec![Edit::remove(r.clone())],
                },
            ) != Err(ApplyError::Missing(e.clause))
        }
    })
}

/// Checks a total assignment against the template, straight from the
/// constraint definitions.
fn satisfies(t: &ModificationTemplate, fill: &SlotFill, base: &Query, s: &Schema) -> bool {
    let base_tables: BTreeSet<usize> = base
        .from
        .table_names()
        .filter_map(|n| s.table_index(n))
        .collect();
    let table_of = |slot: &str| s.table_index(fill.table(slot)?);
    let column_of = |slot: &str| {
        let ts = t.constraints.iter().find_map(|c| match c {
            Constraint::ColumnOf { column, table } if column == slot => Some(table.as_str()),
            _ => None,
        })?;
        s.column_index(table_of(ts)?, fill.column(slot)?)
    };
    let mut tables = BTreeSet::new();
    let mut columns = BTreeSet::new();
    let removed = removal_slots(t);
    for d in &t.slots {
        match d.kind {
            SlotKind::Table => match table_of(&d.name) {
                Some(i) if tables.insert(i) => {}
                _ => return false,
            },
            SlotKind::Column(ty) => match column_of(&d.name) {
                Some(i) if s.columns[i].ty == ty && columns.insert(i) => {}
                _ => return false,
            },
            SlotKind::Value => {
                let placeholder =
                    fill.assignment.get(&d.name) == Some(&Binding::Value(Value::placeholder()));
                if !removed.contains(&d.name) && !placeholder {
                    return false;
                }
            }
        }
    }
    let all = t.constraints.iter().all(|c| match c {
        Constraint::ColumnOf { column, .. } => column_of(column).is_some(),
        Constraint::InBase { table } => table_of(table).is_some_and(|i| base_tables.contains(&i)),
        Constraint::NewTable { table } => {
            table_of(table).is_some_and(|i| !base_tables.contains(&i))
        }
        Constraint::PrimaryKey { column } => column_of(column).is_some_and(|i| s.is_primary_key(i)),
        Constraint::ForeignKey { from, to } => match (column_of(from), column_of(to)) {
            (Some(a), Some(b)) => s.is_foreign_key(a, b),
            _ => false,
        },
    });
    all && removals_match(t, fill, base)
}

fn domain(d: &SlotDecl, s: &Schema, base: &Query) -> Vec<Binding> {
    match d.kind {
        SlotKind::Table => s
            .tables
            .iter()
            .map(|t| Binding::Table(t.name.clone()))
            .collect(),
        SlotKind::Column(_) => s
            .columns
            .iter()
            .skip(1)
            .map(|c| c.name.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .map(Binding::Column)
            .collect(),
        SlotKind::Value => {
            let mut v: BTreeSet<Value> = base
                .names()
                .into_iter()
                .filter_map(|n| match n {
                    Name::Value(v) => Some(v),
                    _ => None,
                })
                .collect();
            v.insert(Value::placeholder());
            v.into_iter().map(Binding::Value).collect()
        }
    }
}

/// Every total assignment over the schema's names, filtered by
/// `satisfies`. `None` when the space is too large to walk.
pub fn brute_force(
    t: &ModificationTemplate,
    base: &Query,
    s: &Schema,
) -> Option<BTreeSet<SlotFill>> {
    let doms: Vec<Vec<Binding>> = t.slots.iter().map(|d| domain(d, s, base)).collect();
    let size: usize = doms.iter().map(Vec::len).product();
    if size > 100_000 {
        return None;
    }
    let mut out = BTreeSet::new();
    for mut i in 0..size {
        let mut fill = SlotFill::default();
        for (d, dom) in t.slots.iter().zip(&doms) {
            fill.assignment
                .insert(d.name.clone(), dom[i % dom.len()].clone());
            i /= dom.len();
        }
        if satisfies(t, &fill, base, s) {
            out.insert(fill);
        }
    }
    Some(out)
}
