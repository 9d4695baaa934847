use super::ast::*;
use super::visit::{NameMut, WalkNames};

/// Puts a tree in canonical form: first predicate links are `And` and join
/// conditions are ordered by the position of the last table they mention.
pub fn canonicalize(q: &mut Query) {
    q.where_clause.normalize();
    q.having.normalize();
    let positions: Vec<String> = q
        .from
        .table_names()
        .map(|t| t.to_ascii_lowercase())
        .collect();
    let pos_of = |c: &Condition| -> usize {
        let mut copy = c.clone();
        let mut max = 0;
        copy.walk_names_mut(false, &mut |n| {
            if let NameMut::Column { table, .. } = n {
                let t = table.to_ascii_lowercase();
                if let Some(p) = positions.iter().position(|x| *x == t) {
                    max = max.max(p);
                }
            }
        });
        max
    };
    let mut keyed: Vec<(usize, Condition)> =
        q.from.conds.drain(..).map(|c| (pos_of(&c), c)).collect();
    keyed.sort_by_key(|(p, _)| *p);
    q.from.conds = keyed.into_iter().map(|(_, c)| c).collect();
    for t in &mut q.from.tables {
        if let TableUnit::Query(inner) = t {
            canonicalize(inner);
        }
    }
    for item in q
        .where_clause
        .items
        .iter_mut()
        .chain(q.having.items.iter_mut())
    {
        for op in std::iter::once(&mut item.cond.right).chain(item.cond.right2.as_mut()) {
            if let Operand::Query(inner) = op {
                canonicalize(inner);
            }
        }
    }
    if let Some(s) = &mut q.set_op {
        canonicalize(&mut s.right);
    }
}

/// Checks the structural invariants of a schema-bound tree.
pub fn validate(q: &Query) -> Result<(), String> {
    if q.select.items.is_empty() {
        return Err("empty select list".into());
    }
    if q.from.tables.is_empty() {
        return Err("empty FROM clause".into());
    }
    if !q.having.is_empty() && q.group_by.is_empty() {
        return Err("HAVING requires GROUP BY".into());
    }
    if let Some(s) = &q.set_op {
        if s.right.select.items.len() != q.select.items.len() {
            return Err(format!(
                "{} operands have different arity ({} vs {})",
                s.kind.keyword(),
                q.select.items.len(),
                s.right.select.items.len()
            ));
        }
    }
    let conds = q
        .from
        .conds
        .iter()
        .chain(q.where_clause.conditions())
        .chain(q.having.conditions());
    for c in conds {
        if (c.op == CmpOp::Between) != c.right2.is_some() {
            return Err("BETWEEN takes exactly two bounds".into());
        }
        for op in std::iter::once(&c.right).chain(c.right2.as_ref()) {
            if matches!(op, Operand::Query(_)) && !c.op.allows_subquery() {
                return Err(format!("{} cannot take a nested query", c.op.symbol()));
            }
        }
    }
    let tables: Vec<String> = q
        .from
        .table_names()
        .map(|t| t.to_ascii_lowercase())
        .collect();
    let mut stray = None;
    q.clone().walk_names_mut(false, &mut |n| {
        if let NameMut::Column { table, .. } = n {
            if stray.is_none() && !tables.contains(&table.to_ascii_lowercase()) {
                stray = Some(table.clone());
            }
        }
    });
    if let Some(t) = stray {
        return Err(format!("column of table {t:?} which is not in FROM"));
    }
    for inner in q.nested() {
        validate(inner)?;
    }
    Ok(())
}
