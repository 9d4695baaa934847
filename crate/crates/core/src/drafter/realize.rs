//! Rule-based English realization of concrete modifications.

use crate::patterns::{Action, Edit, Fragment};
use crate::schema::Schema;
use crate::sql::{
    Agg, ArithOp, CmpOp, ColUnit, ColumnRef, Condition, Direction, Logic, Operand, OrderItem,
    PredItem, Query, SetOpKind, TableUnit, ValUnit, Value, ValueKind,
};

use super::DraftError;

pub(crate) struct Realizer<'a> {
    pub schema: &'a Schema,
}

fn agg_phrase(agg: Agg) -> &'static str {
    match agg {
        Agg::None => "",
        Agg::Count => "the number of",
        Agg::Sum => "the total",
        Agg::Avg => "the average",
        Agg::Min => "the minimum",
        Agg::Max => "the maximum",
    }
}

fn op_phrase(op: CmpOp) -> &'static str {
    match op {
        CmpOp::Eq => "is",
        CmpOp::Ne => "is not",
        CmpOp::Gt => "is greater than",
        CmpOp::Lt => "is less than",
        CmpOp::Ge => "is at least",
        CmpOp::Le => "is at most",
        CmpOp::Like => "contains",
        CmpOp::NotLike => "does not contain",
        CmpOp::In => "is one of",
        CmpOp::NotIn => "is not one of",
        CmpOp::Between => "is between",
    }
}

fn value_phrase(v: &Value) -> String {
    match v.kind {
        ValueKind::Placeholder => "[value]".into(),
        ValueKind::String => v.raw.trim_matches('%').to_string(),
        ValueKind::Number => v.raw.clone(),
    }
}

fn list(parts: Vec<String>) -> String {
    match parts.len() {
        0 => String::new(),
        1 => parts.into_iter().next().unwrap(),
        n => format!("{} and {}", parts[..n - 1].join(", "), parts[n - 1]),
    }
}

impl Realizer<'_> {
    fn column_ref(&self, c: &ColumnRef) -> String {
        match c {
            ColumnRef::Star => "rows".into(),
            ColumnRef::Column { table, column } => match self.schema.lookup_column(table, column) {
                Some(i) => self.schema.column_phrase(i),
                None => column.replace('_', " ").to_lowercase(),
            },
        }
    }

    fn col_unit(&self, c: &ColUnit) -> String {
        let col = self.column_ref(&c.col);
        let col = if c.distinct {
            format!("distinct {col}")
        } else {
            col
        };
        match (c.agg, &c.col) {
            (Agg::None, ColumnRef::Star) => "everything".into(),
            (Agg::None, _) => col,
            (agg, _) => format!("{} {col}", agg_phrase(agg)),
        }
    }

    fn val_unit(&self, v: &ValUnit) -> String {
        match v {
            ValUnit::Col(c) => self.col_unit(c),
            ValUnit::Arith { op, left, right } => {
                let word = match op {
                    ArithOp::Add => "plus",
                    ArithOp::Sub => "minus",
                    ArithOp::Mul => "times",
                    ArithOp::Div => "divided by",
                };
                format!("{} {word} {}", self.col_unit(left), self.col_unit(right))
            }
        }
    }

    fn operand(&self, o: &Operand) -> String {
        match o {
            Operand::Value(v) => value_phrase(v),
            Operand::Column(c) => self.col_unit(c),
            Operand::Query(q) => self.query(q),
        }
    }

    fn condition(&self, c: &Condition) -> String {
        let left = self.val_unit(&c.left);
        match &c.right2 {
            Some(r2) => format!(
                "{left} is between {} and {}",
                self.operand(&c.right),
                self.operand(r2)
            ),
            None => format!("{left} {} {}", op_phrase(c.op), self.operand(&c.right)),
        }
    }

    fn conditions(&self, items: &[PredItem]) -> String {
        let mut out = String::new();
        for (i, item) in items.iter().enumerate() {
            if i > 0 {
                out.push_str(match item.link {
                    Logic::And => " and ",
                    Logic::Or => " or ",
                });
            }
            out.push_str(&self.condition(&item.cond));
        }
        out
    }

    fn tables(&self, tables: &[TableUnit]) -> String {
        list(
            tables
                .iter()
                .map(|t| match t {
                    TableUnit::Table(n) => match self.schema.table_index(n) {
                        Some(i) => self.schema.table_phrase(i),
                        None => n.replace('_', " ").to_lowercase(),
                    },
                    TableUnit::Query(q) => self.query(q),
                })
                .collect(),
        )
    }

    fn order(&self, items: &[OrderItem]) -> String {
        list(
            items
                .iter()
                .map(|o| {
                    let dir = match o.dir {
                        Direction::Asc => "ascending",
                        Direction::Desc => "descending",
                    };
                    format!("{} in {dir} order", self.val_unit(&o.expr))
                })
                .collect(),
        )
    }

    fn select(&self, items: &[ValUnit]) -> String {
        list(items.iter().map(|v| self.val_unit(v)).collect())
    }

    /// Short description of a nested query.
    fn query(&self, q: &Query) -> String {
        let mut s = format!(
            "the {} of {}",
            self.select(&q.select.items),
            self.tables(&q.from.tables)
        );
        if !q.where_clause.is_empty() {
            s.push_str(" where ");
            s.push_str(&self.conditions(&q.where_clause.items));
        }
        s
    }

    fn set_op(&self, kind: SetOpKind, q: &Query) -> String {
        match kind {
            SetOpKind::Union => format!("Also include {}.", self.query(q)),
            SetOpKind::Intersect => {
                format!("Only keep the ones that also appear in {}.", self.query(q))
            }
            SetOpKind::Except => format!("Leave out {}.", self.query(q)),
        }
    }

    fn added(&self, f: &Fragment) -> String {
        match f {
            Fragment::Select(s) if s.distinct => {
                format!("Show the distinct {}.", self.select(&s.items))
            }
            Fragment::Select(s) => format!("Also show {}.", self.select(&s.items)),
            Fragment::From(f) if f.tables.is_empty() => "Join the tables on their keys.".into(),
            Fragment::From(f) => format!("Also use the {} information.", self.tables(&f.tables)),
            Fragment::Where(items) => match items.first().map(|i| i.link) {
                Some(Logic::Or) => format!("Also show the ones where {}.", self.conditions(items)),
                _ => format!("Only show the ones where {}.", self.conditions(items)),
            },
            Fragment::GroupBy(cols) => format!(
                "Group the results by {}.",
                list(cols.iter().map(|c| self.col_unit(c)).collect())
            ),
            Fragment::Having(items) => {
                format!("Only keep the groups where {}.", self.conditions(items))
            }
            Fragment::OrderBy(items) => format!("Sort the results by {}.", self.order(items)),
            Fragment::Limit(n) => format!("Just show the top {n}."),
            Fragment::SetOp(s) => self.set_op(s.kind, &s.right),
        }
    }

    fn removed(&self, f: &Fragment) -> String {
        match f {
            Fragment::Select(s) => format!("Do not show {} anymore.", self.select(&s.items)),
            Fragment::From(f) if f.tables.is_empty() => "Drop the join condition.".into(),
            Fragment::From(f) => format!("Do not use the {} information.", self.tables(&f.tables)),
            Fragment::Where(items) => {
                format!("Do not require that {} anymore.", self.conditions(items))
            }
            Fragment::GroupBy(cols) => format!(
                "Do not group the results by {}.",
                list(cols.iter().map(|c| self.col_unit(c)).collect())
            ),
            Fragment::Having(items) => {
                format!("Keep the groups even if not {}.", self.conditions(items))
            }
            Fragment::OrderBy(_) => "Do not sort the results.".into(),
            Fragment::Limit(n) => format!("Show all of them, not just the top {n}."),
            Fragment::SetOp(s) => format!(
                "Do not combine the results with {} anymore.",
                self.query(&s.right)
            ),
        }
    }

    fn replaced(&self, added: &Fragment) -> String {
        let body = match added {
            Fragment::Select(s) if s.distinct => {
                format!("show the distinct {}.", self.select(&s.items))
            }
            Fragment::Select(s) => format!("show {}.", self.select(&s.items)),
            Fragment::From(f) => format!("use the {} information.", self.tables(&f.tables)),
            Fragment::Where(items) => {
                format!("only show the ones where {}.", self.conditions(items))
            }
            Fragment::GroupBy(cols) => format!(
                "group the results by {}.",
                list(cols.iter().map(|c| self.col_unit(c)).collect())
            ),
            Fragment::Having(items) => {
                format!("only keep the groups where {}.", self.conditions(items))
            }
            Fragment::OrderBy(items) => format!("sort the results by {}.", self.order(items)),
            Fragment::Limit(n) => format!("show the top {n}."),
            Fragment::SetOp(s) => lower_first(&self.set_op(s.kind, &s.right)),
        };
        format!("Instead, {body}")
    }

    pub fn edit(&self, e: &Edit) -> Result<String, DraftError> {
        let unrealizable = || DraftError::UnrealizableEdit(e.to_string());
        e.check().map_err(|_| unrealizable())?;
        match (e.action, &e.removed, &e.added) {
            (Action::Add, None, Some(a)) => Ok(self.added(a)),
            (Action::Remove, Some(r), None) => Ok(self.removed(r)),
            (Action::Replace, Some(_), Some(a)) => Ok(self.replaced(a)),
            _ => Err(unrealizable()),
        }
    }
}

pub(crate) fn lower_first(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_lowercase().chain(c).collect(),
        None => String::new(),
    }
}
