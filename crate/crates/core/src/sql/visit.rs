//! Traversal over the names (tables, columns, literals) embedded in a tree.
//!
//! The visiting order is fixed and matches the printing order, so two trees
//! of the same shape yield their names in corresponding positions.

use super::ast::*;

pub enum NameMut<'a> {
    Table(&'a mut String),
    Column {
        table: &'a mut String,
        column: &'a mut String,
    },
    Value(&'a mut Value),
}

/// Owned snapshot of one visited name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Name {
    Table(String),
    Column { table: String, column: String },
    Value(Value),
}

pub trait WalkNames {
    /// Calls `f` on every name. Nested queries are entered only when
    /// `nested` is set.
    fn walk_names_mut(&mut self, nested: bool, f: &mut dyn FnMut(NameMut<'_>));

    fn names(&self) -> Vec<Name>
    where
        Self: Clone,
    {
        let mut copy = self.clone();
        let mut out = Vec::new();
        copy.walk_names_mut(true, &mut |n| {
            out.push(match n {
                NameMut::Table(t) => Name::Table(t.clone()),
                NameMut::Column { table, column } => Name::Column {
                    table: table.clone(),
                    column: column.clone(),
                },
                NameMut::Value(v) => Name::Value(v.clone()),
            })
        });
        out
    }
}

impl WalkNames for ColUnit {
    fn walk_names_mut(&mut self, _nested: bool, f: &mut dyn FnMut(NameMut<'_>)) {
        if let ColumnRef::Column { table, column } = &mut self.col {
            f(NameMut::Column { table, column });
        }
    }
}

impl WalkNames for ValUnit {
    fn walk_names_mut(&mut self, nested: bool, f: &mut dyn FnMut(NameMut<'_>)) {
        match self {
            ValUnit::Col(c) => c.walk_names_mut(nested, f),
            ValUnit::Arith { left, right, .. } => {
                left.walk_names_mut(nested, f);
                right.walk_names_mut(nested, f);
            }
        }
    }
}

impl WalkNames for Operand {
    fn walk_names_mut(&mut self, nested: bool, f: &mut dyn FnMut(NameMut<'_>)) {
        match self {
            Operand::Value(v) => f(NameMut::Value(v)),
            Operand::Column(c) => c.walk_names_mut(nested, f),
            Operand::Query(q) => {
                if nested {
                    q.walk_names_mut(nested, f)
                }
            }
        }
    }
}

impl WalkNames for Condition {
    fn walk_names_mut(&mut self, nested: bool, f: &mut dyn FnMut(NameMut<'_>)) {
        self.left.walk_names_mut(nested, f);
        self.right.walk_names_mut(nested, f);
        if let Some(r) = &mut self.right2 {
            r.walk_names_mut(nested, f);
        }
    }
}

impl WalkNames for PredItem {
    fn walk_names_mut(&mut self, nested: bool, f: &mut dyn FnMut(NameMut<'_>)) {
        self.cond.walk_names_mut(nested, f)
    }
}

impl WalkNames for TableUnit {
    fn walk_names_mut(&mut self, nested: bool, f: &mut dyn FnMut(NameMut<'_>)) {
        match self {
            TableUnit::Table(t) => f(NameMut::Table(t)),
            TableUnit::Query(q) => {
                if nested {
                    q.walk_names_mut(nested, f)
                }
            }
        }
    }
}

impl WalkNames for OrderItem {
    fn walk_names_mut(&mut self, nested: bool, f: &mut dyn FnMut(NameMut<'_>)) {
        self.expr.walk_names_mut(nested, f)
    }
}

impl WalkNames for SetOp {
    fn walk_names_mut(&mut self, nested: bool, f: &mut dyn FnMut(NameMut<'_>)) {
        if nested {
            self.right.walk_names_mut(nested, f)
        }
    }
}

impl<T: WalkNames> WalkNames for Vec<T> {
    fn walk_names_mut(&mut self, nested: bool, f: &mut dyn FnMut(NameMut<'_>)) {
        for x in self {
            x.walk_names_mut(nested, f);
        }
    }
}

impl WalkNames for SelectClause {
    fn walk_names_mut(&mut self, nested: bool, f: &mut dyn FnMut(NameMut<'_>)) {
        self.items.walk_names_mut(nested, f)
    }
}

impl WalkNames for FromClause {
    fn walk_names_mut(&mut self, nested: bool, f: &mut dyn FnMut(NameMut<'_>)) {
        self.tables.walk_names_mut(nested, f);
        self.conds.walk_names_mut(nested, f);
    }
}

impl WalkNames for Predicate {
    fn walk_names_mut(&mut self, nested: bool, f: &mut dyn FnMut(NameMut<'_>)) {
        self.items.walk_names_mut(nested, f)
    }
}

impl WalkNames for Query {
    fn walk_names_mut(&mut self, nested: bool, f: &mut dyn FnMut(NameMut<'_>)) {
        self.select.walk_names_mut(nested, f);
        self.from.walk_names_mut(nested, f);
        self.where_clause.walk_names_mut(nested, f);
        self.group_by.walk_names_mut(nested, f);
        self.having.walk_names_mut(nested, f);
        self.order_by.walk_names_mut(nested, f);
        if let Some(s) = &mut self.set_op {
            s.walk_names_mut(nested, f);
        }
    }
}
