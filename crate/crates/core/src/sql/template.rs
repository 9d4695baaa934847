//! Query templates: trees with every schema name and literal replaced by a
//! typed positional slot.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::*;
use super::printer::print_sql;
use super::visit::{NameMut, WalkNames};
use crate::hash::stable_hash;
use crate::schema::{ColumnType, Schema};

/// Column names used for the two ends of a join condition that follows a
/// foreign key. They cannot come out of the parser.
pub(crate) const FK_END: &str = "#fk";
pub(crate) const PK_END: &str = "#pk";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TemplateHash(pub String);

impl fmt::Display for TemplateHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "type", rename_all = "lowercase")]
pub enum SlotKind {
    Table,
    Column(ColumnType),
    Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SlotDecl {
    pub name: String,
    pub kind: SlotKind,
}

impl fmt::Display for SlotDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SlotKind::Column(ty) => write!(f, "{}:{}", self.name, ty),
            _ => f.write_str(&self.name),
        }
    }
}

/// Assigns slots to names on first sight: tables `tab1, tab2, …`, columns
/// `col1, col2, …` (typed from the catalog), literals `val1, val2, …`.
pub struct Anonymizer<'s> {
    schema: &'s Schema,
    tables: Vec<(String, String)>,
    columns: Vec<((String, String), String)>,
    values: usize,
    slots: Vec<SlotDecl>,
}

impl<'s> Anonymizer<'s> {
    pub fn new(schema: &'s Schema) -> Self {
        Self {
            schema,
            tables: Vec::new(),
            columns: Vec::new(),
            values: 0,
            slots: Vec::new(),
        }
    }

    pub fn slots(&self) -> &[SlotDecl] {
        &self.slots
    }

    /// `(concrete table, slot)` pairs in slot order.
    pub fn table_bindings(&self) -> &[(String, String)] {
        &self.tables
    }

    /// `((concrete table, concrete column), slot)` pairs in slot order.
    pub fn column_bindings(&self) -> &[((String, String), String)] {
        &self.columns
    }

    fn table_slot(&mut self, table: &str) -> String {
        let key = table.to_ascii_lowercase();
        if let Some((_, s)) = self.tables.iter().find(|(t, _)| *t == key) {
            return s.clone();
        }
        let slot = format!("tab{}", self.tables.len() + 1);
        self.tables.push((key, slot.clone()));
        self.slots.push(SlotDecl {
            name: slot.clone(),
            kind: SlotKind::Table,
        });
        slot
    }

    fn column_slot(&mut self, table: &str, column: &str) -> String {
        let key = (table.to_ascii_lowercase(), column.to_ascii_lowercase());
        if let Some((_, s)) = self.columns.iter().find(|(k, _)| *k == key) {
            return s.clone();
        }
        let ty = self
            .schema
            .lookup_column(table, column)
            .map(|i| self.schema.columns[i].ty)
            .unwrap_or(ColumnType::Others);
        let slot = format!("col{}", self.columns.len() + 1);
        self.columns.push((key, slot.clone()));
        self.slots.push(SlotDecl {
            name: slot.clone(),
            kind: SlotKind::Column(ty),
        });
        slot
    }

    pub fn visit(&mut self, name: NameMut<'_>) {
        match name {
            NameMut::Table(t) => *t = self.table_slot(t),
            NameMut::Column { table, column } => {
                let ts = self.table_slot(table);
                if !column.starts_with('#') {
                    *column = self.column_slot(table, column);
                }
                *table = ts;
            }
            NameMut::Value(v) => {
                self.values += 1;
                let slot = format!("val{}", self.values);
                self.slots.push(SlotDecl {
                    name: slot.clone(),
                    kind: SlotKind::Value,
                });
                *v = Value {
                    kind: ValueKind::Placeholder,
                    raw: slot,
                };
            }
        }
    }

    pub fn anonymize<T: WalkNames>(&mut self, node: &mut T) {
        node.walk_names_mut(true, &mut |n| self.visit(n));
    }
}

/// Structure of a query with names abstracted away.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryTemplate {
    pub ast: Query,
    pub slots: Vec<SlotDecl>,
    pub hash: TemplateHash,
}

impl QueryTemplate {
    /// Canonical text the hash is computed from.
    pub fn render(&self) -> String {
        render(&self.ast, &self.slots)
    }
}

fn render(ast: &Query, slots: &[SlotDecl]) -> String {
    let decls: Vec<String> = slots.iter().map(|s| s.to_string()).collect();
    format!("{} | {}", print_sql(ast), decls.join(","))
}

/// Anonymizes a schema-bound query. Join conditions that follow a foreign
/// key become a table-to-table edge (`tabA.#fk = tabB.#pk`) rather than a
/// pair of column slots.
pub fn template_of(ast: &Query, schema: &Schema) -> QueryTemplate {
    let mut copy = ast.clone();
    mark_fk_joins(&mut copy, schema);
    let mut anon = Anonymizer::new(schema);
    anon.anonymize(&mut copy);
    let slots = anon.slots;
    let hash = TemplateHash(stable_hash(&render(&copy, &slots)));
    QueryTemplate {
        ast: copy,
        slots,
        hash,
    }
}

fn plain_column(v: &ValUnit) -> Option<(&str, &str)> {
    match v {
        ValUnit::Col(ColUnit {
            agg: Agg::None,
            distinct: false,
            col: ColumnRef::Column { table, column },
        }) => Some((table, column)),
        _ => None,
    }
}

fn mark_fk_joins(q: &mut Query, schema: &Schema) {
    for c in &mut q.from.conds {
        if c.op != CmpOp::Eq || c.right2.is_some() {
            continue;
        }
        let Operand::Column(right) = &c.right else {
            continue;
        };
        let right = ValUnit::Col(right.clone());
        let (Some((lt, lc)), Some((rt, rc))) = (plain_column(&c.left), plain_column(&right)) else {
            continue;
        };
        let (Some(l), Some(r)) = (schema.lookup_column(lt, lc), schema.lookup_column(rt, rc))
        else {
            continue;
        };
        let (fk_table, pk_table) = if schema.is_foreign_key(l, r) {
            (lt.to_string(), rt.to_string())
        } else if schema.is_foreign_key(r, l) {
            (rt.to_string(), lt.to_string())
        } else {
            continue;
        };
        c.left = ValUnit::Col(ColUnit::plain(ColumnRef::new(fk_table, FK_END)));
        c.right = Operand::Column(ColUnit::plain(ColumnRef::new(pk_table, PK_END)));
    }
    for t in &mut q.from.tables {
        if let TableUnit::Query(inner) = t {
            mark_fk_joins(inner, schema);
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
                mark_fk_joins(inner, schema);
            }
        }
    }
    if let Some(s) = &mut q.set_op {
        mark_fk_joins(&mut s.right, schema);
    }
}
