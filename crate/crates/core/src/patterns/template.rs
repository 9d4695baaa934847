//! Anonymized modifications.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::edit::{Edit, Modification};
use crate::hash::stable_hash;
use crate::schema::Schema;
use crate::sql::visit::{NameMut, WalkNames};
use crate::sql::{Anonymizer, Clause, Query, SlotDecl, TemplateHash};

/// Relation among slots that any fill must reproduce.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Constraint {
    /// Column slot `column` belongs to table slot `table`.
    ColumnOf {
        column: String,
        table: String,
    },
    /// The table is one the modified query already reads from.
    InBase {
        table: String,
    },
    /// The table is brought in by the modification.
    NewTable {
        table: String,
    },
    PrimaryKey {
        column: String,
    },
    ForeignKey {
        from: String,
        to: String,
    },
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ColumnOf { column, table } => write!(f, "{column}∈{table}"),
            Self::InBase { table } => write!(f, "base({table})"),
            Self::NewTable { table } => write!(f, "new({table})"),
            Self::PrimaryKey { column } => write!(f, "pk({column})"),
            Self::ForeignKey { from, to } => write!(f, "fk({from},{to})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModificationTemplate {
    pub edits: Vec<Edit>,
    pub slots: Vec<SlotDecl>,
    pub constraints: Vec<Constraint>,
    pub hash: TemplateHash,
    /// Number of training turns this template was extracted from.
    #[serde(default)]
    pub support: usize,
}

impl ModificationTemplate {
    /// Canonical text the hash is computed from.
    pub fn render(&self) -> String {
        render(&self.edits, &self.slots, &self.constraints)
    }

    pub fn clauses(&self) -> BTreeSet<Clause> {
        self.edits.iter().map(|e| e.clause).collect()
    }

    /// Table slot owning a column slot.
    pub fn table_of(&self, column: &str) -> Option<&str> {
        self.constraints.iter().find_map(|c| match c {
            Constraint::ColumnOf { column: c, table } if c == column => Some(table.as_str()),
            _ => None,
        })
    }

    pub fn slot(&self, name: &str) -> Option<&SlotDecl> {
        self.slots.iter().find(|s| s.name == name)
    }
}

fn render(edits: &[Edit], slots: &[SlotDecl], constraints: &[Constraint]) -> String {
    let e: Vec<String> = edits.iter().map(|e| e.to_string()).collect();
    let s: Vec<String> = slots.iter().map(|s| s.to_string()).collect();
    let c: Vec<String> = constraints.iter().map(|c| c.to_string()).collect();
    format!("{} | {} | {}", e.join("; "), s.join(","), c.join(","))
}

/// Replaces names in `m` by typed slots and records how the named items
/// relate to each other and to `prev`, the query being modified.
pub fn anonymize(m: &Modification, prev: &Query, schema: &Schema) -> ModificationTemplate {
    let mut edits = m.edits.clone();
    let mut anon = Anonymizer::new(schema);
    for e in &mut edits {
        anon.anonymize(e);
    }
    let base_tables: Vec<String> = prev
        .from
        .table_names()
        .map(|t| t.to_ascii_lowercase())
        .collect();
    let mut constraints = BTreeSet::new();
    for (table, slot) in anon.table_bindings() {
        constraints.insert(if base_tables.contains(table) {
            Constraint::InBase {
                table: slot.clone(),
            }
        } else {
            Constraint::NewTable {
                table: slot.clone(),
            }
        });
    }
    let table_slot = |t: &str| {
        anon.table_bindings()
            .iter()
            .find(|(name, _)| name == t)
            .map(|(_, s)| s.clone())
    };
    let mut slotted = Vec::new();
    for ((table, column), slot) in anon.column_bindings() {
        if let Some(ts) = table_slot(table) {
            constraints.insert(Constraint::ColumnOf {
                column: slot.clone(),
                table: ts,
            });
        }
        if let Some(i) = schema.lookup_column(table, column) {
            if schema.is_primary_key(i) {
                constraints.insert(Constraint::PrimaryKey {
                    column: slot.clone(),
                });
            }
            slotted.push((i, slot.clone()));
        }
    }
    for (a, sa) in &slotted {
        for (b, sb) in &slotted {
            if schema.is_foreign_key(*a, *b) {
                constraints.insert(Constraint::ForeignKey {
                    from: sa.clone(),
                    to: sb.clone(),
                });
            }
        }
    }
    let constraints: Vec<Constraint> = constraints.into_iter().collect();
    let slots = anon.slots().to_vec();
    let hash = TemplateHash(stable_hash(&render(&edits, &slots, &constraints)));
    ModificationTemplate {
        edits,
        slots,
        constraints,
        hash,
        support: 0,
    }
}

/// Pattern tag: the edited clauses other than SELECT and FROM,
/// joined with `-` in a fixed order. Empty when only those two changed.
pub fn component_tags(t: &ModificationTemplate) -> BTreeSet<String> {
    let clauses = t.clauses();
    let order = [
        (Clause::Where, "where"),
        (Clause::GroupBy, "groupby"),
        (Clause::Having, "having"),
        (Clause::OrderBy, "orderby"),
        (Clause::Limit, "limit"),
        (Clause::SetOp, "iue"),
    ];
    let parts: Vec<&str> = order
        .iter()
        .filter(|(c, _)| clauses.contains(c))
        .map(|(_, n)| *n)
        .collect();
    if parts.is_empty() {
        BTreeSet::new()
    } else {
        BTreeSet::from([parts.join("-")])
    }
}

/// Value a slot is filled with.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "name", rename_all = "lowercase")]
pub enum Binding {
    Table(String),
    Column(String),
    Value(crate::sql::Value),
}

/// Total assignment of a template's slots.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SlotFill {
    pub assignment: std::collections::BTreeMap<String, Binding>,
}

impl SlotFill {
    pub fn table(&self, slot: &str) -> Option<&str> {
        match self.assignment.get(slot) {
            Some(Binding::Table(t)) => Some(t),
            _ => None,
        }
    }

    pub fn column(&self, slot: &str) -> Option<&str> {
        match self.assignment.get(slot) {
            Some(Binding::Column(c)) => Some(c),
            _ => None,
        }
    }
}

/// Substitutes a fill into the template's edits. Slots missing from the
/// fill are left as they are.
pub fn instantiate(t: &ModificationTemplate, fill: &SlotFill) -> Modification {
    let mut edits = t.edits.clone();
    for e in &mut edits {
        substitute(e, fill);
    }
    Modification { edits }
}

/// Replaces slot names inside any tree by their bindings in `fill`.
pub fn substitute<T: WalkNames>(node: &mut T, fill: &SlotFill) {
    node.walk_names_mut(true, &mut |n| match n {
        NameMut::Table(name) => {
            if let Some(x) = fill.table(name) {
                *name = x.to_string();
            }
        }
        NameMut::Column { table, column } => {
            if let Some(x) = fill.column(column) {
                *column = x.to_string();
            }
            if let Some(x) = fill.table(table) {
                *table = x.to_string();
            }
        }
        NameMut::Value(v) => {
            if let Some(Binding::Value(x)) = fill.assignment.get(&v.raw) {
                *v = x.clone();
            }
        }
    });
}
