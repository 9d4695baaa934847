//! Database schema catalog types.
//!
//! Column indices follow the Spider convention: they index into the flat
//! column list of the catalog record, which usually starts with the `*`
//! pseudo-column (owned by no table).

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Text,
    Number,
    Time,
    Boolean,
    Others,
}

impl ColumnType {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "text" => Some(Self::Text),
            "number" => Some(Self::Number),
            "time" => Some(Self::Time),
            "boolean" => Some(Self::Boolean),
            "others" => Some(Self::Others),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Text => "text",
            Self::Number => "number",
            Self::Time => "time",
            Self::Boolean => "boolean",
            Self::Others => "others",
        }
    }
}

impl fmt::Display for ColumnType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    /// Owning table; `None` only for the `*` pseudo-column.
    pub table: Option<usize>,
    pub name: String,
    /// Human-readable name from the catalog, when it carries one.
    pub natural_name: Option<String>,
    pub ty: ColumnType,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub natural_name: Option<String>,
}

/// A table or column of a schema, by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SchemaItem {
    Table(usize),
    Column(usize),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SchemaError {
    #[error("column {column} references table {table} which does not exist")]
    BadColumnTable { column: usize, table: usize },
    #[error("primary key index {0} is not a column")]
    BadPrimaryKey(usize),
    #[error("foreign key ({0}, {1}) references a missing column")]
    BadForeignKey(usize, usize),
    #[error("duplicate table name {0:?}")]
    DuplicateTable(String),
    #[error("duplicate column name {column:?} in table {table:?}")]
    DuplicateColumn { table: String, column: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub db_id: String,
    pub tables: Vec<Table>,
    pub columns: Vec<Column>,
    pub primary_keys: Vec<usize>,
    /// `(referencing column, referenced column)` pairs.
    pub foreign_keys: Vec<(usize, usize)>,
}

impl Schema {
    /// Builds a schema and checks its structural invariants.
    ///
    /// Foreign keys whose two ends live in the same table are dropped (the
    /// catalog invariant requires distinct tables); everything else that is
    /// malformed is an error.
    pub fn new(
        db_id: impl Into<String>,
        tables: Vec<Table>,
        columns: Vec<Column>,
        primary_keys: Vec<usize>,
        foreign_keys: Vec<(usize, usize)>,
    ) -> Result<Self, SchemaError> {
        let mut schema = Schema {
            db_id: db_id.into(),
            tables,
            columns,
            primary_keys,
            foreign_keys: Vec::new(),
        };
        for (i, col) in schema.columns.iter().enumerate() {
            if let Some(t) = col.table {
                if t >= schema.tables.len() {
                    return Err(SchemaError::BadColumnTable {
                        column: i,
                        table: t,
                    });
                }
            }
        }
        for &pk in &schema.primary_keys {
            if pk >= schema.columns.len() || schema.columns[pk].table.is_none() {
                return Err(SchemaError::BadPrimaryKey(pk));
            }
        }
        for (a, b) in foreign_keys {
            let (ta, tb) = match (schema.columns.get(a), schema.columns.get(b)) {
                (Some(ca), Some(cb)) => (ca.table, cb.table),
                _ => return Err(SchemaError::BadForeignKey(a, b)),
            };
            match (ta, tb) {
                (Some(x), Some(y)) if x != y => schema.foreign_keys.push((a, b)),
                (Some(_), Some(_)) => {
                    log::debug!(
                        "{}: dropping same-table foreign key ({a}, {b})",
                        schema.db_id
                    )
                }
                _ => return Err(SchemaError::BadForeignKey(a, b)),
            }
        }
        let mut seen = HashSet::new();
        for t in &schema.tables {
            if !seen.insert(t.name.to_ascii_lowercase()) {
                return Err(SchemaError::DuplicateTable(t.name.clone()));
            }
        }
        let mut seen = HashSet::new();
        for c in &schema.columns {
            if let Some(t) = c.table {
                if !seen.insert((t, c.name.to_ascii_lowercase())) {
                    return Err(SchemaError::DuplicateColumn {
                        table: schema.tables[t].name.clone(),
                        column: c.name.clone(),
                    });
                }
            }
        }
        Ok(schema)
    }

    pub fn table_index(&self, name: &str) -> Option<usize> {
        self.tables
            .iter()
            .position(|t| t.name.eq_ignore_ascii_case(name))
    }

    pub fn column_index(&self, table: usize, name: &str) -> Option<usize> {
        self.columns
            .iter()
            .position(|c| c.table == Some(table) && c.name.eq_ignore_ascii_case(name))
    }

    /// Index of the column `table.column`, both matched case-insensitively.
    pub fn lookup_column(&self, table: &str, column: &str) -> Option<usize> {
        self.column_index(self.table_index(table)?, column)
    }

    /// Columns owned by `table`, in catalog order.
    pub fn columns_of(&self, table: usize) -> impl Iterator<Item = usize> + '_ {
        self.columns
            .iter()
            .enumerate()
            .filter(move |(_, c)| c.table == Some(table))
            .map(|(i, _)| i)
    }

    pub fn is_primary_key(&self, column: usize) -> bool {
        self.primary_keys.contains(&column)
    }

    pub fn is_foreign_key(&self, from: usize, to: usize) -> bool {
        self.foreign_keys.contains(&(from, to))
    }

    pub fn table_name(&self, table: usize) -> &str {
        &self.tables[table].name
    }

    /// `(table name, column name)` of a real column.
    pub fn qualified(&self, column: usize) -> Option<(&str, &str)> {
        let c = self.columns.get(column)?;
        Some((self.tables.get(c.table?)?.name.as_str(), c.name.as_str()))
    }

    /// Every table and real column as a [`SchemaItem`].
    pub fn items(&self) -> Vec<SchemaItem> {
        let tables = (0..self.tables.len()).map(SchemaItem::Table);
        let cols = self
            .columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.table.is_some())
            .map(|(i, _)| SchemaItem::Column(i));
        tables.chain(cols).collect()
    }

    /// Natural-language phrase for a table: the catalog's readable name, or
    /// the original name with underscores turned into spaces.
    pub fn table_phrase(&self, table: usize) -> String {
        let t = &self.tables[table];
        phrase(t.natural_name.as_deref(), &t.name)
    }

    pub fn column_phrase(&self, column: usize) -> String {
        let c = &self.columns[column];
        phrase(c.natural_name.as_deref(), &c.name)
    }
}

fn phrase(natural: Option<&str>, original: &str) -> String {
    match natural {
        Some(n) if !n.trim().is_empty() => n.trim().to_lowercase(),
        _ => original.replace('_', " ").to_lowercase(),
    }
}
