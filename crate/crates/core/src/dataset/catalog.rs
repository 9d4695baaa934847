//! Spider-format schema catalogs (`tables.json`).

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::Value as Json;

use super::DatasetError;
use crate::schema::{Column, ColumnType, Schema, Table};

pub type Catalog = BTreeMap<String, Schema>;

pub fn load_schema_catalog(path: &Path) -> Result<Catalog, DatasetError> {
    let text = std::fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
    let json: Json = serde_json::from_str(&text).map_err(|e| DatasetError::Json {
        path: path.into(),
        source: e,
    })?;
    parse_schema_catalog(&json)
}

fn field<'a>(rec: &'a Json, i: usize, name: &str) -> Result<&'a Json, DatasetError> {
    rec.get(name)
        .ok_or_else(|| DatasetError::format(i, name, "missing"))
}

fn array<'a>(rec: &'a Json, i: usize, name: &str) -> Result<&'a Vec<Json>, DatasetError> {
    field(rec, i, name)?
        .as_array()
        .ok_or_else(|| DatasetError::format(i, name, "expected an array"))
}

fn string(v: &Json, i: usize, name: &str) -> Result<String, DatasetError> {
    v.as_str()
        .map(str::to_string)
        .ok_or_else(|| DatasetError::format(i, name, "expected a string"))
}

fn index(v: &Json, i: usize, name: &str) -> Result<usize, DatasetError> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| DatasetError::format(i, name, "expected an index"))
}

/// `[table index, name]` pairs; the index is -1 for `*`.
fn column_pairs(
    rec: &Json,
    i: usize,
    name: &str,
) -> Result<Vec<(Option<usize>, String)>, DatasetError> {
    array(rec, i, name)?
        .iter()
        .map(|pair| {
            let p = pair.as_array().filter(|p| p.len() == 2);
            let p =
                p.ok_or_else(|| DatasetError::format(i, name, "expected [table, name] pairs"))?;
            let t = p[0]
                .as_i64()
                .ok_or_else(|| DatasetError::format(i, name, "table index"))?;
            Ok((usize::try_from(t).ok(), string(&p[1], i, name)?))
        })
        .collect()
}

fn schema_record(rec: &Json, i: usize) -> Result<Schema, DatasetError> {
    let db_id = string(field(rec, i, "db_id")?, i, "db_id")?;
    let names: Vec<String> = array(rec, i, "table_names_original")?
        .iter()
        .map(|v| string(v, i, "table_names_original"))
        .collect::<Result<_, _>>()?;
    let natural_tables: Option<Vec<String>> = match rec.get("table_names") {
        Some(v) => Some(
            v.as_array()
                .ok_or_else(|| DatasetError::format(i, "table_names", "expected an array"))?
                .iter()
                .map(|v| string(v, i, "table_names"))
                .collect::<Result<_, _>>()?,
        ),
        None => None,
    };
    let cols = column_pairs(rec, i, "column_names_original")?;
    let natural_cols = match rec.get("column_names") {
        Some(_) => Some(column_pairs(rec, i, "column_names")?),
        None => None,
    };
    let types = array(rec, i, "column_types")?;
    if types.len() != cols.len() {
        return Err(DatasetError::format(
            i,
            "column_types",
            "length differs from column_names_original",
        ));
    }
    if natural_cols.as_ref().is_some_and(|n| n.len() != cols.len()) {
        return Err(DatasetError::format(
            i,
            "column_names",
            "length differs from column_names_original",
        ));
    }
    if natural_tables
        .as_ref()
        .is_some_and(|n| n.len() != names.len())
    {
        return Err(DatasetError::format(
            i,
            "table_names",
            "length differs from table_names_original",
        ));
    }
    let tables = names
        .into_iter()
        .enumerate()
        .map(|(k, name)| Table {
            name,
            natural_name: natural_tables.as_ref().map(|n| n[k].clone()),
        })
        .collect();
    let mut columns = Vec::with_capacity(cols.len());
    for (k, (table, name)) in cols.into_iter().enumerate() {
        let ty = string(&types[k], i, "column_types")?;
        let ty = ColumnType::parse(&ty).ok_or_else(|| {
            DatasetError::format(i, "column_types", format!("unknown type {ty:?}"))
        })?;
        let natural_name = natural_cols.as_ref().map(|n| n[k].1.clone());
        columns.push(Column {
            table,
            name,
            natural_name,
            ty,
        });
    }
    // Newer catalog releases list composite keys as nested arrays.
    let mut primary_keys = Vec::new();
    for pk in array(rec, i, "primary_keys")? {
        match pk.as_array() {
            Some(parts) => {
                for p in parts {
                    primary_keys.push(index(p, i, "primary_keys")?);
                }
            }
            None => primary_keys.push(index(pk, i, "primary_keys")?),
        }
    }
    let mut foreign_keys = Vec::new();
    for fk in array(rec, i, "foreign_keys")? {
        let pair = fk
            .as_array()
            .filter(|p| p.len() == 2)
            .ok_or_else(|| DatasetError::format(i, "foreign_keys", "expected [from, to] pairs"))?;
        foreign_keys.push((
            index(&pair[0], i, "foreign_keys")?,
            index(&pair[1], i, "foreign_keys")?,
        ));
    }
    let n = columns.len();
    for &(a, b) in &foreign_keys {
        if a >= n || b >= n {
            return Err(DatasetError::format(
                i,
                "foreign_keys",
                format!("column index out of range in ({a}, {b})"),
            ));
        }
    }
    Schema::new(db_id, tables, columns, primary_keys, foreign_keys)
        .map_err(|e| DatasetError::format(i, "schema", e.to_string()))
}

/// Validates every record of an already-parsed catalog.
pub fn parse_schema_catalog(json: &Json) -> Result<Catalog, DatasetError> {
    let records = json
        .as_array()
        .ok_or_else(|| DatasetError::format(0, "<root>", "expected an array of schemas"))?;
    let mut out = Catalog::new();
    for (i, rec) in records.iter().enumerate() {
        let schema = schema_record(rec, i)?;
        if out.contains_key(&schema.db_id) {
            return Err(DatasetError::DuplicateDbId(schema.db_id));
        }
        out.insert(schema.db_id.clone(), schema);
    }
    Ok(out)
}
