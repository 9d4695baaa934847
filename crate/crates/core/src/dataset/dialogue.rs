//! SParC/CoSQL-shaped dialogue files.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use super::{Catalog, DatasetError};
use crate::sql::{parse_sql, Query};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub utterance: String,
    pub gold_sql: String,
    pub ast: Query,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interaction {
    pub id: String,
    pub db_id: String,
    pub turns: Vec<Turn>,
}

impl Interaction {
    /// Identifier of the 1-based `turn` of this interaction.
    pub fn question_id(&self, turn: usize) -> String {
        question_id(&self.id, turn)
    }
}

pub fn question_id(interaction_id: &str, turn: usize) -> String {
    format!("{interaction_id}/{turn}")
}

/// A record that could not be loaded, with the reason.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    pub record: usize,
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dialogues {
    pub interactions: Vec<Interaction>,
    pub rejects: Vec<Reject>,
    /// Turns without a gold query (CoSQL clarification acts and the like).
    pub skipped_turns: usize,
}

/// One `{utterance, query}` element of an upstream `interaction` array.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DialogueTurn {
    pub utterance: String,
    pub query: String,
}

/// Upstream record shape, as written by the exporters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialogueRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub database_id: String,
    pub interaction: Vec<DialogueTurn>,
    #[serde(rename = "final", default, skip_serializing_if = "Option::is_none")]
    pub final_turn: Option<DialogueTurn>,
}

impl From<&Interaction> for DialogueRecord {
    fn from(it: &Interaction) -> Self {
        let interaction: Vec<DialogueTurn> = it
            .turns
            .iter()
            .map(|t| DialogueTurn {
                utterance: t.utterance.clone(),
                query: t.gold_sql.clone(),
            })
            .collect();
        DialogueRecord {
            id: Some(it.id.clone()),
            database_id: it.db_id.clone(),
            final_turn: interaction.last().cloned(),
            interaction,
        }
    }
}

pub fn load_dialogues(path: &Path, catalog: &Catalog) -> Result<Dialogues, DatasetError> {
    let text = std::fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
    let json: Json = serde_json::from_str(&text).map_err(|e| DatasetError::Json {
        path: path.into(),
        source: e,
    })?;
    parse_dialogues(&json, catalog)
}

fn record_id(rec: &Json, i: usize) -> String {
    match rec.get("id").or_else(|| rec.get("interaction_id")) {
        Some(Json::String(s)) => s.clone(),
        Some(Json::Number(n)) => n.to_string(),
        _ => i.to_string(),
    }
}

fn load_record(
    rec: &Json,
    i: usize,
    catalog: &Catalog,
    skipped: &mut usize,
) -> Result<Interaction, String> {
    let id = record_id(rec, i);
    let db_id = rec
        .get("database_id")
        .and_then(Json::as_str)
        .ok_or("missing or non-string database_id")?;
    let schema = catalog
        .get(db_id)
        .ok_or_else(|| format!("unknown database {db_id:?}"))?;
    let raw = rec
        .get("interaction")
        .and_then(Json::as_array)
        .ok_or("missing interaction array")?;
    let mut turns = Vec::new();
    for (k, t) in raw.iter().enumerate() {
        let utterance = t
            .get("utterance")
            .and_then(Json::as_str)
            .ok_or_else(|| format!("turn {}: missing utterance", k + 1))?;
        let query = match t.get("query").and_then(Json::as_str) {
            Some(q) if !q.trim().is_empty() => q,
            _ => {
                *skipped += 1;
                continue;
            }
        };
        let ast = parse_sql(query, schema).map_err(|e| format!("turn {}: {e}", k + 1))?;
        turns.push(Turn {
            utterance: utterance.to_string(),
            gold_sql: query.to_string(),
            ast,
        });
    }
    if turns.is_empty() {
        return Err("no turn carries a gold query".into());
    }
    Ok(Interaction {
        id,
        db_id: db_id.to_string(),
        turns,
    })
}

/// Loads every record it can. Records that are malformed, name an unknown
/// database, or hold an unparseable query are listed in `rejects`; only a
/// root that is not an array is an error.
pub fn parse_dialogues(json: &Json, catalog: &Catalog) -> Result<Dialogues, DatasetError> {
    let records = json
        .as_array()
        .ok_or_else(|| DatasetError::format(0, "<root>", "expected an array of interactions"))?;
    let mut out = Dialogues::default();
    for (i, rec) in records.iter().enumerate() {
        match load_record(rec, i, catalog, &mut out.skipped_turns) {
            Ok(it) => out.interactions.push(it),
            Err(reason) => {
                log::debug!("record {i} rejected: {reason}");
                out.rejects.push(Reject {
                    record: i,
                    id: record_id(rec, i),
                    reason,
                })
            }
        }
    }
    Ok(out)
}

pub fn write_dialogues(path: &Path, interactions: &[Interaction]) -> Result<(), DatasetError> {
    let records: Vec<DialogueRecord> = interactions.iter().map(DialogueRecord::from).collect();
    super::write_json(path, &records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::tests::airlines_schema;
    use serde_json::json;

    fn catalog() -> Catalog {
        let s = airlines_schema();
        Catalog::from([(s.db_id.clone(), s)])
    }

    fn turn(u: &str, q: &str) -> Json {
        json!({"utterance": u, "query": q})
    }

    #[test]
    fn three_turns() {
        let data = json!([{
            "database_id": "flight_min",
            "interaction": [
                turn("List airlines.", "SELECT Airline FROM AIRLINES"),
                turn("In the USA?", "SELECT Airline FROM AIRLINES WHERE Country = 'USA'"),
                turn("How many?", "SELECT count(*) FROM AIRLINES WHERE Country = 'USA'"),
            ]
        }]);
        let d = parse_dialogues(&data, &catalog()).unwrap();
        assert_eq!(d.interactions.len(), 1);
        assert_eq!(d.interactions[0].turns.len(), 3);
        assert_eq!(d.interactions[0].id, "0");
        assert_eq!(d.interactions[0].question_id(2), "0/2");
    }

    #[test]
    fn bad_records_are_rejected_not_fatal() {
        let data = json!([
            {"database_id": "flight_min", "interaction": [
                turn("a", "SELECT Airline FROM AIRLINES"),
                turn("b", "SELECT Airline FROM AIRLINES WHERE"),
            ]},
            {"database_id": "nope", "interaction": [turn("a", "SELECT 1")]},
            {"interaction": []},
            {"id": "ok", "database_id": "flight_min", "interaction": [turn("a", "SELECT Country FROM AIRLINES")]},
        ]);
        let d = parse_dialogues(&data, &catalog()).unwrap();
        assert_eq!(d.interactions.len(), 1);
        assert_eq!(d.interactions[0].id, "ok");
        let reasons: Vec<&str> = d.rejects.iter().map(|r| r.reason.as_str()).collect();
        assert!(reasons[0].starts_with("turn 2: parse error"), "{reasons:?}");
        assert!(reasons[1].contains("unknown database"));
        assert_eq!(d.rejects.len(), 3);
    }

    #[test]
    fn turns_without_sql_are_skipped_and_counted() {
        let data = json!([{"database_id": "flight_min", "interaction": [
            turn("a", "SELECT Airline FROM AIRLINES"),
            {"utterance": "did you mean the name?"},
            turn("c", ""),
        ]}]);
        let d = parse_dialogues(&data, &catalog()).unwrap();
        assert_eq!(d.interactions[0].turns.len(), 1);
        assert_eq!(d.skipped_turns, 2);
    }

    #[test]
    fn writer_round_trips() {
        let data = json!([{"id": "x1", "database_id": "flight_min", "interaction": [
            turn("a", "SELECT Airline FROM AIRLINES"),
            turn("b", "SELECT Airline FROM AIRLINES WHERE Country = 'USA'"),
        ]}]);
        let d = parse_dialogues(&data, &catalog()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.json");
        write_dialogues(&path, &d.interactions).unwrap();
        let again = load_dialogues(&path, &catalog()).unwrap();
        assert_eq!(again.interactions, d.interactions);
    }
}
