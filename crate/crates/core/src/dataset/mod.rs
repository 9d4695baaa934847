//! Reading and writing every file format the pipeline touches.

mod candidate;
mod catalog;
mod dialogue;
mod jsonl;
mod palign;

use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub use candidate::{
    candidate_id, BasePrefix, Candidate, Decision, Prediction, ReviewAction, Status,
};
pub use catalog::{load_schema_catalog, parse_schema_catalog, Catalog};
pub use dialogue::{
    load_dialogues, parse_dialogues, question_id, write_dialogues, DialogueRecord, DialogueTurn,
    Dialogues, Interaction, Reject, Turn,
};
pub use jsonl::{read_jsonl, write_json, write_jsonl};
pub use palign::{export_palign_pairs, PrefixAlignedExample};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: invalid JSON: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("record {record}: field {field:?}: {msg}")]
    Format {
        record: usize,
        field: String,
        msg: String,
    },
    #[error("duplicate db_id {0:?}")]
    DuplicateDbId(String),
}

impl DatasetError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(record: usize, field: &str, msg: impl Into<String>) -> Self {
        Self::Format {
            record,
            field: field.to_string(),
            msg: msg.into(),
        }
    }

    /// Whether the failure came from the file system rather than content.
    pub fn is_io(&self) -> bool {
        matches!(self, Self::Io { .. })
    }
}
