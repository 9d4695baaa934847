use serde::{Deserialize, Serialize};

use super::DialogueTurn;
use crate::hash::stable_hash;
use crate::patterns::Modification;
use crate::sql::TemplateHash;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pending,
    Accepted,
    Rejected,
    Revised,
    Disputed,
}

impl Status {
    pub const ALL: [Status; 5] = [
        Status::Pending,
        Status::Accepted,
        Status::Revised,
        Status::Rejected,
        Status::Disputed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Pending => "pending",
            Self::Accepted => "accepted",
            Self::Rejected => "rejected",
            Self::Revised => "revised",
            Self::Disputed => "disputed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReviewAction {
    Accept,
    Reject,
    Revise,
}

/// One reviewer's verdict on one candidate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub candidate_id: String,
    pub reviewer: String,
    pub action: ReviewAction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub revised_utterance: Option<String>,
    /// Milliseconds since the Unix epoch.
    #[serde(default)]
    pub timestamp: u64,
}

/// The dialogue prefix a candidate extends: its last turn holds the query
/// that was modified.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasePrefix {
    pub interaction_id: String,
    pub turns: Vec<DialogueTurn>,
}

impl BasePrefix {
    pub fn previous_sql(&self) -> &str {
        self.turns.last().map(|t| t.query.as_str()).unwrap_or("")
    }

    pub fn previous_utterance(&self) -> &str {
        self.turns
            .last()
            .map(|t| t.utterance.as_str())
            .unwrap_or("")
    }
}

/// A generated question on its way through drafting and review.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub id: String,
    pub db_id: String,
    pub base: BasePrefix,
    pub new_sql: String,
    pub base_template_hash: TemplateHash,
    pub modification_template_hash: TemplateHash,
    /// The concrete edits from the previous query to `new_sql`.
    pub modification: Modification,
    /// Byte ranges of `new_sql` covering the edited clauses.
    #[serde(default)]
    pub highlight: Vec<(usize, usize)>,
    #[serde(default)]
    pub draft_utterance: String,
    /// `rule`, `external`, or `rule-fallback` when the external generator failed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub draft_source: Option<String>,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_utterance: Option<String>,
    #[serde(default)]
    pub reviews: Vec<Decision>,
}

/// Content hash of what identifies a candidate, so regenerating the same
/// item yields the same id.
pub fn candidate_id(db_id: &str, base: &BasePrefix, new_sql: &str) -> String {
    let key = serde_json::json!([db_id, base.turns, new_sql]);
    stable_hash(&key.to_string())
}

/// One line of a predictions file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub question_id: String,
    pub predicted_sql: String,
}
