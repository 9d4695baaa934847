//! On-disk review queue: `candidates.jsonl` holds the queued candidates,
//! `decisions.log` every decision ever recorded, one JSON object per line.
//! Statuses are derived from the log and never written down.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::resolve::{effective, resolve_status};
use crate::dataset::{
    candidate_id, Candidate, Catalog, Decision, DialogueRecord, DialogueTurn, ReviewAction, Status,
};
use crate::sql::parse_sql;

pub const CANDIDATES_FILE: &str = "candidates.jsonl";
pub const DECISIONS_FILE: &str = "decisions.log";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}:{line}: {msg}", path.display())]
    Corrupt {
        path: PathBuf,
        line: usize,
        msg: String,
    },
}

#[derive(Debug, Error)]
pub enum ReviewError {
    #[error("unknown candidate {0}")]
    UnknownCandidate(String),
    #[error("invalid decision: {0}")]
    InvalidDecision(String),
    #[error(transparent)]
    Store(#[from] StoreError),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnqueueReport {
    pub added: usize,
    pub already_queued: usize,
    /// `(candidate id, reason)`.
    pub rejected: Vec<(String, String)>,
}

pub struct ReviewStore {
    dir: PathBuf,
    candidates: BTreeMap<String, Candidate>,
    /// Raw log entries per candidate, in log order.
    decisions: BTreeMap<String, Vec<Decision>>,
    log: File,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Parses a line-delimited JSON file. A last line without its newline is
/// the remains of an interrupted append: it was never acknowledged, so it
/// is dropped and the file cut back to the last complete line.
fn read_lines<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, StoreError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(io_err(path)(e)),
    };
    let mut reader = BufReader::new(file);
    let mut out = Vec::new();
    let mut buf = String::new();
    let mut complete = 0u64;
    let mut line = 0;
    loop {
        buf.clear();
        let n = reader.read_line(&mut buf).map_err(io_err(path))?;
        if n == 0 {
            break;
        }
        line += 1;
        if !buf.ends_with('\n') {
            log::warn!(
                "{}:{line}: dropping an incomplete final line",
                path.display()
            );
            let f = OpenOptions::new()
                .write(true)
                .open(path)
                .map_err(io_err(path))?;
            f.set_len(complete).map_err(io_err(path))?;
            f.sync_all().map_err(io_err(path))?;
            break;
        }
        complete += n as u64;
        if buf.trim().is_empty() {
            continue;
        }
        let v = serde_json::from_str(&buf).map_err(|e| StoreError::Corrupt {
            path: path.to_path_buf(),
            line,
            msg: e.to_string(),
        })?;
        out.push(v);
    }
    Ok(out)
}

fn append_line<T: Serialize>(file: &mut File, path: &Path, v: &T) -> Result<(), StoreError> {
    let mut line = serde_json::to_string(v).expect("store records serialize");
    line.push('\n');
    file.seek(SeekFrom::End(0)).map_err(io_err(path))?;
    file.write_all(line.as_bytes()).map_err(io_err(path))?;
    file.sync_data().map_err(io_err(path))
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

impl ReviewStore {
    /// Opens (creating if needed) the store in `dir` and replays its log.
    pub fn open(dir: &Path) -> Result<Self, StoreError> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let cpath = dir.join(CANDIDATES_FILE);
        let dpath = dir.join(DECISIONS_FILE);
        let mut candidates = BTreeMap::new();
        for c in read_lines::<Candidate>(&cpath)? {
            candidates.entry(c.id.clone()).or_insert(c);
        }
        let mut decisions: BTreeMap<String, Vec<Decision>> = BTreeMap::new();
        for d in read_lines::<Decision>(&dpath)? {
            decisions.entry(d.candidate_id.clone()).or_default().push(d);
        }
        let log = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&dpath)
            .map_err(io_err(&dpath))?;
        let mut store = Self {
            dir: dir.to_path_buf(),
            candidates,
            decisions,
            log,
        };
        let ids: Vec<String> = store.candidates.keys().cloned().collect();
        for id in ids {
            store.refresh(&id);
        }
        Ok(store)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn refresh(&mut self, id: &str) {
        let Some(c) = self.candidates.get_mut(id) else {
            return;
        };
        let log = self.decisions.get(id).map(Vec::as_slice).unwrap_or(&[]);
        let r = resolve_status(&c.draft_utterance, log);
        c.status = r.status;
        c.final_utterance = r.final_utterance;
        c.reviews = effective(log);
    }

    fn validate(c: &Candidate, catalog: &Catalog) -> Result<(), String> {
        if c.id != candidate_id(&c.db_id, &c.base, &c.new_sql) {
            return Err("id is not the content hash of (db_id, base, new_sql)".into());
        }
        if c.base.turns.is_empty() {
            return Err("empty base prefix".into());
        }
        if c.draft_utterance.trim().is_empty() {
            return Err("no draft utterance".into());
        }
        let schema = catalog
            .get(&c.db_id)
            .ok_or_else(|| format!("unknown database {}", c.db_id))?;
        parse_sql(&c.new_sql, schema).map_err(|e| format!("new_sql: {e}"))?;
        Ok(())
    }

    /// Adds candidates not yet queued. Re-enqueueing a known id changes
    /// nothing, so decisions already made stay in force.
    pub fn enqueue(
        &mut self,
        cands: &[Candidate],
        catalog: &Catalog,
    ) -> Result<EnqueueReport, StoreError> {
        let mut report = EnqueueReport::default();
        let path = self.dir.join(CANDIDATES_FILE);
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io_err(&path))?;
        for c in cands {
            if self.candidates.contains_key(&c.id) {
                report.already_queued += 1;
                continue;
            }
            if let Err(reason) = Self::validate(c, catalog) {
                report.rejected.push((c.id.clone(), reason));
                continue;
            }
            let mut stored = c.clone();
            stored.status = Status::Pending;
            stored.final_utterance = None;
            stored.reviews.clear();
            let mut line = serde_json::to_string(&stored).expect("candidates serialize");
            line.push('\n');
            file.write_all(line.as_bytes()).map_err(io_err(&path))?;
            self.candidates.insert(stored.id.clone(), stored);
            self.refresh(&c.id);
            report.added += 1;
        }
        file.sync_data().map_err(io_err(&path))?;
        Ok(report)
    }

    /// Appends a decision to the log (durably) and returns the candidate's
    /// new state. A timestamp of 0 is replaced by the current time.
    pub fn record_decision(&mut self, mut d: Decision) -> Result<&Candidate, ReviewError> {
        if !self.candidates.contains_key(&d.candidate_id) {
            return Err(ReviewError::UnknownCandidate(d.candidate_id));
        }
        d.reviewer = d.reviewer.trim().to_string();
        if d.reviewer.is_empty() {
            return Err(ReviewError::InvalidDecision("empty reviewer".into()));
        }
        match d.action {
            ReviewAction::Revise => {
                let text = d.revised_utterance.as_deref().map(str::trim).unwrap_or("");
                if text.is_empty() {
                    return Err(ReviewError::InvalidDecision(
                        "revise needs a non-empty revised_utterance".into(),
                    ));
                }
                d.revised_utterance = Some(text.to_string());
            }
            _ => d.revised_utterance = None,
        }
        if d.timestamp == 0 {
            d.timestamp = now_ms();
        }
        let path = self.dir.join(DECISIONS_FILE);
        append_line(&mut self.log, &path, &d)?;
        let id = d.candidate_id.clone();
        self.decisions.entry(id.clone()).or_default().push(d);
        self.refresh(&id);
        Ok(&self.candidates[&id])
    }

    pub fn get(&self, id: &str) -> Option<&Candidate> {
        self.candidates.get(id)
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// Candidates in id order, optionally only those with `status` and
    /// only those `reviewer` has not decided on yet.
    pub fn list(&self, status: Option<Status>, reviewer: Option<&str>) -> Vec<&Candidate> {
        self.candidates
            .values()
            .filter(|c| status.is_none_or(|s| c.status == s))
            .filter(|c| reviewer.is_none_or(|r| c.reviews.iter().all(|d| d.reviewer != r)))
            .collect()
    }

    /// Count per status, every status present.
    pub fn stats(&self) -> BTreeMap<&'static str, usize> {
        let mut out: BTreeMap<&'static str, usize> =
            Status::ALL.iter().map(|s| (s.name(), 0)).collect();
        for c in self.candidates.values() {
            *out.get_mut(c.status.name()).expect("every status") += 1;
        }
        out
    }

    pub fn statuses(&self) -> BTreeMap<String, Status> {
        self.candidates
            .iter()
            .map(|(id, c)| (id.clone(), c.status))
            .collect()
    }

    /// Accepted and revised candidates as dialogues: the base prefix
    /// followed by the new question, in id order.
    pub fn export_benchmark(&self) -> Vec<DialogueRecord> {
        self.candidates
            .values()
            .filter(|c| matches!(c.status, Status::Accepted | Status::Revised))
            .map(|c| {
                let last = DialogueTurn {
                    utterance: c
                        .final_utterance
                        .clone()
                        .unwrap_or_else(|| c.draft_utterance.clone()),
                    query: c.new_sql.clone(),
                };
                let mut interaction = c.base.turns.clone();
                interaction.push(last.clone());
                DialogueRecord {
                    id: Some(c.id.clone()),
                    database_id: c.db_id.clone(),
                    interaction,
                    final_turn: Some(last),
                }
            })
            .collect()
    }
}

/// Recomputes every status from the files in `dir` alone.
pub fn replay(dir: &Path) -> Result<BTreeMap<String, Status>, StoreError> {
    let cands = read_lines::<Candidate>(&dir.join(CANDIDATES_FILE))?;
    let mut log: BTreeMap<String, Vec<Decision>> = BTreeMap::new();
    for d in read_lines::<Decision>(&dir.join(DECISIONS_FILE))? {
        log.entry(d.candidate_id.clone()).or_default().push(d);
    }
    Ok(cands
        .iter()
        .map(|c| {
            let ds = log.get(&c.id).map(Vec::as_slice).unwrap_or(&[]);
            (c.id.clone(), resolve_status(&c.draft_utterance, ds).status)
        })
        .collect())
}
