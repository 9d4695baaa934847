//! Draft utterances for generated candidates.
//!
//! The built-in realizer writes one sentence per edit. An external program
//! can take its place: it gets one [`DraftRequest`] as JSON on standard
//! input and answers with `{"utterance": "..."}` on standard output.

mod realize;

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Candidate, Catalog};
use crate::patterns::Modification;
use crate::schema::Schema;
use realize::{lower_first, Realizer};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DraftRequest {
    pub modification: Modification,
    pub prev_sql: String,
    pub prev_utterance: String,
}

impl DraftRequest {
    pub fn for_candidate(c: &Candidate) -> Self {
        Self {
            modification: c.modification.clone(),
            prev_sql: c.base.previous_sql().to_string(),
            prev_utterance: c.base.previous_utterance().to_string(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DraftError {
    #[error("no realization rule for edit {0}")]
    UnrealizableEdit(String),
    #[error("external generator failed: {0}")]
    ExternalFailure(String),
}

/// Deterministic English rendering of the request's edits. Column and
/// table phrases come from `schema`.
pub fn draft_rule_based(req: &DraftRequest, schema: &Schema) -> Result<String, DraftError> {
    let r = Realizer { schema };
    let mut parts = Vec::new();
    for e in &req.modification.edits {
        parts.push(r.edit(e)?);
    }
    if parts.is_empty() {
        return Err(DraftError::UnrealizableEdit("empty modification".into()));
    }
    let last = parts.len() - 1;
    let joined: Vec<String> = parts
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let p = if i < last {
                p.trim_end_matches('.').to_string()
            } else {
                p
            };
            if i > 0 {
                lower_first(&p)
            } else {
                p
            }
        })
        .collect();
    Ok(joined.join(" and also "))
}

#[derive(Deserialize)]
struct ExternalReply {
    utterance: String,
}

/// Runs `command` (program and arguments) on one request.
pub fn draft_external(
    req: &DraftRequest,
    command: &[String],
    timeout: Duration,
) -> Result<String, DraftError> {
    let fail = |m: String| DraftError::ExternalFailure(m);
    let (prog, args) = command
        .split_first()
        .ok_or_else(|| fail("empty command".into()))?;
    let mut child = Command::new(prog)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| fail(format!("cannot start {prog}: {e}")))?;
    let body = serde_json::to_vec(req).expect("requests serialize");
    let mut stdin = child.stdin.take().expect("piped stdin");
    let writer = std::thread::spawn(move || {
        // A program that exits without reading closes the pipe; that shows
        // up as its exit status or output, not here.
        let _ = stdin.write_all(&body);
    });
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = std::thread::spawn(move || {
        let mut out = Vec::new();
        stdout.read_to_end(&mut out).map(|_| out)
    });
    let deadline = Instant::now() + timeout;
    let status = loop {
        match child.try_wait() {
            Ok(Some(s)) => break s,
            Ok(None) if Instant::now() >= deadline => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(fail(format!("timed out after {timeout:?}")));
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(5)),
            Err(e) => return Err(fail(e.to_string())),
        }
    };
    let _ = writer.join();
    let out = reader
        .join()
        .map_err(|_| fail("reader thread panicked".into()))?
        .map_err(|e| fail(e.to_string()))?;
    if !status.success() {
        return Err(fail(format!("exited with {status}")));
    }
    let reply: ExternalReply =
        serde_json::from_slice(&out).map_err(|e| fail(format!("invalid JSON reply: {e}")))?;
    let u = reply.utterance.trim();
    if u.is_empty() {
        return Err(fail("empty utterance".into()));
    }
    Ok(u.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Generator {
    Rule,
    External {
        command: Vec<String>,
        timeout: Duration,
        /// Upper bound on simultaneously running programs.
        concurrency: usize,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DraftReport {
    pub rule: usize,
    pub external: usize,
    pub rule_fallback: usize,
    /// `(candidate id, reason)` for every external failure.
    pub failures: Vec<(String, String)>,
}

fn draft_one(
    c: &mut Candidate,
    catalog: &Catalog,
    generator: &Generator,
) -> Result<Option<String>, DraftError> {
    let schema = catalog
        .get(&c.db_id)
        .ok_or_else(|| DraftError::UnrealizableEdit(format!("unknown database {}", c.db_id)))?;
    let req = DraftRequest::for_candidate(c);
    match generator {
        Generator::Rule => {
            c.draft_utterance = draft_rule_based(&req, schema)?;
            c.draft_source = Some("rule".into());
            Ok(None)
        }
        Generator::External {
            command, timeout, ..
        } => match draft_external(&req, command, *timeout) {
            Ok(u) => {
                c.draft_utterance = u;
                c.draft_source = Some("external".into());
                Ok(None)
            }
            Err(e) => {
                log::warn!("candidate {}: {e}; using the rule-based draft", c.id);
                c.draft_utterance = draft_rule_based(&req, schema)?;
                c.draft_source = Some("rule-fallback".into());
                Ok(Some(e.to_string()))
            }
        },
    }
}

/// Fills `draft_utterance` and `draft_source` of every candidate.
pub fn draft_candidates(
    cands: &mut [Candidate],
    catalog: &Catalog,
    generator: &Generator,
) -> Result<DraftReport, DraftError> {
    let results: Vec<Result<Option<String>, DraftError>> = match generator {
        Generator::Rule => cands
            .iter_mut()
            .map(|c| draft_one(c, catalog, generator))
            .collect(),
        Generator::External { concurrency, .. } => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads((*concurrency).max(1))
                .build()
                .map_err(|e| DraftError::ExternalFailure(e.to_string()))?;
            pool.install(|| {
                cands
                    .par_iter_mut()
                    .map(|c| draft_one(c, catalog, generator))
                    .collect()
            })
        }
    };
    let mut report = DraftReport::default();
    for (c, r) in cands.iter().zip(results) {
        match r? {
            Some(reason) => {
                report.rule_fallback += 1;
                report.failures.push((c.id.clone(), reason));
            }
            None if c.draft_source.as_deref() == Some("external") => report.external += 1,
            None => report.rule += 1,
        }
    }
    Ok(report)
}
