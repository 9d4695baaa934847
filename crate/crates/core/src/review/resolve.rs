use crate::dataset::{Decision, ReviewAction, Status};

/// Status and final utterance implied by a candidate's decisions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resolution {
    pub status: Status,
    /// Set for `revised` (the latest revision) and `accepted` (the draft).
    pub final_utterance: Option<String>,
}

/// Keeps each reviewer's latest decision, ordered by when it was made.
pub fn effective(decisions: &[Decision]) -> Vec<Decision> {
    let mut out: Vec<Decision> = Vec::new();
    for d in decisions {
        out.retain(|e| e.reviewer != d.reviewer);
        out.push(d.clone());
    }
    out
}

/// Majority resolution over the effective decisions (one per reviewer).
/// A single decision never settles a candidate; rejects win a strict
/// majority; a strict majority of accepts and revisions accepts, or revises
/// when any of them is a revision; anything else is disputed.
pub fn resolve_status(draft: &str, decisions: &[Decision]) -> Resolution {
    let eff = effective(decisions);
    let n = eff.len();
    let rejects = eff
        .iter()
        .filter(|d| d.action == ReviewAction::Reject)
        .count();
    let keeps = n - rejects;
    let (status, final_utterance) = if n <= 1 {
        (Status::Pending, None)
    } else if 2 * rejects > n {
        (Status::Rejected, None)
    } else if 2 * keeps > n {
        let revision = eff
            .iter()
            .rev()
            .find(|d| d.action == ReviewAction::Revise)
            .and_then(|d| d.revised_utterance.clone());
        match revision {
            Some(text) => (Status::Revised, Some(text)),
            None => (Status::Accepted, Some(draft.to_string())),
        }
    } else {
        (Status::Disputed, None)
    };
    Resolution {
        status,
        final_utterance,
    }
}
