mod common;

use std::collections::BTreeMap;
use std::io::Write;

use cgforge::dataset::{Candidate, Decision, ReviewAction, Status};
use cgforge::review::*;
use proptest::prelude::*;

fn decision(id: &str, reviewer: &str, action: ReviewAction, text: Option<&str>) -> Decision {
    Decision {
        candidate_id: id.into(),
        reviewer: reviewer.into(),
        action,
        revised_utterance: text.map(str::to_string),
        timestamp: 0,
    }
}

fn ten() -> (cgforge::dataset::Catalog, Vec<Candidate>) {
    let (c, cands) = common::candidates();
    assert!(cands.len() >= 10, "{}", cands.len());
    (c, cands.into_iter().take(10).collect())
}

use ReviewAction::*;

#[test]
fn enqueue_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let (catalog, cands) = ten();
    let mut store = ReviewStore::open(dir.path()).unwrap();
    let r = store.enqueue(&cands, &catalog).unwrap();
    assert_eq!((r.added, r.already_queued), (10, 0));
    assert_eq!(store.stats()["pending"], 10);

    store
        .record_decision(decision(&cands[0].id, "a", Accept, None))
        .unwrap();
    store
        .record_decision(decision(&cands[0].id, "b", Accept, None))
        .unwrap();
    let r = store.enqueue(&cands, &catalog).unwrap();
    assert_eq!((r.added, r.already_queued), (0, 10));
    assert_eq!(store.len(), 10);
    assert_eq!(store.get(&cands[0].id).unwrap().status, Status::Accepted);

    // Same after reopening.
    drop(store);
    let store = ReviewStore::open(dir.path()).unwrap();
    assert_eq!(store.len(), 10);
    assert_eq!(store.get(&cands[0].id).unwrap().status, Status::Accepted);
}

#[test]
fn invalid_candidates_are_rejected_individually() {
    let dir = tempfile::tempdir().unwrap();
    let (catalog, mut cands) = ten();
    cands[1].draft_utterance.clear();
    cands[2].new_sql.push_str(" garbage");
    cands[3].db_id = "nowhere".into();
    let mut store = ReviewStore::open(dir.path()).unwrap();
    let r = store.enqueue(&cands, &catalog).unwrap();
    assert_eq!(r.added, 7);
    let ids: Vec<&str> = r.rejected.iter().map(|(id, _)| id.as_str()).collect();
    assert_eq!(ids, vec![&cands[1].id, &cands[2].id, &cands[3].id]);
    assert!(r.rejected[0].1.contains("draft"));
}

#[test]
fn decision_examples() {
    let dir = tempfile::tempdir().unwrap();
    let (catalog, cands) = ten();
    let mut store = ReviewStore::open(dir.path()).unwrap();
    store.enqueue(&cands, &catalog).unwrap();
    let id = |i: usize| cands[i].id.clone();

    let c = store
        .record_decision(decision(&id(0), "a", Accept, None))
        .unwrap();
    assert_eq!(c.status, Status::Pending);
    let c = store
        .record_decision(decision(&id(0), "b", Accept, None))
        .unwrap();
    assert_eq!(c.status, Status::Accepted);
    assert_eq!(c.final_utterance.as_ref(), Some(&cands[0].draft_utterance));

    store
        .record_decision(decision(&id(1), "a", Accept, None))
        .unwrap();
    let c = store
        .record_decision(decision(&id(1), "b", Reject, None))
        .unwrap();
    assert_eq!(c.status, Status::Disputed);
    let c = store
        .record_decision(decision(&id(1), "c", Reject, None))
        .unwrap();
    assert_eq!(c.status, Status::Rejected);

    store
        .record_decision(decision(
            &id(2),
            "a",
            Revise,
            Some(" Which are in the USA? "),
        ))
        .unwrap();
    let c = store
        .record_decision(decision(&id(2), "b", Accept, None))
        .unwrap();
    assert_eq!(c.status, Status::Revised);
    assert_eq!(c.final_utterance.as_deref(), Some("Which are in the USA?"));

    assert!(matches!(
        store.record_decision(decision("missing", "a", Accept, None)),
        Err(ReviewError::UnknownCandidate(_))
    ));
    assert!(matches!(
        store.record_decision(decision(&id(3), "a", Revise, Some("  "))),
        Err(ReviewError::InvalidDecision(_))
    ));
    assert!(matches!(
        store.record_decision(decision(&id(3), " ", Accept, None)),
        Err(ReviewError::InvalidDecision(_))
    ));
    // Refused decisions leave no trace.
    assert_eq!(store.get(&id(3)).unwrap().reviews.len(), 0);

    let stats = store.stats();
    assert_eq!(stats.values().sum::<usize>(), store.len());
    assert_eq!(stats["accepted"], 1);
    assert_eq!(stats["revised"], 1);
    assert_eq!(stats["rejected"], 1);
    assert_eq!(stats["pending"], 7);

    let pending_for_a = store.list(Some(Status::Pending), Some("a"));
    assert_eq!(pending_for_a.len(), 7);
    assert_eq!(store.list(None, Some("b")).len(), 7);

    let out = store.export_benchmark();
    assert_eq!(out.len(), 2);
    assert!(out.windows(2).all(|w| w[0].id < w[1].id));
    for r in &out {
        let c = store.get(r.id.as_ref().unwrap()).unwrap();
        assert_eq!(r.interaction.len(), c.base.turns.len() + 1);
        assert_eq!(r.interaction.last().unwrap().query, c.new_sql);
        assert_eq!(
            Some(&r.interaction.last().unwrap().utterance),
            c.final_utterance.as_ref()
        );
    }
    assert!(out
        .iter()
        .any(|r| r.interaction.last().unwrap().utterance == "Which are in the USA?"));
}

#[test]
fn export_of_empty_and_mixed_queues() {
    let dir = tempfile::tempdir().unwrap();
    let (catalog, cands) = ten();
    let mut store = ReviewStore::open(dir.path()).unwrap();
    assert!(store.export_benchmark().is_empty());
    store.enqueue(&cands[..3], &catalog).unwrap();
    for r in ["a", "b"] {
        store
            .record_decision(decision(&cands[0].id, r, Accept, None))
            .unwrap();
        store
            .record_decision(decision(&cands[1].id, r, Reject, None))
            .unwrap();
    }
    assert_eq!(store.export_benchmark().len(), 1);
}

#[test]
fn torn_log_line_is_dropped() {
    let dir = tempfile::tempdir().unwrap();
    let (catalog, cands) = ten();
    let mut store = ReviewStore::open(dir.path()).unwrap();
    store.enqueue(&cands, &catalog).unwrap();
    store
        .record_decision(decision(&cands[0].id, "a", Accept, None))
        .unwrap();
    drop(store);
    let log = dir.path().join(DECISIONS_FILE);
    let before = std::fs::read_to_string(&log).unwrap();
    let mut f = std::fs::OpenOptions::new().append(true).open(&log).unwrap();
    write!(f, "{{\"candidate_id\":\"{}\",\"revi", cands[0].id).unwrap();
    drop(f);

    let mut store = ReviewStore::open(dir.path()).unwrap();
    assert_eq!(std::fs::read_to_string(&log).unwrap(), before);
    let c = store
        .record_decision(decision(&cands[0].id, "b", Accept, None))
        .unwrap();
    assert_eq!(c.status, Status::Accepted);
    assert_eq!(replay(dir.path()).unwrap(), store.statuses());
}

#[test]
fn corrupt_complete_line_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join(DECISIONS_FILE), "{}\n").unwrap();
    assert!(matches!(
        ReviewStore::open(dir.path()),
        Err(StoreError::Corrupt { line: 1, .. })
    ));
}

/// Status from a plain tally of each reviewer's last word.
fn oracle(draft: &str, log: &[(usize, ReviewAction, String)]) -> (Status, Option<String>) {
    let mut last: Vec<(usize, ReviewAction, String)> = Vec::new();
    for d in log {
        last.retain(|x| x.0 != d.0);
        last.push(d.clone());
    }
    let n = last.len();
    let rejects = last.iter().filter(|x| x.1 == Reject).count();
    if n < 2 {
        return (Status::Pending, None);
    }
    if rejects * 2 > n {
        return (Status::Rejected, None);
    }
    if (n - rejects) * 2 > n {
        return match last.iter().rev().find(|x| x.1 == Revise) {
            Some(x) => (Status::Revised, Some(x.2.clone())),
            None => (Status::Accepted, Some(draft.to_string())),
        };
    }
    (Status::Disputed, None)
}

fn action() -> impl Strategy<Value = ReviewAction> {
    prop_oneof![Just(Accept), Just(Reject), Just(Revise)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn replay_reproduces_statuses(
        log in prop::collection::vec((0usize..10, 0usize..4, action(), 0u8..5), 500)
    ) {
        let dir = tempfile::tempdir().unwrap();
        let (catalog, cands) = ten();
        let mut store = ReviewStore::open(dir.path()).unwrap();
        store.enqueue(&cands, &catalog).unwrap();
        let mut per: BTreeMap<usize, Vec<(usize, ReviewAction, String)>> = BTreeMap::new();
        for (i, (c, r, a, t)) in log.iter().enumerate() {
            let text = format!("revision {t}");
            let d = decision(
                &cands[*c].id,
                &format!("r{r}"),
                *a,
                (*a == Revise).then_some(text.as_str()),
            );
            store.record_decision(Decision { timestamp: i as u64 + 1, ..d }).unwrap();
            per.entry(*c).or_default().push((*r, *a, text));
        }
        for (i, c) in cands.iter().enumerate() {
            let got = store.get(&c.id).unwrap();
            let (status, fin) = oracle(&c.draft_utterance, per.get(&i).map(Vec::as_slice).unwrap_or(&[]));
            prop_assert_eq!(got.status, status);
            prop_assert_eq!(got.final_utterance.clone(), fin);
        }
        prop_assert_eq!(store.stats().values().sum::<usize>(), 10);
        let statuses = store.statuses();
        prop_assert_eq!(&replay(dir.path()).unwrap(), &statuses);
        drop(store);
        prop_assert_eq!(ReviewStore::open(dir.path()).unwrap().statuses(), statuses);
    }
}
