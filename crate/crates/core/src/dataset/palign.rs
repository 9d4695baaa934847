use serde::{Deserialize, Serialize};

use super::Interaction;

/// Turn `turn_index` of an interaction paired with every utterance up to
/// and including it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixAlignedExample {
    pub interaction_id: String,
    /// 1-based.
    pub turn_index: usize,
    pub prefix_utterances: Vec<String>,
    pub target_sql: String,
}

/// One example per turn: an interaction with n turns yields n examples with
/// prefixes of length 1..=n.
pub fn export_palign_pairs(dialogues: &[Interaction]) -> Vec<PrefixAlignedExample> {
    let mut out = Vec::new();
    for it in dialogues {
        for (k, turn) in it.turns.iter().enumerate() {
            out.push(PrefixAlignedExample {
                interaction_id: it.id.clone(),
                turn_index: k + 1,
                prefix_utterances: it.turns[..=k].iter().map(|t| t.utterance.clone()).collect(),
                target_sql: turn.gold_sql.clone(),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Turn;
    use crate::sql::Query;

    fn interaction(id: &str, n: usize) -> Interaction {
        let turns = (0..n)
            .map(|k| Turn {
                utterance: format!("u{k}"),
                gold_sql: format!("q{k}"),
                ast: Query::default(),
            })
            .collect();
        Interaction {
            id: id.into(),
            db_id: "d".into(),
            turns,
        }
    }

    #[test]
    fn prefixes_grow_by_one() {
        let pairs = export_palign_pairs(&[interaction("a", 3)]);
        let lens: Vec<usize> = pairs.iter().map(|p| p.prefix_utterances.len()).collect();
        assert_eq!(lens, vec![1, 2, 3]);
        assert_eq!(pairs[2].prefix_utterances, vec!["u0", "u1", "u2"]);
        assert_eq!(pairs[2].target_sql, "q2");
    }

    #[test]
    fn single_turn_is_the_standalone_case() {
        let pairs = export_palign_pairs(&[interaction("a", 1)]);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].prefix_utterances, vec!["u0"]);
    }

    #[test]
    fn count_is_the_sum_of_turns() {
        let its: Vec<_> = [2, 3, 1, 4, 2]
            .iter()
            .enumerate()
            .map(|(i, &n)| interaction(&i.to_string(), n))
            .collect();
        assert_eq!(export_palign_pairs(&its).len(), 12);
    }
}
