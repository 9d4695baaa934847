//! Hardness levels from clause counts, following the counting of the
//! reference Spider evaluator.

use serde::{Deserialize, Serialize};

use crate::sql::{CmpOp, Condition, Logic, Operand, Query, ValUnit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
    Extra,
}

impl Difficulty {
    pub const ALL: [Difficulty; 4] = [
        Difficulty::Easy,
        Difficulty::Medium,
        Difficulty::Hard,
        Difficulty::Extra,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Easy => "easy",
            Self::Medium => "medium",
            Self::Hard => "hard",
            Self::Extra => "extra",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counts {
    pub comp1: usize,
    pub comp2: usize,
    pub others: usize,
}

fn all_conds(q: &Query) -> impl Iterator<Item = &Condition> {
    q.from
        .conds
        .iter()
        .chain(q.where_clause.conditions())
        .chain(q.having.conditions())
}

pub fn counts(q: &Query) -> Counts {
    let mut comp1 = 0;
    comp1 += usize::from(!q.where_clause.is_empty());
    comp1 += usize::from(!q.group_by.is_empty());
    comp1 += usize::from(!q.order_by.is_empty());
    comp1 += usize::from(q.limit.is_some());
    comp1 += q.from.tables.len().saturating_sub(1);
    // Join conditions are implicitly conjoined, so ORs come from WHERE and
    // HAVING only.
    comp1 += q
        .where_clause
        .links()
        .chain(q.having.links())
        .filter(|&l| l == Logic::Or)
        .count();
    comp1 += all_conds(q)
        .filter(|c| matches!(c.op, CmpOp::Like | CmpOp::NotLike))
        .count();

    let mut comp2 = all_conds(q)
        .flat_map(|c| std::iter::once(&c.right).chain(c.right2.as_ref()))
        .filter(|o| matches!(o, Operand::Query(_)))
        .count();
    comp2 += usize::from(q.set_op.is_some());

    // The reference evaluator reads the first field of a condition (its
    // NOT flag) as if it were an aggregate, so negated WHERE and HAVING
    // conditions count as aggregates there; kept for parity.
    let negated = |c: &&Condition| matches!(c.op, CmpOp::NotIn | CmpOp::NotLike);
    let mut aggs = q.select.items.iter().filter(|v| v.has_agg()).count();
    aggs += q.where_clause.conditions().filter(negated).count();
    aggs += q
        .group_by
        .iter()
        .filter(|c| c.agg != crate::sql::Agg::None)
        .count();
    aggs += q
        .order_by
        .iter()
        .flat_map(|o| match &o.expr {
            ValUnit::Col(c) => vec![c],
            ValUnit::Arith { left, right, .. } => vec![left, right],
        })
        .filter(|c| c.agg != crate::sql::Agg::None)
        .count();
    aggs += q.having.conditions().filter(negated).count();
    // It also walks HAVING without skipping the connectives, whose first
    // character is truthy there.
    aggs += q.having.links().count();
    let mut others = 0;
    others += usize::from(aggs > 1);
    others += usize::from(q.select.items.len() > 1);
    others += usize::from(q.where_clause.len() > 1);
    others += usize::from(q.group_by.len() > 1);
    Counts {
        comp1,
        comp2,
        others,
    }
}

pub fn classify(c: Counts) -> Difficulty {
    let Counts {
        comp1,
        comp2,
        others,
    } = c;
    if comp1 <= 1 && comp2 == 0 && others == 0 {
        Difficulty::Easy
    } else if comp2 == 0 && ((others <= 2 && comp1 <= 1) || (others == 0 && comp1 <= 2)) {
        Difficulty::Medium
    } else if (comp2 <= 1 && others <= 2 && comp1 <= 2) || (comp2 == 0 && comp1 <= 3 && others <= 2)
    {
        Difficulty::Hard
    } else {
        Difficulty::Extra
    }
}

pub fn difficulty(q: &Query) -> Difficulty {
    classify(counts(q))
}
