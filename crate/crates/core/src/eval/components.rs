//! Exact set matching by clause components.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::schema::Schema;
use crate::sql::printer::{col_unit, val_unit};
use crate::sql::{
    parse_sql, Agg, CmpOp, ColUnit, Condition, Direction, Logic, Operand, Predicate, Query,
    TableUnit, ValUnit,
};

/// The value-free parts of a query that exact set matching compares.
/// Multisets are kept as sorted vectors.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ComponentSets {
    pub select: Vec<String>,
    pub select_no_agg: Vec<String>,
    #[serde(rename = "where")]
    pub where_: Vec<String>,
    pub where_no_op: Vec<String>,
    /// Grouping columns plus HAVING skeletons.
    pub group_by: Vec<String>,
    pub group_by_no_having: Vec<String>,
    /// ORDER BY items in order, then `limit` when there is one.
    pub order_by: Vec<String>,
    pub and_or: BTreeSet<String>,
    pub keywords: BTreeSet<String>,
    pub from: Vec<String>,
    /// The set operation and its right operand, decomposed.
    pub iuen: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Select,
    SelectNoAgg,
    Where,
    WhereNoOp,
    GroupBy,
    GroupByNoHaving,
    OrderBy,
    AndOr,
    Keywords,
    From,
    Iuen,
}

impl Component {
    pub const ALL: [Component; 11] = [
        Component::Select,
        Component::SelectNoAgg,
        Component::Where,
        Component::WhereNoOp,
        Component::GroupBy,
        Component::GroupByNoHaving,
        Component::OrderBy,
        Component::AndOr,
        Component::Keywords,
        Component::From,
        Component::Iuen,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Select => "select",
            Self::SelectNoAgg => "select_no_agg",
            Self::Where => "where",
            Self::WhereNoOp => "where_no_op",
            Self::GroupBy => "group_by",
            Self::GroupByNoHaving => "group_by_no_having",
            Self::OrderBy => "order_by",
            Self::AndOr => "and_or",
            Self::Keywords => "keywords",
            Self::From => "from",
            Self::Iuen => "iuen",
        }
    }
}

impl ComponentSets {
    pub fn matches(&self, other: &Self, c: Component) -> bool {
        match c {
            Component::Select => self.select == other.select,
            Component::SelectNoAgg => self.select_no_agg == other.select_no_agg,
            Component::Where => self.where_ == other.where_,
            Component::WhereNoOp => self.where_no_op == other.where_no_op,
            Component::GroupBy => self.group_by == other.group_by,
            Component::GroupByNoHaving => self.group_by_no_having == other.group_by_no_having,
            Component::OrderBy => self.order_by == other.order_by,
            Component::AndOr => self.and_or == other.and_or,
            Component::Keywords => self.keywords == other.keywords,
            Component::From => self.from == other.from,
            Component::Iuen => self.iuen == other.iuen,
        }
    }

    /// Canonical one-line form, used for nested queries.
    fn repr(&self) -> String {
        serde_json::to_string(self).expect("component sets serialize")
    }
}

fn sorted(mut v: Vec<String>) -> Vec<String> {
    v.sort();
    v
}

fn erase_agg(v: &ValUnit) -> String {
    let strip = |c: &ColUnit| ColUnit {
        agg: Agg::None,
        ..c.clone()
    };
    match v {
        ValUnit::Col(c) => col_unit(&strip(c)),
        ValUnit::Arith { op, left, right } => val_unit(&ValUnit::Arith {
            op: *op,
            left: strip(left),
            right: strip(right),
        }),
    }
}

fn operand_skeleton(o: &Operand) -> String {
    match o {
        Operand::Value(_) => "value".into(),
        Operand::Column(c) => col_unit(c),
        Operand::Query(q) => format!("({})", decompose(q).repr()),
    }
}

/// `left op right`, with literals replaced by `value`.
fn skeleton(c: &Condition) -> String {
    let mut s = format!(
        "{} {} {}",
        val_unit(&c.left),
        c.op.symbol(),
        operand_skeleton(&c.right)
    );
    if let Some(r2) = &c.right2 {
        s.push_str(" AND ");
        s.push_str(&operand_skeleton(r2));
    }
    s
}

fn skeletons(p: &Predicate) -> Vec<String> {
    sorted(p.conditions().map(skeleton).collect())
}

pub fn decompose(q: &Query) -> ComponentSets {
    let select = sorted(q.select.items.iter().map(val_unit).collect());
    let select_no_agg = sorted(q.select.items.iter().map(erase_agg).collect());
    let where_ = skeletons(&q.where_clause);
    let where_no_op = sorted(
        q.where_clause
            .conditions()
            .map(|c| val_unit(&c.left))
            .collect(),
    );
    let group_by_no_having = sorted(q.group_by.iter().map(col_unit).collect());
    let mut group_by = group_by_no_having.clone();
    group_by.extend(
        skeletons(&q.having)
            .into_iter()
            .map(|s| format!("having {s}")),
    );
    let mut order_by: Vec<String> = q
        .order_by
        .iter()
        .map(|o| {
            let dir = match o.dir {
                Direction::Asc => "asc",
                Direction::Desc => "desc",
            };
            format!("{} {dir}", val_unit(&o.expr))
        })
        .collect();
    if q.limit.is_some() {
        order_by.push("limit".into());
    }
    let and_or = q
        .where_clause
        .links()
        .map(|l| match l {
            Logic::And => "and".to_string(),
            Logic::Or => "or".to_string(),
        })
        .collect();
    let from = sorted(
        q.from
            .tables
            .iter()
            .map(|t| match t {
                TableUnit::Table(n) => n.to_ascii_lowercase(),
                TableUnit::Query(sub) => format!("({})", decompose(sub).repr()),
            })
            .collect(),
    );
    let iuen = q
        .set_op
        .as_ref()
        .map(|s| format!("{} ({})", s.kind.keyword(), decompose(&s.right).repr()));
    ComponentSets {
        select,
        select_no_agg,
        where_,
        where_no_op,
        group_by,
        group_by_no_having,
        order_by,
        and_or,
        keywords: keywords(q),
        from,
        iuen,
    }
}

/// Clause and operator keywords present at the top level.
fn keywords(q: &Query) -> BTreeSet<String> {
    let mut k = BTreeSet::new();
    let mut add = |s: &str| {
        k.insert(s.to_string());
    };
    add("select");
    if q.select.distinct {
        add("distinct");
    }
    if !q.where_clause.is_empty() {
        add("where");
    }
    if !q.group_by.is_empty() {
        add("group");
    }
    if !q.having.is_empty() {
        add("having");
    }
    if !q.order_by.is_empty() {
        add("order");
    }
    if q.limit.is_some() {
        add("limit");
    }
    if let Some(s) = &q.set_op {
        add(&s.kind.keyword().to_ascii_lowercase());
    }
    if q.where_clause.links().any(|l| l == Logic::Or) {
        add("or");
    }
    for c in q.where_clause.conditions() {
        match c.op {
            CmpOp::NotIn | CmpOp::NotLike => add("not"),
            _ => {}
        }
        match c.op {
            CmpOp::In | CmpOp::NotIn => add("in"),
            CmpOp::Like | CmpOp::NotLike => add("like"),
            _ => {}
        }
    }
    k
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchResult {
    pub exact: bool,
    pub per_component: BTreeMap<Component, bool>,
}

impl MatchResult {
    fn all(v: bool) -> Self {
        Self {
            exact: v,
            per_component: Component::ALL.iter().map(|&c| (c, v)).collect(),
        }
    }
}

pub fn match_asts(pred: &Query, gold: &Query) -> MatchResult {
    let (p, g) = (decompose(pred), decompose(gold));
    let per_component: BTreeMap<Component, bool> = Component::ALL
        .iter()
        .map(|&c| (c, p.matches(&g, c)))
        .collect();
    MatchResult {
        exact: per_component.values().all(|&v| v),
        per_component,
    }
}

/// Scores one prediction. A prediction that does not parse against the
/// schema is wrong on every component.
pub fn question_match(pred_sql: &str, gold: &Query, schema: &Schema) -> MatchResult {
    match parse_sql(pred_sql, schema) {
        Ok(p) => match_asts(&p, gold),
        Err(_) => MatchResult::all(false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::tests::airlines_schema;

    fn q(s: &str) -> Query {
        parse_sql(s, &airlines_schema()).unwrap()
    }

    #[test]
    fn count_star() {
        let c = decompose(&q("SELECT count(*) FROM AIRLINES"));
        assert_eq!(c.select, vec!["count(*)"]);
        assert_eq!(c.select_no_agg, vec!["*"]);
        assert_eq!(c.keywords, BTreeSet::from(["select".to_string()]));
    }

    #[test]
    fn values_are_erased() {
        let a = decompose(&q("SELECT Airline FROM AIRLINES WHERE Country = 'USA'"));
        let b = decompose(&q("SELECT Airline FROM AIRLINES WHERE Country = 'UK'"));
        assert_eq!(a, b);
        assert_eq!(a.where_, vec!["AIRLINES.Country = value"]);
    }

    #[test]
    fn and_or_and_where() {
        let c = decompose(&q("SELECT Airline FROM AIRLINES WHERE uid > 1 AND uid < 2"));
        assert_eq!(c.and_or, BTreeSet::from(["and".to_string()]));
        assert_eq!(c.where_.len(), 2);
        assert_eq!(c.where_no_op, vec!["AIRLINES.uid", "AIRLINES.uid"]);
    }

    #[test]
    fn missing_order_by() {
        let s = airlines_schema();
        let gold = q("SELECT Airline FROM AIRLINES ORDER BY Airline");
        let r = question_match("SELECT Airline FROM AIRLINES", &gold, &s);
        assert!(!r.exact);
        let wrong: Vec<Component> = r
            .per_component
            .iter()
            .filter(|(_, &v)| !v)
            .map(|(&c, _)| c)
            .collect();
        // The ORDER keyword is a component of its own.
        assert_eq!(wrong, vec![Component::OrderBy, Component::Keywords]);
    }

    #[test]
    fn unparseable_prediction() {
        let s = airlines_schema();
        let r = question_match("SELEC nonsense", &q("SELECT Airline FROM AIRLINES"), &s);
        assert!(!r.exact);
        assert!(r.per_component.values().all(|v| !v));
    }

    #[test]
    fn nested_queries_are_part_of_the_skeleton() {
        let a = decompose(&q(
            "SELECT Airline FROM AIRLINES WHERE uid IN (SELECT Airline FROM FLIGHTS WHERE FlightNo > 3)",
        ));
        let b = decompose(&q(
            "SELECT Airline FROM AIRLINES WHERE uid IN (SELECT Airline FROM FLIGHTS WHERE FlightNo < 3)",
        ));
        assert_ne!(a.where_, b.where_);
        assert_eq!(a.where_no_op, b.where_no_op);
    }
}
