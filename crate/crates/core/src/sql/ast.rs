//! Canonical query tree for the Spider-family SQL subset.
//!
//! Names inside a schema-bound tree carry the catalog's spelling and every
//! column reference is qualified with its table; aliases never survive
//! parsing. The same types are reused for anonymized trees, where names are
//! slot identifiers instead of catalog names.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Agg {
    None,
    Count,
    Sum,
    Avg,
    Min,
    Max,
}

impl Agg {
    pub fn from_keyword(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "count" => Some(Self::Count),
            "sum" => Some(Self::Sum),
            "avg" => Some(Self::Avg),
            "min" => Some(Self::Min),
            "max" => Some(Self::Max),
            _ => None,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Self::None => "",
            Self::Count => "count",
            Self::Sum => "sum",
            Self::Avg => "avg",
            Self::Min => "min",
            Self::Max => "max",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ColumnRef {
    Star,
    Column { table: String, column: String },
}

impl ColumnRef {
    pub fn new(table: impl Into<String>, column: impl Into<String>) -> Self {
        Self::Column {
            table: table.into(),
            column: column.into(),
        }
    }
}

/// A possibly aggregated column: `count(DISTINCT T.c)`, `T.c`, `*`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ColUnit {
    pub agg: Agg,
    pub distinct: bool,
    pub col: ColumnRef,
}

impl ColUnit {
    pub fn plain(col: ColumnRef) -> Self {
        Self {
            agg: Agg::None,
            distinct: false,
            col,
        }
    }

    pub fn agg(agg: Agg, col: ColumnRef) -> Self {
        Self {
            agg,
            distinct: false,
            col,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            Self::Add => "+",
            Self::Sub => "-",
            Self::Mul => "*",
            Self::Div => "/",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ValUnit {
    Col(ColUnit),
    Arith {
        op: ArithOp,
        left: ColUnit,
        right: ColUnit,
    },
}

impl ValUnit {
    pub fn col_units(&self) -> Vec<&ColUnit> {
        match self {
            Self::Col(c) => vec![c],
            Self::Arith { left, right, .. } => vec![left, right],
        }
    }

    pub fn has_agg(&self) -> bool {
        self.col_units().iter().any(|c| c.agg != Agg::None)
    }
}

impl From<ColUnit> for ValUnit {
    fn from(c: ColUnit) -> Self {
        Self::Col(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    String,
    Number,
    Placeholder,
}

/// A literal. Placeholders print as `?` (or `?name` when `raw` is non-empty,
/// which is how anonymized value slots are spelled).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Value {
    pub kind: ValueKind,
    pub raw: String,
}

impl Value {
    pub fn string(s: impl Into<String>) -> Self {
        Self {
            kind: ValueKind::String,
            raw: s.into(),
        }
    }

    pub fn number(s: impl Into<String>) -> Self {
        Self {
            kind: ValueKind::Number,
            raw: s.into(),
        }
    }

    pub fn placeholder() -> Self {
        Self {
            kind: ValueKind::Placeholder,
            raw: String::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Ne,
    Gt,
    Lt,
    Ge,
    Le,
    Like,
    NotLike,
    In,
    NotIn,
    Between,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            Self::Eq => "=",
            Self::Ne => "!=",
            Self::Gt => ">",
            Self::Lt => "<",
            Self::Ge => ">=",
            Self::Le => "<=",
            Self::Like => "LIKE",
            Self::NotLike => "NOT LIKE",
            Self::In => "IN",
            Self::NotIn => "NOT IN",
            Self::Between => "BETWEEN",
        }
    }

    /// Operators that may take a nested query on the right.
    pub fn allows_subquery(self) -> bool {
        matches!(
            self,
            Self::In | Self::NotIn | Self::Eq | Self::Gt | Self::Lt | Self::Ge | Self::Le
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Operand {
    Value(Value),
    Column(ColUnit),
    Query(Box<Query>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Condition {
    pub left: ValUnit,
    pub op: CmpOp,
    pub right: Operand,
    /// Upper bound of `BETWEEN`; `None` for every other operator.
    pub right2: Option<Operand>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Logic {
    And,
    Or,
}

/// One conjunct/disjunct. The link of the first item of a predicate is
/// meaningless and normalized to `And`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PredItem {
    pub link: Logic,
    pub cond: Condition,
}

/// Flat left-to-right boolean chain, as in the Spider grammar.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Predicate {
    pub items: Vec<PredItem>,
}

impl Predicate {
    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn conditions(&self) -> impl Iterator<Item = &Condition> {
        self.items.iter().map(|i| &i.cond)
    }

    /// Links between consecutive conditions (`len() - 1` of them).
    pub fn links(&self) -> impl Iterator<Item = Logic> + '_ {
        self.items.iter().skip(1).map(|i| i.link)
    }

    pub fn normalize(&mut self) {
        if let Some(first) = self.items.first_mut() {
            first.link = Logic::And;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TableUnit {
    Table(String),
    Query(Box<Query>),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FromClause {
    pub tables: Vec<TableUnit>,
    /// Join conditions, implicitly conjoined.
    pub conds: Vec<Condition>,
}

impl FromClause {
    /// Names of the real (non-subquery) tables.
    pub fn table_names(&self) -> impl Iterator<Item = &str> {
        self.tables.iter().filter_map(|t| match t {
            TableUnit::Table(n) => Some(n.as_str()),
            TableUnit::Query(_) => None,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SelectClause {
    pub distinct: bool,
    pub items: Vec<ValUnit>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Asc,
    Desc,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OrderItem {
    pub expr: ValUnit,
    pub dir: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetOpKind {
    Union,
    Intersect,
    Except,
}

impl SetOpKind {
    pub fn keyword(self) -> &'static str {
        match self {
            Self::Union => "UNION",
            Self::Intersect => "INTERSECT",
            Self::Except => "EXCEPT",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SetOp {
    pub kind: SetOpKind,
    pub right: Box<Query>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Query {
    pub select: SelectClause,
    pub from: FromClause,
    pub where_clause: Predicate,
    pub group_by: Vec<ColUnit>,
    pub having: Predicate,
    pub order_by: Vec<OrderItem>,
    pub limit: Option<u64>,
    pub set_op: Option<SetOp>,
}

impl Query {
    /// Nested queries directly reachable from this one: condition operands,
    /// FROM subqueries and the set-operation operand.
    pub fn nested(&self) -> Vec<&Query> {
        let mut out = Vec::new();
        for t in &self.from.tables {
            if let TableUnit::Query(q) = t {
                out.push(q.as_ref());
            }
        }
        let conds = self
            .from
            .conds
            .iter()
            .chain(self.where_clause.conditions())
            .chain(self.having.conditions());
        for c in conds {
            for op in std::iter::once(&c.right).chain(c.right2.as_ref()) {
                if let Operand::Query(q) = op {
                    out.push(q.as_ref());
                }
            }
        }
        if let Some(s) = &self.set_op {
            out.push(s.right.as_ref());
        }
        out
    }
}

/// Top-level clause of a query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clause {
    Select,
    From,
    Where,
    GroupBy,
    Having,
    OrderBy,
    Limit,
    SetOp,
}

impl Clause {
    pub const ALL: [Clause; 8] = [
        Clause::Select,
        Clause::From,
        Clause::Where,
        Clause::GroupBy,
        Clause::Having,
        Clause::OrderBy,
        Clause::Limit,
        Clause::SetOp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Select => "select",
            Self::From => "from",
            Self::Where => "where",
            Self::GroupBy => "group_by",
            Self::Having => "having",
            Self::OrderBy => "order_by",
            Self::Limit => "limit",
            Self::SetOp => "set_op",
        }
    }
}

impl std::fmt::Display for Clause {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
