//! Tokenizer and recursive-descent parser for the supported SQL subset.
//!
//! Parsing binds the query to a schema: table aliases are dissolved into the
//! catalog table names, and every column is qualified. Anything outside the
//! subset is a [`SqlError::Parse`], never a silently degraded tree.

use super::ast::*;
use super::canonical::{canonicalize, validate};
use super::visit::{NameMut, WalkNames};
use super::SqlError;
use crate::schema::Schema;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Quoted(String),
    Str(String),
    Num(String),
    Param(String),
    Sym(&'static str),
}

const SYMBOLS: [&str; 16] = [
    ">=", "<=", "!=", "<>", "(", ")", ",", ".", "*", "+", "-", "/", "=", ">", "<", ";",
];

fn tokenize(text: &str) -> Result<Vec<Tok>, SqlError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    let err = |pos: usize, msg: &str| SqlError::Parse {
        pos,
        msg: msg.to_string(),
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '\'' || c == '"' || c == '`' {
            let quote = c;
            let mut s = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err(err(toks.len(), "unterminated quoted token")),
                    Some(&ch) if ch == quote => {
                        if chars.get(i + 1) == Some(&quote) {
                            s.push(quote);
                            i += 2;
                        } else {
                            i += 1;
                            break;
                        }
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            toks.push(if quote == '`' {
                Tok::Quoted(s)
            } else {
                Tok::Str(s)
            });
        } else if c.is_ascii_digit()
            || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            toks.push(Tok::Num(chars[start..i].iter().collect()));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            toks.push(Tok::Word(chars[start..i].iter().collect()));
        } else if c == '?' {
            let start = i + 1;
            i += 1;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            toks.push(Tok::Param(chars[start..i].iter().collect()));
        } else {
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                Some(s) => {
                    i += s.len();
                    toks.push(Tok::Sym(s));
                }
                None => return Err(err(toks.len(), &format!("unexpected character {c:?}"))),
            }
        }
    }
    Ok(toks)
}

/// Words that cannot be used as bare identifiers or aliases.
pub(crate) const RESERVED: &[&str] = &[
    "select",
    "from",
    "where",
    "group",
    "by",
    "having",
    "order",
    "limit",
    "union",
    "intersect",
    "except",
    "join",
    "on",
    "as",
    "and",
    "or",
    "not",
    "in",
    "like",
    "between",
    "asc",
    "desc",
    "distinct",
    "inner",
    "left",
    "right",
    "outer",
    "cross",
    "is",
    "null",
    "offset",
    "case",
];

fn is_reserved(w: &str) -> bool {
    RESERVED.iter().any(|k| k.eq_ignore_ascii_case(w))
}

#[derive(Debug, Clone)]
enum ScopeTable {
    Real(String),
    Derived,
}

#[derive(Clone, Copy, Default)]
struct Ctx {
    in_cond_subquery: bool,
    in_from_subquery: bool,
}

struct Parser<'s> {
    toks: Vec<Tok>,
    pos: usize,
    schema: &'s Schema,
}

/// Parses `text` into a canonical tree bound to `schema`.
pub fn parse_sql(text: &str, schema: &Schema) -> Result<Query, SqlError> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(SqlError::Parse {
            pos: 0,
            msg: "empty query".into(),
        });
    }
    let mut p = Parser {
        toks,
        pos: 0,
        schema,
    };
    let q = p.query(Ctx::default())?;
    while p.eat_sym(";") {}
    if p.pos < p.toks.len() {
        return Err(p.err(format!("unexpected trailing token {:?}", p.toks[p.pos])));
    }
    Ok(q)
}

impl<'s> Parser<'s> {
    fn err(&self, msg: impl Into<String>) -> SqlError {
        SqlError::Parse {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k)
    }

    fn is_kw_at(&self, k: usize, kw: &str) -> bool {
        matches!(self.peek_at(k), Some(Tok::Word(w)) if w.eq_ignore_ascii_case(kw))
    }

    fn is_kw(&self, kw: &str) -> bool {
        self.is_kw_at(0, kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), SqlError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.err(format!("expected {}", kw.to_uppercase())))
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), SqlError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.err(format!("expected {s:?}")))
        }
    }

    fn query(&mut self, ctx: Ctx) -> Result<Query, SqlError> {
        let mut q = self.core(ctx)?;
        let kind = if self.eat_kw("union") {
            Some(SetOpKind::Union)
        } else if self.eat_kw("intersect") {
            Some(SetOpKind::Intersect)
        } else if self.eat_kw("except") {
            Some(SetOpKind::Except)
        } else {
            None
        };
        if let Some(kind) = kind {
            if self.is_kw("all") {
                return Err(self.err("set operations with ALL are not supported"));
            }
            let right = self.query(ctx)?;
            q.set_op = Some(SetOp {
                kind,
                right: Box::new(right),
            });
        }
        validate(&q).map_err(|msg| self.err(msg))?;
        Ok(q)
    }

    fn core(&mut self, ctx: Ctx) -> Result<Query, SqlError> {
        self.expect_kw("select")?;
        let mut q = Query::default();
        q.select.distinct = self.eat_kw("distinct");
        if self.is_kw("from") || self.peek().is_none() {
            return Err(self.err("missing select list"));
        }
        loop {
            q.select.items.push(self.val_unit()?);
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_kw("from")?;
        let scope = self.parse_from(&mut q.from, ctx)?;
        if self.eat_kw("where") {
            q.where_clause = self.predicate(ctx)?;
        }
        if self.eat_kw("group") {
            self.expect_kw("by")?;
            loop {
                q.group_by.push(self.col_unit()?);
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        if self.eat_kw("having") {
            q.having = self.predicate(ctx)?;
        }
        if self.eat_kw("order") {
            self.expect_kw("by")?;
            loop {
                let expr = self.val_unit()?;
                let dir = if self.eat_kw("desc") {
                    Direction::Desc
                } else {
                    self.eat_kw("asc");
                    Direction::Asc
                };
                q.order_by.push(OrderItem { expr, dir });
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        if self.eat_kw("limit") {
            match self.peek().cloned() {
                Some(Tok::Num(n)) => {
                    self.pos += 1;
                    q.limit = Some(
                        n.parse()
                            .map_err(|_| self.err("LIMIT takes a non-negative integer"))?,
                    );
                }
                _ => return Err(self.err("LIMIT takes a non-negative integer")),
            }
        }
        self.resolve(&mut q, &scope)?;
        canonicalize(&mut q);
        Ok(q)
    }

    fn parse_from(
        &mut self,
        from: &mut FromClause,
        ctx: Ctx,
    ) -> Result<Vec<(Option<String>, ScopeTable)>, SqlError> {
        let mut scope = Vec::new();
        loop {
            let (unit, entry) = self.table_unit(ctx)?;
            let alias = if self.eat_kw("as") {
                Some(self.identifier()?)
            } else {
                match self.peek() {
                    Some(Tok::Word(w)) if !is_reserved(w) => Some(self.identifier()?),
                    Some(Tok::Quoted(_)) => Some(self.identifier()?),
                    _ => None,
                }
            };
            from.tables.push(unit);
            scope.push((alias, entry));
            if self.eat_kw("on") {
                loop {
                    from.conds.push(self.condition(ctx)?);
                    if self.is_kw("or") {
                        return Err(self.err("OR in join conditions is not supported"));
                    }
                    if !self.eat_kw("and") {
                        break;
                    }
                }
            }
            if self.eat_sym(",") || self.eat_kw("join") {
                continue;
            }
            if self.is_kw("inner") && self.is_kw_at(1, "join") {
                self.pos += 2;
                continue;
            }
            if self.is_kw("left") {
                let step = if self.is_kw_at(1, "outer") { 3 } else { 2 };
                if self.is_kw_at(step - 1, "join") {
                    self.pos += step;
                    continue;
                }
            }
            break;
        }
        Ok(scope)
    }

    fn table_unit(&mut self, ctx: Ctx) -> Result<(TableUnit, ScopeTable), SqlError> {
        if self.is_sym("(") && self.is_kw_at(1, "select") {
            if ctx.in_from_subquery {
                return Err(self.err("FROM subqueries nest at most one level"));
            }
            self.pos += 1;
            let inner = self.query(Ctx {
                in_from_subquery: true,
                ..ctx
            })?;
            self.expect_sym(")")?;
            return Ok((TableUnit::Query(Box::new(inner)), ScopeTable::Derived));
        }
        let name = self.identifier()?;
        let idx = self
            .schema
            .table_index(&name)
            .ok_or_else(|| SqlError::Resolution(format!("unknown table {name:?}")))?;
        let canon = self.schema.table_name(idx).to_string();
        Ok((TableUnit::Table(canon.clone()), ScopeTable::Real(canon)))
    }

    fn identifier(&mut self) -> Result<String, SqlError> {
        match self.peek().cloned() {
            Some(Tok::Word(w)) if !is_reserved(&w) => {
                self.pos += 1;
                Ok(w)
            }
            Some(Tok::Quoted(w)) => {
                self.pos += 1;
                Ok(w)
            }
            other => Err(self.err(format!("expected identifier, found {other:?}"))),
        }
    }

    fn predicate(&mut self, ctx: Ctx) -> Result<Predicate, SqlError> {
        let mut p = Predicate::default();
        let mut link = Logic::And;
        loop {
            let cond = self.condition(ctx)?;
            p.items.push(PredItem { link, cond });
            if self.eat_kw("and") {
                link = Logic::And;
            } else if self.eat_kw("or") {
                link = Logic::Or;
            } else {
                break;
            }
        }
        Ok(p)
    }

    fn condition(&mut self, ctx: Ctx) -> Result<Condition, SqlError> {
        if self.is_sym("(") && !self.is_kw_at(1, "select") {
            return Err(self.err("parenthesized conditions are not supported"));
        }
        let left = self.val_unit()?;
        let negated = self.eat_kw("not");
        let op = match self.peek().cloned() {
            Some(Tok::Sym(s)) if !negated => {
                let op = match s {
                    "=" => CmpOp::Eq,
                    "!=" | "<>" => CmpOp::Ne,
                    ">" => CmpOp::Gt,
                    "<" => CmpOp::Lt,
                    ">=" => CmpOp::Ge,
                    "<=" => CmpOp::Le,
                    _ => return Err(self.err(format!("expected comparison operator, found {s:?}"))),
                };
                self.pos += 1;
                op
            }
            Some(Tok::Word(w)) => {
                let op = match (w.to_ascii_lowercase().as_str(), negated) {
                    ("like", false) => CmpOp::Like,
                    ("like", true) => CmpOp::NotLike,
                    ("in", false) => CmpOp::In,
                    ("in", true) => CmpOp::NotIn,
                    ("between", false) => CmpOp::Between,
                    _ => return Err(self.err(format!("unsupported operator {w:?}"))),
                };
                self.pos += 1;
                op
            }
            other => return Err(self.err(format!("expected comparison operator, found {other:?}"))),
        };
        let right = self.operand(op, ctx)?;
        let right2 = if op == CmpOp::Between {
            self.expect_kw("and")?;
            Some(self.operand(op, ctx)?)
        } else {
            None
        };
        Ok(Condition {
            left,
            op,
            right,
            right2,
        })
    }

    fn operand(&mut self, op: CmpOp, ctx: Ctx) -> Result<Operand, SqlError> {
        match self.peek().cloned() {
            Some(Tok::Sym("(")) => {
                if !self.is_kw_at(1, "select") {
                    return Err(self.err("value lists are not supported"));
                }
                if !op.allows_subquery() {
                    return Err(self.err(format!("{} cannot take a nested query", op.symbol())));
                }
                if ctx.in_cond_subquery {
                    return Err(self.err("condition subqueries nest at most one level"));
                }
                self.pos += 1;
                let inner = self.query(Ctx {
                    in_cond_subquery: true,
                    ..ctx
                })?;
                self.expect_sym(")")?;
                Ok(Operand::Query(Box::new(inner)))
            }
            Some(Tok::Str(s)) => {
                self.pos += 1;
                Ok(Operand::Value(Value::string(s)))
            }
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Operand::Value(Value::number(n)))
            }
            Some(Tok::Sym("-")) if matches!(self.peek_at(1), Some(Tok::Num(_))) => {
                let Some(Tok::Num(n)) = self.peek_at(1).cloned() else {
                    unreachable!()
                };
                self.pos += 2;
                Ok(Operand::Value(Value::number(format!("-{n}"))))
            }
            Some(Tok::Param(p)) => {
                self.pos += 1;
                Ok(Operand::Value(Value {
                    kind: ValueKind::Placeholder,
                    raw: p,
                }))
            }
            _ => {
                if op == CmpOp::In || op == CmpOp::NotIn {
                    return Err(self.err("IN requires a nested query"));
                }
                Ok(Operand::Column(self.col_unit()?))
            }
        }
    }

    fn val_unit(&mut self) -> Result<ValUnit, SqlError> {
        if self.is_sym("(") && !self.is_kw_at(1, "select") {
            self.pos += 1;
            let v = self.val_unit()?;
            self.expect_sym(")")?;
            return Ok(v);
        }
        let left = self.col_unit()?;
        let op = match self.peek() {
            Some(Tok::Sym("+")) => Some(ArithOp::Add),
            Some(Tok::Sym("-")) => Some(ArithOp::Sub),
            Some(Tok::Sym("*")) => Some(ArithOp::Mul),
            Some(Tok::Sym("/")) => Some(ArithOp::Div),
            _ => None,
        };
        match op {
            Some(op) => {
                self.pos += 1;
                let right = self.col_unit()?;
                Ok(ValUnit::Arith { op, left, right })
            }
            None => Ok(ValUnit::Col(left)),
        }
    }

    fn col_unit(&mut self) -> Result<ColUnit, SqlError> {
        if let Some(Tok::Word(w)) = self.peek() {
            if matches!(self.peek_at(1), Some(Tok::Sym("("))) {
                let agg = Agg::from_keyword(w)
                    .ok_or_else(|| self.err(format!("unsupported function {w:?}")))?;
                self.pos += 2;
                let distinct = self.eat_kw("distinct");
                let col = self.column_ref()?;
                self.expect_sym(")")?;
                return Ok(ColUnit { agg, distinct, col });
            }
        }
        let distinct = self.eat_kw("distinct");
        let col = self.column_ref()?;
        Ok(ColUnit {
            agg: Agg::None,
            distinct,
            col,
        })
    }

    fn column_ref(&mut self) -> Result<ColumnRef, SqlError> {
        if self.eat_sym("*") {
            return Ok(ColumnRef::Star);
        }
        let first = self.identifier()?;
        if self.eat_sym(".") {
            if self.is_sym("*") {
                return Err(self.err("qualified star is not supported"));
            }
            let col = self.identifier()?;
            Ok(ColumnRef::new(first, col))
        } else {
            // Unqualified; resolved once the FROM clause is known.
            Ok(ColumnRef::new("", first))
        }
    }

    /// Replaces aliases and bare column names in this query level with
    /// catalog-qualified names. Nested levels were resolved when parsed.
    fn resolve(
        &self,
        q: &mut Query,
        scope: &[(Option<String>, ScopeTable)],
    ) -> Result<(), SqlError> {
        let schema = self.schema;
        let mut failure = None;
        q.walk_names_mut(false, &mut |n| {
            if failure.is_some() {
                return;
            }
            if let NameMut::Column { table, column } = n {
                match resolve_column(schema, scope, table, column) {
                    Ok((t, c)) => {
                        *table = t;
                        *column = c;
                    }
                    Err(e) => failure = Some(e),
                }
            }
        });
        failure.map_or(Ok(()), Err)
    }
}

fn resolve_column(
    schema: &Schema,
    scope: &[(Option<String>, ScopeTable)],
    qualifier: &str,
    column: &str,
) -> Result<(String, String), SqlError> {
    let real = |t: &str| -> Result<(String, String), SqlError> {
        let ti = schema
            .table_index(t)
            .expect("scope tables come from the schema");
        let ci = schema
            .column_index(ti, column)
            .ok_or_else(|| SqlError::Resolution(format!("table {t:?} has no column {column:?}")))?;
        let (t, c) = schema.qualified(ci).unwrap();
        Ok((t.to_string(), c.to_string()))
    };
    if !qualifier.is_empty() {
        let by_alias = scope.iter().find(|(a, _)| {
            a.as_deref()
                .is_some_and(|a| a.eq_ignore_ascii_case(qualifier))
        });
        let by_name = || {
            scope.iter().find(
                |(_, t)| matches!(t, ScopeTable::Real(n) if n.eq_ignore_ascii_case(qualifier)),
            )
        };
        return match by_alias.or_else(by_name) {
            Some((_, ScopeTable::Real(t))) => real(t),
            Some((_, ScopeTable::Derived)) => Err(SqlError::Resolution(format!(
                "column {qualifier}.{column} refers to a derived table"
            ))),
            None => Err(SqlError::Resolution(format!(
                "unknown table or alias {qualifier:?}"
            ))),
        };
    }
    let mut found: Vec<&str> = Vec::new();
    for (_, t) in scope {
        if let ScopeTable::Real(t) = t {
            let ti = schema.table_index(t).unwrap();
            if schema.column_index(ti, column).is_some() && !found.contains(&t.as_str()) {
                found.push(t);
            }
        }
    }
    match found.as_slice() {
        [t] => real(t),
        [] => Err(SqlError::Resolution(format!(
            "no table in scope has column {column:?}"
        ))),
        _ => Err(SqlError::Resolution(format!(
            "column {column:?} is ambiguous between {}",
            found.join(", ")
        ))),
    }
}
