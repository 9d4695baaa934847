//! Deterministic canonical rendering.

use std::ops::Range;

use super::ast::*;
use super::parser::RESERVED;

/// Renders a query in canonical form. `parse_sql(print_sql(q))` gives back
/// `q` for every schema-bound tree.
pub fn print_sql(q: &Query) -> String {
    let mut out = String::new();
    write_query(&mut out, q, None);
    out
}

/// Like [`print_sql`], also returning the byte range of every top-level
/// clause present in the output.
pub fn print_sql_spans(q: &Query) -> (String, Vec<(Clause, Range<usize>)>) {
    let mut out = String::new();
    let mut spans = Vec::new();
    write_query(&mut out, q, Some(&mut spans));
    (out, spans)
}

pub fn ident(s: &str) -> String {
    let simple = s
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !RESERVED.iter().any(|k| k.eq_ignore_ascii_case(s));
    if simple {
        s.to_string()
    } else {
        format!("`{}`", s.replace('`', "``"))
    }
}

pub fn column_ref(c: &ColumnRef) -> String {
    match c {
        ColumnRef::Star => "*".into(),
        ColumnRef::Column { table, column } => format!("{}.{}", ident(table), ident(column)),
    }
}

pub fn col_unit(c: &ColUnit) -> String {
    let inner = if c.distinct {
        format!("DISTINCT {}", column_ref(&c.col))
    } else {
        column_ref(&c.col)
    };
    match c.agg {
        Agg::None => inner,
        agg => format!("{}({inner})", agg.keyword()),
    }
}

pub fn val_unit(v: &ValUnit) -> String {
    match v {
        ValUnit::Col(c) => col_unit(c),
        ValUnit::Arith { op, left, right } => {
            format!("{} {} {}", col_unit(left), op.symbol(), col_unit(right))
        }
    }
}

pub fn value(v: &Value) -> String {
    match v.kind {
        ValueKind::String => format!("'{}'", v.raw.replace('\'', "''")),
        ValueKind::Number => v.raw.clone(),
        ValueKind::Placeholder => format!("?{}", v.raw),
    }
}

pub fn operand(o: &Operand) -> String {
    match o {
        Operand::Value(v) => value(v),
        Operand::Column(c) => col_unit(c),
        Operand::Query(q) => format!("({})", print_sql(q)),
    }
}

pub fn condition(c: &Condition) -> String {
    match &c.right2 {
        Some(r2) => format!(
            "{} {} {} AND {}",
            val_unit(&c.left),
            c.op.symbol(),
            operand(&c.right),
            operand(r2)
        ),
        None => format!(
            "{} {} {}",
            val_unit(&c.left),
            c.op.symbol(),
            operand(&c.right)
        ),
    }
}

pub fn pred_items(items: &[PredItem]) -> String {
    let mut out = String::new();
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(match item.link {
                Logic::And => " AND ",
                Logic::Or => " OR ",
            });
        }
        out.push_str(&condition(&item.cond));
    }
    out
}

pub fn select_items(items: &[ValUnit]) -> String {
    items.iter().map(val_unit).collect::<Vec<_>>().join(", ")
}

pub fn col_units(items: &[ColUnit]) -> String {
    items.iter().map(col_unit).collect::<Vec<_>>().join(", ")
}

pub fn order_items(items: &[OrderItem]) -> String {
    items
        .iter()
        .map(|o| {
            let dir = match o.dir {
                Direction::Asc => "ASC",
                Direction::Desc => "DESC",
            };
            format!("{} {dir}", val_unit(&o.expr))
        })
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn table_unit(t: &TableUnit) -> String {
    match t {
        TableUnit::Table(n) => ident(n),
        TableUnit::Query(q) => format!("({})", print_sql(q)),
    }
}

/// FROM body. Each join condition is printed after the last table it
/// mentions (never before the second table).
pub fn from_clause(f: &FromClause) -> String {
    let names: Vec<Option<String>> = f
        .tables
        .iter()
        .map(|t| match t {
            TableUnit::Table(n) => Some(n.to_ascii_lowercase()),
            TableUnit::Query(_) => None,
        })
        .collect();
    let mut by_pos: Vec<Vec<&Condition>> = vec![Vec::new(); f.tables.len().max(1)];
    for c in &f.conds {
        let mut max = 0;
        for n in crate::sql::visit::WalkNames::names(c) {
            if let crate::sql::visit::Name::Column { table, .. } = n {
                let t = table.to_ascii_lowercase();
                if let Some(p) = names.iter().position(|x| x.as_deref() == Some(t.as_str())) {
                    max = max.max(p);
                }
            }
        }
        let slot = max.max(1).min(by_pos.len() - 1);
        by_pos[slot].push(c);
    }
    let mut out = String::new();
    for (i, t) in f.tables.iter().enumerate() {
        if i > 0 {
            out.push_str(" JOIN ");
        }
        out.push_str(&table_unit(t));
        if !by_pos[i].is_empty() {
            out.push_str(" ON ");
            out.push_str(
                &by_pos[i]
                    .iter()
                    .map(|c| condition(c))
                    .collect::<Vec<_>>()
                    .join(" AND "),
            );
        }
    }
    // A single table with join conditions (only possible in hand-built
    // trees) still renders every condition.
    if f.tables.len() == 1 && !by_pos[0].is_empty() {
        out.push_str(" ON ");
        out.push_str(
            &by_pos[0]
                .iter()
                .map(|c| condition(c))
                .collect::<Vec<_>>()
                .join(" AND "),
        );
    }
    out
}

fn write_query(out: &mut String, q: &Query, mut spans: Option<&mut Vec<(Clause, Range<usize>)>>) {
    let mut clause = |out: &mut String, c: Clause, text: String| {
        if !out.is_empty() {
            out.push(' ');
        }
        let start = out.len();
        out.push_str(&text);
        if let Some(s) = spans.as_deref_mut() {
            s.push((c, start..out.len()));
        }
    };
    let distinct = if q.select.distinct { "DISTINCT " } else { "" };
    clause(
        out,
        Clause::Select,
        format!("SELECT {distinct}{}", select_items(&q.select.items)),
    );
    clause(out, Clause::From, format!("FROM {}", from_clause(&q.from)));
    if !q.where_clause.is_empty() {
        clause(
            out,
            Clause::Where,
            format!("WHERE {}", pred_items(&q.where_clause.items)),
        );
    }
    if !q.group_by.is_empty() {
        clause(
            out,
            Clause::GroupBy,
            format!("GROUP BY {}", col_units(&q.group_by)),
        );
    }
    if !q.having.is_empty() {
        clause(
            out,
            Clause::Having,
            format!("HAVING {}", pred_items(&q.having.items)),
        );
    }
    if !q.order_by.is_empty() {
        clause(
            out,
            Clause::OrderBy,
            format!("ORDER BY {}", order_items(&q.order_by)),
        );
    }
    if let Some(n) = q.limit {
        clause(out, Clause::Limit, format!("LIMIT {n}"));
    }
    if let Some(s) = &q.set_op {
        clause(
            out,
            Clause::SetOp,
            format!("{} {}", s.kind.keyword(), print_sql(&s.right)),
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::tests::airlines_schema;
    use crate::sql::parse_sql;

    #[test]
    fn canonical_single_clause() {
        let s = airlines_schema();
        let q = parse_sql("SELECT Airline FROM AIRLINES", &s).unwrap();
        assert_eq!(print_sql(&q), "SELECT AIRLINES.Airline FROM AIRLINES");
    }

    #[test]
    fn union_appears_once() {
        let s = airlines_schema();
        let q = parse_sql(
            "select airline from airlines where country = 'USA' union select airline from airlines where country = 'UK'",
            &s,
        )
        .unwrap();
        let text = print_sql(&q);
        assert_eq!(text.matches("UNION").count(), 1);
        assert_eq!(parse_sql(&text, &s).unwrap(), q);
    }

    #[test]
    fn join_conditions_follow_their_table() {
        let s = airlines_schema();
        let q = parse_sql(
            "SELECT T1.Airline FROM AIRLINES AS T1 JOIN FLIGHTS AS T2 ON T1.uid = T2.Airline WHERE T2.FlightNo = 3",
            &s,
        )
        .unwrap();
        assert_eq!(
            print_sql(&q),
            "SELECT AIRLINES.Airline FROM AIRLINES JOIN FLIGHTS ON AIRLINES.uid = FLIGHTS.Airline WHERE FLIGHTS.FlightNo = 3"
        );
    }

    #[test]
    fn quoting_and_escapes() {
        assert_eq!(ident("Home Town"), "`Home Town`");
        assert_eq!(ident("order"), "`order`");
        assert_eq!(value(&Value::string("O'Hare")), "'O''Hare'");
        assert_eq!(value(&Value::placeholder()), "?");
    }

    #[test]
    fn spans_cover_clauses() {
        let s = airlines_schema();
        let q = parse_sql(
            "SELECT Airline FROM AIRLINES WHERE Country = 'USA' LIMIT 2",
            &s,
        )
        .unwrap();
        let (text, spans) = print_sql_spans(&q);
        let got: Vec<(Clause, &str)> = spans.iter().map(|(c, r)| (*c, &text[r.clone()])).collect();
        assert_eq!(
            got,
            vec![
                (Clause::Select, "SELECT AIRLINES.Airline"),
                (Clause::From, "FROM AIRLINES"),
                (Clause::Where, "WHERE AIRLINES.Country = 'USA'"),
                (Clause::Limit, "LIMIT 2"),
            ]
        );
    }
}
