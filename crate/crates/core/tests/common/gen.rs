//! Random queries over a fixture schema, rendered as SQL text in the
//! dataset style (aliases, mixed case) so the parser does the binding.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cgforge::schema::Schema;

const WORDS: &[&str] = &["USA", "UK", "Aberdeen", "dog", "x y", "it''s", "%a%"];
const OPS: &[&str] = &["=", "!=", ">", "<", ">=", "<=", "LIKE", "NOT LIKE"];
const AGGS: &[&str] = &["count", "sum", "avg", "min", "max"];

struct Gen<'a> {
    s: &'a Schema,
    rng: ChaCha8Rng,
}

impl Gen<'_> {
    fn col(&mut self, tables: &[(usize, String)]) -> String {
        let (t, alias) = tables.choose(&mut self.rng).unwrap().clone();
        let cols: Vec<usize> = self.s.columns_of(t).collect();
        let c = *cols.choose(&mut self.rng).unwrap();
        let name = &self.s.columns[c].name;
        match self.rng.gen_range(0..3) {
            0 if tables.len() == 1 => name.clone(),
            1 => format!("{alias}.{}", name.to_uppercase()),
            _ => format!("{alias}.{name}"),
        }
    }

    fn value(&mut self) -> String {
        match self.rng.gen_range(0..4) {
            0 => format!("{}", self.rng.gen_range(0..1000)),
            1 => format!("{}.5", self.rng.gen_range(0..50)),
            2 => format!(
                "\"{}\"",
                WORDS.choose(&mut self.rng).unwrap().replace("''", "'")
            ),
            _ => format!("'{}'", WORDS.choose(&mut self.rng).unwrap()),
        }
    }

    fn select_item(&mut self, tables: &[(usize, String)]) -> String {
        match self.rng.gen_range(0..6) {
            0 => "count(*)".into(),
            1 => {
                let a = AGGS.choose(&mut self.rng).unwrap().to_string();
                let d = if self.rng.gen_bool(0.2) {
                    "DISTINCT "
                } else {
                    ""
                };
                format!("{a}({d}{})", self.col(tables))
            }
            2 => format!("{} + {}", self.col(tables), self.col(tables)),
            _ => self.col(tables),
        }
    }

    /// FROM clause over one table or an FK join; returns the tables with
    /// their aliases.
    fn from(&mut self) -> (String, Vec<(usize, String)>) {
        let fks: Vec<(usize, usize)> = self
            .s
            .foreign_keys
            .iter()
            .copied()
            .filter(|&(a, b)| self.s.columns[a].table != self.s.columns[b].table)
            .collect();
        if !fks.is_empty() && self.rng.gen_bool(0.3) {
            let (a, b) = *fks.choose(&mut self.rng).unwrap();
            let (ta, tb) = (
                self.s.columns[a].table.unwrap(),
                self.s.columns[b].table.unwrap(),
            );
            let text = format!(
                "{} AS T1 JOIN {} AS T2 ON T1.{} = T2.{}",
                self.s.tables[ta].name,
                self.s.tables[tb].name,
                self.s.columns[a].name,
                self.s.columns[b].name
            );
            (text, vec![(ta, "T1".into()), (tb, "T2".into())])
        } else {
            let t = self.rng.gen_range(0..self.s.tables.len());
            let name = self.s.tables[t].name.clone();
            (name.clone(), vec![(t, name)])
        }
    }

    fn condition(&mut self, tables: &[(usize, String)], depth: usize) -> String {
        let left = self.col(tables);
        match self.rng.gen_range(0..8) {
            0 => format!("{left} BETWEEN {} AND {}", self.value(), self.value()),
            1 if depth == 0 => {
                let sub = self.simple(1);
                let op = ["IN", "NOT IN", "=", ">"]
                    .choose(&mut self.rng)
                    .unwrap()
                    .to_string();
                format!("{left} {op} ({sub})")
            }
            _ => {
                let op = OPS.choose(&mut self.rng).unwrap().to_string();
                format!("{left} {op} {}", self.value())
            }
        }
    }

    fn predicate(&mut self, tables: &[(usize, String)], depth: usize, n: usize) -> String {
        let mut out = self.condition(tables, depth);
        for _ in 1..n {
            let link = if self.rng.gen_bool(0.7) { "AND" } else { "or" };
            out = format!("{out} {link} {}", self.condition(tables, depth));
        }
        out
    }

    /// One-column query used for subqueries and set operands.
    fn simple(&mut self, arity: usize) -> String {
        let (from, tables) = self.from();
        let items: Vec<String> = (0..arity).map(|_| self.col(&tables)).collect();
        let mut q = format!("SELECT {} FROM {from}", items.join(", "));
        if self.rng.gen_bool(0.5) {
            q = format!("{q} WHERE {}", self.predicate(&tables, 1, 1));
        }
        q
    }

    fn query(&mut self) -> String {
        let (from, tables) = self.from();
        let n = self.rng.gen_range(1..=3);
        let items: Vec<String> = (0..n).map(|_| self.select_item(&tables)).collect();
        let distinct = if self.rng.gen_bool(0.15) {
            "DISTINCT "
        } else {
            ""
        };
        let mut q = format!("select {distinct}{} from {from}", items.join(", "));
        let nw = self.rng.gen_range(0..=3);
        if nw > 0 {
            q = format!("{q} where {}", self.predicate(&tables, 0, nw));
        }
        if self.rng.gen_bool(0.3) {
            q = format!("{q} GROUP BY {}", self.col(&tables));
            if self.rng.gen_bool(0.5) {
                q = format!("{q} HAVING count(*) > {}", self.rng.gen_range(0..9));
            }
        }
        let set_op = self.rng.gen_bool(0.15);
        if !set_op && self.rng.gen_bool(0.4) {
            let k = self.rng.gen_range(1..=2);
            let keys: Vec<String> = (0..k)
                .map(|_| {
                    let dir = ["", " ASC", " DESC"]
                        .choose(&mut self.rng)
                        .unwrap()
                        .to_string();
                    let e = if self.rng.gen_bool(0.2) {
                        "count(*)".to_string()
                    } else {
                        self.col(&tables)
                    };
                    format!("{e}{dir}")
                })
                .collect();
            q = format!("{q} ORDER BY {}", keys.join(", "));
            if self.rng.gen_bool(0.5) {
                q = format!("{q} LIMIT {}", self.rng.gen_range(1..20));
            }
        }
        if set_op {
            let kw = ["UNION", "INTERSECT", "EXCEPT"]
                .choose(&mut self.rng)
                .unwrap()
                .to_string();
            q = format!("{q} {kw} {}", self.simple(n));
        }
        q
    }
}

pub fn random_sql(schema: &Schema, seed: u64) -> String {
    Gen {
        s: schema,
        rng: ChaCha8Rng::seed_from_u64(seed),
    }
    .query()
}
