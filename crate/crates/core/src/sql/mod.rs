//! SQL subset: canonical tree, parser, printer and template anonymization.

mod ast;
mod canonical;
mod parser;
pub mod printer;
mod template;
pub mod visit;

use thiserror::Error;

pub use ast::*;
pub use canonical::{canonicalize, validate};
pub use parser::parse_sql;
pub use printer::{print_sql, print_sql_spans};
pub use template::{template_of, Anonymizer, QueryTemplate, SlotDecl, SlotKind, TemplateHash};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SqlError {
    #[error("parse error at token {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("resolution error: {0}")]
    Resolution(String),
}
