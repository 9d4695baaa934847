//! Recombination of modification templates with development queries.

mod fill;
mod generate;
mod lint;

pub use crate::patterns::{apply_modification, ApplyError};
pub use fill::{all_fills, enumerate_fills, FillError};
pub use generate::{generate_candidates, GenerateConfig, GenerateReport};
pub use lint::{default_rules, lint, load_rules, LintRule, Matcher, Violation};
