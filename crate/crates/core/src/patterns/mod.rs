//! Modification patterns: clause-level diffs between consecutive queries
//! and their anonymized, deduplicated templates.

mod diff;
mod edit;
mod library;
mod template;

pub use diff::{diff_asts, DiffOutcome, NotIncremental, MAX_CHANGED_CLAUSES};
pub use edit::{apply_modification, Action, ApplyError, Edit, Fragment, Modification};
pub use library::{collect_patterns, CollectReport, NoveltyError, PatternLibrary};
pub use template::{
    anonymize, component_tags, instantiate, substitute, Binding, Constraint, ModificationTemplate,
    SlotFill,
};
