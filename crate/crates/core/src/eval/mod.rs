//! Scoring predictions against a benchmark.

mod components;
mod difficulty;
mod errors;
mod report;

pub use components::{
    decompose, match_asts, question_match, Component, ComponentSets, MatchResult,
};
pub use difficulty::{classify, counts, difficulty, Counts, Difficulty};
pub use errors::{atoms, categorize_error, ErrorCategory, CATEGORY_RULE};
pub use report::{
    build_report, evaluate, score_questions, tag_splits, tag_turn, EvalReport, QuestionResult,
    Slice, SplitTag,
};
