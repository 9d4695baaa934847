//! Split tagging and the evaluation report.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::components::{question_match, Component};
use super::difficulty::{difficulty, Difficulty};
use super::errors::{categorize_error, ErrorCategory, CATEGORY_RULE};
use crate::dataset::{Catalog, Interaction, Prediction};
use crate::patterns::{anonymize, diff_asts, DiffOutcome, PatternLibrary};
use crate::sql::{parse_sql, template_of};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SplitTag {
    #[serde(rename = "CG")]
    Cg,
    #[serde(rename = "NonCG")]
    NonCg,
    #[serde(rename = "other")]
    Other,
}

impl SplitTag {
    pub fn name(self) -> &'static str {
        match self {
            Self::Cg => "CG",
            Self::NonCg => "NonCG",
            Self::Other => "other",
        }
    }
}

/// Tags one turn (0-based `k`) of an interaction.
pub fn tag_turn(
    it: &Interaction,
    k: usize,
    library: &PatternLibrary,
    catalog: &Catalog,
) -> SplitTag {
    let Some(schema) = catalog.get(&it.db_id) else {
        return SplitTag::Other;
    };
    if k == 0 {
        return SplitTag::Other;
    }
    let (prev, cur) = (&it.turns[k - 1].ast, &it.turns[k].ast);
    let DiffOutcome::Modification(m) = diff_asts(prev, cur) else {
        return SplitTag::Other;
    };
    let base = template_of(prev, schema).hash;
    let t = anonymize(&m, prev, schema).hash;
    match library.is_novel(&base, &t) {
        Ok(true) => SplitTag::Cg,
        Ok(false) => SplitTag::NonCg,
        Err(_) => SplitTag::Other,
    }
}

/// Split tag of every question, keyed by question id.
pub fn tag_splits(
    eval: &[Interaction],
    library: &PatternLibrary,
    catalog: &Catalog,
) -> BTreeMap<String, SplitTag> {
    eval.par_iter()
        .flat_map_iter(|it| {
            (0..it.turns.len())
                .map(move |k| (it.question_id(k + 1), tag_turn(it, k, library, catalog)))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Slice {
    pub questions: usize,
    pub correct: usize,
    /// Question match in percent; 0 for an empty slice.
    pub qm: f64,
}

impl Slice {
    fn add(&mut self, correct: bool) {
        self.questions += 1;
        self.correct += usize::from(correct);
    }

    fn finish(mut self) -> Self {
        self.qm = if self.questions == 0 {
            0.0
        } else {
            100.0 * self.correct as f64 / self.questions as f64
        };
        self
    }
}

/// Score of one question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionResult {
    pub question_id: String,
    /// 1-based.
    pub turn: usize,
    pub split: SplitTag,
    pub difficulty: Difficulty,
    pub exact: bool,
    pub per_component: BTreeMap<Component, bool>,
    pub category: ErrorCategory,
    pub missing_prediction: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub overall: Slice,
    pub by_split: BTreeMap<String, Slice>,
    /// Accuracy in percent per component, over all questions.
    pub components: BTreeMap<String, f64>,
    pub by_difficulty: BTreeMap<String, Slice>,
    /// Keyed by 1-based turn index.
    pub by_turn: BTreeMap<usize, Slice>,
    /// Counts over incorrect predictions only.
    pub error_categories: BTreeMap<String, usize>,
    pub missing_predictions: Vec<String>,
    pub metadata: BTreeMap<String, String>,
}

fn score_turn(
    it: &Interaction,
    k: usize,
    pred: Option<&str>,
    library: &PatternLibrary,
    catalog: &Catalog,
) -> QuestionResult {
    let gold = &it.turns[k].ast;
    let schema = &catalog[&it.db_id];
    let m = question_match(pred.unwrap_or(""), gold, schema);
    let pred_ast = pred.and_then(|p| parse_sql(p, schema).ok());
    let prev = k.checked_sub(1).map(|j| &it.turns[j].ast);
    QuestionResult {
        question_id: it.question_id(k + 1),
        turn: k + 1,
        split: tag_turn(it, k, library, catalog),
        difficulty: difficulty(gold),
        exact: m.exact,
        category: categorize_error(pred_ast.as_ref(), m.exact, gold, prev),
        per_component: m.per_component,
        missing_prediction: pred.is_none(),
    }
}

/// Scores every turn of `gold` (interactions on databases missing from the
/// catalog are skipped). Questions without a prediction count as wrong.
pub fn score_questions(
    gold: &[Interaction],
    predictions: &[Prediction],
    library: &PatternLibrary,
    catalog: &Catalog,
) -> Vec<QuestionResult> {
    let preds: HashMap<&str, &str> = predictions
        .iter()
        .map(|p| (p.question_id.as_str(), p.predicted_sql.as_str()))
        .collect();
    gold.par_iter()
        .filter(|it| catalog.contains_key(&it.db_id))
        .flat_map_iter(|it| {
            let preds = &preds;
            (0..it.turns.len()).map(move |k| {
                let qid = it.question_id(k + 1);
                score_turn(it, k, preds.get(qid.as_str()).copied(), library, catalog)
            })
        })
        .collect()
}

pub fn build_report(results: &[QuestionResult]) -> EvalReport {
    let mut overall = Slice::default();
    let mut by_split: BTreeMap<String, Slice> = [SplitTag::Cg, SplitTag::NonCg, SplitTag::Other]
        .iter()
        .map(|t| (t.name().to_string(), Slice::default()))
        .collect();
    let mut by_difficulty: BTreeMap<String, Slice> = Difficulty::ALL
        .iter()
        .map(|d| (d.name().to_string(), Slice::default()))
        .collect();
    let mut by_turn: BTreeMap<usize, Slice> = BTreeMap::new();
    let mut comp_hits: BTreeMap<String, usize> = Component::ALL
        .iter()
        .map(|c| (c.name().to_string(), 0))
        .collect();
    let mut error_categories: BTreeMap<String, usize> = [
        ErrorCategory::ContextInfo,
        ErrorCategory::ModificationInfo,
        ErrorCategory::Both,
    ]
    .iter()
    .map(|c| (c.name().to_string(), 0))
    .collect();
    let mut missing_predictions = Vec::new();
    for r in results {
        overall.add(r.exact);
        by_split
            .get_mut(r.split.name())
            .expect("all tags")
            .add(r.exact);
        by_difficulty
            .get_mut(r.difficulty.name())
            .expect("all levels")
            .add(r.exact);
        by_turn.entry(r.turn).or_default().add(r.exact);
        for (c, ok) in &r.per_component {
            if *ok {
                *comp_hits.get_mut(c.name()).expect("all components") += 1;
            }
        }
        if !r.exact {
            *error_categories
                .entry(r.category.name().to_string())
                .or_insert(0) += 1;
        }
        if r.missing_prediction {
            missing_predictions.push(r.question_id.clone());
        }
    }
    missing_predictions.sort();
    let n = results.len();
    let components = comp_hits
        .into_iter()
        .map(|(c, hits)| {
            let acc = if n == 0 {
                0.0
            } else {
                100.0 * hits as f64 / n as f64
            };
            (c, acc)
        })
        .collect();
    let metadata = BTreeMap::from([
        ("metric".to_string(), "exact set match, values ignored".to_string()),
        ("error_category_rule".to_string(), CATEGORY_RULE.to_string()),
        (
            "split_rule".to_string(),
            "CG: base and modification templates seen in training, combination unseen; NonCG: combination seen; other: first turns, non-incremental turns, unseen templates".to_string(),
        ),
    ]);
    EvalReport {
        overall: overall.finish(),
        by_split: by_split.into_iter().map(|(k, s)| (k, s.finish())).collect(),
        components,
        by_difficulty: by_difficulty
            .into_iter()
            .map(|(k, s)| (k, s.finish()))
            .collect(),
        by_turn: by_turn.into_iter().map(|(k, s)| (k, s.finish())).collect(),
        error_categories,
        missing_predictions,
        metadata,
    }
}

pub fn evaluate(
    gold: &[Interaction],
    predictions: &[Prediction],
    library: &PatternLibrary,
    catalog: &Catalog,
) -> EvalReport {
    build_report(&score_questions(gold, predictions, library, catalog))
}
