//! Scoring predicted structures and groupings against hand annotations.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::InternalStructure;
use crate::group::ScreenshotParse;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("no class has nonzero support")]
    NoSupportedClasses,
    #[error("nothing to evaluate")]
    EmptyInput,
    #[error("parse `{parse}` compared against annotation `{annotation}`")]
    IdMismatch { parse: String, annotation: String },
    #[error("malformed confusion matrix: {0}")]
    Shape(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedUnit {
    pub author: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date: Option<NaiveDate>,
    pub body: String,
}

/// Hand-labelled ground truth for one screenshot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub screenshot_id: String,
    pub true_structure: InternalStructure,
    pub units: Vec<AnnotatedUnit>,
}

/// Rows are true classes, columns predicted classes, both in `classes` order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    classes: Vec<InternalStructure>,
    counts: Vec<Vec<usize>>,
}

pub fn confusion_matrix(
    pairs: impl IntoIterator<Item = (InternalStructure, InternalStructure)>,
) -> ConfusionMatrix {
    let pairs: Vec<_> = pairs.into_iter().collect();
    let classes: Vec<InternalStructure> = pairs
        .iter()
        .flat_map(|&(t, p)| [t, p])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut m = ConfusionMatrix {
        counts: vec![vec![0; classes.len()]; classes.len()],
        classes,
    };
    for (t, p) in pairs {
        let (i, j) = (m.index(t).unwrap(), m.index(p).unwrap());
        m.counts[i][j] += 1;
    }
    m
}

impl ConfusionMatrix {
    /// A matrix over `classes` in the given order.
    pub fn from_counts(
        classes: Vec<InternalStructure>,
        counts: Vec<Vec<usize>>,
    ) -> Result<Self, EvalError> {
        if classes.iter().collect::<HashSet<_>>().len() != classes.len() {
            return Err(EvalError::Shape("repeated class".into()));
        }
        if counts.len() != classes.len() || counts.iter().any(|r| r.len() != classes.len()) {
            return Err(EvalError::Shape(format!(
                "expected a {n}x{n} grid",
                n = classes.len()
            )));
        }
        Ok(ConfusionMatrix { classes, counts })
    }

    pub fn classes(&self) -> &[InternalStructure] {
        &self.classes
    }

    pub fn counts(&self) -> &[Vec<usize>] {
        &self.counts
    }

    fn index(&self, class: InternalStructure) -> Option<usize> {
        self.classes.iter().position(|&c| c == class)
    }

    /// Zero for classes the matrix does not hold.
    pub fn count(&self, truth: InternalStructure, predicted: InternalStructure) -> usize {
        match (self.index(truth), self.index(predicted)) {
            (Some(i), Some(j)) => self.counts[i][j],
            _ => 0,
        }
    }

    pub fn row_sum(&self, class: InternalStructure) -> usize {
        self.index(class).map_or(0, |i| self.counts[i].iter().sum())
    }

    pub fn col_sum(&self, class: InternalStructure) -> usize {
        self.index(class)
            .map_or(0, |j| self.counts.iter().map(|r| r[j]).sum())
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("true\\predicted");
        for c in &self.classes {
            out.push(',');
            out.push_str(c.as_str());
        }
        out.push('\n');
        for (c, row) in self.classes.iter().zip(&self.counts) {
            out.push_str(c.as_str());
            for n in row {
                let _ = write!(out, ",{n}");
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn per_class_metrics(m: &ConfusionMatrix) -> BTreeMap<InternalStructure, ClassMetrics> {
    m.classes
        .iter()
        .map(|&c| {
            let hits = m.count(c, c);
            let support = m.row_sum(c);
            let precision = ratio(hits, m.col_sum(c));
            let recall = ratio(hits, support);
            let metrics = ClassMetrics {
                precision,
                recall,
                f1: harmonic(precision, recall),
                support,
            };
            (c, metrics)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroMetrics {
    pub precision: f64,
    pub recall: f64,
    /// Harmonic mean of macro precision and macro recall.
    pub macro_f1: f64,
    /// Unweighted mean of the per-class F1 values.
    pub mean_f1: f64,
}

/// Unweighted means over classes with nonzero support.
pub fn macro_metrics(
    per_class: &BTreeMap<InternalStructure, ClassMetrics>,
) -> Result<MacroMetrics, EvalError> {
    let supported: Vec<&ClassMetrics> = per_class.values().filter(|m| m.support > 0).collect();
    if supported.is_empty() {
        return Err(EvalError::NoSupportedClasses);
    }
    let n = supported.len() as f64;
    let mean = |f: fn(&ClassMetrics) -> f64| supported.iter().map(|m| f(m)).sum::<f64>() / n;
    let precision = mean(|m| m.precision);
    let recall = mean(|m| m.recall);
    Ok(MacroMetrics {
        precision,
        recall,
        macro_f1: harmonic(precision, recall),
        mean_f1: mean(|m| m.f1),
    })
}

/// How strictly body text must agree for a unit to count as grouped right.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "threshold")]
pub enum BodyMatch {
    Exact,
    #[default]
    Normalized,
    /// Token-set Jaccard similarity of normalized bodies at least this value.
    TokenJaccard(f64),
}

/// Lowercased, punctuation stripped, whitespace collapsed.
pub fn normalize_body(text: &str) -> String {
    text.to_lowercase()
        .chars()
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .collect::<String>()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn normalize_handle(handle: &str) -> String {
    handle.trim().trim_start_matches('@').to_lowercase()
}

fn jaccard(a: &str, b: &str) -> f64 {
    let a: HashSet<&str> = a.split_whitespace().collect();
    let b: HashSet<&str> = b.split_whitespace().collect();
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    a.intersection(&b).count() as f64 / a.union(&b).count() as f64
}

pub fn bodies_match(predicted: &str, truth: &str, mode: BodyMatch) -> bool {
    match mode {
        BodyMatch::Exact => predicted == truth,
        BodyMatch::Normalized => normalize_body(predicted) == normalize_body(truth),
        BodyMatch::TokenJaccard(threshold) => {
            jaccard(&normalize_body(predicted), &normalize_body(truth)) >= threshold
        }
    }
}

/// Every unit, in order, has the annotated author, day and body.
pub fn grouping_correct(
    parse: &ScreenshotParse,
    ann: &Annotation,
    mode: BodyMatch,
) -> Result<bool, EvalError> {
    if parse.screenshot_id != ann.screenshot_id {
        return Err(EvalError::IdMismatch {
            parse: parse.screenshot_id.clone(),
            annotation: ann.screenshot_id.clone(),
        });
    }
    if parse.units.len() != ann.units.len() {
        return Ok(false);
    }
    Ok(parse.units.iter().zip(&ann.units).all(|(unit, truth)| {
        let author_ok = unit
            .author_handle()
            .is_some_and(|h| normalize_handle(h) == normalize_handle(&truth.author));
        let date_ok = unit.timestamp.as_ref().and_then(|t| t.date()) == truth.date;
        author_ok && date_ok && bodies_match(&unit.body, &truth.body, mode)
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupingAccuracy {
    pub correct: usize,
    pub total: usize,
    pub overall: f64,
    /// Keyed by true structure.
    pub per_class: BTreeMap<InternalStructure, f64>,
}

/// `outcomes` pairs each screenshot's true structure with its grouping verdict.
pub fn grouping_accuracy_from_outcomes(
    outcomes: &[(InternalStructure, bool)],
) -> Result<GroupingAccuracy, EvalError> {
    if outcomes.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let mut tallies: BTreeMap<InternalStructure, (usize, usize)> = BTreeMap::new();
    for &(class, ok) in outcomes {
        let t = tallies.entry(class).or_default();
        t.0 += ok as usize;
        t.1 += 1;
    }
    let correct = outcomes.iter().filter(|(_, ok)| *ok).count();
    Ok(GroupingAccuracy {
        correct,
        total: outcomes.len(),
        overall: ratio(correct, outcomes.len()),
        per_class: tallies
            .into_iter()
            .map(|(c, (ok, n))| (c, ratio(ok, n)))
            .collect(),
    })
}

pub fn grouping_accuracy(
    results: &[(ScreenshotParse, Annotation)],
    mode: BodyMatch,
) -> Result<GroupingAccuracy, EvalError> {
    let outcomes = results
        .iter()
        .map(|(p, a)| Ok((a.true_structure, grouping_correct(p, a, mode)?)))
        .collect::<Result<Vec<_>, EvalError>>()?;
    grouping_accuracy_from_outcomes(&outcomes)
}

/// One scored screenshot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalItem {
    pub screenshot_id: String,
    pub true_structure: InternalStructure,
    pub predicted: InternalStructure,
    pub grouping_correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub matrix: ConfusionMatrix,
    pub per_class: BTreeMap<InternalStructure, ClassMetrics>,
    #[serde(rename = "macro")]
    pub macro_avg: MacroMetrics,
    pub grouping_accuracy: f64,
    pub per_class_grouping: BTreeMap<InternalStructure, f64>,
    pub items: Vec<EvalItem>,
}

/// Items are folded in screenshot id order so the report does not depend on
/// the order they were scored in.
pub fn build_report(mut items: Vec<EvalItem>) -> Result<EvalReport, EvalError> {
    if items.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    items.sort_by(|a, b| a.screenshot_id.cmp(&b.screenshot_id));
    let matrix = confusion_matrix(items.iter().map(|i| (i.true_structure, i.predicted)));
    let per_class = per_class_metrics(&matrix);
    let macro_avg = macro_metrics(&per_class)?;
    let outcomes: Vec<_> = items
        .iter()
        .map(|i| (i.true_structure, i.grouping_correct))
        .collect();
    let grouping = grouping_accuracy_from_outcomes(&outcomes)?;
    Ok(EvalReport {
        matrix,
        per_class,
        macro_avg,
        grouping_accuracy: grouping.overall,
        per_class_grouping: grouping.per_class,
        items,
    })
}

/// Half-up rounding to two decimals.
pub fn round_half_up(x: f64) -> f64 {
    (x * 100.0 + 0.5 + 1e-9).floor() / 100.0
}

const TABLE_ORDER: [InternalStructure; 5] = [
    InternalStructure::PnAn,
    InternalStructure::PnA1,
    InternalStructure::P1An,
    InternalStructure::P1A1,
    InternalStructure::Indeterminate,
];

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Per-class rows for supported classes, then the macro row.
    pub fn render_table(&self) -> String {
        let mut out = format!("{:<22}{:>10}{:>8}{:>6}\n", "Category", "Precision", "Recall", "F1");
        let row = |out: &mut String, label: String, p: f64, r: f64, f: f64| {
            let _ = writeln!(
                out,
                "{label:<22}{:>10.2}{:>8.2}{:>6.2}",
                round_half_up(p),
                round_half_up(r),
                round_half_up(f)
            );
        };
        for class in TABLE_ORDER {
            if let Some(m) = self.per_class.get(&class).filter(|m| m.support > 0) {
                row(&mut out, format!("{class} (k={})", m.support), m.precision, m.recall, m.f1);
            }
        }
        let m = &self.macro_avg;
        row(
            &mut out,
            format!("Overall (k={})", self.matrix.total()),
            m.precision,
            m.recall,
            m.macro_f1,
        );
        let correct = self.items.iter().filter(|i| i.grouping_correct).count();
        let _ = writeln!(
            out,
            "Grouping accuracy: {:.4} ({correct}/{})",
            self.grouping_accuracy,
            self.items.len()
        );
        out
    }
}
