//! Search queries for locating a post's original.
//!
//! Queries carry only the first 50 visible characters of the post body; short
//! prefixes find originals more reliably than full text. Queries are emitted
//! as data and never executed here.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_segmentation::UnicodeSegmentation;

use crate::group::{collapse_whitespace, PostUnit};
use crate::ocr::OcrDocument;

/// Longest text prefix, in grapheme clusters.
pub const PREFIX_LEN: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum QueryTarget {
    GeneralWeb,
    FactCheck,
    WebArchive,
}

impl QueryTarget {
    pub const ALL: [QueryTarget; 3] = [
        QueryTarget::GeneralWeb,
        QueryTarget::FactCheck,
        QueryTarget::WebArchive,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            QueryTarget::GeneralWeb => "GeneralWeb",
            QueryTarget::FactCheck => "FactCheck",
            QueryTarget::WebArchive => "WebArchive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub target: QueryTarget,
    pub text_prefix: String,
    pub handle: Option<String>,
    pub date: Option<NaiveDate>,
}

impl QuerySpec {
    /// `target<TAB>handle<TAB>date<TAB>text_prefix`; absent fields are empty.
    pub fn to_tsv_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}",
            self.target.as_str(),
            self.handle.as_deref().unwrap_or(""),
            self.date.map(|d| d.to_string()).unwrap_or_default(),
            self.text_prefix
        )
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QueryError {
    #[error("post has no body text to query")]
    EmptyBody,
}

/// Body text of `unit`: its span minus author, timestamp and display-name
/// lines, joined with single spaces.
pub fn unit_body_text(unit: &PostUnit, doc: &OcrDocument) -> String {
    let text = unit
        .span
        .lines()
        .filter(|l| !unit.metadata_lines.contains(l))
        .filter_map(|l| doc.line(l))
        .collect::<Vec<_>>()
        .join(" ");
    collapse_whitespace(&text)
}

/// The first `max` grapheme clusters of `text`.
pub fn grapheme_prefix(text: &str, max: usize) -> &str {
    match text.grapheme_indices(true).nth(max) {
        Some((byte, _)) => &text[..byte],
        None => text,
    }
}

pub fn build_queries(unit: &PostUnit, doc: &OcrDocument) -> Result<Vec<QuerySpec>, QueryError> {
    let body = unit_body_text(unit, doc);
    if body.is_empty() {
        return Err(QueryError::EmptyBody);
    }
    let text_prefix = grapheme_prefix(&body, PREFIX_LEN).to_owned();
    let handle = unit.author.as_ref().map(|a| a.handle.clone());
    let date = unit.timestamp.as_ref().and_then(|t| t.date());
    Ok(QueryTarget::ALL
        .into_iter()
        .map(|target| QuerySpec {
            target,
            text_prefix: text_prefix.clone(),
            handle: handle.clone(),
            date,
        })
        .collect())
}
