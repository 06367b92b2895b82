//! Post-count by author-count structure labels and the post types each admits.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::group::ScreenshotParse;

/// Internal structure of a screenshot: how many posts, by how many authors.
///
/// Variant order is the canonical class order used in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum InternalStructure {
    P1A1,
    P1An,
    PnA1,
    PnAn,
    Indeterminate,
}

impl InternalStructure {
    pub const ALL: [InternalStructure; 5] = [
        InternalStructure::P1A1,
        InternalStructure::P1An,
        InternalStructure::PnA1,
        InternalStructure::PnAn,
        InternalStructure::Indeterminate,
    ];

    pub fn from_counts(posts: usize, authors: usize) -> Self {
        match (posts, authors) {
            (0, _) | (_, 0) => InternalStructure::Indeterminate,
            (1, 1) => InternalStructure::P1A1,
            (1, _) => InternalStructure::P1An,
            (_, 1) => InternalStructure::PnA1,
            _ => InternalStructure::PnAn,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            InternalStructure::P1A1 => "P1A1",
            InternalStructure::P1An => "P1An",
            InternalStructure::PnA1 => "PnA1",
            InternalStructure::PnAn => "PnAn",
            InternalStructure::Indeterminate => "Indeterminate",
        }
    }
}

impl fmt::Display for InternalStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InternalStructure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        InternalStructure::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown structure `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PostTypeLabel {
    Status,
    Reply,
    CoTweet,
    CroppedSnapshot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub structure: InternalStructure,
    /// Post count came from units because no meaningful date survived.
    pub date_free: bool,
}

/// Posts are counted by meaningful dates. When none survived but authors did,
/// the unit count stands in and the result is marked date-free.
pub fn classify(parse: &ScreenshotParse) -> Classification {
    let authors = parse.author_count_distinct;
    let date_free = parse.date_count == 0 && authors > 0;
    let posts = if date_free {
        parse.units.len()
    } else {
        parse.date_count
    };
    Classification {
        structure: InternalStructure::from_counts(posts, authors),
        date_free,
    }
}

pub fn classify_structure(parse: &ScreenshotParse) -> InternalStructure {
    classify(parse).structure
}

pub fn suggest_post_types(structure: InternalStructure) -> BTreeSet<PostTypeLabel> {
    use PostTypeLabel::*;
    match structure {
        InternalStructure::P1A1 => [Status].into(),
        InternalStructure::PnA1 | InternalStructure::PnAn => [Reply, CoTweet].into(),
        InternalStructure::P1An => BTreeSet::new(),
        InternalStructure::Indeterminate => [CroppedSnapshot].into(),
    }
}
