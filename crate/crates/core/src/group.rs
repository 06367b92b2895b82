//! Splitting one screenshot's lines into posts.
//!
//! Author lines are the boundaries: a post starts at its author's line and
//! runs to the line before the next author. The first post also owns every
//! line above its author, so the posts always partition the document.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::extract::{tokenize, HandleMention, TimestampMention};
use crate::ocr::OcrDocument;

/// Inclusive range of line indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineSpan {
    pub first_line: usize,
    pub last_line: usize,
}

impl LineSpan {
    pub fn contains(&self, line: usize) -> bool {
        (self.first_line..=self.last_line).contains(&line)
    }

    pub fn lines(&self) -> impl Iterator<Item = usize> {
        self.first_line..=self.last_line
    }
}

/// One post inside a screenshot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostUnit {
    /// `None` only for the single unit of a document without authors.
    pub author: Option<HandleMention>,
    /// First meaningful date inside the span.
    pub timestamp: Option<TimestampMention>,
    /// Further meaningful dates that fell in the same span.
    pub extra_dates: Vec<TimestampMention>,
    /// Every line of the span.
    pub body_lines: Vec<usize>,
    pub span: LineSpan,
    /// Display-name line directly above a handle-only author line. For every
    /// post but the first this sits at the end of the previous post's span.
    pub display_name_line: Option<usize>,
    /// Lines of the span that hold post metadata rather than body text.
    pub metadata_lines: Vec<usize>,
    /// Body text: span lines minus metadata lines, whitespace collapsed.
    pub body: String,
}

impl PostUnit {
    pub fn author_handle(&self) -> Option<&str> {
        self.author.as_ref().map(|a| a.handle.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ParseFlag {
    CountsMismatch,
    NoAuthors,
    NoDates,
    EmptyDocument,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreenshotParse {
    pub screenshot_id: String,
    pub units: Vec<PostUnit>,
    /// Number of meaningful dates in the document.
    pub date_count: usize,
    /// Distinct author handles, compared case-insensitively.
    pub author_count_distinct: usize,
    pub flags: BTreeSet<ParseFlag>,
}

impl ScreenshotParse {
    pub fn has_flag(&self, flag: ParseFlag) -> bool {
        self.flags.contains(&flag)
    }
}

pub fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn is_blank(doc: &OcrDocument, line: usize) -> bool {
    doc.line(line).is_none_or(|t| t.trim().is_empty())
}

/// True when the author's line holds nothing but the handle and separators.
fn handle_only_line(doc: &OcrDocument, author: &HandleMention) -> bool {
    let Some(text) = doc.line(author.line_index) else {
        return false;
    };
    let rest: String = text
        .chars()
        .enumerate()
        .filter(|(i, _)| !(author.char_offset..author.char_offset + author.char_len()).contains(i))
        .map(|(_, c)| c)
        .collect();
    tokenize(&rest).is_empty()
}

pub fn group_posts(
    doc: &OcrDocument,
    handles: &[HandleMention],
    dates: &[TimestampMention],
) -> ScreenshotParse {
    let line_count = doc.len();

    let mut authors: Vec<&HandleMention> = handles
        .iter()
        .filter(|h| h.is_author && h.line_index < line_count)
        .collect();
    authors.sort_by_key(|h| (h.line_index, h.char_offset));
    // One boundary per line: later handles on an author line stay mentions.
    authors.dedup_by_key(|h| h.line_index);

    let mut meaningful: Vec<&TimestampMention> = dates
        .iter()
        .filter(|d| d.meaningful && d.date().is_some() && d.line_index < line_count)
        .collect();
    meaningful.sort_by_key(|d| (d.line_index, d.char_offset));
    let date_lines: HashSet<usize> = meaningful.iter().map(|d| d.line_index).collect();

    let author_count_distinct = authors
        .iter()
        .map(|a| a.handle.to_ascii_lowercase())
        .collect::<HashSet<_>>()
        .len();

    let mut flags = BTreeSet::new();
    if doc.is_empty() {
        flags.insert(ParseFlag::EmptyDocument);
    }
    if authors.is_empty() {
        flags.insert(ParseFlag::NoAuthors);
    }
    if meaningful.is_empty() {
        flags.insert(ParseFlag::NoDates);
    }
    if meaningful.len() != authors.len() {
        flags.insert(ParseFlag::CountsMismatch);
    }

    let spans: Vec<LineSpan> = if line_count == 0 {
        Vec::new()
    } else if authors.is_empty() {
        vec![LineSpan {
            first_line: 0,
            last_line: line_count - 1,
        }]
    } else {
        (0..authors.len())
            .map(|i| LineSpan {
                first_line: if i == 0 { 0 } else { authors[i].line_index },
                last_line: authors
                    .get(i + 1)
                    .map_or(line_count - 1, |next| next.line_index - 1),
            })
            .collect()
    };

    let display_names: Vec<Option<usize>> = authors
        .iter()
        .enumerate()
        .map(|(i, author)| {
            let line = author.line_index.checked_sub(1)?;
            let floor = if i == 0 { 0 } else { authors[i - 1].line_index + 1 };
            let usable = line >= floor
                && handle_only_line(doc, author)
                && !is_blank(doc, line)
                && !date_lines.contains(&line);
            usable.then_some(line)
        })
        .collect();

    let units = spans
        .iter()
        .enumerate()
        .map(|(i, &span)| {
            let author = authors.get(i).map(|a| (*a).clone());
            let mut own_dates = meaningful
                .iter()
                .filter(|d| span.contains(d.line_index))
                .map(|d| (*d).clone());
            let timestamp = own_dates.next();
            let extra_dates: Vec<TimestampMention> = own_dates.collect();

            let display_name_line = display_names.get(i).copied().flatten();
            let next_display_name = display_names.get(i + 1).copied().flatten();
            let metadata_lines: BTreeSet<usize> = author
                .as_ref()
                .map(|a| a.line_index)
                .into_iter()
                .chain(timestamp.as_ref().map(|t| t.line_index))
                .chain(display_name_line)
                .chain(next_display_name)
                .filter(|l| span.contains(*l))
                .collect();

            let body = collapse_whitespace(
                &span
                    .lines()
                    .filter(|l| !metadata_lines.contains(l))
                    .filter_map(|l| doc.line(l))
                    .collect::<Vec<_>>()
                    .join(" "),
            );
            PostUnit {
                author,
                timestamp,
                extra_dates,
                body_lines: span.lines().collect(),
                span,
                display_name_line,
                metadata_lines: metadata_lines.into_iter().collect(),
                body,
            }
        })
        .collect();

    ScreenshotParse {
        screenshot_id: doc.screenshot_id().to_owned(),
        units,
        date_count: meaningful.len(),
        author_count_distinct,
        flags,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extract::MetadataExtractor;
    use crate::ocr::OcrSource;
    use proptest::prelude::*;

    fn extractor() -> &'static MetadataExtractor {
        static EX: std::sync::LazyLock<MetadataExtractor> = std::sync::LazyLock::new(MetadataExtractor::default);
        &EX
    }

    fn doc(lines: &[&str]) -> OcrDocument {
        OcrDocument::from_lines("g", lines, OcrSource::Sidecar { path: "g.txt".into() })
    }

    fn parse(lines: &[&str]) -> ScreenshotParse {
        let d = doc(lines);
        let ex = extractor().extract(&d);
        group_posts(&d, &ex.handles, &ex.dates)
    }

    fn spans(p: &ScreenshotParse) -> Vec<(usize, usize)> {
        p.units.iter().map(|u| (u.span.first_line, u.span.last_line)).collect()
    }

    #[test]
    fn three_post_thread() {
        let p = parse(&[
            "Elon Musk",
            "@elonmusk",
            "The only way to make this work is with more people",
            "9:02 AM · May 13, 2020 · 3K Views",
            "",
            "Yann LeCun",
            "@ylecun",
            "I think you are not right about this one",
            "10:15 AM · May 13, 2020 · 900 Views",
            "",
            "Elon Musk",
            "@elonmusk",
            "You know nothing about it",
            "11:40 AM · May 13, 2020 · 12K Views",
        ]);
        assert_eq!(spans(&p), vec![(0, 5), (6, 10), (11, 13)]);
        let authors: Vec<_> = p.units.iter().map(|u| u.author_handle().unwrap()).collect();
        assert_eq!(authors, vec!["elonmusk", "ylecun", "elonmusk"]);
        assert_eq!(p.date_count, 3);
        assert_eq!(p.author_count_distinct, 2);
        assert!(p.flags.is_empty());
        assert_eq!(p.units[0].body, "The only way to make this work is with more people");
        assert_eq!(p.units[1].body, "I think you are not right about this one");
        assert_eq!(p.units[2].body, "You know nothing about it");
        assert_eq!(p.units[1].display_name_line, Some(5));
        assert_eq!(p.units[0].metadata_lines, vec![0, 1, 3, 5]);
    }

    #[test]
    fn single_post() {
        let p = parse(&[
            "Zed Quill",
            "@zed_quill",
            "what a day it has been",
            "for all of us",
            "9:02 AM · Jun 3, 2024 · 10 Views",
            "",
        ]);
        // Trailing blank lines are not part of the document.
        let p6 = parse(&[
            "Zed Quill",
            "@zed_quill",
            "what a day it has been",
            "for all of us",
            "9:02 AM · Jun 3, 2024 · 10 Views",
            "they said",
        ]);
        assert_eq!(spans(&p), vec![(0, 4)]);
        assert_eq!(spans(&p6), vec![(0, 5)]);
        assert!(p6.flags.is_empty());
        assert_eq!(
            p6.units[0].timestamp.as_ref().unwrap().date(),
            chrono::NaiveDate::from_ymd_opt(2024, 6, 3)
        );
    }

    #[test]
    fn two_authors_one_date() {
        let p = parse(&[
            "Zed Quill",
            "@zed_quill",
            "this is the first post",
            "and it has two lines",
            "9:02 AM · Jun 3, 2024",
            "",
            "Oona Brix",
            "@oona_brix",
            "this is the second one",
            "with no date at all",
        ]);
        assert_eq!(spans(&p), vec![(0, 6), (7, 9)]);
        assert!(p.has_flag(ParseFlag::CountsMismatch));
        assert!(p.units[0].timestamp.is_some());
        assert!(p.units[1].timestamp.is_none());
        assert_eq!(p.units[1].body, "this is the second one with no date at all");
    }

    #[test]
    fn degenerate_documents() {
        let empty = parse(&[]);
        assert!(empty.units.is_empty());
        assert!(empty.has_flag(ParseFlag::EmptyDocument));
        assert!(empty.has_flag(ParseFlag::NoAuthors));
        assert!(empty.has_flag(ParseFlag::NoDates));

        let no_authors = parse(&["just some text", "Jun 3, 2024"]);
        assert_eq!(spans(&no_authors), vec![(0, 1)]);
        assert!(no_authors.units[0].author.is_none());
        assert!(no_authors.has_flag(ParseFlag::NoAuthors));
        assert!(!no_authors.has_flag(ParseFlag::NoDates));
        assert_eq!(no_authors.date_count, 1);
    }

    #[test]
    fn second_handle_on_author_line_is_not_a_boundary() {
        let p = parse(&["@zed_quill @oona_brix", "hello there", "Jun 3, 2024"]);
        assert_eq!(p.units.len(), 1);
        assert_eq!(p.author_count_distinct, 1);
    }

    #[test]
    fn case_insensitive_author_count() {
        let p = parse(&["@Zed_Quill", "one", "@zed_quill", "two"]);
        assert_eq!(p.units.len(), 2);
        assert_eq!(p.author_count_distinct, 1);
    }

    #[derive(Debug, Clone)]
    enum Kind {
        Author(usize),
        Date(u32),
        Body(usize),
        Blank,
        Name,
    }

    fn render(kind: &Kind) -> String {
        const HANDLES: [&str; 3] = ["@zed_quill", "@oona_brix", "@Zed_Quill"];
        const BODIES: [&str; 3] = ["the people have spoken", "thanks @mira_kos for this", "back on Jun 3, 2020 we said it"];
        match kind {
            Kind::Author(i) => HANDLES[*i % 3].to_owned(),
            Kind::Date(d) => format!("9:02 AM · Jan {d}, 2024"),
            Kind::Body(i) => BODIES[*i % 3].to_owned(),
            Kind::Blank => String::new(),
            Kind::Name => "Zed Quill".to_owned(),
        }
    }

    fn kinds() -> impl Strategy<Value = Vec<Kind>> {
        let kind = prop_oneof![
            (0usize..3).prop_map(Kind::Author),
            (1u32..28).prop_map(Kind::Date),
            (0usize..3).prop_map(Kind::Body),
            Just(Kind::Blank),
            Just(Kind::Name),
        ];
        prop::collection::vec(kind, 0..25)
    }

    proptest! {
        #[test]
        fn units_partition_lines(ks in kinds()) {
            let lines: Vec<String> = ks.iter().map(render).collect();
            let d = doc(&lines.iter().map(String::as_str).collect::<Vec<_>>());
            let ex = extractor().extract(&d);
            let p = group_posts(&d, &ex.handles, &ex.dates);
            let authors = ex.handles.iter().filter(|h| h.is_author).count();
            if d.is_empty() {
                prop_assert!(p.units.is_empty());
            } else if authors == 0 {
                prop_assert_eq!(p.units.len(), 1);
            } else {
                prop_assert_eq!(p.units.len(), authors);
            }
            let covered: Vec<usize> = p.units.iter().flat_map(|u| u.span.lines()).collect();
            prop_assert_eq!(covered, (0..d.len()).collect::<Vec<_>>());
            for u in &p.units {
                prop_assert!(u.span.first_line <= u.span.last_line);
                if let Some(a) = &u.author { prop_assert!(u.span.contains(a.line_index)); }
            }
            let meaningful = ex.dates.iter().filter(|m| m.meaningful).count();
            let assigned: usize = p.units.iter().map(|u| u.timestamp.iter().count() + u.extra_dates.len()).sum();
            prop_assert_eq!(assigned, meaningful);
            prop_assert_eq!(p.date_count, meaningful);
        }

        #[test]
        fn supply_order_does_not_matter(ks in kinds(), seed in any::<u64>()) {
            let lines: Vec<String> = ks.iter().map(render).collect();
            let d = doc(&lines.iter().map(String::as_str).collect::<Vec<_>>());
            let ex = extractor().extract(&d);
            let mut handles = ex.handles.clone();
            let mut dates = ex.dates.clone();
            let k = (seed as usize) % (handles.len().max(1));
            handles.rotate_left(k);
            dates.reverse();
            prop_assert_eq!(group_posts(&d, &ex.handles, &ex.dates), group_posts(&d, &handles, &dates));
        }

        #[test]
        fn appending_below_last_author_touches_only_last_unit(ks in kinds(), tail in prop::collection::vec((0usize..3).prop_map(Kind::Body), 1..4)) {
            let lines: Vec<String> = ks.iter().map(render).collect();
            let d = doc(&lines.iter().map(String::as_str).collect::<Vec<_>>());
            let ex = extractor().extract(&d);
            prop_assume!(ex.handles.iter().any(|h| h.is_author));
            let before = group_posts(&d, &ex.handles, &ex.dates);
            let mut longer = lines.clone();
            longer.extend(tail.iter().map(render));
            let d2 = doc(&longer.iter().map(String::as_str).collect::<Vec<_>>());
            let ex2 = extractor().extract(&d2);
            let after = group_posts(&d2, &ex2.handles, &ex2.dates);
            prop_assert_eq!(before.units.len(), after.units.len());
            let n = before.units.len();
            prop_assert_eq!(&before.units[..n - 1], &after.units[..n - 1]);
        }
    }
}
