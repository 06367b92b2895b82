//! Timestamp and author-handle extraction from OCR lines.
//!
//! Candidates are found by pattern, then split into post metadata and body
//! noise: a date or handle counts only when the rest of its line holds no
//! common word (chrome such as month names, "AM" or "Views" excepted).

mod config;
mod dates;
mod filter;
mod handles;
mod wordlist;

use std::collections::HashSet;
use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub use config::{DateFormat, ExtractorConfig, DEFAULT_ALLOWLIST};
pub use dates::{
    find_timestamp_mentions, resolve_year, DatePatterns, RelativeUnit, TimestampMention,
    TimestampValue,
};
pub use filter::tokenize;
pub use handles::{
    find_handle_mentions, find_handles_in_line, is_handle_char, HandleMention, MAX_HANDLE_LEN,
    MIN_HANDLE_LEN,
};
pub use wordlist::{WordList, BUNDLED_WORDLIST};

use crate::ocr::OcrDocument;

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("wordlist not found: {0}")]
    FileNotFound(PathBuf),
    #[error("wordlist has no usable entries")]
    EmptyWordlist,
    #[error("mention at line {line_index}, offset {char_offset} lies outside the document")]
    MentionOutOfRange {
        line_index: usize,
        char_offset: usize,
    },
    #[error("extractor config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn default_allowlist() -> HashSet<String> {
    DEFAULT_ALLOWLIST.iter().map(|s| s.to_string()).collect()
}

/// Sets `meaningful` on each mention using the default chrome allowlist.
/// Never adds, drops or reorders mentions.
pub fn filter_meaningful_dates(
    mentions: Vec<TimestampMention>,
    doc: &OcrDocument,
    wl: &WordList,
) -> Result<Vec<TimestampMention>, ExtractError> {
    filter::mark_dates(mentions, doc, wl, &default_allowlist())
}

/// Sets `is_author` on each mention using the default chrome allowlist.
pub fn filter_author_handles(
    mentions: Vec<HandleMention>,
    doc: &OcrDocument,
    wl: &WordList,
) -> Result<Vec<HandleMention>, ExtractError> {
    filter::mark_authors(mentions, doc, wl, &default_allowlist())
}

/// Filtered mentions for one document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    pub dates: Vec<TimestampMention>,
    pub handles: Vec<HandleMention>,
}

/// Wordlist, allowlist and date layouts bundled together. Immutable and
/// shareable across threads.
#[derive(Debug, Clone)]
pub struct MetadataExtractor {
    wordlist: WordList,
    allowlist: HashSet<String>,
    dates: DatePatterns,
}

impl Default for MetadataExtractor {
    fn default() -> Self {
        MetadataExtractor {
            wordlist: WordList::bundled(),
            allowlist: default_allowlist(),
            dates: DatePatterns::default(),
        }
    }
}

impl MetadataExtractor {
    pub fn new(wordlist: WordList, config: &ExtractorConfig) -> Result<Self, ExtractError> {
        Ok(MetadataExtractor {
            wordlist,
            allowlist: config.allowlist.iter().map(|w| w.to_lowercase()).collect(),
            dates: DatePatterns::new(config)?,
        })
    }

    pub fn wordlist(&self) -> &WordList {
        &self.wordlist
    }

    pub fn find_timestamp_mentions(&self, doc: &OcrDocument) -> Vec<TimestampMention> {
        self.dates.find(doc)
    }

    pub fn find_handle_mentions(&self, doc: &OcrDocument) -> Vec<HandleMention> {
        find_handle_mentions(doc)
    }

    pub fn filter_meaningful_dates(
        &self,
        mentions: Vec<TimestampMention>,
        doc: &OcrDocument,
    ) -> Result<Vec<TimestampMention>, ExtractError> {
        filter::mark_dates(mentions, doc, &self.wordlist, &self.allowlist)
    }

    pub fn filter_author_handles(
        &self,
        mentions: Vec<HandleMention>,
        doc: &OcrDocument,
    ) -> Result<Vec<HandleMention>, ExtractError> {
        filter::mark_authors(mentions, doc, &self.wordlist, &self.allowlist)
    }

    pub fn extract(&self, doc: &OcrDocument) -> Extraction {
        let dates = self.find_timestamp_mentions(doc);
        let handles = self.find_handle_mentions(doc);
        // Mentions come from `doc` itself, so they are always in range.
        Extraction {
            dates: self
                .filter_meaningful_dates(dates, doc)
                .expect("mentions found in doc"),
            handles: self
                .filter_author_handles(handles, doc)
                .expect("mentions found in doc"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ocr::OcrSource;
    use proptest::prelude::*;

    fn doc(lines: &[&str]) -> OcrDocument {
        OcrDocument::from_lines("t", lines, OcrSource::Sidecar { path: "t.txt".into() })
    }

    fn bundled() -> WordList {
        static WL: std::sync::LazyLock<WordList> = std::sync::LazyLock::new(WordList::bundled);
        WL.clone()
    }

    #[test]
    fn detail_line_is_meaningful() {
        let d = doc(&["9:02 AM · Jun 3, 2024 · 1.2M Views"]);
        let wl = bundled();
        assert!(!wl.contains("1.2m"));
        let marked = filter_meaningful_dates(find_timestamp_mentions(&d), &d, &wl).unwrap();
        assert_eq!(marked.len(), 1);
        assert!(marked[0].meaningful);
    }

    #[test]
    fn body_date_is_inessential() {
        // "June 2020" has no day and matches no layout, so the body line
        // carries a full date here.
        let line = "back on June 3, 2020 we said this would happen";
        let wl = bundled();
        for w in ["back", "on", "we", "said", "this", "would", "happen"] {
            assert!(wl.contains(w), "{w} should be common");
        }
        let d = doc(&[line]);
        let marked = filter_meaningful_dates(find_timestamp_mentions(&d), &d, &wl).unwrap();
        assert_eq!(marked.len(), 1);
        assert!(!marked[0].meaningful);
    }

    #[test]
    fn hand_built_body_mention_is_inessential() {
        let d = doc(&["back in June 2020 we said this would happen"]);
        let m = TimestampMention {
            raw_text: "June 2020".into(),
            value: TimestampValue::Absolute {
                date: chrono::NaiveDate::from_ymd_opt(2020, 6, 1).unwrap(),
                time: None,
            },
            line_index: 0,
            char_offset: 8,
            meaningful: false,
        };
        let marked = filter_meaningful_dates(vec![m], &d, &bundled()).unwrap();
        assert!(!marked[0].meaningful);
    }

    #[test]
    fn empty_inputs() {
        let d = doc(&["anything"]);
        assert!(filter_meaningful_dates(vec![], &d, &bundled()).unwrap().is_empty());
        assert!(filter_author_handles(vec![], &d, &bundled()).unwrap().is_empty());
    }

    #[test]
    fn header_line_author() {
        let wl = bundled();
        assert!(!wl.contains("elon") && !wl.contains("musk"));
        let d = doc(&["Elon Musk @elonmusk · Jun 3"]);
        let marked = filter_author_handles(find_handle_mentions(&d), &d, &wl).unwrap();
        assert_eq!(marked.len(), 1);
        assert!(marked[0].is_author);
    }

    #[test]
    fn body_mention_is_not_author() {
        let wl = bundled();
        for w in ["thanks", "for", "the", "support"] {
            assert!(wl.contains(w));
        }
        let d = doc(&["thanks @user9999 for the support"]);
        let marked = filter_author_handles(find_handle_mentions(&d), &d, &wl).unwrap();
        assert_eq!(marked.len(), 1);
        assert!(!marked[0].is_author);
    }

    #[test]
    fn relative_never_meaningful() {
        let d = doc(&["Zed Quill @zed_quill · 2h"]);
        let marked = filter_meaningful_dates(find_timestamp_mentions(&d), &d, &bundled()).unwrap();
        assert_eq!(marked.len(), 1);
        assert!(!marked[0].meaningful);
    }

    #[test]
    fn out_of_range_mentions() {
        let d = doc(&["short"]);
        let m = HandleMention {
            handle: "someone".into(),
            line_index: 4,
            char_offset: 0,
            is_author: false,
        };
        assert!(matches!(
            filter_author_handles(vec![m.clone()], &d, &bundled()),
            Err(ExtractError::MentionOutOfRange { line_index: 4, .. })
        ));
        let past_end = HandleMention { line_index: 0, char_offset: 3, ..m };
        assert!(filter_author_handles(vec![past_end], &d, &bundled()).is_err());
    }

    #[test]
    fn custom_allowlist_changes_verdict() {
        let wl = WordList::from_words(["views", "the"]);
        let d = doc(&["Jun 3, 2024 · 10 Views"]);
        let none = ExtractorConfig {
            allowlist: vec![],
            ..Default::default()
        };
        let strict = MetadataExtractor::new(wl.clone(), &none).unwrap();
        let lenient = MetadataExtractor::new(wl, &ExtractorConfig::default()).unwrap();
        assert!(!strict.extract(&d).dates[0].meaningful);
        assert!(lenient.extract(&d).dates[0].meaningful);
    }

    fn line_strategy() -> impl Strategy<Value = String> {
        let words = prop::sample::select(vec![
            "the", "of", "and", "Jun", "3,", "2024", "@alice_01", "@bob_0234", "Views", "Zed",
            "Quill", "·", "9:02", "AM", "thanks", "2021-04-05", "@xy", "people", "07/04/2023",
        ]);
        prop::collection::vec(words, 0..10).prop_map(|w| w.join(" "))
    }

    proptest! {
        #[test]
        fn filters_only_set_flags(lines in prop::collection::vec(line_strategy(), 1..6)) {
            let d = doc(&lines.iter().map(String::as_str).collect::<Vec<_>>());
            let wl = bundled();
            let dates = find_timestamp_mentions(&d);
            let handles = find_handle_mentions(&d);
            let fd = filter_meaningful_dates(dates.clone(), &d, &wl).unwrap();
            let fh = filter_author_handles(handles.clone(), &d, &wl).unwrap();
            prop_assert_eq!(fd.len(), dates.len());
            prop_assert_eq!(fh.len(), handles.len());
            for (a, b) in dates.iter().zip(&fd) {
                prop_assert_eq!(&a.raw_text, &b.raw_text);
                prop_assert_eq!((a.line_index, a.char_offset), (b.line_index, b.char_offset));
            }
            for (a, b) in handles.iter().zip(&fh) {
                prop_assert_eq!((&a.handle, a.line_index, a.char_offset), (&b.handle, b.line_index, b.char_offset));
            }
            let keys: Vec<_> = fd.iter().map(|m| (m.line_index, m.char_offset)).collect();
            let mut sorted = keys.clone();
            sorted.sort();
            prop_assert_eq!(keys, sorted);
        }

        #[test]
        fn filtering_is_monotone_in_wordlist(
            lines in prop::collection::vec(line_strategy(), 1..6),
            extra in prop::collection::vec("[a-z]{2,6}", 0..5),
            include in prop::collection::vec(any::<bool>(), 8),
        ) {
            let d = doc(&lines.iter().map(String::as_str).collect::<Vec<_>>());
            let base_words = ["the", "of", "and", "thanks", "people", "zed", "quill", "views"];
            let small: Vec<&str> = base_words.iter().zip(&include).filter(|(_, k)| **k).map(|(w, _)| *w).collect();
            let small_wl = WordList::from_words(&small);
            let large_wl = WordList::from_words(small.iter().copied().chain(extra.iter().map(String::as_str)).chain(["zed"]));
            let dates_small = filter_meaningful_dates(find_timestamp_mentions(&d), &d, &small_wl).unwrap();
            let dates_large = filter_meaningful_dates(find_timestamp_mentions(&d), &d, &large_wl).unwrap();
            for (s, l) in dates_small.iter().zip(&dates_large) {
                prop_assert!(s.meaningful || !l.meaningful);
            }
            let h_small = filter_author_handles(find_handle_mentions(&d), &d, &small_wl).unwrap();
            let h_large = filter_author_handles(find_handle_mentions(&d), &d, &large_wl).unwrap();
            for (s, l) in h_small.iter().zip(&h_large) {
                prop_assert!(s.is_author || !l.is_author);
            }
        }
    }
}
