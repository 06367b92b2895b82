use std::collections::HashSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use super::config::DEFAULT_ALLOWLIST;
use super::ExtractError;

/// Ten thousand frequent English words, most frequent first.
pub const BUNDLED_WORDLIST: &str = include_str!("../../data/wordlist-en-10k.txt");

/// Common words that disqualify a line from carrying post metadata.
///
/// Entries are lowercase and contain no whitespace. Words on the chrome
/// allowlist are never members.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordList {
    words: HashSet<String>,
    source_path: Option<PathBuf>,
}

impl WordList {
    /// Loads one token per line, keeping the first `top_n` entries when given
    /// and dropping the default allowlist.
    pub fn load(path: &Path, top_n: Option<usize>) -> Result<Self, ExtractError> {
        Self::load_with_allowlist(path, top_n, DEFAULT_ALLOWLIST)
    }

    pub fn load_with_allowlist<S: AsRef<str>>(
        path: &Path,
        top_n: Option<usize>,
        allowlist: &[S],
    ) -> Result<Self, ExtractError> {
        let text = fs::read_to_string(path).map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => ExtractError::FileNotFound(path.to_path_buf()),
            _ => ExtractError::Io(e),
        })?;
        let mut list = Self::parse(&text, top_n, allowlist)?;
        list.source_path = Some(path.to_path_buf());
        Ok(list)
    }

    /// The wordlist shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_WORDLIST, None, DEFAULT_ALLOWLIST).expect("bundled wordlist is valid")
    }

    pub fn parse<S: AsRef<str>>(
        text: &str,
        top_n: Option<usize>,
        allowlist: &[S],
    ) -> Result<Self, ExtractError> {
        let entries = text
            .lines()
            .map(|l| l.trim().to_lowercase())
            .filter(|l| !l.is_empty() && !l.contains(char::is_whitespace));
        let entries: Vec<String> = match top_n {
            Some(n) => entries.take(n).collect(),
            None => entries.collect(),
        };
        let exempt: HashSet<String> = allowlist
            .iter()
            .map(|w| w.as_ref().to_lowercase())
            .collect();
        let words: HashSet<String> = entries.into_iter().filter(|w| !exempt.contains(w)).collect();
        if words.is_empty() {
            return Err(ExtractError::EmptyWordlist);
        }
        Ok(WordList {
            words,
            source_path: None,
        })
    }

    /// Builds a list directly from tokens; no allowlist is applied.
    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        WordList {
            words: words
                .into_iter()
                .map(|w| w.as_ref().trim().to_lowercase())
                .filter(|w| !w.is_empty() && !w.contains(char::is_whitespace))
                .collect(),
            source_path: None,
        }
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn size(&self) -> usize {
        self.words.len()
    }

    pub fn source_path(&self) -> Option<&Path> {
        self.source_path.as_deref()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}
