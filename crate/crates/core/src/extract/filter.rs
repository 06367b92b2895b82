use std::collections::HashSet;

use super::dates::TimestampMention;
use super::handles::HandleMention;
use super::wordlist::WordList;
use super::ExtractError;
use crate::ocr::OcrDocument;

/// Whitespace split, surrounding non-alphanumerics stripped, lowercased.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}

/// The line with `[offset, offset + len)` (in chars) blanked out.
pub(crate) fn without_span(
    doc: &OcrDocument,
    line_index: usize,
    char_offset: usize,
    char_len: usize,
) -> Result<String, ExtractError> {
    let out_of_range = || ExtractError::MentionOutOfRange {
        line_index,
        char_offset,
    };
    let line = doc.line(line_index).ok_or_else(out_of_range)?;
    let chars: Vec<char> = line.chars().collect();
    if char_offset + char_len > chars.len() {
        return Err(out_of_range());
    }
    let mut rest: String = chars[..char_offset].iter().collect();
    rest.push(' ');
    rest.extend(&chars[char_offset + char_len..]);
    Ok(rest)
}

/// True when no token of `text` is a common word, allowlisted chrome aside.
pub(crate) fn free_of_common_words(text: &str, wl: &WordList, allowlist: &HashSet<String>) -> bool {
    tokenize(text)
        .iter()
        .all(|t| allowlist.contains(t) || !wl.contains(t))
}

pub(crate) fn mark_dates(
    mut mentions: Vec<TimestampMention>,
    doc: &OcrDocument,
    wl: &WordList,
    allowlist: &HashSet<String>,
) -> Result<Vec<TimestampMention>, ExtractError> {
    for m in &mut mentions {
        let rest = without_span(doc, m.line_index, m.char_offset, m.char_len())?;
        m.meaningful = !m.is_relative() && free_of_common_words(&rest, wl, allowlist);
    }
    Ok(mentions)
}

pub(crate) fn mark_authors(
    mut mentions: Vec<HandleMention>,
    doc: &OcrDocument,
    wl: &WordList,
    allowlist: &HashSet<String>,
) -> Result<Vec<HandleMention>, ExtractError> {
    for m in &mut mentions {
        let rest = without_span(doc, m.line_index, m.char_offset, m.char_len())?;
        m.is_author = free_of_common_words(&rest, wl, allowlist);
    }
    Ok(mentions)
}
