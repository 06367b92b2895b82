use serde::{Deserialize, Serialize};

use crate::ocr::OcrDocument;

pub const MIN_HANDLE_LEN: usize = 4;
pub const MAX_HANDLE_LEN: usize = 15;

/// An `@handle` seen in the OCR text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HandleMention {
    /// Without the leading `@`, case preserved.
    pub handle: String,
    pub line_index: usize,
    /// Char offset of the `@`.
    pub char_offset: usize,
    pub is_author: bool,
}

impl HandleMention {
    /// Chars covered in the line, including the `@`.
    pub fn char_len(&self) -> usize {
        self.handle.chars().count() + 1
    }

    pub fn same_account(&self, other: &str) -> bool {
        self.handle
            .eq_ignore_ascii_case(other.strip_prefix('@').unwrap_or(other))
    }
}

pub fn is_handle_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// `@` at line start or after whitespace, followed by a run of 4-15 handle
/// characters. Longer runs are rejected whole, never truncated.
pub fn find_handles_in_line(line_index: usize, text: &str) -> Vec<HandleMention> {
    let chars: Vec<char> = text.chars().collect();
    let mut found = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let at_boundary = i == 0 || chars[i - 1].is_whitespace();
        if chars[i] != '@' || !at_boundary {
            i += 1;
            continue;
        }
        let run = chars[i + 1..]
            .iter()
            .take_while(|c| is_handle_char(**c))
            .count();
        if (MIN_HANDLE_LEN..=MAX_HANDLE_LEN).contains(&run) {
            found.push(HandleMention {
                handle: chars[i + 1..i + 1 + run].iter().collect(),
                line_index,
                char_offset: i,
                is_author: false,
            });
        }
        i += 1 + run;
    }
    found
}

pub fn find_handle_mentions(doc: &OcrDocument) -> Vec<HandleMention> {
    doc.lines()
        .iter()
        .flat_map(|l| find_handles_in_line(l.index, &l.text))
        .collect()
}
