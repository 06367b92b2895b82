use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{check_version, read_jsonl, write_jsonl, CorpusError, SCHEMA_VERSION};
use crate::classify::{InternalStructure, PostTypeLabel};
use crate::group::ScreenshotParse;
use crate::ocr::{OcrDocument, OcrSource};
use crate::pipeline::Analysis;

/// Everything `extract` learned about one screenshot, with its OCR lines so
/// later steps need not rerun OCR.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParseRecord {
    pub schema_version: u32,
    pub screenshot_id: String,
    pub source: OcrSource,
    pub lines: Vec<String>,
    pub structure: InternalStructure,
    pub date_free: bool,
    pub post_types: BTreeSet<PostTypeLabel>,
    pub parse: ScreenshotParse,
}

impl ParseRecord {
    pub fn new(doc: &OcrDocument, analysis: &Analysis) -> Self {
        ParseRecord {
            schema_version: SCHEMA_VERSION,
            screenshot_id: doc.screenshot_id().to_owned(),
            source: doc.source().clone(),
            lines: doc.texts().map(str::to_owned).collect(),
            structure: analysis.classification.structure,
            date_free: analysis.classification.date_free,
            post_types: analysis.post_types.clone(),
            parse: analysis.parse.clone(),
        }
    }

    pub fn document(&self) -> OcrDocument {
        OcrDocument::from_lines(self.screenshot_id.clone(), &self.lines, self.source.clone())
    }
}

fn validate(r: ParseRecord) -> Result<ParseRecord, String> {
    check_version(r.schema_version)?;
    if r.parse.screenshot_id != r.screenshot_id {
        return Err(format!(
            "{}: embedded parse is for `{}`",
            r.screenshot_id, r.parse.screenshot_id
        ));
    }
    if let Some(u) = r.parse.units.iter().find(|u| u.span.last_line >= r.lines.len()) {
        return Err(format!(
            "{}: unit span ends at line {} past the document",
            r.screenshot_id, u.span.last_line
        ));
    }
    Ok(r)
}

pub fn load_parses(path: &Path) -> Result<Vec<ParseRecord>, CorpusError> {
    read_jsonl(path, validate)
}

pub fn save_parses(records: &[ParseRecord], path: &Path) -> Result<(), CorpusError> {
    write_jsonl(path, records)
}
