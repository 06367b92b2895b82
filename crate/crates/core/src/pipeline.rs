//! One screenshot through extraction, grouping and classification.

use std::collections::BTreeSet;

use crate::classify::{classify, suggest_post_types, Classification, PostTypeLabel};
use crate::extract::{Extraction, MetadataExtractor};
use crate::group::{group_posts, ScreenshotParse};
use crate::ocr::OcrDocument;

#[derive(Debug, Clone)]
pub struct Analysis {
    pub extraction: Extraction,
    pub parse: ScreenshotParse,
    pub classification: Classification,
    pub post_types: BTreeSet<PostTypeLabel>,
}

pub fn analyze(extractor: &MetadataExtractor, doc: &OcrDocument) -> Analysis {
    let extraction = extractor.extract(doc);
    let parse = group_posts(doc, &extraction.handles, &extraction.dates);
    let classification = classify(&parse);
    Analysis {
        post_types: suggest_post_types(classification.structure),
        extraction,
        parse,
        classification,
    }
}
