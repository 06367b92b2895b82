use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{check_version, read_jsonl, write_jsonl, CorpusError, SCHEMA_VERSION};
use crate::classify::InternalStructure;
use crate::eval::{normalize_handle, AnnotatedUnit, Annotation};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnnotationRecord {
    schema_version: u32,
    screenshot_id: String,
    true_structure: InternalStructure,
    units: Vec<AnnotatedUnit>,
}

fn into_annotation(r: AnnotationRecord) -> Result<Annotation, String> {
    check_version(r.schema_version)?;
    if r.screenshot_id.is_empty() {
        return Err("empty screenshot_id".into());
    }
    if r.true_structure == InternalStructure::Indeterminate {
        return Err(format!("{}: true_structure may not be Indeterminate", r.screenshot_id));
    }
    if r.units.is_empty() {
        return Err(format!("{}: no units", r.screenshot_id));
    }
    Ok(Annotation {
        screenshot_id: r.screenshot_id,
        true_structure: r.true_structure,
        units: r.units,
    })
}

pub fn load_annotations(path: &Path) -> Result<Vec<Annotation>, CorpusError> {
    read_jsonl(path, into_annotation)
}

pub fn save_annotations(anns: &[Annotation], path: &Path) -> Result<(), CorpusError> {
    let records: Vec<AnnotationRecord> = anns
        .iter()
        .map(|a| AnnotationRecord {
            schema_version: SCHEMA_VERSION,
            screenshot_id: a.screenshot_id.clone(),
            true_structure: a.true_structure,
            units: a.units.clone(),
        })
        .collect();
    write_jsonl(path, &records)
}

/// The labelled structure agrees with the unit and distinct-author counts.
pub fn check_annotation(ann: &Annotation) -> Result<(), String> {
    let authors: HashSet<String> = ann.units.iter().map(|u| normalize_handle(&u.author)).collect();
    let implied = InternalStructure::from_counts(ann.units.len(), authors.len());
    if implied == ann.true_structure {
        Ok(())
    } else {
        Err(format!(
            "{}: labelled {} but {} units by {} authors imply {implied}",
            ann.screenshot_id,
            ann.true_structure,
            ann.units.len(),
            authors.len()
        ))
    }
}
