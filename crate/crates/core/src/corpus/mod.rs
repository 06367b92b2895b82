//! On-disk corpus artifacts: URL lists, annotations, capture manifests and
//! parse records. Structured files are JSON Lines with a `schema_version`.

mod annotations;
mod manifest;
mod parses;
mod urls;

use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

pub use annotations::{check_annotation, load_annotations, save_annotations};
pub use manifest::{
    append_manifest_entry, load_manifest, save_manifest, tally_manifest, CaptureManifestEntry,
    CaptureMode, CaptureStatus, ManifestTally,
};
pub use parses::{load_parses, save_parses, ParseRecord};
pub use urls::{build_url, load_url_list, parse_post_url, Platform, PostUrl, UrlTemplates};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("line {line}: malformed URL: {reason}")]
    MalformedUrl { line: usize, reason: String },
    #[error("line {line}: expected a {expected} URL, found host `{host}`")]
    PlatformMismatch {
        line: usize,
        expected: Platform,
        host: String,
    },
    #[error("{0} URLs need an account name")]
    MissingAccount(Platform),
    #[error("post id is empty")]
    MissingPostId,
    #[error("unsupported platform `{0}`")]
    UnsupportedPlatform(String),
    #[error("line {line}: {message}")]
    SchemaViolation { line: usize, message: String },
    #[error("invalid URL templates: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub(crate) fn open(path: &Path) -> Result<BufReader<fs::File>, CorpusError> {
    match fs::File::open(path) {
        Ok(f) => Ok(BufReader::new(f)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => {
            Err(CorpusError::FileNotFound(path.to_owned()))
        }
        Err(e) => Err(e.into()),
    }
}

fn violation(line: usize, message: impl ToString) -> CorpusError {
    CorpusError::SchemaViolation {
        line,
        message: message.to_string(),
    }
}

/// Reads one record per nonblank line and converts it; failures carry the
/// 1-based line number.
pub(crate) fn read_jsonl<T: DeserializeOwned, U>(
    path: &Path,
    mut convert: impl FnMut(T) -> Result<U, String>,
) -> Result<Vec<U>, CorpusError> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: T = serde_json::from_str(&line).map_err(|e| violation(i + 1, e))?;
        out.push(convert(record).map_err(|m| violation(i + 1, m))?);
    }
    Ok(out)
}

pub(crate) fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<(), CorpusError> {
    let mut out = io::BufWriter::new(fs::File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub(crate) fn check_version(version: u32) -> Result<(), String> {
    if version == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(format!("unsupported schema_version {version}"))
    }
}
