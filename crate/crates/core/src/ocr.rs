//! Ordered-line text for one screenshot, either from an external OCR engine
//! or from a pre-extracted sidecar file.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OcrError {
    #[error("OCR engine `{0}` not found")]
    EngineNotFound(String),
    #[error("OCR engine `{engine}` exited with {status}: {stderr}")]
    EngineFailure {
        engine: String,
        status: String,
        stderr: String,
    },
    #[error("unreadable image {path}: {reason}")]
    UnreadableImage { path: PathBuf, reason: String },
    #[error("sidecar not found: {0}")]
    FileNotFound(PathBuf),
    #[error("sidecar {0} is not valid UTF-8")]
    InvalidEncoding(PathBuf),
    #[error("engine output is not valid UTF-8")]
    InvalidEngineOutput,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Where the text of a document came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum OcrSource {
    ExternalEngine {
        engine: String,
        version: Option<String>,
        /// Argument template the engine was invoked with, for reproducibility.
        args: Vec<String>,
    },
    Sidecar {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OcrLine {
    pub index: usize,
    pub text: String,
}

/// Lines recovered from one screenshot, top to bottom.
///
/// Line indices are contiguous from zero and no line contains a line break.
/// Interior blank lines are kept; trailing blank lines are not.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawDocument")]
pub struct OcrDocument {
    screenshot_id: String,
    lines: Vec<OcrLine>,
    source: OcrSource,
    empty: bool,
}

#[derive(Deserialize)]
struct RawDocument {
    screenshot_id: String,
    lines: Vec<OcrLine>,
    source: OcrSource,
    empty: bool,
}

impl TryFrom<RawDocument> for OcrDocument {
    type Error = String;

    fn try_from(raw: RawDocument) -> Result<Self, Self::Error> {
        for (i, line) in raw.lines.iter().enumerate() {
            if line.index != i {
                return Err(format!("line index {} at position {i}", line.index));
            }
            if line.text.chars().any(is_line_break) {
                return Err(format!("line {i} contains a line break"));
            }
        }
        if raw.empty != raw.lines.is_empty() {
            return Err("empty flag disagrees with line count".into());
        }
        Ok(OcrDocument {
            screenshot_id: raw.screenshot_id,
            lines: raw.lines,
            source: raw.source,
            empty: raw.empty,
        })
    }
}

fn is_line_break(c: char) -> bool {
    matches!(c, '\n' | '\r' | '\u{0B}' | '\u{0C}' | '\u{85}' | '\u{2028}' | '\u{2029}')
}

impl OcrDocument {
    /// Splits raw text into lines. CR-LF and lone CR count as LF; trailing
    /// blank lines are dropped.
    pub fn from_text(screenshot_id: impl Into<String>, text: &str, source: OcrSource) -> Self {
        let text = text.strip_prefix('\u{FEFF}').unwrap_or(text);
        let normalized = text.replace("\r\n", "\n");
        let segments: Vec<&str> = normalized.split(is_line_break).collect();
        Self::from_lines(screenshot_id, segments, source)
    }

    /// Builds a document from already separated lines. Any line break inside
    /// an entry splits it further.
    pub fn from_lines<S: AsRef<str>>(
        screenshot_id: impl Into<String>,
        lines: impl IntoIterator<Item = S>,
        source: OcrSource,
    ) -> Self {
        let mut texts: Vec<String> = Vec::new();
        for line in lines {
            let line = line.as_ref().replace("\r\n", "\n");
            texts.extend(line.split(is_line_break).map(str::to_owned));
        }
        while texts.last().is_some_and(|t| t.trim().is_empty()) {
            texts.pop();
        }
        let lines: Vec<OcrLine> = texts
            .into_iter()
            .enumerate()
            .map(|(index, text)| OcrLine { index, text })
            .collect();
        let empty = lines.is_empty();
        OcrDocument {
            screenshot_id: screenshot_id.into(),
            lines,
            source,
            empty,
        }
    }

    pub fn screenshot_id(&self) -> &str {
        &self.screenshot_id
    }

    pub fn lines(&self) -> &[OcrLine] {
        &self.lines
    }

    pub fn line(&self, index: usize) -> Option<&str> {
        self.lines.get(index).map(|l| l.text.as_str())
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.lines.iter().map(|l| l.text.as_str())
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    /// True only for a document with zero lines.
    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn source(&self) -> &OcrSource {
        &self.source
    }

    /// Same lines under a different provenance.
    pub fn with_lines<S: AsRef<str>>(&self, lines: impl IntoIterator<Item = S>) -> Self {
        Self::from_lines(self.screenshot_id.clone(), lines, self.source.clone())
    }

    /// Sidecar text: lines joined by a single LF.
    pub fn to_text(&self) -> String {
        self.texts().collect::<Vec<_>>().join("\n")
    }

    /// Writes `<dir>/<screenshot_id>.txt` and returns its path.
    pub fn save_sidecar(&self, dir: &Path) -> io::Result<PathBuf> {
        let path = dir.join(format!("{}.txt", self.screenshot_id));
        fs::write(&path, self.to_text())?;
        Ok(path)
    }
}

pub fn load_sidecar(text_path: &Path, screenshot_id: &str) -> Result<OcrDocument, OcrError> {
    let bytes = fs::read(text_path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => OcrError::FileNotFound(text_path.to_path_buf()),
        _ => OcrError::Io(e),
    })?;
    let text =
        String::from_utf8(bytes).map_err(|_| OcrError::InvalidEncoding(text_path.to_path_buf()))?;
    Ok(OcrDocument::from_text(
        screenshot_id,
        &text,
        OcrSource::Sidecar {
            path: text_path.to_path_buf(),
        },
    ))
}

/// How to invoke an external OCR program.
///
/// `args` is a template; every `{input}` is replaced by the image path. The
/// program must print recognized text on stdout and exit with status 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub name: String,
    pub program: String,
    pub args: Vec<String>,
    /// Arguments that make the program print its version; first stdout line is kept.
    #[serde(default)]
    pub version_args: Option<Vec<String>>,
}

impl EngineConfig {
    pub fn tesseract() -> Self {
        EngineConfig {
            name: "tesseract".into(),
            program: "tesseract".into(),
            args: vec!["{input}".into(), "stdout".into()],
            version_args: Some(vec!["--version".into()]),
        }
    }

    /// Parses a whitespace-separated command template such as
    /// `tesseract {input} stdout --psm 4`.
    pub fn from_template(template: &str) -> Option<Self> {
        let mut parts = template.split_whitespace().map(str::to_owned);
        let program = parts.next()?;
        let name = Path::new(&program)
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| program.clone());
        Some(EngineConfig {
            name,
            program,
            args: parts.collect(),
            version_args: None,
        })
    }

    fn version(&self) -> Option<String> {
        let args = self.version_args.as_ref()?;
        let out = Command::new(&self.program).args(args).output().ok()?;
        // Some engines print their version on stderr.
        let text = if out.stdout.is_empty() { out.stderr } else { out.stdout };
        String::from_utf8_lossy(&text)
            .lines()
            .next()
            .map(|l| l.trim().to_owned())
            .filter(|l| !l.is_empty())
    }
}

const RASTER_MAGIC: &[&[u8]] = &[
    b"\x89PNG\r\n\x1a\n",
    b"\xFF\xD8\xFF",
    b"GIF87a",
    b"GIF89a",
    b"BM",
    b"II*\0",
    b"MM\0*",
];

fn check_raster(path: &Path) -> Result<(), OcrError> {
    let unreadable = |reason: String| OcrError::UnreadableImage {
        path: path.to_path_buf(),
        reason,
    };
    let bytes = fs::read(path).map_err(|e| unreadable(e.to_string()))?;
    let is_webp = bytes.len() >= 12 && &bytes[..4] == b"RIFF" && &bytes[8..12] == b"WEBP";
    if is_webp || RASTER_MAGIC.iter().any(|m| bytes.starts_with(m)) {
        Ok(())
    } else {
        Err(unreadable("not a recognized raster image".into()))
    }
}

pub fn run_ocr(image_path: &Path, engine: &EngineConfig) -> Result<OcrDocument, OcrError> {
    check_raster(image_path)?;
    let input = image_path.to_string_lossy();
    let args: Vec<String> = engine
        .args
        .iter()
        .map(|a| a.replace("{input}", &input))
        .collect();
    let output = Command::new(&engine.program)
        .args(&args)
        .output()
        .map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => OcrError::EngineNotFound(engine.program.clone()),
            _ => OcrError::Io(e),
        })?;
    if !output.status.success() {
        return Err(OcrError::EngineFailure {
            engine: engine.name.clone(),
            status: output.status.to_string(),
            stderr: String::from_utf8_lossy(&output.stderr).trim().to_owned(),
        });
    }
    let text = String::from_utf8(output.stdout).map_err(|_| OcrError::InvalidEngineOutput)?;
    let screenshot_id = image_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(OcrDocument::from_text(
        screenshot_id,
        &text,
        OcrSource::ExternalEngine {
            engine: engine.name.clone(),
            version: engine.version(),
            args: engine.args.clone(),
        },
    ))
}
