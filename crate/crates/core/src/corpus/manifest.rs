use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::OpenOptions;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, FixedOffset};
use serde::{Deserialize, Serialize};

use super::urls::{parse_post_url, Platform, PostUrl};
use super::{check_version, read_jsonl, write_jsonl, CorpusError, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CaptureMode {
    MobileDark,
    MobileLight,
    WebDark,
    WebLight,
}

impl CaptureMode {
    pub const ALL: [CaptureMode; 4] = [
        CaptureMode::MobileDark,
        CaptureMode::MobileLight,
        CaptureMode::WebDark,
        CaptureMode::WebLight,
    ];

    pub fn short(&self) -> &'static str {
        match self {
            CaptureMode::MobileDark => "MD",
            CaptureMode::MobileLight => "ML",
            CaptureMode::WebDark => "WD",
            CaptureMode::WebLight => "WL",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaptureStatus {
    Ok,
    BrokenUrl,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaptureManifestEntry {
    pub screenshot_id: String,
    pub post_url: PostUrl,
    pub mode: CaptureMode,
    /// Present exactly when `status` is `Ok`.
    pub image_path: Option<PathBuf>,
    pub captured_at: DateTime<FixedOffset>,
    pub status: CaptureStatus,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestRecord {
    schema_version: u32,
    screenshot_id: String,
    platform: Platform,
    mode: CaptureMode,
    url: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    image_path: Option<PathBuf>,
    captured_at: DateTime<FixedOffset>,
    status: CaptureStatus,
}

impl From<&CaptureManifestEntry> for ManifestRecord {
    fn from(e: &CaptureManifestEntry) -> Self {
        ManifestRecord {
            schema_version: SCHEMA_VERSION,
            screenshot_id: e.screenshot_id.clone(),
            platform: e.post_url.platform,
            mode: e.mode,
            url: e.post_url.url.clone(),
            image_path: e.image_path.clone(),
            captured_at: e.captured_at,
            status: e.status,
        }
    }
}

impl ManifestRecord {
    fn into_entry(self) -> Result<CaptureManifestEntry, String> {
        check_version(self.schema_version)?;
        if (self.status == CaptureStatus::Ok) != self.image_path.is_some() {
            return Err(format!(
                "{}: image_path must be present exactly when status is Ok",
                self.screenshot_id
            ));
        }
        let post_url = parse_post_url(&self.url)?;
        if post_url.platform != self.platform {
            return Err(format!(
                "{}: url belongs to {}, record says {}",
                self.screenshot_id, post_url.platform, self.platform
            ));
        }
        Ok(CaptureManifestEntry {
            screenshot_id: self.screenshot_id,
            post_url,
            mode: self.mode,
            image_path: self.image_path,
            captured_at: self.captured_at,
            status: self.status,
        })
    }
}

pub fn load_manifest(path: &Path) -> Result<Vec<CaptureManifestEntry>, CorpusError> {
    read_jsonl(path, ManifestRecord::into_entry)
}

pub fn save_manifest(entries: &[CaptureManifestEntry], path: &Path) -> Result<(), CorpusError> {
    let records: Vec<ManifestRecord> = entries.iter().map(ManifestRecord::from).collect();
    write_jsonl(path, &records)
}

pub fn append_manifest_entry(entry: &CaptureManifestEntry, path: &Path) -> Result<(), CorpusError> {
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    let mut line = serde_json::to_vec(&ManifestRecord::from(entry)).map_err(io::Error::from)?;
    line.push(b'\n');
    f.write_all(&line)?;
    Ok(())
}

/// Successful captures counted by capture mode and platform.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ManifestTally {
    counts: BTreeMap<(Platform, CaptureMode), usize>,
}

pub fn tally_manifest(entries: &[CaptureManifestEntry]) -> ManifestTally {
    let mut tally = ManifestTally::default();
    for e in entries.iter().filter(|e| e.status == CaptureStatus::Ok) {
        *tally.counts.entry((e.post_url.platform, e.mode)).or_default() += 1;
    }
    tally
}

impl ManifestTally {
    pub fn count(&self, platform: Platform, mode: CaptureMode) -> usize {
        self.counts.get(&(platform, mode)).copied().unwrap_or(0)
    }

    pub fn platform_total(&self, platform: Platform) -> usize {
        CaptureMode::ALL.iter().map(|&m| self.count(platform, m)).sum()
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    /// Modes as rows, platforms as columns, then a platform-total row.
    pub fn render(&self) -> String {
        let mut out = format!("{:<16}", "Mode");
        for p in Platform::ALL {
            let _ = write!(out, "{:>8}", p.short());
        }
        out.push('\n');
        for m in CaptureMode::ALL {
            let _ = write!(out, "{:<16}", m.short());
            for p in Platform::ALL {
                let _ = write!(out, "{:>8}", self.count(p, m));
            }
            out.push('\n');
        }
        let _ = write!(out, "{:<16}", "Platform Total");
        for p in Platform::ALL {
            let _ = write!(out, "{:>8}", self.platform_total(p));
        }
        out.push('\n');
        out
    }
}
