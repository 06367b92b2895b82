use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ExtractError;

/// Platform chrome words that never disqualify a timestamp or author line.
pub const DEFAULT_ALLOWLIST: &[&str] = &[
    // months
    "january", "february", "march", "april", "may", "june", "july", "august", "september",
    "october", "november", "december", "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep",
    "sept", "oct", "nov", "dec",
    // weekdays
    "monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday", "mon", "tue",
    "tues", "wed", "thu", "thur", "thurs", "fri", "sat", "sun",
    // chrome
    "am", "pm", "views", "view", "likes", "like", "reposts", "repost", "retweets", "retweet",
    "quote", "quotes", "replies", "reply", "bookmarks",
];

/// Built-in timestamp layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DateFormat {
    /// `Jun 3, 2024`, optionally preceded by `9:02 AM ·`.
    MonthDayYear,
    /// `3 Jun 2024`
    DayMonthYear,
    /// `06/03/2024` and `06/03/24`
    Slash,
    /// `2024-06-03`
    Iso,
    /// `2h`, `3d` after a separator glyph or at line start.
    Relative,
}

impl DateFormat {
    pub const ALL: [DateFormat; 5] = [
        DateFormat::MonthDayYear,
        DateFormat::DayMonthYear,
        DateFormat::Slash,
        DateFormat::Iso,
        DateFormat::Relative,
    ];
}

/// Overrides for the metadata extractor, usually read from a TOML file:
///
/// ```toml
/// # replaces the default chrome allowlist when present
/// allowlist = ["am", "pm", "views"]
/// # subset of: month_day_year, day_month_year, slash, iso, relative
/// formats = ["month_day_year", "iso"]
/// # extra regexes with named groups year, month, day and optionally
/// # hour, minute, ampm; month may be numeric or a month name
/// custom_formats = ['(?P<day>\d{1,2})\.(?P<month>\d{1,2})\.(?P<year>\d{4})']
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractorConfig {
    pub allowlist: Vec<String>,
    pub formats: BTreeSet<DateFormat>,
    pub custom_formats: Vec<String>,
}

impl Default for ExtractorConfig {
    fn default() -> Self {
        ExtractorConfig {
            allowlist: DEFAULT_ALLOWLIST.iter().map(|s| s.to_string()).collect(),
            formats: DateFormat::ALL.into_iter().collect(),
            custom_formats: Vec::new(),
        }
    }
}

impl ExtractorConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ExtractError> {
        let mut config: ExtractorConfig =
            toml::from_str(text).map_err(|e| ExtractError::Config(e.to_string()))?;
        for word in &mut config.allowlist {
            *word = word.trim().to_lowercase();
        }
        config.allowlist.retain(|w| !w.is_empty());
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ExtractError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ExtractError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_config_keeps_defaults() {
        let c = ExtractorConfig::from_toml_str("formats = [\"iso\"]").unwrap();
        assert_eq!(c.formats, [DateFormat::Iso].into_iter().collect());
        assert!(c.allowlist.iter().any(|w| w == "views"));
    }

    #[test]
    fn allowlist_lowercased() {
        let c = ExtractorConfig::from_toml_str("allowlist = [\"Views\", \" \"]").unwrap();
        assert_eq!(c.allowlist, vec!["views"]);
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(ExtractorConfig::from_toml_str("formatz = []").is_err());
        assert!(ExtractorConfig::from_toml_str("formats = [\"weird\"]").is_err());
    }
}
