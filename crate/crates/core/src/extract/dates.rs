use std::sync::LazyLock;

use chrono::{NaiveDate, NaiveTime};
use regex::{Captures, Regex};
use serde::{Deserialize, Serialize};

use super::config::{DateFormat, ExtractorConfig};
use super::ExtractError;
use crate::ocr::OcrDocument;

const MONTH: &str = r"(?i:jan(?:uary)?|feb(?:ruary)?|mar(?:ch)?|apr(?:il)?|may|june?|july?|aug(?:ust)?|sep(?:tember|t)?|oct(?:ober)?|nov(?:ember)?|dec(?:ember)?)";

fn builtin_pattern(format: DateFormat) -> String {
    match format {
        DateFormat::MonthDayYear => format!(
            r"(?:\b(?P<hour>\d{{1,2}}):(?P<minute>\d{{2}})\s*(?P<ampm>[AaPp])\.?[Mm]\.?\s*[·•\-.]?\s*)?\b(?P<month>{MONTH})\.?\s+(?P<day>\d{{1,2}}),?\s+(?P<year>\d{{4}})\b"
        ),
        DateFormat::DayMonthYear => format!(
            r"\b(?P<day>\d{{1,2}})\s+(?P<month>{MONTH})\.?,?\s+(?P<year>\d{{4}})\b"
        ),
        DateFormat::Slash => {
            r"\b(?P<month>\d{1,2})/(?P<day>\d{1,2})/(?P<year>\d{4}|\d{2})\b".to_owned()
        }
        DateFormat::Iso => r"\b(?P<year>\d{4})-(?P<month>\d{2})-(?P<day>\d{2})\b".to_owned(),
        DateFormat::Relative => {
            r"[·•]\s*(?P<span>(?P<amount>\d{1,2})(?P<unit>[smhd]))\b".to_owned()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelativeUnit {
    Seconds,
    Minutes,
    Hours,
    Days,
}

/// What a timestamp mention resolves to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimestampValue {
    Absolute {
        date: NaiveDate,
        /// 24-hour clock, already resolved from AM/PM.
        time: Option<NaiveTime>,
    },
    /// "2h", "3d": an age, not a date. Never meaningful.
    Relative { amount: u32, unit: RelativeUnit },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimestampMention {
    pub raw_text: String,
    pub value: TimestampValue,
    pub line_index: usize,
    /// Offset of `raw_text` within the line, in chars.
    pub char_offset: usize,
    pub meaningful: bool,
}

impl TimestampMention {
    pub fn date(&self) -> Option<NaiveDate> {
        match self.value {
            TimestampValue::Absolute { date, .. } => Some(date),
            TimestampValue::Relative { .. } => None,
        }
    }

    pub fn time(&self) -> Option<NaiveTime> {
        match self.value {
            TimestampValue::Absolute { time, .. } => time,
            TimestampValue::Relative { .. } => None,
        }
    }

    pub fn is_relative(&self) -> bool {
        matches!(self.value, TimestampValue::Relative { .. })
    }

    pub fn char_len(&self) -> usize {
        self.raw_text.chars().count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PatternKind {
    Absolute,
    Relative,
}

#[derive(Debug, Clone)]
struct Pattern {
    kind: PatternKind,
    regex: Regex,
}

/// Compiled set of timestamp layouts.
#[derive(Debug, Clone)]
pub struct DatePatterns {
    patterns: Vec<Pattern>,
}

static DEFAULT_PATTERNS: LazyLock<DatePatterns> = LazyLock::new(|| {
    DatePatterns::new(&ExtractorConfig::default()).expect("built-in date patterns compile")
});

impl Default for DatePatterns {
    fn default() -> Self {
        DEFAULT_PATTERNS.clone()
    }
}

struct Candidate {
    start: usize,
    end: usize,
    value: TimestampValue,
}

impl DatePatterns {
    pub fn new(config: &ExtractorConfig) -> Result<Self, ExtractError> {
        let mut patterns = Vec::new();
        for &format in &config.formats {
            let kind = match format {
                DateFormat::Relative => PatternKind::Relative,
                _ => PatternKind::Absolute,
            };
            let regex = Regex::new(&builtin_pattern(format))
                .map_err(|e| ExtractError::Config(e.to_string()))?;
            patterns.push(Pattern { kind, regex });
        }
        for source in &config.custom_formats {
            let regex = Regex::new(source)
                .map_err(|e| ExtractError::Config(format!("custom format `{source}`: {e}")))?;
            let names: Vec<&str> = regex.capture_names().flatten().collect();
            for required in ["year", "month", "day"] {
                if !names.contains(&required) {
                    return Err(ExtractError::Config(format!(
                        "custom format `{source}` lacks a `{required}` group"
                    )));
                }
            }
            patterns.push(Pattern {
                kind: PatternKind::Absolute,
                regex,
            });
        }
        Ok(DatePatterns { patterns })
    }

    /// All timestamp mentions in a document ordered by line, then offset.
    /// Overlapping matches resolve to the leftmost, then longest.
    pub fn find(&self, doc: &OcrDocument) -> Vec<TimestampMention> {
        doc.lines()
            .iter()
            .flat_map(|line| self.find_in_line(line.index, &line.text))
            .collect()
    }

    pub fn find_in_line(&self, line_index: usize, text: &str) -> Vec<TimestampMention> {
        let mut candidates: Vec<Candidate> = Vec::new();
        for pattern in &self.patterns {
            for caps in pattern.regex.captures_iter(text) {
                let candidate = match pattern.kind {
                    PatternKind::Absolute => absolute_candidate(&caps),
                    PatternKind::Relative => relative_candidate(&caps),
                };
                candidates.extend(candidate);
            }
        }
        candidates.sort_by(|a, b| a.start.cmp(&b.start).then(b.end.cmp(&a.end)));

        let mut mentions = Vec::new();
        let mut cursor = 0;
        for c in candidates {
            if c.start < cursor {
                continue;
            }
            cursor = c.end;
            mentions.push(TimestampMention {
                raw_text: text[c.start..c.end].to_owned(),
                value: c.value,
                line_index,
                char_offset: text[..c.start].chars().count(),
                meaningful: false,
            });
        }
        mentions
    }
}

/// Timestamp mentions under the default layouts.
pub fn find_timestamp_mentions(doc: &OcrDocument) -> Vec<TimestampMention> {
    DEFAULT_PATTERNS.find(doc)
}

fn month_number(text: &str) -> Option<u32> {
    if let Ok(n) = text.parse::<u32>() {
        return Some(n);
    }
    let lower = text.to_lowercase();
    let prefix = lower.get(..3)?;
    let n = match prefix {
        "jan" => 1,
        "feb" => 2,
        "mar" => 3,
        "apr" => 4,
        "may" => 5,
        "jun" => 6,
        "jul" => 7,
        "aug" => 8,
        "sep" => 9,
        "oct" => 10,
        "nov" => 11,
        "dec" => 12,
        _ => return None,
    };
    Some(n)
}

/// Two-digit years pivot at 70: 00-69 are 2000s, 70-99 are 1900s.
pub fn resolve_year(text: &str) -> Option<i32> {
    let n: i32 = text.parse().ok()?;
    match text.len() {
        2 if n < 70 => Some(2000 + n),
        2 => Some(1900 + n),
        4 => Some(n),
        _ => None,
    }
}

fn twelve_hour_time(hour: &str, minute: &str, ampm: &str) -> Option<NaiveTime> {
    let hour: u32 = hour.parse().ok()?;
    let minute: u32 = minute.parse().ok()?;
    if !(1..=12).contains(&hour) {
        return None;
    }
    let pm = ampm.eq_ignore_ascii_case("p");
    let hour24 = match (hour, pm) {
        (12, false) => 0,
        (12, true) => 12,
        (h, false) => h,
        (h, true) => h + 12,
    };
    NaiveTime::from_hms_opt(hour24, minute, 0)
}

fn twenty_four_hour_time(hour: &str, minute: &str) -> Option<NaiveTime> {
    NaiveTime::from_hms_opt(hour.parse().ok()?, minute.parse().ok()?, 0)
}

fn absolute_candidate(caps: &Captures) -> Option<Candidate> {
    let whole = caps.get(0)?;
    let year = resolve_year(caps.name("year")?.as_str())?;
    let month = month_number(caps.name("month")?.as_str())?;
    let day: u32 = caps.name("day")?.as_str().parse().ok()?;
    let date = NaiveDate::from_ymd_opt(year, month, day)?;

    let mut start = whole.start();
    let time = match (caps.name("hour"), caps.name("minute")) {
        (Some(h), Some(m)) => {
            let parsed = match caps.name("ampm") {
                Some(ampm) => twelve_hour_time(h.as_str(), m.as_str(), ampm.as_str()),
                None => twenty_four_hour_time(h.as_str(), m.as_str()),
            };
            if parsed.is_none() {
                // Keep the date, drop the unparseable time prefix.
                start = ["year", "month", "day"]
                    .iter()
                    .filter_map(|g| caps.name(g))
                    .map(|g| g.start())
                    .min()
                    .unwrap_or(start);
            }
            parsed
        }
        _ => None,
    };
    Some(Candidate {
        start,
        end: whole.end(),
        value: TimestampValue::Absolute { date, time },
    })
}

fn relative_candidate(caps: &Captures) -> Option<Candidate> {
    let span = caps.name("span")?;
    let amount: u32 = caps.name("amount")?.as_str().parse().ok()?;
    let unit = match caps.name("unit")?.as_str() {
        "s" => RelativeUnit::Seconds,
        "m" => RelativeUnit::Minutes,
        "h" => RelativeUnit::Hours,
        "d" => RelativeUnit::Days,
        _ => return None,
    };
    Some(Candidate {
        start: span.start(),
        end: span.end(),
        value: TimestampValue::Relative { amount, unit },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ocr::OcrSource;

    fn doc(lines: &[&str]) -> OcrDocument {
        OcrDocument::from_lines("t", lines, OcrSource::Sidecar { path: "t.txt".into() })
    }

    fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    #[test]
    fn web_detail_line() {
        let found = find_timestamp_mentions(&doc(&["9:02 AM · Jun 3, 2024"]));
        assert_eq!(found.len(), 1);
        let m = &found[0];
        assert_eq!(m.date(), Some(ymd(2024, 6, 3)));
        assert_eq!(m.time(), NaiveTime::from_hms_opt(9, 2, 0));
        assert_eq!(m.raw_text, "9:02 AM · Jun 3, 2024");
        assert_eq!(m.char_offset, 0);
        assert!(!m.meaningful);
    }

    #[test]
    fn decade_is_not_a_date() {
        assert!(find_timestamp_mentions(&doc(&["In the 1800s temperatures rose"])).is_empty());
    }

    #[test]
    fn ordered_by_line() {
        let d = doc(&[
            "a", "b", "posted Jan 5, 2021", "c", "d", "e", "f", "then 2022-02-01 happened",
        ]);
        let found = find_timestamp_mentions(&d);
        assert_eq!(
            found.iter().map(|m| m.line_index).collect::<Vec<_>>(),
            vec![2, 7]
        );
    }

    #[test]
    fn all_forms_agree() {
        let d = doc(&["Jun 3, 2024", "3 Jun 2024", "06/03/2024", "2024-06-03", "June 3 2024", "6/3/24"]);
        let found = find_timestamp_mentions(&d);
        assert_eq!(found.len(), 6);
        assert!(found.iter().all(|m| m.date() == Some(ymd(2024, 6, 3))));
    }

    #[test]
    fn twelve_hour_resolution() {
        let found = find_timestamp_mentions(&doc(&[
            "12:05 AM · Jan 1, 2020",
            "12:30 PM · Jan 1, 2020",
            "11:59 pm - Jan 1, 2020",
        ]));
        let hours: Vec<_> = found.iter().map(|m| m.time().unwrap().format("%H:%M").to_string()).collect();
        assert_eq!(hours, vec!["00:05", "12:30", "23:59"]);
    }

    #[test]
    fn two_digit_year_pivot() {
        assert_eq!(resolve_year("69"), Some(2069));
        assert_eq!(resolve_year("70"), Some(1970));
        assert_eq!(resolve_year("99"), Some(1999));
        assert_eq!(resolve_year("00"), Some(2000));
        let found = find_timestamp_mentions(&doc(&["12/25/99"]));
        assert_eq!(found[0].date(), Some(ymd(1999, 12, 25)));
    }

    #[test]
    fn invalid_calendar_dates_skipped() {
        assert!(find_timestamp_mentions(&doc(&["Feb 30, 2023", "13/01/2020", "2023-02-29"])).is_empty());
        assert_eq!(find_timestamp_mentions(&doc(&["Feb 29, 2024"])).len(), 1);
    }

    #[test]
    fn relative_timestamps() {
        let found = find_timestamp_mentions(&doc(&["Elon Musk @elonmusk · 2h", "3d printing is fun"]));
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].raw_text, "2h");
        assert!(found[0].is_relative());
        assert_eq!(found[0].date(), None);
        assert_eq!(found[0].char_offset, "Elon Musk @elonmusk · ".chars().count());
    }

    #[test]
    fn full_and_abbreviated_month_names() {
        let d = doc(&["September 9, 2019", "sept 9, 2019", "SEP 9, 2019", "Sep. 9, 2019"]);
        let found = find_timestamp_mentions(&d);
        assert_eq!(found.len(), 4);
        assert!(found.iter().all(|m| m.date() == Some(ymd(2019, 9, 9))));
    }

    #[test]
    fn offsets_count_chars() {
        let line = "·· héllo Jun 3, 2024";
        let found = find_timestamp_mentions(&doc(&[line]));
        let m = &found[0];
        let chars: Vec<char> = line.chars().collect();
        let slice: String = chars[m.char_offset..m.char_offset + m.char_len()].iter().collect();
        assert_eq!(slice, m.raw_text);
    }

    #[test]
    fn custom_format() {
        let config = ExtractorConfig {
            formats: Default::default(),
            custom_formats: vec![r"(?P<day>\d{1,2})\.(?P<month>\d{1,2})\.(?P<year>\d{4})".into()],
            ..Default::default()
        };
        let patterns = DatePatterns::new(&config).unwrap();
        let found = patterns.find(&doc(&["am 03.06.2024 gepostet", "Jun 3, 2024"]));
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].date(), Some(ymd(2024, 6, 3)));

        let bad = ExtractorConfig {
            custom_formats: vec![r"(?P<year>\d{4})".into()],
            ..Default::default()
        };
        assert!(DatePatterns::new(&bad).is_err());
    }

    proptest::proptest! {
        #[test]
        fn mentions_fit_inside_their_lines(line in "[ -~·•]{0,60}") {
            for m in find_timestamp_mentions(&doc(&[line.as_str()])) {
                proptest::prop_assert!(m.char_offset + m.char_len() <= line.chars().count());
            }
        }

        #[test]
        fn every_layout_normalizes_identically(y in 1970i32..2069, m in 1u32..=12, d in 1u32..=28) {
            let date = ymd(y, m, d);
            let lines = [
                date.format("%b %-d, %Y").to_string(),
                date.format("%-d %b %Y").to_string(),
                date.format("%m/%d/%Y").to_string(),
                date.format("%Y-%m-%d").to_string(),
                date.format("%B %-d, %Y").to_string(),
            ];
            let refs: Vec<&str> = lines.iter().map(String::as_str).collect();
            let found = find_timestamp_mentions(&doc(&refs));
            proptest::prop_assert_eq!(found.len(), 5);
            for f in found {
                proptest::prop_assert_eq!(f.date(), Some(date));
            }
        }
    }
}
