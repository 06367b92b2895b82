//! Synthetic OCR documents with matching annotations, plus seeded OCR-style
//! character noise.

mod noise;
mod recipe;

use std::collections::{BTreeMap, HashSet};
use std::sync::LazyLock;

use chrono::NaiveDateTime;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::InternalStructure;
use crate::eval::{normalize_handle, AnnotatedUnit, Annotation};
use crate::extract::{is_handle_char, MAX_HANDLE_LEN, MIN_HANDLE_LEN};
use crate::group::collapse_whitespace;
use crate::ocr::{OcrDocument, OcrSource};

pub use noise::{perturb, perturb_counted, NoiseModel, DEFAULT_CONFUSIONS};
pub use recipe::{generate_corpus, perturb_corpus, CorpusRecipe, Fixture};

const BUNDLED_LAYOUTS: &str = include_str!("../../data/layouts.toml");
const BUNDLED_BANK: &str = include_str!("../../data/fixture-bank.toml");

#[derive(Debug, Error, PartialEq)]
pub enum FixtureError {
    #[error("inconsistent fixture spec: {0}")]
    InconsistentSpec(String),
    #[error("substitution rate {0} is outside [0, 1]")]
    InvalidRate(f64),
    #[error("fixture config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    WebLight,
    MobileLight,
}

impl Layout {
    pub const ALL: [Layout; 2] = [Layout::WebLight, Layout::MobileLight];

    fn key(&self) -> &'static str {
        match self {
            Layout::WebLight => "web_light",
            Layout::MobileLight => "mobile_light",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutTemplate {
    pub header: Vec<String>,
    pub footer: Vec<String>,
    pub separator: Vec<String>,
}

/// Layout templates keyed by layout name.
#[derive(Debug, Clone)]
pub struct LayoutBook {
    templates: BTreeMap<String, LayoutTemplate>,
}

impl LayoutBook {
    pub fn from_toml_str(text: &str) -> Result<Self, FixtureError> {
        let templates: BTreeMap<String, LayoutTemplate> =
            toml::from_str(text).map_err(|e| FixtureError::Config(e.to_string()))?;
        for layout in Layout::ALL {
            if !templates.contains_key(layout.key()) {
                return Err(FixtureError::Config(format!("no `{}` layout", layout.key())));
            }
        }
        Ok(LayoutBook { templates })
    }

    pub fn bundled() -> &'static LayoutBook {
        static BOOK: LazyLock<LayoutBook> =
            LazyLock::new(|| LayoutBook::from_toml_str(BUNDLED_LAYOUTS).expect("bundled layouts parse"));
        &BOOK
    }

    pub fn get(&self, layout: Layout) -> &LayoutTemplate {
        &self.templates[layout.key()]
    }
}

/// Display names and body sentences the generator draws from.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TextBank {
    pub names: Vec<String>,
    pub sentences: Vec<String>,
}

impl TextBank {
    pub fn bundled() -> &'static TextBank {
        static BANK: LazyLock<TextBank> =
            LazyLock::new(|| toml::from_str(BUNDLED_BANK).expect("bundled text bank parses"));
        &BANK
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub structure: InternalStructure,
    pub n_posts: usize,
    /// One handle per post, with or without the leading `@`.
    pub authors: Vec<String>,
    pub timestamps: Vec<NaiveDateTime>,
    /// One entry per post; `\n` separates body lines.
    pub bodies: Vec<String>,
    pub layout: Layout,
    pub seed: u64,
}

fn valid_handle(handle: &str) -> bool {
    let h = handle.strip_prefix('@').unwrap_or(handle);
    (MIN_HANDLE_LEN..=MAX_HANDLE_LEN).contains(&h.chars().count()) && h.chars().all(is_handle_char)
}

impl FixtureSpec {
    pub fn check(&self) -> Result<(), FixtureError> {
        let bad = |m: String| Err(FixtureError::InconsistentSpec(m));
        if self.n_posts == 0 {
            return bad("n_posts must be at least 1".into());
        }
        for (what, len) in [
            ("authors", self.authors.len()),
            ("timestamps", self.timestamps.len()),
            ("bodies", self.bodies.len()),
        ] {
            if len != self.n_posts {
                return bad(format!("{len} {what} for {} posts", self.n_posts));
            }
        }
        if let Some(h) = self.authors.iter().find(|h| !valid_handle(h)) {
            return bad(format!("`{h}` is not a valid handle"));
        }
        if self.bodies.iter().any(|b| b.trim().is_empty()) {
            return bad("empty body".into());
        }
        let distinct: HashSet<String> = self.authors.iter().map(|a| normalize_handle(a)).collect();
        let implied = InternalStructure::from_counts(self.n_posts, distinct.len());
        if implied != self.structure {
            return bad(format!(
                "{} posts by {} authors is {implied}, not {}",
                self.n_posts,
                distinct.len(),
                self.structure
            ));
        }
        Ok(())
    }
}

fn fill(template: &str, vars: &[(&str, &str)]) -> String {
    vars.iter()
        .fold(template.to_owned(), |s, (k, v)| s.replace(&format!("{{{k}}}"), v))
}

pub fn generate_fixture(
    screenshot_id: &str,
    spec: &FixtureSpec,
) -> Result<(OcrDocument, Annotation), FixtureError> {
    generate_fixture_with(screenshot_id, spec, LayoutBook::bundled(), TextBank::bundled())
}

pub fn generate_fixture_with(
    screenshot_id: &str,
    spec: &FixtureSpec,
    layouts: &LayoutBook,
    bank: &TextBank,
) -> Result<(OcrDocument, Annotation), FixtureError> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let template = layouts.get(spec.layout);

    // Each distinct account keeps one display name across the thread.
    let mut names: BTreeMap<String, String> = BTreeMap::new();
    let mut unused: Vec<&String> = bank.names.iter().collect();
    for author in &spec.authors {
        let key = normalize_handle(author);
        if !names.contains_key(&key) {
            let pick = if unused.is_empty() {
                bank.names.choose(&mut rng).cloned().unwrap_or_default()
            } else {
                unused.remove(rng.random_range(0..unused.len())).clone()
            };
            names.insert(key, pick);
        }
    }

    let mut lines: Vec<String> = Vec::new();
    let mut units = Vec::with_capacity(spec.n_posts);
    for i in 0..spec.n_posts {
        let handle = spec.authors[i].trim_start_matches('@');
        let ts = spec.timestamps[i];
        let date = ts.format("%b %-d, %Y").to_string();
        let time = ts.format("%-I:%M %p").to_string();
        let views = rng.random_range(3..25_000u32).to_string();
        let vars = [
            ("name", names[&normalize_handle(handle)].as_str()),
            ("handle", handle),
            ("date", date.as_str()),
            ("time", time.as_str()),
            ("views", views.as_str()),
        ];
        lines.extend(template.header.iter().map(|t| fill(t, &vars)));
        lines.extend(spec.bodies[i].lines().map(str::to_owned));
        lines.extend(template.footer.iter().map(|t| fill(t, &vars)));
        lines.extend(template.separator.iter().map(|t| fill(t, &vars)));
        units.push(AnnotatedUnit {
            author: format!("@{handle}"),
            date: Some(ts.date()),
            body: collapse_whitespace(&spec.bodies[i]),
        });
    }
    let doc = OcrDocument::from_lines(
        screenshot_id,
        lines,
        OcrSource::Sidecar {
            path: format!("{screenshot_id}.txt").into(),
        },
    );
    let annotation = Annotation {
        screenshot_id: screenshot_id.to_owned(),
        true_structure: spec.structure,
        units,
    };
    Ok((doc, annotation))
}
