use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::FixtureError;
use crate::ocr::OcrDocument;

/// Directed confusions typical of OCR on screenshots.
pub const DEFAULT_CONFUSIONS: [(&str, &str); 6] = [
    ("O", "0"),
    ("0", "O"),
    ("l", "1"),
    ("1", "l"),
    ("m", "rn"),
    ("rn", "m"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    substitution_rate: f64,
    confusion_pairs: Vec<(String, String)>,
    seed: u64,
}

impl NoiseModel {
    pub fn new(
        substitution_rate: f64,
        confusion_pairs: Vec<(String, String)>,
        seed: u64,
    ) -> Result<Self, FixtureError> {
        if !(0.0..=1.0).contains(&substitution_rate) {
            return Err(FixtureError::InvalidRate(substitution_rate));
        }
        if confusion_pairs.iter().any(|(from, _)| from.is_empty()) {
            return Err(FixtureError::Config("empty confusion source".into()));
        }
        let mut confusion_pairs = confusion_pairs;
        // Longest source first so "rn" wins over a bare "r".
        confusion_pairs.sort_by_key(|(from, _)| std::cmp::Reverse(from.chars().count()));
        Ok(NoiseModel {
            substitution_rate,
            confusion_pairs,
            seed,
        })
    }

    pub fn with_default_pairs(substitution_rate: f64, seed: u64) -> Result<Self, FixtureError> {
        let pairs = DEFAULT_CONFUSIONS
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        Self::new(substitution_rate, pairs, seed)
    }

    pub fn substitution_rate(&self) -> f64 {
        self.substitution_rate
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn confusion_pairs(&self) -> &[(String, String)] {
        &self.confusion_pairs
    }
}

fn perturb_line(line: &str, noise: &NoiseModel, rng: &mut ChaCha8Rng, hits: &mut usize) -> String {
    let mut out = String::with_capacity(line.len());
    let mut rest = line;
    while let Some(c) = rest.chars().next() {
        let pair = noise
            .confusion_pairs
            .iter()
            .find(|(from, _)| rest.starts_with(from.as_str()));
        match pair {
            Some((from, to)) => {
                // Every eligible position draws, so output depends only on the seed and text.
                if rng.random_bool(noise.substitution_rate) {
                    out.push_str(to);
                    *hits += 1;
                } else {
                    out.push_str(from);
                }
                rest = &rest[from.len()..];
            }
            None => {
                out.push(c);
                rest = &rest[c.len_utf8()..];
            }
        }
    }
    out
}

/// `doc` with seeded OCR-style substitutions, and how many were made.
pub fn perturb_counted(doc: &OcrDocument, noise: &NoiseModel) -> (OcrDocument, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let mut hits = 0;
    let lines: Vec<String> = doc
        .texts()
        .map(|l| perturb_line(l, noise, &mut rng, &mut hits))
        .collect();
    (doc.with_lines(lines), hits)
}

pub fn perturb(doc: &OcrDocument, noise: &NoiseModel) -> OcrDocument {
    perturb_counted(doc, noise).0
}
