use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate, NaiveDateTime};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{generate_fixture, FixtureError, FixtureSpec, Layout, NoiseModel, TextBank};
use crate::classify::InternalStructure;
use crate::eval::Annotation;
use crate::ocr::OcrDocument;

/// How many fixtures of which structures to generate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusRecipe {
    pub count: usize,
    pub seed: u64,
    /// Relative weights; normalized before use.
    pub mix: BTreeMap<InternalStructure, f64>,
    pub layouts: Vec<Layout>,
    pub max_posts: usize,
    pub id_prefix: String,
}

impl Default for CorpusRecipe {
    fn default() -> Self {
        CorpusRecipe {
            count: 200,
            seed: 42,
            mix: [
                (InternalStructure::P1A1, 0.70),
                (InternalStructure::PnAn, 0.24),
                (InternalStructure::PnA1, 0.06),
            ]
            .into(),
            layouts: Layout::ALL.to_vec(),
            max_posts: 4,
            id_prefix: "fx-".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub spec: FixtureSpec,
    pub doc: OcrDocument,
    pub annotation: Annotation,
}

impl CorpusRecipe {
    pub fn from_toml_str(text: &str) -> Result<Self, FixtureError> {
        let r: CorpusRecipe = toml::from_str(text).map_err(|e| FixtureError::Config(e.to_string()))?;
        r.check()?;
        Ok(r)
    }

    fn check(&self) -> Result<(), FixtureError> {
        let err = |m: &str| Err(FixtureError::Config(m.into()));
        if self.mix.is_empty() || self.mix.values().any(|w| !w.is_finite() || *w < 0.0) {
            return err("mix weights must be finite and nonnegative");
        }
        if self.mix.values().sum::<f64>() <= 0.0 {
            return err("mix weights sum to zero");
        }
        if self.mix.contains_key(&InternalStructure::Indeterminate)
            || self.mix.contains_key(&InternalStructure::P1An)
        {
            return err("only P1A1, PnA1 and PnAn fixtures can be generated");
        }
        if self.layouts.is_empty() {
            return err("no layouts");
        }
        if self.max_posts < 2 {
            return err("max_posts must be at least 2");
        }
        Ok(())
    }

    /// Fixture counts per class, by largest remainder so they sum to `count`.
    pub fn class_counts(&self) -> BTreeMap<InternalStructure, usize> {
        let total: f64 = self.mix.values().sum();
        let quotas: Vec<(InternalStructure, f64)> = self
            .mix
            .iter()
            .map(|(&c, &w)| (c, w / total * self.count as f64))
            .collect();
        let mut counts: BTreeMap<InternalStructure, usize> =
            quotas.iter().map(|&(c, q)| (c, q.floor() as usize)).collect();
        let mut left = self.count - counts.values().sum::<usize>();
        let mut by_remainder = quotas.clone();
        by_remainder.sort_by(|a, b| (b.1 - b.1.floor()).total_cmp(&(a.1 - a.1.floor())));
        for (c, _) in by_remainder.into_iter().cycle() {
            if left == 0 {
                break;
            }
            *counts.get_mut(&c).unwrap() += 1;
            left -= 1;
        }
        counts
    }

    /// Structures in fixture-index order.
    pub fn assignments(&self) -> Vec<InternalStructure> {
        let mut classes: Vec<InternalStructure> = self
            .class_counts()
            .into_iter()
            .flat_map(|(c, n)| std::iter::repeat_n(c, n))
            .collect();
        classes.shuffle(&mut ChaCha8Rng::seed_from_u64(self.seed));
        classes
    }

    pub fn fixture_id(&self, index: usize) -> String {
        format!("{}{index:04}", self.id_prefix)
    }
}

fn random_handle(rng: &mut ChaCha8Rng) -> String {
    const LETTERS: &[u8] = b"abcdefghijklmnopqrstuvwxyz";
    let len = rng.random_range(3..=8);
    let stem: String = (0..len)
        .map(|_| LETTERS[rng.random_range(0..LETTERS.len())] as char)
        .collect();
    format!("@{stem}_{:02}", rng.random_range(0..100))
}

fn random_spec(
    structure: InternalStructure,
    recipe: &CorpusRecipe,
    seed: u64,
) -> FixtureSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_posts = match structure {
        InternalStructure::P1A1 => 1,
        _ => rng.random_range(2..=recipe.max_posts),
    };
    let authors: Vec<String> = match structure {
        InternalStructure::PnAn => {
            let mut pool: Vec<String> = Vec::new();
            while pool.len() < n_posts.min(3) {
                let h = random_handle(&mut rng);
                if !pool.iter().any(|p| p.eq_ignore_ascii_case(&h)) {
                    pool.push(h);
                }
            }
            // First two posts by different accounts, the rest drawn freely.
            (0..n_posts)
                .map(|i| if i < 2 { pool[i].clone() } else { pool.choose(&mut rng).unwrap().clone() })
                .collect()
        }
        _ => vec![random_handle(&mut rng); n_posts],
    };
    let start = NaiveDate::from_ymd_opt(2019, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
    let mut t: NaiveDateTime = start + Duration::minutes(rng.random_range(0..6 * 365 * 24 * 60));
    let timestamps = (0..n_posts)
        .map(|_| {
            let now = t;
            t += Duration::minutes(rng.random_range(1..3 * 24 * 60));
            now
        })
        .collect();
    let sentences = &TextBank::bundled().sentences;
    let bodies = (0..n_posts)
        .map(|_| {
            let n = rng.random_range(1..=3);
            sentences
                .choose_multiple(&mut rng, n)
                .cloned()
                .collect::<Vec<_>>()
                .join("\n")
        })
        .collect();
    FixtureSpec {
        structure,
        n_posts,
        authors,
        timestamps,
        bodies,
        layout: *recipe.layouts.choose(&mut rng).unwrap(),
        seed,
    }
}

/// Fixture `i` draws from seed `recipe.seed ^ i`, so fixtures are independent
/// of one another and of generation order.
pub fn generate_corpus(recipe: &CorpusRecipe) -> Result<Vec<Fixture>, FixtureError> {
    recipe.check()?;
    recipe
        .assignments()
        .into_par_iter()
        .enumerate()
        .map(|(i, structure)| {
            let spec = random_spec(structure, recipe, recipe.seed ^ i as u64);
            let (doc, annotation) = generate_fixture(&recipe.fixture_id(i), &spec)?;
            Ok(Fixture {
                spec,
                doc,
                annotation,
            })
        })
        .collect()
}

/// Noise seed for fixture `i` is `base_seed ^ i`.
pub fn perturb_corpus(fixtures: &[Fixture], rate: f64, base_seed: u64) -> Result<Vec<Fixture>, FixtureError> {
    fixtures
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let noise = NoiseModel::with_default_pairs(rate, base_seed ^ i as u64)?;
            Ok(Fixture {
                doc: super::perturb(&f.doc, &noise),
                ..f.clone()
            })
        })
        .collect()
}
