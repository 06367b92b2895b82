use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::CliError;
use crate::eval::BodyMatch;
use crate::fixture::CorpusRecipe;

/// Options shared by `extract`, `queries` and `evaluate`.
///
/// Values from a config file replace the matching command-line values.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub sidecars: Option<Vec<PathBuf>>,
    pub images: Option<Vec<PathBuf>>,
    pub parses: Option<PathBuf>,
    /// External OCR command, `{input}` standing for the image path.
    pub engine_template: Option<String>,
    pub wordlist: Option<PathBuf>,
    pub wordlist_size: Option<usize>,
    pub extractor_config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub queries: Option<bool>,
    pub annotations: Option<PathBuf>,
    pub body_match: Option<BodyMatch>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputMode {
    Sidecars(Vec<PathBuf>),
    Images(Vec<PathBuf>),
    Parses(PathBuf),
}

fn rebase(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(path) = p.as_mut().filter(|p| p.is_relative()) {
        *path = base.join(&*path);
    }
}

impl RunConfig {
    /// Reads a TOML config file. Relative paths in it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for list in [&mut cfg.sidecars, &mut cfg.images].into_iter().flatten() {
            for p in list.iter_mut().filter(|p| p.is_relative()) {
                *p = base.join(&*p);
            }
        }
        for p in [
            &mut cfg.parses,
            &mut cfg.wordlist,
            &mut cfg.extractor_config,
            &mut cfg.out,
            &mut cfg.annotations,
        ] {
            rebase(base, p);
        }
        Ok(cfg)
    }

    /// `self` with every value set in `file` replaced.
    pub fn overlay(self, file: RunConfig) -> RunConfig {
        // A file that names an input mode replaces the command line's choice.
        let inputs_from_file =
            file.sidecars.is_some() || file.images.is_some() || file.parses.is_some();
        let (sidecars, images, parses) = if inputs_from_file {
            (file.sidecars, file.images, file.parses)
        } else {
            (self.sidecars, self.images, self.parses)
        };
        RunConfig {
            sidecars,
            images,
            parses,
            engine_template: file.engine_template.or(self.engine_template),
            wordlist: file.wordlist.or(self.wordlist),
            wordlist_size: file.wordlist_size.or(self.wordlist_size),
            extractor_config: file.extractor_config.or(self.extractor_config),
            out: file.out.or(self.out),
            jobs: file.jobs.or(self.jobs),
            queries: file.queries.or(self.queries),
            annotations: file.annotations.or(self.annotations),
            body_match: file.body_match.or(self.body_match),
        }
    }

    pub fn input_mode(&self) -> Result<InputMode, CliError> {
        match (&self.sidecars, &self.images, &self.parses) {
            (Some(s), None, None) if !s.is_empty() => Ok(InputMode::Sidecars(s.clone())),
            (None, Some(i), None) if !i.is_empty() => Ok(InputMode::Images(i.clone())),
            (None, None, Some(p)) => Ok(InputMode::Parses(p.clone())),
            (None, None, None) => Err(CliError::Config(
                "no inputs: give --sidecars, --images or --parses".into(),
            )),
            _ => Err(CliError::Config(
                "give exactly one of --sidecars, --images or --parses".into(),
            )),
        }
    }

    /// Worker threads; defaults to the available cores.
    pub fn jobs(&self) -> usize {
        self.jobs
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
            .max(1)
    }

    pub fn out_dir(&self) -> Result<PathBuf, CliError> {
        self.out
            .clone()
            .ok_or_else(|| CliError::Config("no output directory: give --out".into()))
    }
}

/// `exact`, `normalized`, or `jaccard:<threshold>`.
pub fn parse_body_match(text: &str) -> Result<BodyMatch, String> {
    match text {
        "exact" => Ok(BodyMatch::Exact),
        "normalized" => Ok(BodyMatch::Normalized),
        _ => {
            let t = text
                .strip_prefix("jaccard:")
                .ok_or_else(|| format!("unknown body match `{text}`"))?;
            let threshold: f64 = t.parse().map_err(|_| format!("bad threshold `{t}`"))?;
            if (0.0..=1.0).contains(&threshold) {
                Ok(BodyMatch::TokenJaccard(threshold))
            } else {
                Err(format!("threshold {threshold} is outside [0, 1]"))
            }
        }
    }
}

/// Options for `gen-fixtures`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FixtureOptions {
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub seed_default: bool,
    pub recipe: Option<PathBuf>,
    pub count: Option<usize>,
    pub noise_rate: Option<f64>,
    pub noise_seed: Option<u64>,
}

impl FixtureOptions {
    /// The recipe to run. A seed must come from `--seed`, the recipe file, or
    /// an explicit `--seed-default`; file values win over flags.
    pub fn recipe(&self) -> Result<CorpusRecipe, CliError> {
        let mut recipe = CorpusRecipe::default();
        if let Some(c) = self.count {
            recipe.count = c;
        }
        let mut seeded = self.seed_default;
        if let Some(s) = self.seed {
            recipe.seed = s;
            seeded = true;
        }
        if let Some(path) = &self.recipe {
            let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            let table: toml::Table = text
                .parse()
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let mut file = CorpusRecipe::from_toml_str(&text)?;
            if !table.contains_key("count") {
                file.count = recipe.count;
            }
            if table.contains_key("seed") {
                seeded = true;
            } else {
                file.seed = recipe.seed;
            }
            recipe = file;
        }
        if !seeded {
            return Err(CliError::Config(
                "fixture generation needs --seed <n> (or --seed-default for the default seed)".into(),
            ));
        }
        Ok(recipe)
    }
}
