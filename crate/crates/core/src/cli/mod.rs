//! Batch commands behind the `sstriage` binary.
//!
//! Every command writes its outputs sorted by screenshot id, so results do not
//! depend on the number of worker threads.

mod config;

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::InternalStructure;
use crate::corpus::{
    load_annotations, load_manifest, load_parses, save_annotations, save_parses, tally_manifest,
    CorpusError, ParseRecord,
};
use crate::eval::{build_report, grouping_correct, Annotation, BodyMatch, EvalItem, EvalReport};
use crate::extract::{ExtractError, ExtractorConfig, MetadataExtractor, WordList};
use crate::fixture::{generate_corpus, perturb_corpus, FixtureError};
use crate::ocr::{load_sidecar, run_ocr, EngineConfig, OcrDocument, OcrError};
use crate::pipeline::analyze;
use crate::query::{build_queries, QueryError};

pub use config::{parse_body_match, FixtureOptions, InputMode, RunConfig};

pub const PARSES_FILE: &str = "parses.jsonl";
pub const FAILURES_FILE: &str = "failures.jsonl";
pub const QUERIES_FILE: &str = "queries.tsv";
pub const REPORT_FILE: &str = "report.json";
pub const CONFUSION_FILE: &str = "confusion.csv";
pub const ANNOTATIONS_FILE: &str = "annotations.jsonl";
pub const FIXTURES_FILE: &str = "fixtures.jsonl";
pub const SIDECAR_DIR: &str = "sidecars";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("no annotation for screenshot `{0}`")]
    MissingAnnotation(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Fixture(#[from] FixtureError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    /// 2 for configuration and schema problems, 3 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 3,
            CliError::Corpus(CorpusError::Io(_) | CorpusError::FileNotFound(_)) => 3,
            CliError::Extract(ExtractError::Io(_) | ExtractError::FileNotFound(_)) => 3,
            _ => 2,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_owned(),
        source,
    }
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, contents).map_err(io_err(path))
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(io_err(path))
}

/// One input that could not be processed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub screenshot_id: String,
    pub input: PathBuf,
    pub kind: String,
    pub message: String,
}

fn failure_kind(e: &OcrError) -> &'static str {
    match e {
        OcrError::EngineNotFound(_) => "EngineNotFound",
        OcrError::EngineFailure { .. } => "EngineFailure",
        OcrError::UnreadableImage { .. } => "UnreadableImage",
        OcrError::FileNotFound(_) => "FileNotFound",
        OcrError::InvalidEncoding(_) => "InvalidEncoding",
        OcrError::InvalidEngineOutput => "InvalidEngineOutput",
        OcrError::Io(_) => "Io",
    }
}

const IMAGE_EXTENSIONS: &[&str] = &["png", "jpg", "jpeg", "gif", "bmp", "tif", "tiff", "webp"];

/// Files named directly, plus matching files directly inside named
/// directories. Ids are file stems and must be unique.
pub fn collect_inputs(paths: &[PathBuf], extensions: &[&str]) -> Result<Vec<(String, PathBuf)>, CliError> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let entries = fs::read_dir(p).map_err(io_err(p))?;
            for entry in entries {
                let path = entry.map_err(io_err(p))?.path();
                let ext = path
                    .extension()
                    .map(|e| e.to_string_lossy().to_ascii_lowercase())
                    .unwrap_or_default();
                if path.is_file() && extensions.contains(&ext.as_str()) {
                    files.push(path);
                }
            }
        } else {
            files.push(p.clone());
        }
    }
    let mut by_id: BTreeMap<String, PathBuf> = BTreeMap::new();
    for f in files {
        let id = f
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .ok_or_else(|| CliError::Config(format!("{} has no file name", f.display())))?;
        if let Some(prev) = by_id.insert(id.clone(), f.clone()) {
            return Err(CliError::Config(format!(
                "screenshot id `{id}` comes from both {} and {}",
                prev.display(),
                f.display()
            )));
        }
    }
    Ok(by_id.into_iter().collect())
}

pub fn build_extractor(cfg: &RunConfig) -> Result<MetadataExtractor, CliError> {
    let config = match &cfg.extractor_config {
        Some(p) => ExtractorConfig::load(p)?,
        None => ExtractorConfig::default(),
    };
    let wordlist = match &cfg.wordlist {
        Some(p) => WordList::load(p, cfg.wordlist_size)?,
        None => WordList::bundled(),
    };
    Ok(MetadataExtractor::new(wordlist, &config)?)
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

/// Parse records and failures, both sorted by screenshot id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Batch {
    pub records: Vec<ParseRecord>,
    pub failures: Vec<FailureRecord>,
}

impl Batch {
    pub fn summary(&self) -> String {
        format!(
            "processed {} screenshots: {} parsed, {} failed",
            self.records.len() + self.failures.len(),
            self.records.len(),
            self.failures.len()
        )
    }
}

type Loaded = (String, PathBuf, Result<OcrDocument, OcrError>);

/// Runs the pipeline over the configured inputs. Per-input failures are
/// collected, not raised.
pub fn run_batch(cfg: &RunConfig) -> Result<Batch, CliError> {
    let extractor = build_extractor(cfg)?;
    let pool = thread_pool(cfg.jobs())?;
    let loaded: Vec<Loaded> = match cfg.input_mode()? {
        // Stored parses are reanalyzed from their lines with the current extractor.
        InputMode::Parses(path) => load_parses(&path)?
            .iter()
            .map(|r| (r.screenshot_id.clone(), path.clone(), Ok(r.document())))
            .collect(),
        InputMode::Sidecars(paths) => {
            let inputs = collect_inputs(&paths, &["txt"])?;
            pool.install(|| {
                inputs
                    .into_par_iter()
                    .map(|(id, path)| {
                        let doc = load_sidecar(&path, &id);
                        (id, path, doc)
                    })
                    .collect()
            })
        }
        InputMode::Images(paths) => {
            let engine = match cfg.engine_template.as_deref() {
                Some(t) => EngineConfig::from_template(t)
                    .ok_or_else(|| CliError::Config("empty engine template".into()))?,
                None => EngineConfig::tesseract(),
            };
            let inputs = collect_inputs(&paths, IMAGE_EXTENSIONS)?;
            pool.install(|| {
                inputs
                    .into_par_iter()
                    .map(|(id, path)| {
                        let doc = run_ocr(&path, &engine);
                        (id, path, doc)
                    })
                    .collect()
            })
        }
    };
    let results: Vec<Result<ParseRecord, FailureRecord>> = pool.install(|| {
        loaded
            .into_par_iter()
            .map(|(id, input, doc)| match doc {
                Ok(doc) => Ok(ParseRecord::new(&doc, &analyze(&extractor, &doc))),
                Err(e) => Err(FailureRecord {
                    screenshot_id: id,
                    input,
                    kind: failure_kind(&e).into(),
                    message: e.to_string(),
                }),
            })
            .collect()
    });
    let mut batch = Batch::default();
    for r in results {
        match r {
            Ok(rec) => batch.records.push(rec),
            Err(f) => batch.failures.push(f),
        }
    }
    batch.records.sort_by(|a, b| a.screenshot_id.cmp(&b.screenshot_id));
    batch.failures.sort_by(|a, b| a.screenshot_id.cmp(&b.screenshot_id));
    Ok(batch)
}

fn write_failures(out: &Path, failures: &[FailureRecord]) -> Result<(), CliError> {
    let mut text = String::new();
    for f in failures {
        text.push_str(&serde_json::to_string(f).expect("failure record serializes"));
        text.push('\n');
    }
    write_file(&out.join(FAILURES_FILE), text)
}

/// Query lines for every unit with a body, and warnings for the rest.
pub fn query_lines(records: &[ParseRecord]) -> (String, Vec<String>) {
    let mut out = String::new();
    let mut warnings = Vec::new();
    for r in records {
        let doc = r.document();
        for (i, unit) in r.parse.units.iter().enumerate() {
            match build_queries(unit, &doc) {
                Ok(queries) => {
                    for q in queries {
                        let _ = writeln!(out, "{}\t{i}\t{}", r.screenshot_id, q.to_tsv_line());
                    }
                }
                Err(QueryError::EmptyBody) => {
                    warnings.push(format!("{} unit {i}: empty body, no queries", r.screenshot_id))
                }
            }
        }
    }
    (out, warnings)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractOutcome {
    pub batch: Batch,
    pub warnings: Vec<String>,
}

/// Writes `parses.jsonl`, `failures.jsonl` and optionally `queries.tsv`.
pub fn cmd_extract(cfg: &RunConfig) -> Result<ExtractOutcome, CliError> {
    let out = cfg.out_dir()?;
    let batch = run_batch(cfg)?;
    create_dir(&out)?;
    save_parses(&batch.records, &out.join(PARSES_FILE))?;
    write_failures(&out, &batch.failures)?;
    let mut warnings = Vec::new();
    if cfg.queries.unwrap_or(false) {
        let (text, w) = query_lines(&batch.records);
        write_file(&out.join(QUERIES_FILE), text)?;
        warnings = w;
    }
    Ok(ExtractOutcome { batch, warnings })
}

pub fn cmd_queries(cfg: &RunConfig) -> Result<ExtractOutcome, CliError> {
    let out = cfg.out_dir()?;
    let batch = run_batch(cfg)?;
    create_dir(&out)?;
    let (text, warnings) = query_lines(&batch.records);
    write_file(&out.join(QUERIES_FILE), text)?;
    write_failures(&out, &batch.failures)?;
    Ok(ExtractOutcome { batch, warnings })
}

/// Scores parses against annotations. Inputs that failed to load count as
/// Indeterminate with incorrect grouping.
pub fn evaluate_batch(
    batch: &Batch,
    annotations: &[Annotation],
    mode: BodyMatch,
) -> Result<EvalReport, CliError> {
    let by_id: HashMap<&str, &Annotation> =
        annotations.iter().map(|a| (a.screenshot_id.as_str(), a)).collect();
    let lookup = |id: &str| {
        by_id
            .get(id)
            .copied()
            .ok_or_else(|| CliError::MissingAnnotation(id.to_owned()))
    };
    let mut items = Vec::new();
    for r in &batch.records {
        let ann = lookup(&r.screenshot_id)?;
        items.push(EvalItem {
            screenshot_id: r.screenshot_id.clone(),
            true_structure: ann.true_structure,
            predicted: r.structure,
            grouping_correct: grouping_correct(&r.parse, ann, mode)
                .map_err(|e| CliError::Config(e.to_string()))?,
        });
    }
    for f in &batch.failures {
        let ann = lookup(&f.screenshot_id)?;
        items.push(EvalItem {
            screenshot_id: f.screenshot_id.clone(),
            true_structure: ann.true_structure,
            predicted: InternalStructure::Indeterminate,
            grouping_correct: false,
        });
    }
    build_report(items).map_err(|e| CliError::Config(e.to_string()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluateOutcome {
    pub batch: Batch,
    pub report: EvalReport,
}

/// Writes `report.json`, `confusion.csv`, `parses.jsonl` and `failures.jsonl`.
pub fn cmd_evaluate(cfg: &RunConfig) -> Result<EvaluateOutcome, CliError> {
    let out = cfg.out_dir()?;
    let ann_path = cfg
        .annotations
        .clone()
        .ok_or_else(|| CliError::Config("evaluate needs --annotations".into()))?;
    let annotations = load_annotations(&ann_path)?;
    let batch = run_batch(cfg)?;
    let report = evaluate_batch(&batch, &annotations, cfg.body_match.unwrap_or_default())?;
    create_dir(&out)?;
    write_file(&out.join(REPORT_FILE), report.to_json())?;
    write_file(&out.join(CONFUSION_FILE), report.matrix.to_csv())?;
    save_parses(&batch.records, &out.join(PARSES_FILE))?;
    write_failures(&out, &batch.failures)?;
    Ok(EvaluateOutcome { batch, report })
}

/// Writes sidecars, annotations and per-fixture specs under `out`.
pub fn cmd_gen_fixtures(opts: &FixtureOptions) -> Result<usize, CliError> {
    let recipe = opts.recipe()?;
    let mut fixtures = generate_corpus(&recipe)?;
    if let Some(rate) = opts.noise_rate {
        let seed = opts
            .noise_seed
            .ok_or_else(|| CliError::Config("--noise-rate needs --noise-seed".into()))?;
        fixtures = perturb_corpus(&fixtures, rate, seed)?;
    }
    let sidecars = opts.out.join(SIDECAR_DIR);
    create_dir(&sidecars)?;
    for f in &fixtures {
        f.doc.save_sidecar(&sidecars).map_err(io_err(&sidecars))?;
    }
    let annotations: Vec<Annotation> = fixtures.iter().map(|f| f.annotation.clone()).collect();
    save_annotations(&annotations, &opts.out.join(ANNOTATIONS_FILE))?;
    let mut specs = String::new();
    for f in &fixtures {
        let line = serde_json::json!({
            "screenshot_id": f.doc.screenshot_id(),
            "spec": f.spec,
        });
        specs.push_str(&line.to_string());
        specs.push('\n');
    }
    write_file(&opts.out.join(FIXTURES_FILE), specs)?;
    Ok(fixtures.len())
}

pub fn cmd_tally(manifest: &Path) -> Result<String, CliError> {
    Ok(tally_manifest(&load_manifest(manifest)?).render())
}
