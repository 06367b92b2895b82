use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use screenshot_triage::cli::{
    cmd_evaluate, cmd_extract, cmd_gen_fixtures, cmd_queries, cmd_tally, parse_body_match,
    CliError, FixtureOptions, RunConfig, CONFUSION_FILE, REPORT_FILE,
};
use screenshot_triage::eval::BodyMatch;

/// Group OCR text of social-media screenshots into posts, classify their
/// structure, and build search queries for the originals.
#[derive(Parser)]
#[command(name = "sstriage", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse each screenshot into posts and write parses.jsonl.
    Extract(RunArgs),
    /// Score parses against annotations; writes report.json and confusion.csv.
    Evaluate(RunArgs),
    /// Write search queries (queries.tsv) for every post.
    Queries(RunArgs),
    /// Generate synthetic sidecars with matching annotations.
    GenFixtures(FixtureArgs),
    /// Count successful captures in a manifest by mode and platform.
    Tally {
        /// Capture manifest (JSON Lines).
        manifest: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// OCR sidecar files (.txt) or directories of them.
    #[arg(long, num_args = 1.., conflicts_with_all = ["images", "parses"])]
    sidecars: Option<Vec<PathBuf>>,
    /// Screenshot images or directories of them; needs an OCR engine.
    #[arg(long, num_args = 1.., conflicts_with = "parses")]
    images: Option<Vec<PathBuf>>,
    /// A parses.jsonl written by an earlier run.
    #[arg(long)]
    parses: Option<PathBuf>,
    /// OCR command for --images, `{input}` marks the image path.
    #[arg(long, value_name = "COMMAND")]
    engine_template: Option<String>,
    /// Common-word list, one word per line, most frequent first.
    #[arg(long)]
    wordlist: Option<PathBuf>,
    /// Use only the first N words of --wordlist.
    #[arg(long, value_name = "N")]
    wordlist_size: Option<usize>,
    /// TOML file with date formats and allowlist.
    #[arg(long)]
    extractor_config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: available cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Also write queries.tsv (extract only).
    #[arg(long)]
    queries: bool,
    /// Annotations (JSON Lines); required by evaluate.
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// Body comparison: exact, normalized, or jaccard:<threshold>.
    #[arg(long, value_parser = parse_body_match)]
    body_match: Option<BodyMatch>,
    /// TOML run config; its values replace the flags above.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig> {
        let flags = RunConfig {
            sidecars: self.sidecars,
            images: self.images,
            parses: self.parses,
            engine_template: self.engine_template,
            wordlist: self.wordlist,
            wordlist_size: self.wordlist_size,
            extractor_config: self.extractor_config,
            out: self.out,
            jobs: self.jobs,
            queries: self.queries.then_some(true),
            annotations: self.annotations,
            body_match: self.body_match,
        };
        Ok(match self.config {
            Some(path) => flags.overlay(RunConfig::load(&path)?),
            None => flags,
        })
    }
}

#[derive(Args)]
struct FixtureArgs {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Generator seed.
    #[arg(long, conflicts_with = "seed_default")]
    seed: Option<u64>,
    /// Use the default seed (42) explicitly.
    #[arg(long)]
    seed_default: bool,
    /// TOML recipe (count, seed, mix, layouts, max_posts, id_prefix).
    #[arg(long)]
    recipe: Option<PathBuf>,
    /// Number of fixtures (default 200).
    #[arg(long)]
    count: Option<usize>,
    /// Apply OCR-style character noise at this rate.
    #[arg(long, requires = "noise_seed")]
    noise_rate: Option<f64>,
    /// Base seed for the noise; fixture i uses seed ^ i.
    #[arg(long)]
    noise_seed: Option<u64>,
}

fn report_warnings(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Extract(args) => {
            let outcome = cmd_extract(&args.into_config()?).context("extract")?;
            report_warnings(&outcome.warnings);
            println!("{}", outcome.batch.summary());
        }
        Command::Queries(args) => {
            let outcome = cmd_queries(&args.into_config()?).context("queries")?;
            report_warnings(&outcome.warnings);
            println!("{}", outcome.batch.summary());
        }
        Command::Evaluate(args) => {
            let cfg = args.into_config()?;
            let outcome = cmd_evaluate(&cfg).context("evaluate")?;
            print!("{}", outcome.report.render_table());
            println!("{}", outcome.batch.summary());
            let out = cfg.out_dir()?;
            eprintln!(
                "wrote {} and {}",
                out.join(REPORT_FILE).display(),
                out.join(CONFUSION_FILE).display()
            );
        }
        Command::GenFixtures(args) => {
            let opts = FixtureOptions {
                out: args.out,
                seed: args.seed,
                seed_default: args.seed_default,
                recipe: args.recipe,
                count: args.count,
                noise_rate: args.noise_rate,
                noise_seed: args.noise_seed,
            };
            let n = cmd_gen_fixtures(&opts).context("gen-fixtures")?;
            println!("generated {n} fixtures in {}", opts.out.display());
        }
        Command::Tally { manifest } => print!("{}", cmd_tally(&manifest)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<CliError>().map_or(2, CliError::exit_code);
            ExitCode::from(code)
        }
    }
}
