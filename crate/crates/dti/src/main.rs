//! `dti` — command-line front end for the pipeline.
//!
//! Thin by design: argument parsing and exit-code mapping live here,
//! everything else is the library.

use clap::{Parser, Subcommand};

use dti::config::{DataSource, PipelineConfig};
use dti::pipeline;

#[derive(Parser)]
#[command(name = "dti", version, about = "Digital transformation index toolkit")]
struct Cli {
    /// Path to the pipeline configuration file (JSON).
    #[arg(long, global = true, default_value = "config.json")]
    config: std::path::PathBuf,

    /// Override a config value by dotted path, e.g. --set train.epochs=50
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate and normalize the survey file.
    Ingest,
    /// Compute the index for every organization.
    Index,
    /// Crawl the configured sites into the raw page store.
    Crawl,
    /// Extract, clean, and merge raw pages into corpus documents.
    Clean,
    /// Fit the text vectorizer over the corpus.
    Featurize {
        /// Truncate cleaned text to at most this many characters.
        #[arg(long)]
        max_chars: Option<usize>,
    },
    /// Cross-validate and train the survey-based regressor.
    TrainSurvey,
    /// Cross-validate and train the text-based regressor.
    TrainText {
        #[arg(long)]
        max_chars: Option<usize>,
    },
    /// Run the configured evaluation protocol without saving a model.
    Evaluate {
        /// Data source: survey or text (default: config's eval.source).
        #[arg(long)]
        source: Option<String>,
        #[arg(long)]
        max_chars: Option<usize>,
    },
    /// Compute the KPI suite.
    Kpis,
    /// Compute sensor-readiness gap scores.
    Readiness,
    /// Render the static HTML report bundle.
    Report,
    /// Run every phase in order, stopping at the first failure.
    RunAll {
        #[arg(long)]
        max_chars: Option<usize>,
    },
}

fn parse_overrides(raw: &[String]) -> Result<Vec<(String, String)>, String> {
    raw.iter()
        .map(|pair| {
            pair.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| format!("--set expects KEY=VALUE, got {pair:?}"))
        })
        .collect()
}

fn parse_source(raw: Option<String>) -> Result<Option<DataSource>, String> {
    match raw.as_deref() {
        None => Ok(None),
        Some("survey") => Ok(Some(DataSource::Survey)),
        Some("text") => Ok(Some(DataSource::Text)),
        Some(other) => Err(format!("--source must be `survey` or `text`, got {other:?}")),
    }
}

fn run(cli: Cli) -> dti::Result<()> {
    let overrides = parse_overrides(&cli.set).map_err(dti::Error::Validation)?;
    let config = PipelineConfig::load(&cli.config, &overrides)?;
    match cli.command {
        Command::Ingest => pipeline::ingest(&config),
        Command::Index => pipeline::index(&config),
        Command::Crawl => pipeline::crawl(&config),
        Command::Clean => pipeline::clean(&config),
        Command::Featurize { max_chars } => pipeline::featurize(&config, max_chars),
        Command::TrainSurvey => pipeline::train_survey(&config),
        Command::TrainText { max_chars } => pipeline::train_text(&config, max_chars),
        Command::Evaluate { source, max_chars } => {
            let source = parse_source(source).map_err(dti::Error::Validation)?;
            pipeline::evaluate(&config, source, max_chars)
        }
        Command::Kpis => pipeline::kpis(&config),
        Command::Readiness => pipeline::readiness(&config),
        Command::Report => pipeline::report(&config),
        Command::RunAll { max_chars } => pipeline::run_all(&config, max_chars),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: kind={} msg={:?}", err.kind(), err.to_string());
        std::process::exit(err.exit_code());
    }
}
