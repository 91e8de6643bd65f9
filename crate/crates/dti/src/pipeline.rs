//! Subcommand implementations: each phase reads the inputs declared in
//! the config, writes its outputs under the configured directories, and
//! nothing else. `run_all` chains the phases and stops at the first
//! failure.
//!
//! Artifact layout (relative to `paths.output_dir` unless noted):
//!
//! - `surveys_normalized.csv` — ingest
//! - `dti_scores.csv` — index
//! - `corpus_dir/raw/<org>/NNN.html` + `pages.tsv`, `corpus_dir/fetch_log.tsv` — crawl
//! - `corpus_dir/docs/<org>.json` + `corpus_dir/manifest.json` — clean
//! - `vectorizer.json`, `vectorizer_fit_report.json` — featurize
//! - `model_survey.json`, `train_survey_loss.csv`, `train_survey_metrics.json` — train-survey
//! - `model_text.json`, `train_text_loss.csv`, `train_text_metrics.json` — train-text
//! - `eval_report.json` — evaluate
//! - `kpis.json` / `kpis.csv` — kpis
//! - `readiness.json` / `readiness.csv` — readiness
//! - `report/index.html` + `report/report.json` — report
//!
//! The fetch log carries wall-clock timings (politeness evidence), so it
//! lives in `corpus_dir`, not in the reproducible output tree.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;

use crate::clean::Gazetteer;
use crate::config::{DataSource, EvalProtocol, PipelineConfig};
use crate::corpus::CorpusDocument;
use crate::error::{Error, Result};
use crate::eval::EvalReport;
use crate::mlp::{train, MlpModel, TrainConfig};
use crate::score::{compute_dti, DtiScore};
use crate::survey::{to_feature_vector, SurveyRecord, SurveySchema};

fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn sanitize(org_id: &str) -> String {
    org_id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Loads schema + surveys and echoes them back in normalized form.
pub fn ingest(config: &PipelineConfig) -> Result<()> {
    let schema = config.validate()?;
    let records = crate::survey::load_surveys(&config.paths.surveys, &schema)?;
    ensure_dir(&config.paths.output_dir)?;
    let out = config.paths.output_dir.join("surveys_normalized.csv");
    crate::survey::save_surveys(&out, &records, &schema)?;
    println!(
        "ingest: {} records, {} fields -> {}",
        records.len(),
        schema.len(),
        out.display()
    );
    Ok(())
}

/// Computes the index for every organization.
pub fn index(config: &PipelineConfig) -> Result<()> {
    let schema = config.validate()?;
    let records = crate::survey::load_surveys(&config.paths.surveys, &schema)?;
    let rows = score_all(&records, config)?;
    ensure_dir(&config.paths.output_dir)?;
    let out = config.paths.output_dir.join("dti_scores.csv");
    crate::score::write_scores_csv(&out, &rows, &config.weights)?;
    let warned: usize = rows.iter().filter(|(_, s)| !s.low_coverage.is_empty()).count();
    if warned > 0 {
        eprintln!("index: {warned} organizations have low-coverage dimensions");
    }
    println!("index: {} rows -> {}", rows.len(), out.display());
    Ok(())
}

fn score_all(
    records: &[SurveyRecord],
    config: &PipelineConfig,
) -> Result<Vec<(String, DtiScore)>> {
    records
        .iter()
        .map(|r| Ok((r.org_id.clone(), compute_dti(r, &config.mapping, &config.weights)?)))
        .collect()
}

/// Crawls every configured site, persisting raw HTML per organization.
pub fn crawl(config: &PipelineConfig) -> Result<()> {
    config.validate()?;
    let sites_path = config.paths.sites.as_ref().ok_or_else(|| {
        Error::validation("crawl requires paths.sites in the config".to_string())
    })?;
    let sites = crate::config::load_sites(sites_path)?;
    let crawler = crate::crawl::Crawler::new(config.crawl.clone())?;
    let raw_root = config.paths.corpus_dir.join("raw");
    ensure_dir(&raw_root)?;
    let mut full_log = Vec::new();
    let mut warnings = Vec::new();
    for (org_id, seed) in &sites {
        let org_dir = raw_root.join(sanitize(org_id));
        ensure_dir(&org_dir)?;
        let mut pages_tsv = String::from("idx\tdepth\turl\n");
        match crawler.crawl(seed) {
            Ok(outcome) => {
                for (idx, page) in outcome.pages.iter().enumerate() {
                    let file = org_dir.join(format!("{idx:03}.html"));
                    std::fs::write(&file, &page.html).map_err(|e| Error::io(&file, e))?;
                    pages_tsv.push_str(&format!("{idx:03}\t{}\t{}\n", page.depth, page.url));
                }
                full_log.extend(outcome.log);
            }
            Err(err) => {
                warnings.push(format!("{org_id}: crawl of {seed} failed: {err}"));
            }
        }
        let tsv_path = org_dir.join("pages.tsv");
        std::fs::write(&tsv_path, pages_tsv).map_err(|e| Error::io(&tsv_path, e))?;
    }
    crate::crawl::write_fetch_log(config.paths.corpus_dir.join("fetch_log.tsv"), &full_log)?;
    let warn_path = config.paths.corpus_dir.join("crawl_warnings.txt");
    std::fs::write(&warn_path, warnings.join("\n") + if warnings.is_empty() { "" } else { "\n" })
        .map_err(|e| Error::io(&warn_path, e))?;
    for w in &warnings {
        eprintln!("crawl: warning: {w}");
    }
    println!(
        "crawl: {} sites, {} requests logged",
        sites.len(),
        full_log.len()
    );
    Ok(())
}

/// Extracts, cleans, and merges raw pages into the corpus documents.
pub fn clean(config: &PipelineConfig) -> Result<()> {
    let schema = config.validate()?;
    let sites_path = config.paths.sites.as_ref().ok_or_else(|| {
        Error::validation("clean requires paths.sites in the config".to_string())
    })?;
    let sites = crate::config::load_sites(sites_path)?;
    let gazetteer = match &config.paths.gazetteer {
        Some(path) => Gazetteer::load(path)?,
        None => Gazetteer::empty(),
    };
    let labels = read_labels_if_present(config)?;
    let records = crate::survey::load_surveys(&config.paths.surveys, &schema)?;
    let by_org: IndexMap<String, SurveyRecord> = records
        .into_iter()
        .map(|r| (r.org_id.clone(), r))
        .collect();

    let raw_root = config.paths.corpus_dir.join("raw");
    let mut documents = Vec::with_capacity(sites.len());
    // crawl-phase warnings propagate into the manifest
    let warn_path = config.paths.corpus_dir.join("crawl_warnings.txt");
    let mut warnings: Vec<String> = match std::fs::read_to_string(&warn_path) {
        Ok(raw) => raw.lines().map(str::to_string).collect(),
        Err(_) => Vec::new(),
    };
    for (org_id, _) in &sites {
        let org_dir = raw_root.join(sanitize(org_id));
        let pages = read_raw_pages(&org_dir)?;
        if pages.is_empty() && !warnings.iter().any(|w| w.starts_with(&format!("{org_id}:"))) {
            warnings.push(format!("{org_id}: no raw pages found under {}", org_dir.display()));
        }
        let label = labels.as_ref().and_then(|l| l.get(org_id)).copied();
        let survey = by_org.get(org_id).cloned();
        documents.push(crate::corpus::assemble_document(
            org_id, &pages, &gazetteer, label, survey,
        ));
    }
    let manifest = crate::corpus::write_corpus(&config.paths.corpus_dir, &documents, &warnings)?;
    for w in &warnings {
        eprintln!("clean: warning: {w}");
    }
    println!(
        "clean: {} documents ({} labeled) -> {}",
        manifest.documents.len(),
        manifest.documents.iter().filter(|d| d.labeled).count(),
        config.paths.corpus_dir.join("docs").display()
    );
    Ok(())
}

fn read_labels_if_present(config: &PipelineConfig) -> Result<Option<IndexMap<String, f64>>> {
    let path = config.paths.output_dir.join("dti_scores.csv");
    if !path.exists() {
        eprintln!(
            "clean: note: {} not found; documents will carry no labels (run `index` first)",
            path.display()
        );
        return Ok(None);
    }
    Ok(Some(crate::score::read_scores_csv(&path)?))
}

fn read_raw_pages(org_dir: &Path) -> Result<Vec<(String, String)>> {
    let tsv = org_dir.join("pages.tsv");
    let raw = match std::fs::read_to_string(&tsv) {
        Ok(raw) => raw,
        Err(_) => return Ok(Vec::new()),
    };
    let mut pages = Vec::new();
    for line in raw.lines().skip(1) {
        let mut parts = line.split('\t');
        let idx = parts.next().unwrap_or_default();
        let _depth = parts.next();
        let url = parts.next().unwrap_or_default();
        let file = org_dir.join(format!("{idx}.html"));
        let html = std::fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
        pages.push((url.to_string(), html));
    }
    Ok(pages)
}

fn effective_max_chars(config: &PipelineConfig, flag: Option<usize>) -> Option<usize> {
    flag.or(config.vectorizer.max_chars)
}

fn truncate_chars(text: &str, max_chars: Option<usize>) -> String {
    match max_chars {
        Some(n) => text.chars().take(n).collect(),
        None => text.to_string(),
    }
}

fn stopword_set_from(config: &PipelineConfig) -> Result<BTreeSet<String>> {
    Ok(crate::features::stopword_set(&config.stopwords()?))
}

/// Fits the text vectorizer over the corpus.
pub fn featurize(config: &PipelineConfig, max_chars: Option<usize>) -> Result<()> {
    config.validate()?;
    let documents = crate::corpus::read_corpus(&config.paths.corpus_dir)?;
    if documents.is_empty() {
        return Err(Error::data("corpus is empty; run `crawl` and `clean` first"));
    }
    let max_chars = effective_max_chars(config, max_chars);
    let texts: Vec<String> = documents
        .iter()
        .map(|d| truncate_chars(&d.text, max_chars))
        .collect();
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    let stopwords = stopword_set_from(config)?;
    let (vectorizer, fit_report) =
        crate::features::Vectorizer::fit(&refs, config.vectorizer.dim, stopwords, config.seed)?;
    ensure_dir(&config.paths.output_dir)?;
    let v_path = config.paths.output_dir.join("vectorizer.json");
    vectorizer.save(&v_path)?;
    let r_path = config.paths.output_dir.join("vectorizer_fit_report.json");
    let json = serde_json::to_string_pretty(&fit_report)
        .map_err(|e| Error::data(format!("serialize fit report: {e}")))?;
    std::fs::write(&r_path, json + "\n").map_err(|e| Error::io(&r_path, e))?;
    println!(
        "featurize: {} documents, dim {}, {} occupied buckets -> {}",
        fit_report.documents,
        fit_report.dim,
        fit_report.occupied_buckets,
        v_path.display()
    );
    Ok(())
}

/// Survey-side dataset: scaled feature vectors and index targets.
fn survey_dataset(config: &PipelineConfig, schema: &SurveySchema) -> Result<Vec<(Vec<f64>, f64)>> {
    let records = crate::survey::load_surveys(&config.paths.surveys, schema)?;
    let scores_path = config.paths.output_dir.join("dti_scores.csv");
    if !scores_path.exists() {
        return Err(Error::data(format!(
            "{} not found; run `index` first",
            scores_path.display()
        )));
    }
    let labels = crate::score::read_scores_csv(&scores_path)?;
    let mut data = Vec::with_capacity(records.len());
    for record in &records {
        let target = labels.get(&record.org_id).copied().ok_or_else(|| {
            Error::data(format!("no index value for {} in {}", record.org_id, scores_path.display()))
        })?;
        data.push((to_feature_vector(record, schema, config.impute), target));
    }
    Ok(data)
}

/// Text-side dataset: tf-idf vectors for labeled corpus documents.
fn text_dataset(
    config: &PipelineConfig,
    max_chars: Option<usize>,
) -> Result<(Vec<(Vec<f64>, f64)>, usize)> {
    let documents = crate::corpus::read_corpus(&config.paths.corpus_dir)?;
    let v_path = config.paths.output_dir.join("vectorizer.json");
    if !v_path.exists() {
        return Err(Error::data(format!(
            "{} not found; run `featurize` first",
            v_path.display()
        )));
    }
    let stopwords = stopword_set_from(config)?;
    let vectorizer = crate::features::Vectorizer::load(&v_path, stopwords)?;
    let max_chars = effective_max_chars(config, max_chars);
    let labeled: Vec<&CorpusDocument> =
        documents.iter().filter(|d| d.dti_label.is_some()).collect();
    let skipped = documents.len() - labeled.len();
    if skipped > 0 {
        eprintln!("note: {skipped} unlabeled documents excluded from the text dataset");
    }
    if labeled.is_empty() {
        return Err(Error::data(
            "no labeled corpus documents; run `index` before `clean`",
        ));
    }
    let data = labeled
        .iter()
        .map(|d| {
            let text = truncate_chars(&d.text, max_chars);
            (vectorizer.transform(&text), d.dti_label.unwrap())
        })
        .collect();
    Ok((data, vectorizer.dim()))
}

/// Cross-validates per the configured protocol, then trains the final
/// model on the full dataset.
fn train_and_report(
    config: &PipelineConfig,
    data: &[(Vec<f64>, f64)],
    input_dim: usize,
    tag: &str,
) -> Result<()> {
    let mut layer_sizes = vec![input_dim];
    layer_sizes.extend(&config.hidden_layers);
    layer_sizes.push(1);

    let cfg = TrainConfig {
        seed: config.seed,
        ..config.train.clone()
    };
    let factory =
        |_fold: usize, seed: u64| -> Result<MlpModel> { MlpModel::init(&layer_sizes, seed) };

    let report = run_protocol(config, data, &factory, &cfg)?;
    print!("{}", report.render_table());

    let mut model = MlpModel::init(&layer_sizes, cfg.seed)?;
    let trace = train(&mut model, data, &cfg)?;

    ensure_dir(&config.paths.output_dir)?;
    let model_path = config.paths.output_dir.join(format!("model_{tag}.json"));
    model.save(&model_path, Some(&cfg))?;
    let loss_path = config.paths.output_dir.join(format!("train_{tag}_loss.csv"));
    let mut loss_csv = String::from("epoch,mse\n");
    for (epoch, mse) in trace.iter().enumerate() {
        loss_csv.push_str(&format!("{epoch},{mse}\n"));
    }
    std::fs::write(&loss_path, loss_csv).map_err(|e| Error::io(&loss_path, e))?;
    let metrics_path = config
        .paths
        .output_dir
        .join(format!("train_{tag}_metrics.json"));
    write_report_json(&metrics_path, &report)?;
    println!(
        "train-{tag}: {} params -> {}",
        model.stored_param_count(),
        model_path.display()
    );
    Ok(())
}

fn run_protocol(
    config: &PipelineConfig,
    data: &[(Vec<f64>, f64)],
    factory: &crate::eval::ModelFactory<'_>,
    cfg: &TrainConfig,
) -> Result<EvalReport> {
    match config.eval.protocol {
        EvalProtocol::Kfold => {
            let plan = crate::eval::make_folds(data.len(), config.eval.k, config.seed)?;
            crate::eval::cross_validate(data, factory, cfg, &plan)
        }
        EvalProtocol::Holdout => {
            let (train_idx, test_idx) =
                crate::eval::holdout_split(data.len(), config.eval.test_fraction, config.seed)?;
            crate::eval::evaluate_holdout(
                data,
                &train_idx,
                &test_idx,
                factory,
                cfg,
                format!(
                    "holdout {:.0}% test (seed {})",
                    config.eval.test_fraction * 100.0,
                    config.seed
                ),
            )
        }
    }
}

fn write_report_json(path: &Path, report: &EvalReport) -> Result<()> {
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| Error::data(format!("serialize eval report: {e}")))?;
    std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
}

pub fn train_survey(config: &PipelineConfig) -> Result<()> {
    let schema = config.validate()?;
    let data = survey_dataset(config, &schema)?;
    train_and_report(config, &data, schema.len(), "survey")
}

pub fn train_text(config: &PipelineConfig, max_chars: Option<usize>) -> Result<()> {
    config.validate()?;
    let (data, dim) = text_dataset(config, max_chars)?;
    train_and_report(config, &data, dim, "text")
}

/// Runs the configured evaluation protocol on the chosen source without
/// persisting any model.
pub fn evaluate(
    config: &PipelineConfig,
    source_flag: Option<DataSource>,
    max_chars: Option<usize>,
) -> Result<()> {
    let schema = config.validate()?;
    let source = source_flag.unwrap_or(config.eval.source);
    let (data, input_dim) = match source {
        DataSource::Survey => {
            let data = survey_dataset(config, &schema)?;
            (data, schema.len())
        }
        DataSource::Text => text_dataset(config, max_chars)?,
    };
    let mut layer_sizes = vec![input_dim];
    layer_sizes.extend(&config.hidden_layers);
    layer_sizes.push(1);
    let cfg = TrainConfig {
        seed: config.seed,
        ..config.train.clone()
    };
    let factory =
        |_fold: usize, seed: u64| -> Result<MlpModel> { MlpModel::init(&layer_sizes, seed) };
    let mut report = run_protocol(config, &data, &factory, &cfg)?;
    report.protocol = format!(
        "{} on {} data",
        report.protocol,
        match source {
            DataSource::Survey => "survey",
            DataSource::Text => "text",
        }
    );
    print!("{}", report.render_table());
    ensure_dir(&config.paths.output_dir)?;
    let path = config.paths.output_dir.join("eval_report.json");
    write_report_json(&path, &report)?;
    println!("evaluate -> {}", path.display());
    Ok(())
}

pub fn kpis(config: &PipelineConfig) -> Result<()> {
    let schema = config.validate()?;
    let records = crate::survey::load_surveys(&config.paths.surveys, &schema)?;
    let suite = crate::kpi::kpi_suite(&records, &config.kpis, &schema, config.kpi_missing)?;
    ensure_dir(&config.paths.output_dir)?;
    crate::kpi::write_kpi_json(config.paths.output_dir.join("kpis.json"), &suite)?;
    crate::kpi::write_kpi_csv(config.paths.output_dir.join("kpis.csv"), &suite)?;
    let missing: usize = suite.iter().map(|k| k.missing).sum();
    if missing > 0 {
        eprintln!("kpis: coverage note: {missing} missing responses across all indicators");
    }
    println!(
        "kpis: {} indicators -> {}",
        suite.len(),
        config.paths.output_dir.join("kpis.json").display()
    );
    Ok(())
}

pub fn readiness(config: &PipelineConfig) -> Result<()> {
    let schema = config.validate()?;
    let records = crate::survey::load_surveys(&config.paths.surveys, &schema)?;
    // schema compatibility was checked in validate()
    let report = crate::readiness::gap_report(&records, &config.sensor_mapping)?;
    ensure_dir(&config.paths.output_dir)?;
    crate::readiness::write_readiness_json(
        config.paths.output_dir.join("readiness.json"),
        &report,
    )?;
    crate::readiness::write_readiness_csv(config.paths.output_dir.join("readiness.csv"), &report)?;
    println!(
        "readiness: {} organizations -> {}",
        report.per_org.len(),
        config.paths.output_dir.join("readiness.json").display()
    );
    Ok(())
}

/// Renders the HTML bundle from the same pure computations the exports
/// use, so report numbers always match the machine-readable files.
pub fn report(config: &PipelineConfig) -> Result<()> {
    let schema = config.validate()?;
    let records = crate::survey::load_surveys(&config.paths.surveys, &schema)?;
    let dti = score_all(&records, config)?;
    let kpis = crate::kpi::kpi_suite(&records, &config.kpis, &schema, config.kpi_missing)?;
    let readiness = crate::readiness::gap_report(&records, &config.sensor_mapping)?;
    let inputs = crate::report::ReportInputs {
        kpis: &kpis,
        dti: &dti,
        readiness: Some(&readiness),
    };
    let out_dir = config.paths.output_dir.join("report");
    crate::report::render_report(&inputs, &out_dir)?;
    println!("report -> {}", out_dir.join("index.html").display());
    Ok(())
}

/// The four-phase chain. Corpus phases are skipped (with a note) when no
/// site list is configured; any failure stops the chain.
pub fn run_all(config: &PipelineConfig, max_chars: Option<usize>) -> Result<()> {
    ingest(config)?;
    index(config)?;
    let has_sites = config.paths.sites.is_some();
    if has_sites {
        crawl(config)?;
        clean(config)?;
        featurize(config, max_chars)?;
    } else {
        println!("run-all: no paths.sites configured; skipping crawl/clean/featurize/train-text");
    }
    train_survey(config)?;
    if has_sites {
        train_text(config, max_chars)?;
    }
    evaluate(config, None, max_chars)?;
    kpis(config)?;
    readiness(config)?;
    report(config)?;
    println!("run-all: complete");
    Ok(())
}

/// Paths whose contents are a pure function of config + inputs (used by
/// determinism checks): everything under output_dir, plus the corpus
/// docs and manifest. The fetch log and raw crawl store carry timing
/// information and are excluded.
pub fn deterministic_outputs(config: &PipelineConfig) -> Vec<PathBuf> {
    vec![
        config.paths.output_dir.clone(),
        config.paths.corpus_dir.join("docs"),
        config.paths.corpus_dir.join("manifest.json"),
    ]
}
