//! Declarative pipeline configuration.
//!
//! One JSON file drives every subcommand. Sections that are omitted fall
//! back to the bundled defaults (schema, weights, mapping, stopwords,
//! KPI definitions, sensor mapping); paths are resolved relative to the
//! config file's directory. `--set key=value` overrides apply dotted
//! paths onto the raw JSON before deserialization, keeping runs
//! auditable from the command line alone.

use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::crawl::CrawlPolicy;
use crate::error::{Error, Result};
use crate::kpi::{KpiDefinition, MissingPolicy};
use crate::mlp::TrainConfig;
use crate::readiness::SensorMapping;
use crate::score::{DimensionMapping, WeightConfig};
use crate::survey::ImputePolicy;

/// File locations. `schema` and `surveys` are required; the rest enable
/// optional phases.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Paths {
    pub schema: PathBuf,
    pub surveys: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gazetteer: Option<PathBuf>,
    /// Tab-separated site list: org_id<TAB>seed_url. Without it the
    /// corpus phases are skipped.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sites: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stopwords: Option<PathBuf>,
    pub corpus_dir: PathBuf,
    pub output_dir: PathBuf,
}

/// Text-vectorizer settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct VectorizerConfig {
    pub dim: usize,
    /// Optional truncation of cleaned text before tokenization.
    pub max_chars: Option<usize>,
}

impl Default for VectorizerConfig {
    fn default() -> Self {
        VectorizerConfig {
            dim: crate::features::DEFAULT_DIM,
            max_chars: None,
        }
    }
}

/// Which evaluation protocol `evaluate` runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalProtocol {
    #[default]
    Kfold,
    Holdout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    #[default]
    Survey,
    Text,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub protocol: EvalProtocol,
    pub k: usize,
    pub test_fraction: f64,
    pub source: DataSource,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            protocol: EvalProtocol::Kfold,
            k: 10,
            test_fraction: 0.25,
            source: DataSource::Survey,
        }
    }
}

/// The whole pipeline configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Global seed; required so no run ever depends on the wall clock.
    pub seed: u64,
    pub paths: Paths,
    #[serde(default = "WeightConfig::default_layout")]
    pub weights: WeightConfig,
    #[serde(default = "crate::defaults::default_dimension_mapping")]
    pub mapping: DimensionMapping,
    #[serde(default)]
    pub crawl: CrawlPolicy,
    #[serde(default)]
    pub train: TrainConfig,
    /// Hidden layer sizes; the input width comes from the data source.
    #[serde(default = "default_hidden_layers")]
    pub hidden_layers: Vec<usize>,
    #[serde(default)]
    pub vectorizer: VectorizerConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default = "crate::defaults::default_kpi_definitions")]
    pub kpis: Vec<KpiDefinition>,
    #[serde(default = "crate::defaults::default_sensor_mapping")]
    pub sensor_mapping: SensorMapping,
    #[serde(default)]
    pub impute: ImputePolicy,
    #[serde(default)]
    pub kpi_missing: MissingPolicy,
}

fn default_hidden_layers() -> Vec<usize> {
    crate::mlp::DEFAULT_HIDDEN.to_vec()
}

impl PipelineConfig {
    /// Loads a config file and applies `--set` overrides (dotted JSON
    /// paths) before deserialization.
    pub fn load(path: impl AsRef<Path>, overrides: &[(String, String)]) -> Result<Self> {
        let path = path.as_ref();
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut value: serde_json::Value =
            serde_json::from_str(&raw).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: e.line(),
                msg: e.to_string(),
            })?;
        for (key, raw_value) in overrides {
            apply_override(&mut value, key, raw_value)?;
        }
        let mut config: PipelineConfig =
            serde_json::from_value(value).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: 0,
                msg: e.to_string(),
            })?;
        config.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(config)
    }

    /// Makes relative paths relative to the config file location.
    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&p);
            }
        };
        fix(&mut self.paths.schema);
        fix(&mut self.paths.surveys);
        fix(&mut self.paths.corpus_dir);
        fix(&mut self.paths.output_dir);
        if let Some(p) = self.paths.gazetteer.as_mut() {
            fix(p);
        }
        if let Some(p) = self.paths.sites.as_mut() {
            fix(p);
        }
        if let Some(p) = self.paths.stopwords.as_mut() {
            fix(p);
        }
    }

    /// Validates everything that can be checked before running: input
    /// files exist, weights and mappings are consistent with the schema.
    pub fn validate(&self) -> Result<crate::survey::SurveySchema> {
        for (name, path) in [
            ("schema", Some(&self.paths.schema)),
            ("surveys", Some(&self.paths.surveys)),
            ("gazetteer", self.paths.gazetteer.as_ref()),
            ("sites", self.paths.sites.as_ref()),
            ("stopwords", self.paths.stopwords.as_ref()),
        ] {
            if let Some(path) = path {
                if !path.exists() {
                    return Err(Error::validation(format!(
                        "configured {name} file does not exist: {}",
                        path.display()
                    )));
                }
            }
        }
        let schema = crate::survey::load_schema(&self.paths.schema)?;
        self.weights.validate()?;
        self.mapping.validate(&schema, &self.weights)?;
        crate::readiness::validate_sensor_mapping(&self.sensor_mapping, &schema)?;
        for def in &self.kpis {
            if !schema.contains(&def.field) {
                return Err(Error::validation(format!(
                    "KPI {:?} references unknown field {:?}",
                    def.name, def.field
                )));
            }
        }
        self.train.validate()?;
        if self.eval.k < 2 {
            return Err(Error::validation("eval.k must be at least 2"));
        }
        if !(self.eval.test_fraction > 0.0 && self.eval.test_fraction < 1.0) {
            return Err(Error::validation(
                "eval.test_fraction must lie strictly between 0 and 1",
            ));
        }
        Ok(schema)
    }

    /// Stopwords from the configured file, or the bundled Spanish list.
    pub fn stopwords(&self) -> Result<Vec<String>> {
        match &self.paths.stopwords {
            Some(path) => {
                let raw =
                    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                Ok(crate::defaults::parse_stopwords(&raw))
            }
            None => Ok(crate::defaults::default_stopwords()),
        }
    }
}

/// Sets `key` (dotted path) to `value` inside the raw JSON. Values parse
/// as JSON when possible, falling back to a plain string.
fn apply_override(root: &mut serde_json::Value, key: &str, raw_value: &str) -> Result<()> {
    let parsed: serde_json::Value = serde_json::from_str(raw_value)
        .unwrap_or_else(|_| serde_json::Value::String(raw_value.to_string()));
    let mut cursor = root;
    let segments: Vec<&str> = key.split('.').collect();
    for (i, segment) in segments.iter().enumerate() {
        if segment.is_empty() {
            return Err(Error::validation(format!("bad override key {key:?}")));
        }
        let object = cursor.as_object_mut().ok_or_else(|| {
            Error::validation(format!(
                "override {key:?}: segment {segment:?} is not an object"
            ))
        })?;
        if i + 1 == segments.len() {
            object.insert(segment.to_string(), parsed);
            return Ok(());
        }
        cursor = object
            .entry(segment.to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    unreachable!("loop always returns on the last segment")
}

/// Loads the tab-separated site list: `org_id<TAB>seed_url`.
pub fn load_sites(path: impl AsRef<Path>) -> Result<Vec<(String, String)>> {
    let path = path.as_ref();
    let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut sites = Vec::new();
    for (idx, line) in raw.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (org, url) = line.split_once('\t').ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            msg: "expected org_id<TAB>seed_url".into(),
        })?;
        sites.push((org.trim().to_string(), url.trim().to_string()));
    }
    Ok(sites)
}

/// Table of (org_id -> label) used to attach labels to corpus documents.
pub type LabelTable = IndexMap<String, f64>;
