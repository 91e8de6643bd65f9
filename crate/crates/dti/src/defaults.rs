//! Bundled default configuration data.
//!
//! Everything here is editable configuration shipped for convenience:
//! the 67-field survey schema, a reconstructed question-to-dimension
//! mapping, a Spanish stopword list, reconstructed KPI definitions, and
//! a proxy sensor-category mapping. Files live under `data/` and are
//! embedded so the library works without path setup.

use indexmap::IndexMap;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::kpi::KpiDefinition;
use crate::readiness::SensorCategory;
use crate::score::{DimensionMapping, WeightConfig};
use crate::survey::SurveySchema;

pub const DEFAULT_SCHEMA: &str = include_str!("../data/default_schema.txt");
pub const DEFAULT_DIMENSION_MAPPING: &str = include_str!("../data/dimension_mapping.json");
pub const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords_es.txt");
pub const DEFAULT_KPI_DEFINITIONS: &str = include_str!("../data/kpi_definitions.json");
pub const DEFAULT_SENSOR_MAPPING: &str = include_str!("../data/sensor_mapping.json");

pub fn default_schema() -> SurveySchema {
    crate::survey::parse_schema(DEFAULT_SCHEMA, "data/default_schema.txt")
        .expect("bundled schema is valid")
}

pub fn default_weights() -> WeightConfig {
    WeightConfig::default_layout()
}

#[derive(Deserialize)]
struct MappingFile {
    #[expect(dead_code)]
    #[serde(default)]
    comment: String,
    assignments: IndexMap<String, Vec<String>>,
}

pub fn default_dimension_mapping() -> DimensionMapping {
    parse_dimension_mapping(DEFAULT_DIMENSION_MAPPING).expect("bundled mapping is valid")
}

pub fn parse_dimension_mapping(json: &str) -> Result<DimensionMapping> {
    let file: MappingFile = serde_json::from_str(json)
        .map_err(|e| Error::validation(format!("dimension mapping: {e}")))?;
    Ok(DimensionMapping {
        assignments: file.assignments,
    })
}

/// Stopwords, one per line, `#` comments allowed.
pub fn parse_stopwords(raw: &str) -> Vec<String> {
    raw.lines()
        .map(|l| match l.find('#') {
            Some(pos) => l[..pos].trim(),
            None => l.trim(),
        })
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

pub fn default_stopwords() -> Vec<String> {
    parse_stopwords(DEFAULT_STOPWORDS)
}

pub fn default_kpi_definitions() -> Vec<KpiDefinition> {
    serde_json::from_str(DEFAULT_KPI_DEFINITIONS).expect("bundled kpi definitions are valid")
}

#[derive(Deserialize)]
struct SensorMappingFile {
    #[expect(dead_code)]
    #[serde(default)]
    comment: String,
    assignments: IndexMap<SensorCategory, Vec<String>>,
}

pub fn default_sensor_mapping() -> IndexMap<SensorCategory, Vec<String>> {
    parse_sensor_mapping(DEFAULT_SENSOR_MAPPING).expect("bundled sensor mapping is valid")
}

pub fn parse_sensor_mapping(json: &str) -> Result<IndexMap<SensorCategory, Vec<String>>> {
    let file: SensorMappingFile = serde_json::from_str(json)
        .map_err(|e| Error::validation(format!("sensor mapping: {e}")))?;
    Ok(file.assignments)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_defaults_validate_against_each_other() {
        let schema = default_schema();
        let weights = default_weights();
        let mapping = default_dimension_mapping();
        weights.validate().unwrap();
        mapping.validate(&schema, &weights).unwrap();
        // all 67 fields are assigned to some dimension
        let assigned: usize = mapping.assignments.values().map(Vec::len).sum();
        assert_eq!(assigned, schema.len());
    }

    #[test]
    fn bundled_kpis_reference_schema_fields() {
        let schema = default_schema();
        for def in default_kpi_definitions() {
            assert!(schema.contains(&def.field), "unknown field {}", def.field);
        }
    }

    #[test]
    fn bundled_sensor_mapping_covers_all_five_categories() {
        let schema = default_schema();
        let mapping = default_sensor_mapping();
        assert_eq!(mapping.len(), 5);
        for fields in mapping.values() {
            assert!(!fields.is_empty());
            for f in fields {
                assert!(schema.contains(f), "unknown field {f}");
            }
        }
    }
}
