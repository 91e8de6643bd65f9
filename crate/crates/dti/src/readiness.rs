//! Sensor-readiness scoring over five fixed categories.
//!
//! Scores are a proxy: means of mapped digital-service indicators, not
//! actual sensor inventories. Every export repeats that caveat.

use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonfmt::{json_escape, score_string};
use crate::survey::{SurveyRecord, SurveySchema, RESPONSE_MAX};

/// Caveat line carried verbatim in every readiness export header.
pub const READINESS_CAVEAT: &str = "Readiness scores are a proxy computed from \
digital-service survey indicators, not from actual sensor inventories.";

/// The five sensor application domains. The set is closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorCategory {
    TrafficMobility,
    RiskSafety,
    EnvironmentalHealth,
    EnergyManagement,
    WasteCleanliness,
}

impl SensorCategory {
    pub const ALL: [SensorCategory; 5] = [
        SensorCategory::TrafficMobility,
        SensorCategory::RiskSafety,
        SensorCategory::EnvironmentalHealth,
        SensorCategory::EnergyManagement,
        SensorCategory::WasteCleanliness,
    ];

    /// Human-readable category name.
    pub fn display_name(self) -> &'static str {
        match self {
            SensorCategory::TrafficMobility => "Traffic and Mobility Control",
            SensorCategory::RiskSafety => "Risk and Safety Monitoring",
            SensorCategory::EnvironmentalHealth => "Environmental Health Surveillance",
            SensorCategory::EnergyManagement => "Energy Monitoring and Management",
            SensorCategory::WasteCleanliness => "Urban Cleanliness and Waste Management",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            SensorCategory::TrafficMobility => "traffic_mobility",
            SensorCategory::RiskSafety => "risk_safety",
            SensorCategory::EnvironmentalHealth => "environmental_health",
            SensorCategory::EnergyManagement => "energy_management",
            SensorCategory::WasteCleanliness => "waste_cleanliness",
        }
    }
}

pub type SensorMapping = IndexMap<SensorCategory, Vec<String>>;

/// Checks that every category is mapped to at least one existing field.
pub fn validate_sensor_mapping(mapping: &SensorMapping, schema: &SurveySchema) -> Result<()> {
    for category in SensorCategory::ALL {
        match mapping.get(&category) {
            Some(fields) if !fields.is_empty() => {
                for field in fields {
                    if !schema.contains(field) {
                        return Err(Error::validation(format!(
                            "sensor category {:?} references unknown field {field:?}",
                            category.display_name()
                        )));
                    }
                }
            }
            _ => {
                return Err(Error::validation(format!(
                    "sensor category {:?} has no mapped fields",
                    category.display_name()
                )))
            }
        }
    }
    Ok(())
}

/// Per-organization scores: 100 x mean(response/4) over the category's
/// non-missing mapped fields; 0 when every mapped field is missing.
pub fn readiness(
    record: &SurveyRecord,
    mapping: &SensorMapping,
) -> Result<IndexMap<SensorCategory, f64>> {
    let mut scores = IndexMap::with_capacity(5);
    for category in SensorCategory::ALL {
        let fields = mapping.get(&category).ok_or_else(|| {
            Error::validation(format!(
                "sensor category {:?} is not mapped",
                category.display_name()
            ))
        })?;
        if fields.is_empty() {
            return Err(Error::validation(format!(
                "sensor category {:?} has no mapped fields",
                category.display_name()
            )));
        }
        let values: Vec<f64> = fields
            .iter()
            .filter_map(|f| record.response(f))
            .map(|v| f64::from(v) / f64::from(RESPONSE_MAX))
            .collect();
        let score = if values.is_empty() {
            0.0
        } else {
            100.0 * values.iter().sum::<f64>() / values.len() as f64
        };
        scores.insert(category, score);
    }
    Ok(scores)
}

/// One entry of the ascending gap ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapEntry {
    pub org_id: String,
    pub category: SensorCategory,
    pub score: f64,
}

/// Dataset-wide readiness report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadinessReport {
    pub caveat: String,
    pub per_org: IndexMap<String, IndexMap<SensorCategory, f64>>,
    pub dataset_means: IndexMap<SensorCategory, f64>,
    /// Ascending by score, ties broken on (org_id, category).
    pub gaps: Vec<GapEntry>,
}

/// Scores every record and ranks the weakest (org, category) pairs first.
pub fn gap_report(records: &[SurveyRecord], mapping: &SensorMapping) -> Result<ReadinessReport> {
    if records.is_empty() {
        return Err(Error::validation("gap report over an empty dataset"));
    }
    let mut per_org = IndexMap::with_capacity(records.len());
    for record in records {
        per_org.insert(record.org_id.clone(), readiness(record, mapping)?);
    }
    let mut dataset_means = IndexMap::with_capacity(5);
    for category in SensorCategory::ALL {
        let sum: f64 = per_org.values().map(|scores| scores[&category]).sum();
        dataset_means.insert(category, sum / per_org.len() as f64);
    }
    let mut gaps: Vec<GapEntry> = per_org
        .iter()
        .flat_map(|(org, scores)| {
            scores.iter().map(|(category, score)| GapEntry {
                org_id: org.clone(),
                category: *category,
                score: *score,
            })
        })
        .collect();
    gaps.sort_by(|a, b| {
        a.score
            .total_cmp(&b.score)
            .then_with(|| a.org_id.cmp(&b.org_id))
            .then_with(|| a.category.cmp(&b.category))
    });
    Ok(ReadinessReport {
        caveat: READINESS_CAVEAT.to_string(),
        per_org,
        dataset_means,
        gaps,
    })
}

/// Readiness JSON export; scores are written with the same two-decimal
/// rendering the HTML report uses.
pub fn write_readiness_json(path: impl AsRef<Path>, report: &ReadinessReport) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, readiness_json_string(report)).map_err(|e| Error::io(path, e))
}

pub fn readiness_json_string(report: &ReadinessReport) -> String {
    let mut out = String::from("{\n");
    out.push_str(&format!("  \"caveat\": \"{}\",\n", json_escape(&report.caveat)));
    out.push_str("  \"per_org\": {\n");
    for (i, (org, scores)) in report.per_org.iter().enumerate() {
        let body = SensorCategory::ALL
            .iter()
            .map(|c| format!("\"{}\": {}", c.key(), score_string(scores[c])))
            .collect::<Vec<_>>()
            .join(", ");
        out.push_str(&format!("    \"{}\": {{{body}}}", json_escape(org)));
        out.push_str(if i + 1 < report.per_org.len() { ",\n" } else { "\n" });
    }
    out.push_str("  },\n  \"dataset_means\": {");
    let means = SensorCategory::ALL
        .iter()
        .map(|c| format!("\"{}\": {}", c.key(), score_string(report.dataset_means[c])))
        .collect::<Vec<_>>()
        .join(", ");
    out.push_str(&means);
    out.push_str("},\n  \"gaps\": [\n");
    for (i, gap) in report.gaps.iter().enumerate() {
        out.push_str(&format!(
            "    {{\"org_id\": \"{}\", \"category\": \"{}\", \"score\": {}}}",
            json_escape(&gap.org_id),
            gap.category.key(),
            score_string(gap.score)
        ));
        out.push_str(if i + 1 < report.gaps.len() { ",\n" } else { "\n" });
    }
    out.push_str("  ]\n}\n");
    out
}

/// CSV mirror: one row per (org, category), caveat as a comment line.
pub fn write_readiness_csv(path: impl AsRef<Path>, report: &ReadinessReport) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    out.push_str(&format!("# {READINESS_CAVEAT}\n"));
    out.push_str("org_id,category,score\n");
    for (org, scores) in &report.per_org {
        for category in SensorCategory::ALL {
            out.push_str(&format!(
                "{org},{},{}\n",
                category.key(),
                score_string(scores[&category])
            ));
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use indexmap::IndexMap;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn mapping() -> SensorMapping {
        IndexMap::from([
            (
                SensorCategory::TrafficMobility,
                vec!["Traffic Management".to_string(), "Transportation".to_string()],
            ),
            (SensorCategory::RiskSafety, vec!["Local Police".to_string()]),
            (
                SensorCategory::EnvironmentalHealth,
                vec!["GIS".to_string()],
            ),
            (
                SensorCategory::EnergyManagement,
                vec!["Buildings".to_string()],
            ),
            (
                SensorCategory::WasteCleanliness,
                vec!["Markets".to_string()],
            ),
        ])
    }

    fn fields() -> Vec<String> {
        vec![
            "Traffic Management".into(),
            "Transportation".into(),
            "Local Police".into(),
            "GIS".into(),
            "Buildings".into(),
            "Markets".into(),
        ]
    }

    fn record(org: &str, value: u8) -> SurveyRecord {
        SurveyRecord {
            org_id: org.into(),
            responses: fields().into_iter().map(|f| (f, Some(value))).collect(),
            year: None,
            population_stratum: None,
        }
    }

    #[test]
    fn extremes() {
        let zeros = readiness(&record("a", 0), &mapping()).unwrap();
        assert!(zeros.values().all(|s| *s == 0.0));
        let maxed = readiness(&record("a", 4), &mapping()).unwrap();
        assert!(maxed.values().all(|s| *s == 100.0));
    }

    #[test]
    fn mixed_mean() {
        let mut r = record("a", 0);
        r.responses.insert("Traffic Management".into(), Some(2));
        r.responses.insert("Transportation".into(), Some(4));
        let scores = readiness(&r, &mapping()).unwrap();
        assert_eq!(scores[&SensorCategory::TrafficMobility], 75.0);
    }

    #[test]
    fn exactly_five_categories_always() {
        let scores = readiness(&record("a", 2), &mapping()).unwrap();
        assert_eq!(scores.len(), 5);
        let report = gap_report(&[record("a", 2), record("b", 3)], &mapping()).unwrap();
        for scores in report.per_org.values() {
            assert_eq!(scores.len(), 5);
        }
        assert_eq!(report.gaps.len(), 10);
    }

    #[test]
    fn unmapped_category_is_an_error() {
        let mut m = mapping();
        m.shift_remove(&SensorCategory::WasteCleanliness);
        assert!(readiness(&record("a", 1), &m).is_err());
    }

    #[test]
    fn single_all_zero_org_yields_five_zero_gaps() {
        let report = gap_report(&[record("a", 0)], &mapping()).unwrap();
        assert_eq!(report.gaps.len(), 5);
        assert!(report.gaps.iter().all(|g| g.score == 0.0));
        // ties broken by category order for the same org
        let cats: Vec<SensorCategory> = report.gaps.iter().map(|g| g.category).collect();
        assert_eq!(cats, SensorCategory::ALL.to_vec());
    }

    #[test]
    fn gaps_sorted_ascending() {
        let report = gap_report(&[record("alpha", 1), record("beta", 3)], &mapping()).unwrap();
        for pair in report.gaps.windows(2) {
            assert!(pair[0].score <= pair[1].score);
        }
        assert_eq!(report.gaps[0].org_id, "alpha");
    }

    #[test]
    fn dataset_means_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let records: Vec<SurveyRecord> = (0..40)
            .map(|i| {
                let mut r = record(&format!("m{i}"), 0);
                for f in fields() {
                    let v = if rng.random_bool(0.1) {
                        None
                    } else {
                        Some(rng.random_range(0..=4u8))
                    };
                    r.responses.insert(f, v);
                }
                r
            })
            .collect();
        let report = gap_report(&records, &mapping()).unwrap();
        for category in SensorCategory::ALL {
            let brute: f64 = records
                .iter()
                .map(|r| readiness(r, &mapping()).unwrap()[&category])
                .sum::<f64>()
                / records.len() as f64;
            assert!((report.dataset_means[&category] - brute).abs() <= 1e-12);
        }
    }

    #[test]
    fn exports_carry_the_caveat() {
        let report = gap_report(&[record("a", 2)], &mapping()).unwrap();
        let json = readiness_json_string(&report);
        assert!(json.contains(READINESS_CAVEAT));
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed["per_org"]["a"]["traffic_mobility"], 50.0);
    }
}
