//! Two-layer weighted index computation.
//!
//! Dimension scores are unweighted means of normalized responses scaled
//! to 0..100; the composite value is their weighted sum under a core +
//! context weight layout whose layer sums are a declared contract
//! (default 70/30) and are never silently renormalized.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::survey::{SurveyRecord, SurveySchema, RESPONSE_MAX};

/// Layer-sum and share tolerance for weight validation.
pub const WEIGHT_TOLERANCE: f64 = 1e-9;

/// Assignment of schema fields to named dimensions. A field belongs to at
/// most one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionMapping {
    pub assignments: IndexMap<String, Vec<String>>,
}

impl DimensionMapping {
    /// Checks the mapping against a schema and the active weights:
    /// referenced fields exist, no field serves two dimensions, every
    /// weighted dimension has at least one field.
    pub fn validate(&self, schema: &SurveySchema, weights: &WeightConfig) -> Result<()> {
        let mut owner: IndexMap<&str, &str> = IndexMap::new();
        for (dim, fields) in &self.assignments {
            for field in fields {
                if !schema.contains(field) {
                    return Err(Error::validation(format!(
                        "dimension {dim:?} references unknown field {field:?}"
                    )));
                }
                if let Some(prev) = owner.insert(field, dim) {
                    return Err(Error::validation(format!(
                        "field {field:?} assigned to both {prev:?} and {dim:?}"
                    )));
                }
            }
        }
        for dim in weights.dimension_names() {
            match self.assignments.get(dim) {
                Some(fields) if !fields.is_empty() => {}
                _ => {
                    return Err(Error::validation(format!(
                        "weighted dimension {dim:?} has no assigned fields"
                    )))
                }
            }
        }
        Ok(())
    }
}

/// Core/context dimension weights. Within each layer the weights sum to
/// the layer share; shares sum to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightConfig {
    pub core_weights: IndexMap<String, f64>,
    pub context_weights: IndexMap<String, f64>,
    pub core_share: f64,
    pub context_share: f64,
}

impl WeightConfig {
    /// The published default layout: five core dimensions under a 0.70
    /// share and two context dimensions under 0.30.
    pub fn default_layout() -> Self {
        let core_weights = IndexMap::from([
            ("Communication Infrastructure".to_string(), 0.10),
            ("Backoffice".to_string(), 0.10),
            ("ICT Equipment".to_string(), 0.20),
            ("Digital Services".to_string(), 0.20),
            ("Strategic Planning".to_string(), 0.10),
        ]);
        let context_weights = IndexMap::from([
            ("Smart Cities".to_string(), 0.20),
            ("Smart Tourism Destination".to_string(), 0.10),
        ]);
        WeightConfig {
            core_weights,
            context_weights,
            core_share: 0.70,
            context_share: 0.30,
        }
    }

    /// All dimension names, core layer first, in declaration order.
    pub fn dimension_names(&self) -> impl Iterator<Item = &str> {
        self.core_weights
            .keys()
            .chain(self.context_weights.keys())
            .map(String::as_str)
    }

    pub fn weight_of(&self, dim: &str) -> Option<f64> {
        self.core_weights
            .get(dim)
            .or_else(|| self.context_weights.get(dim))
            .copied()
    }

    /// Rejects negative weights, layer sums off their share by more than
    /// [`WEIGHT_TOLERANCE`], shares not summing to 1, and duplicate
    /// dimension names across layers. Never repairs anything.
    pub fn validate(&self) -> Result<()> {
        for (dim, w) in self.core_weights.iter().chain(self.context_weights.iter()) {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::validation(format!(
                    "weight for dimension {dim:?} must be a nonnegative finite number, got {w}"
                )));
            }
        }
        for dim in self.core_weights.keys() {
            if self.context_weights.contains_key(dim) {
                return Err(Error::validation(format!(
                    "dimension {dim:?} appears in both layers"
                )));
            }
        }
        let core_sum: f64 = self.core_weights.values().sum();
        let context_sum: f64 = self.context_weights.values().sum();
        if (core_sum - self.core_share).abs() > WEIGHT_TOLERANCE {
            return Err(Error::validation(format!(
                "core weights sum to {core_sum}, expected core_share {}",
                self.core_share
            )));
        }
        if (context_sum - self.context_share).abs() > WEIGHT_TOLERANCE {
            return Err(Error::validation(format!(
                "context weights sum to {context_sum}, expected context_share {}",
                self.context_share
            )));
        }
        if (self.core_share + self.context_share - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::validation(format!(
                "layer shares sum to {}, expected 1.0",
                self.core_share + self.context_share
            )));
        }
        Ok(())
    }
}

/// A computed composite score with its per-dimension breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtiScore {
    pub value: f64,
    pub dimension_scores: IndexMap<String, f64>,
    /// Dimensions whose assigned fields were all missing (scored 0).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub low_coverage: Vec<String>,
}

/// Mean of normalized responses over a dimension's non-missing fields,
/// scaled to 0..100. All fields missing scores 0 and raises the warning
/// flag in the returned pair.
pub fn dimension_score(
    record: &SurveyRecord,
    dim: &str,
    mapping: &DimensionMapping,
) -> Result<(f64, bool)> {
    let fields = mapping
        .assignments
        .get(dim)
        .ok_or_else(|| Error::validation(format!("unknown dimension name {dim:?}")))?;
    let values: Vec<f64> = fields
        .iter()
        .filter_map(|f| record.response(f))
        .map(|v| f64::from(v) / f64::from(RESPONSE_MAX))
        .collect();
    if values.is_empty() {
        return Ok((0.0, true));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Ok((100.0 * mean, false))
}

/// Weighted two-layer composite over all configured dimensions.
///
/// Validates weights and mapping first and fails before any computation.
/// The raw weighted sum is clamped onto [0,100]; with validated weights
/// the clamp can move the value only by rounding error (well inside the
/// 1e-9 consistency invariant).
pub fn compute_dti(
    record: &SurveyRecord,
    mapping: &DimensionMapping,
    weights: &WeightConfig,
) -> Result<DtiScore> {
    weights.validate()?;
    mapping.validate_dimensions(weights)?;

    let mut dimension_scores = IndexMap::new();
    let mut low_coverage = Vec::new();
    let mut value = 0.0;
    for dim in weights.dimension_names() {
        let (score, all_missing) = dimension_score(record, dim, mapping)?;
        if all_missing {
            low_coverage.push(dim.to_string());
        }
        let w = weights.weight_of(dim).expect("dimension came from weights");
        value += w * score;
        dimension_scores.insert(dim.to_string(), score);
    }
    Ok(DtiScore {
        value: value.clamp(0.0, 100.0),
        dimension_scores,
        low_coverage,
    })
}

impl DimensionMapping {
    /// Mapping-side subset of `validate` that does not need the schema:
    /// every weighted dimension must have at least one assigned field.
    fn validate_dimensions(&self, weights: &WeightConfig) -> Result<()> {
        for dim in weights.dimension_names() {
            match self.assignments.get(dim) {
                Some(fields) if !fields.is_empty() => {}
                _ => {
                    return Err(Error::validation(format!(
                        "weighted dimension {dim:?} has no assigned fields"
                    )))
                }
            }
        }
        Ok(())
    }
}

/// Rescales the layer split while preserving within-layer weight ratios.
/// `new_core_share` must lie strictly inside (0,1). Passing the current
/// core share returns the configuration unchanged.
pub fn reweight(weights: &WeightConfig, new_core_share: f64) -> Result<WeightConfig> {
    if !(new_core_share > 0.0 && new_core_share < 1.0) {
        return Err(Error::validation(format!(
            "core share must lie strictly between 0 and 1, got {new_core_share}"
        )));
    }
    weights.validate()?;
    let new_context_share = 1.0 - new_core_share;
    let core_ratio = new_core_share / weights.core_share;
    let context_ratio = new_context_share / weights.context_share;
    Ok(WeightConfig {
        core_weights: weights
            .core_weights
            .iter()
            .map(|(k, w)| (k.clone(), w * core_ratio))
            .collect(),
        context_weights: weights
            .context_weights
            .iter()
            .map(|(k, w)| (k.clone(), w * context_ratio))
            .collect(),
        core_share: new_core_share,
        context_share: new_context_share,
    })
}

/// Writes the index table as delimited text: org_id, one column per
/// dimension (weight order), then the composite value. Scores are
/// reported at two decimals, matching the report bundle.
pub fn write_scores_csv(
    path: impl AsRef<std::path::Path>,
    rows: &[(String, DtiScore)],
    weights: &WeightConfig,
) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("org_id");
    for dim in weights.dimension_names() {
        out.push(',');
        // dimension names are plain identifiers; quote if a comma sneaks in
        if dim.contains(',') {
            out.push_str(&format!("\"{dim}\""));
        } else {
            out.push_str(dim);
        }
    }
    out.push_str(",dti\n");
    for (org, score) in rows {
        out.push_str(org);
        for dim in weights.dimension_names() {
            let s = score.dimension_scores.get(dim).copied().unwrap_or(0.0);
            out.push_str(&format!(",{}", crate::jsonfmt::score_string(s)));
        }
        out.push_str(&format!(",{}\n", crate::jsonfmt::score_string(score.value)));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads the org_id -> composite value column back from a scores table.
pub fn read_scores_csv(
    path: impl AsRef<std::path::Path>,
) -> Result<indexmap::IndexMap<String, f64>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| {
        Error::data(format!("open scores table {}: {e}", path.display()))
    })?;
    let headers = reader
        .headers()
        .map_err(|e| Error::data(e.to_string()))?
        .clone();
    let dti_col = headers
        .iter()
        .position(|h| h == "dti")
        .ok_or_else(|| Error::validation("scores table has no `dti` column".to_string()))?;
    let mut out = indexmap::IndexMap::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::data(e.to_string()))?;
        let org = row.get(0).unwrap_or("").to_string();
        let value: f64 = row
            .get(dti_col)
            .unwrap_or("")
            .parse()
            .map_err(|_| Error::validation(format!("bad dti value for {org}")))?;
        out.insert(org, value);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survey::SurveySchema;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn record_with(values: &[(&str, Option<u8>)]) -> SurveyRecord {
        SurveyRecord {
            org_id: "m1".into(),
            responses: values
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
            year: None,
            population_stratum: None,
        }
    }

    fn toy_setup() -> (SurveySchema, DimensionMapping, WeightConfig) {
        let schema = SurveySchema::new(vec!["a".into(), "b".into(), "c".into(), "d".into()]).unwrap();
        let mapping = DimensionMapping {
            assignments: IndexMap::from([
                ("core1".to_string(), vec!["a".to_string(), "b".to_string()]),
                ("core2".to_string(), vec!["c".to_string()]),
                ("ctx".to_string(), vec!["d".to_string()]),
            ]),
        };
        let weights = WeightConfig {
            core_weights: IndexMap::from([("core1".to_string(), 0.4), ("core2".to_string(), 0.3)]),
            context_weights: IndexMap::from([("ctx".to_string(), 0.3)]),
            core_share: 0.7,
            context_share: 0.3,
        };
        (schema, mapping, weights)
    }

    #[test]
    fn default_layout_is_valid_and_matches_published_weights() {
        let w = WeightConfig::default_layout();
        w.validate().unwrap();
        assert_eq!(w.weight_of("Communication Infrastructure"), Some(0.10));
        assert_eq!(w.weight_of("ICT Equipment"), Some(0.20));
        assert_eq!(w.weight_of("Smart Cities"), Some(0.20));
        assert_eq!(w.weight_of("Smart Tourism Destination"), Some(0.10));
        assert_eq!(w.core_share, 0.70);
        assert_eq!(w.context_share, 0.30);
    }

    #[test]
    fn dimension_score_handles_extremes_and_means() {
        let (_, mapping, _) = toy_setup();
        let zeros = record_with(&[("a", Some(0)), ("b", Some(0)), ("c", Some(0)), ("d", Some(0))]);
        assert_eq!(dimension_score(&zeros, "core1", &mapping).unwrap(), (0.0, false));
        let maxed = record_with(&[("a", Some(4)), ("b", Some(4)), ("c", Some(4)), ("d", Some(4))]);
        assert_eq!(dimension_score(&maxed, "core1", &mapping).unwrap(), (100.0, false));
        let mixed = record_with(&[("a", Some(1)), ("b", Some(3)), ("c", Some(0)), ("d", Some(0))]);
        assert_eq!(dimension_score(&mixed, "core1", &mapping).unwrap(), (50.0, false));
    }

    #[test]
    fn dimension_score_flags_all_missing_and_rejects_unknown() {
        let (_, mapping, _) = toy_setup();
        let gap = record_with(&[("a", None), ("b", None), ("c", Some(2)), ("d", Some(2))]);
        assert_eq!(dimension_score(&gap, "core1", &mapping).unwrap(), (0.0, true));
        assert!(dimension_score(&gap, "nope", &mapping).is_err());
    }

    #[test]
    fn compute_dti_extremes_are_exact() {
        let (_, mapping, weights) = toy_setup();
        let zeros = record_with(&[("a", Some(0)), ("b", Some(0)), ("c", Some(0)), ("d", Some(0))]);
        assert_eq!(compute_dti(&zeros, &mapping, &weights).unwrap().value, 0.0);
        let maxed = record_with(&[("a", Some(4)), ("b", Some(4)), ("c", Some(4)), ("d", Some(4))]);
        assert_eq!(compute_dti(&maxed, &mapping, &weights).unwrap().value, 100.0);
    }

    #[test]
    fn uniform_dimension_scores_pass_through() {
        // every response 2 -> every dimension 50 -> DTI 50 under any
        // weights summing to 1
        let (_, mapping, weights) = toy_setup();
        let mid = record_with(&[("a", Some(2)), ("b", Some(2)), ("c", Some(2)), ("d", Some(2))]);
        let score = compute_dti(&mid, &mapping, &weights).unwrap();
        assert!((score.value - 50.0).abs() < 1e-12);
        assert!(score.dimension_scores.values().all(|s| *s == 50.0));
    }

    #[test]
    fn invalid_weights_fail_before_computation() {
        let (_, mapping, mut weights) = toy_setup();
        weights.core_weights.insert("core1".into(), 0.5); // layer sum now 0.8
        let record = record_with(&[("a", Some(1)), ("b", Some(1)), ("c", Some(1)), ("d", Some(1))]);
        let err = compute_dti(&record, &mapping, &weights).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn negative_weight_rejected() {
        let mut w = WeightConfig::default_layout();
        w.core_weights.insert("Backoffice".into(), -0.1);
        w.core_weights.insert("Communication Infrastructure".into(), 0.3);
        assert!(w.validate().is_err());
    }

    #[test]
    fn mapping_validation_catches_unknown_double_and_empty() {
        let (schema, mut mapping, weights) = toy_setup();
        mapping
            .assignments
            .insert("core1".into(), vec!["a".into(), "zz".into()]);
        assert!(mapping.validate(&schema, &weights).is_err());

        let (schema, mut mapping, weights) = toy_setup();
        mapping
            .assignments
            .insert("core2".into(), vec!["a".into()]); // "a" already in core1
        assert!(mapping.validate(&schema, &weights).is_err());

        let (schema, mut mapping, weights) = toy_setup();
        mapping.assignments.insert("ctx".into(), vec![]);
        assert!(mapping.validate(&schema, &weights).is_err());
    }

    /// Randomized oracle comparison: straight-line dot product recomputed
    /// independently of `compute_dti`.
    #[test]
    fn matches_dot_product_oracle_on_randomized_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..1000 {
            let n_fields = rng.random_range(3..10usize);
            let fields: Vec<String> = (0..n_fields).map(|i| format!("f{i}")).collect();

            // random partition of fields into 2 core + 1..3 context dims
            let n_core = rng.random_range(1..3usize);
            let n_ctx = rng.random_range(1..3usize);
            let n_dims = (n_core + n_ctx).min(n_fields);
            let n_core = n_core.min(n_dims - 1).max(1);
            let n_ctx = n_dims - n_core;
            let mut owners: Vec<usize> = (0..n_fields)
                .map(|i| if i < n_dims { i } else { rng.random_range(0..n_dims) })
                .collect();
            owners.shuffle(&mut rng);
            let mut assignments: IndexMap<String, Vec<String>> = (0..n_dims)
                .map(|d| (format!("dim{d}"), Vec::new()))
                .collect();
            for (field, owner) in fields.iter().zip(&owners) {
                assignments[*owner].push(field.clone());
            }
            let mapping = DimensionMapping { assignments };

            let core_share = rng.random_range(0.2..0.8);
            let raw: Vec<f64> = (0..n_dims).map(|_| rng.random_range(0.05..1.0)).collect();
            let core_sum: f64 = raw[..n_core].iter().sum();
            let ctx_sum: f64 = raw[n_core..].iter().sum();
            let weights = WeightConfig {
                core_weights: (0..n_core)
                    .map(|d| (format!("dim{d}"), raw[d] / core_sum * core_share))
                    .collect(),
                context_weights: (n_core..n_dims)
                    .map(|d| (format!("dim{d}"), raw[d] / ctx_sum * (1.0 - core_share)))
                    .collect(),
                core_share,
                context_share: 1.0 - core_share,
            };

            let record = SurveyRecord {
                org_id: "r".into(),
                responses: fields
                    .iter()
                    .map(|f| {
                        let v = if rng.random_bool(0.1) {
                            None
                        } else {
                            Some(rng.random_range(0..=4u8))
                        };
                        (f.clone(), v)
                    })
                    .collect(),
                year: None,
                population_stratum: None,
            };

            let got = compute_dti(&record, &mapping, &weights).unwrap();

            // independent straight-line oracle
            let mut oracle = 0.0;
            for (dim, fields) in &mapping.assignments {
                let mut sum = 0.0;
                let mut count = 0usize;
                for f in fields {
                    if let Some(Some(v)) = record.responses.get(f) {
                        sum += f64::from(*v) / 4.0;
                        count += 1;
                    }
                }
                let score = if count == 0 { 0.0 } else { 100.0 * sum / count as f64 };
                oracle += weights.weight_of(dim).unwrap() * score;
            }
            assert!(
                (got.value - oracle).abs() <= 1e-9,
                "dti {} vs oracle {}",
                got.value,
                oracle
            );
        }
    }

    #[test]
    fn raising_one_response_never_lowers_the_index() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (_, mapping, weights) = toy_setup();
        for _ in 0..200 {
            let mut record = record_with(&[
                ("a", Some(rng.random_range(0..=4u8))),
                ("b", Some(rng.random_range(0..=4u8))),
                ("c", Some(rng.random_range(0..=4u8))),
                ("d", Some(rng.random_range(0..=4u8))),
            ]);
            let before = compute_dti(&record, &mapping, &weights).unwrap().value;
            let field = ["a", "b", "c", "d"][rng.random_range(0..4usize)];
            let current = record.response(field).unwrap();
            if current == 4 {
                continue;
            }
            record.responses.insert(field.to_string(), Some(current + 1));
            let after = compute_dti(&record, &mapping, &weights).unwrap().value;
            assert!(after >= before, "{after} < {before} after raising {field}");
        }
    }

    #[test]
    fn reweight_identity_is_bitwise() {
        let w = WeightConfig::default_layout();
        let same = reweight(&w, w.core_share).unwrap();
        for (k, v) in &w.core_weights {
            assert!((same.core_weights[k] - v).abs() <= 1e-12);
        }
        for (k, v) in &w.context_weights {
            assert!((same.context_weights[k] - v).abs() <= 1e-12);
        }
        assert_eq!(same.core_share, w.core_share);
    }

    #[test]
    fn reweight_rescales_proportionally() {
        let w = WeightConfig::default_layout();
        let half = reweight(&w, 0.50).unwrap();
        half.validate().unwrap();
        let expected = 0.10 * (0.50 / 0.70);
        assert!((half.core_weights["Communication Infrastructure"] - expected).abs() < 1e-12);
        assert!((expected - 0.071429).abs() < 1e-6);
        // within-layer ratios preserved
        let r_before = w.core_weights["ICT Equipment"] / w.core_weights["Backoffice"];
        let r_after = half.core_weights["ICT Equipment"] / half.core_weights["Backoffice"];
        assert!((r_before - r_after).abs() < 1e-12);
    }

    #[test]
    fn reweight_rejects_degenerate_shares() {
        let w = WeightConfig::default_layout();
        assert!(reweight(&w, 1.0).is_err());
        assert!(reweight(&w, 0.0).is_err());
        assert!(reweight(&w, -0.2).is_err());
    }
}
