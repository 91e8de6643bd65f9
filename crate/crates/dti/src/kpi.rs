//! Named KPI computation over survey datasets.
//!
//! A KPI counts the records whose response to one field satisfies a
//! threshold predicate, and reports the share as a percentage rounded
//! half-up to one decimal. The rounding is integer-exact: it reproduces
//! every published dashboard figure from its fraction.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonfmt::{json_escape, tenths_string};
use crate::survey::{SurveyRecord, SurveySchema};

/// Whether the KPI reports something organizations have or lack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Presence,
    Absence,
}

impl Polarity {
    fn as_str(self) -> &'static str {
        match self {
            Polarity::Presence => "presence",
            Polarity::Absence => "absence",
        }
    }
}

/// Threshold predicate over an ordinal response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Predicate {
    /// response >= value ("present at least at this level")
    Gte { value: u8 },
    /// response == value (with value 0: "absent")
    Eq { value: u8 },
    /// response <= value
    Lte { value: u8 },
}

impl Predicate {
    pub fn matches(self, response: u8) -> bool {
        match self {
            Predicate::Gte { value } => response >= value,
            Predicate::Eq { value } => response == value,
            Predicate::Lte { value } => response <= value,
        }
    }
}

/// How records with a missing response enter the count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    /// Missing responses never satisfy the predicate but stay in the
    /// denominator (the default).
    #[default]
    CountAsUnsatisfied,
    /// Missing responses leave the denominator entirely.
    ExcludeFromDenominator,
}

/// Declarative KPI definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpiDefinition {
    pub name: String,
    pub field: String,
    pub predicate: Predicate,
    pub polarity: Polarity,
    /// Display group for the report (e.g. a dashboard dimension).
    #[serde(default)]
    pub group: String,
    /// Free-text provenance note; bundled definitions say "reconstructed".
    #[serde(default)]
    pub comment: String,
}

/// A computed KPI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpiRecord {
    pub name: String,
    pub numerator: usize,
    pub denominator: usize,
    /// Percentage rounded half-up to 1 decimal.
    pub percentage: f64,
    pub polarity: Polarity,
    /// Records whose response was missing for this field.
    #[serde(skip)]
    pub missing: usize,
    #[serde(skip)]
    pub group: String,
}

impl KpiRecord {
    /// Percentage in exact tenths; `percentage` is this over 10.
    pub fn percentage_tenths(&self) -> u64 {
        round_half_up_tenths(self.numerator, self.denominator)
    }

    /// The canonical one-decimal string shown in every export.
    pub fn percentage_string(&self) -> String {
        tenths_string(self.percentage_tenths())
    }
}

/// Exact round-half-up of 100*numerator/denominator to one decimal,
/// returned in tenths of a percent.
pub fn round_half_up_tenths(numerator: usize, denominator: usize) -> u64 {
    assert!(denominator > 0, "denominator must be positive");
    let scaled = numerator as u64 * 1000;
    let q = scaled / denominator as u64;
    let rem = scaled % denominator as u64;
    if rem * 2 >= denominator as u64 {
        q + 1
    } else {
        q
    }
}

/// Counts the records satisfying one definition.
pub fn compute_kpi(
    records: &[SurveyRecord],
    def: &KpiDefinition,
    schema: &SurveySchema,
    missing_policy: MissingPolicy,
) -> Result<KpiRecord> {
    if records.is_empty() {
        return Err(Error::validation(format!(
            "KPI {:?} computed over an empty dataset",
            def.name
        )));
    }
    if !schema.contains(&def.field) {
        return Err(Error::validation(format!(
            "KPI {:?} references unknown field {:?}",
            def.name, def.field
        )));
    }
    let mut numerator = 0usize;
    let mut missing = 0usize;
    for record in records {
        match record.response(&def.field) {
            Some(v) => {
                if def.predicate.matches(v) {
                    numerator += 1;
                }
            }
            None => missing += 1,
        }
    }
    let denominator = match missing_policy {
        MissingPolicy::CountAsUnsatisfied => records.len(),
        MissingPolicy::ExcludeFromDenominator => records.len() - missing,
    };
    if denominator == 0 {
        return Err(Error::data(format!(
            "KPI {:?}: every record is missing field {:?}",
            def.name, def.field
        )));
    }
    let tenths = round_half_up_tenths(numerator, denominator);
    Ok(KpiRecord {
        name: def.name.clone(),
        numerator,
        denominator,
        percentage: tenths as f64 / 10.0,
        polarity: def.polarity,
        missing,
        group: def.group.clone(),
    })
}

/// Computes an ordered suite of KPIs.
pub fn kpi_suite(
    records: &[SurveyRecord],
    defs: &[KpiDefinition],
    schema: &SurveySchema,
    missing_policy: MissingPolicy,
) -> Result<Vec<KpiRecord>> {
    defs.iter()
        .map(|def| compute_kpi(records, def, schema, missing_policy))
        .collect()
}

/// Writes the KPI JSON export: an array of
/// `{name, numerator, denominator, percentage, polarity}`.
/// Percentages are written with the same one-decimal rendering the HTML
/// report uses.
pub fn write_kpi_json(path: impl AsRef<Path>, kpis: &[KpiRecord]) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, kpi_json_string(kpis)).map_err(|e| Error::io(path, e))
}

pub fn kpi_json_string(kpis: &[KpiRecord]) -> String {
    let mut out = String::from("[\n");
    for (i, kpi) in kpis.iter().enumerate() {
        out.push_str(&format!(
            "  {{\"name\": \"{}\", \"numerator\": {}, \"denominator\": {}, \"percentage\": {}, \"polarity\": \"{}\"}}",
            json_escape(&kpi.name),
            kpi.numerator,
            kpi.denominator,
            kpi.percentage_string(),
            kpi.polarity.as_str()
        ));
        out.push_str(if i + 1 < kpis.len() { ",\n" } else { "\n" });
    }
    out.push_str("]\n");
    out
}

/// CSV mirror of the JSON export.
pub fn write_kpi_csv(path: impl AsRef<Path>, kpis: &[KpiRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| Error::data(format!("open {}: {e}", path.display())))?;
    writer
        .write_record(["name", "numerator", "denominator", "percentage", "polarity"])
        .map_err(|e| Error::data(e.to_string()))?;
    for kpi in kpis {
        writer
            .write_record([
                kpi.name.as_str(),
                &kpi.numerator.to_string(),
                &kpi.denominator.to_string(),
                &kpi.percentage_string(),
                kpi.polarity.as_str(),
            ])
            .map_err(|e| Error::data(e.to_string()))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
