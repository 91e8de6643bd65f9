//! Survey schema and record ingestion.
//!
//! Surveys arrive as UTF-8 delimited text (comma separator, header row).
//! The first column is `org_id`, optionally followed by `year` and
//! `population_stratum`, then the schema fields in declared order.
//! An empty cell marks an explicitly missing response. Spreadsheets must
//! be exported to CSV before ingestion; see the README for a note on that.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inclusive ordinal response range. Responses encode absence-to-full
/// implementation on a 0..=4 scale.
pub const RESPONSE_MIN: u8 = 0;
pub const RESPONSE_MAX: u8 = 4;

/// Reserved leading column names, in the order they may appear.
const ORG_ID_COLUMN: &str = "org_id";
const YEAR_COLUMN: &str = "year";
const STRATUM_COLUMN: &str = "population_stratum";

/// Ordered list of survey field names. List order is stable and defines
/// feature-vector order downstream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveySchema {
    field_names: Vec<String>,
    allowed_range: (u8, u8),
}

impl SurveySchema {
    /// Builds a schema from an ordered field list, rejecting empty lists,
    /// empty names, and duplicates.
    pub fn new(field_names: Vec<String>) -> Result<Self> {
        if field_names.is_empty() {
            return Err(Error::validation("schema declares no fields"));
        }
        let mut seen = std::collections::HashSet::new();
        for name in &field_names {
            if name.trim().is_empty() {
                return Err(Error::validation("schema contains an empty field name"));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::validation(format!(
                    "duplicate field name in schema: {name}"
                )));
            }
        }
        Ok(SurveySchema {
            field_names,
            allowed_range: (RESPONSE_MIN, RESPONSE_MAX),
        })
    }

    pub fn field_names(&self) -> &[String] {
        &self.field_names
    }

    pub fn len(&self) -> usize {
        self.field_names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.field_names.is_empty()
    }

    pub fn allowed_range(&self) -> (u8, u8) {
        self.allowed_range
    }

    pub fn contains(&self, field: &str) -> bool {
        self.field_names.iter().any(|f| f == field)
    }

    pub fn position(&self, field: &str) -> Option<usize> {
        self.field_names.iter().position(|f| f == field)
    }
}

/// Loads a schema file: one field name per line, `#` comments and blank
/// lines allowed, UTF-8.
pub fn load_schema(path: impl AsRef<Path>) -> Result<SurveySchema> {
    let path = path.as_ref();
    let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_schema(&raw, path)
}

/// Parses schema text; `path` is used only for error messages.
pub fn parse_schema(raw: &str, path: impl AsRef<Path>) -> Result<SurveySchema> {
    let path = path.as_ref();
    let mut names = Vec::new();
    let mut seen = std::collections::HashMap::new();
    for (idx, line) in raw.lines().enumerate() {
        let line = match line.find('#') {
            Some(pos) => &line[..pos],
            None => line,
        };
        let name = line.trim();
        if name.is_empty() {
            continue;
        }
        if let Some(first) = seen.insert(name.to_string(), idx + 1) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                msg: format!("duplicate field name {name:?} (first declared on line {first})"),
            });
        }
        for reserved in [ORG_ID_COLUMN, YEAR_COLUMN, STRATUM_COLUMN] {
            if name == reserved {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    msg: format!("field name {name:?} is a reserved column name"),
                });
            }
        }
        names.push(name.to_string());
    }
    if names.is_empty() {
        return Err(Error::validation(format!(
            "schema file {} declares no fields",
            path.display()
        )));
    }
    SurveySchema::new(names)
}

/// Population size band, stratifying organizations by scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PopulationStratum {
    Small,
    Medium,
    Large,
}

impl FromStr for PopulationStratum {
    type Err = ();
    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        match s.to_ascii_lowercase().as_str() {
            "small" => Ok(PopulationStratum::Small),
            "medium" => Ok(PopulationStratum::Medium),
            "large" => Ok(PopulationStratum::Large),
            _ => Err(()),
        }
    }
}

impl fmt::Display for PopulationStratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PopulationStratum::Small => "small",
            PopulationStratum::Medium => "medium",
            PopulationStratum::Large => "large",
        };
        f.write_str(s)
    }
}

/// One organization's ordinal survey responses plus identity metadata.
///
/// `responses` holds every schema field in schema order; `None` marks an
/// explicitly missing answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyRecord {
    pub org_id: String,
    pub responses: IndexMap<String, Option<u8>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub year: Option<i32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub population_stratum: Option<PopulationStratum>,
}

impl SurveyRecord {
    pub fn response(&self, field: &str) -> Option<u8> {
        self.responses.get(field).copied().flatten()
    }
}

/// Policy for feature-vector cells whose response is missing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImputePolicy {
    /// Impute 0.0 (the default; missing reads as "not implemented").
    #[default]
    Zero,
    /// Impute the mean of the record's non-missing scaled responses.
    RecordMean,
}

/// Loads survey records from delimited text, validating every cell
/// against the schema range and rejecting duplicate org ids.
pub fn load_surveys(path: impl AsRef<Path>, schema: &SurveySchema) -> Result<Vec<SurveyRecord>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let layout = HeaderLayout::resolve(&headers, schema)?;

    let mut records = Vec::new();
    let mut seen_ids: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
    for (row_idx, row) in reader.records().enumerate() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let row_no = row_idx + 2; // 1-based, after the header row
        let record = layout.parse_row(&row, row_no, schema)?;
        if let Some(first) = seen_ids.insert(record.org_id.clone(), row_no) {
            return Err(Error::validation(format!(
                "duplicate org_id {:?} on row {row_no} (first seen on row {first})",
                record.org_id
            )));
        }
        records.push(record);
    }
    Ok(records)
}

/// Writes records back to the delimited format `load_surveys` reads.
/// Loading the written file yields identical records.
pub fn save_surveys(
    path: impl AsRef<Path>,
    records: &[SurveyRecord],
    schema: &SurveySchema,
) -> Result<()> {
    let path = path.as_ref();
    let with_year = records.iter().any(|r| r.year.is_some());
    let with_stratum = records.iter().any(|r| r.population_stratum.is_some());

    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut header = vec![ORG_ID_COLUMN.to_string()];
    if with_year {
        header.push(YEAR_COLUMN.to_string());
    }
    if with_stratum {
        header.push(STRATUM_COLUMN.to_string());
    }
    header.extend(schema.field_names().iter().cloned());
    writer.write_record(&header).map_err(|e| csv_error(path, e))?;

    for record in records {
        let mut row = vec![record.org_id.clone()];
        if with_year {
            row.push(record.year.map(|y| y.to_string()).unwrap_or_default());
        }
        if with_stratum {
            row.push(
                record
                    .population_stratum
                    .map(|s| s.to_string())
                    .unwrap_or_default(),
            );
        }
        for field in schema.field_names() {
            row.push(match record.responses.get(field) {
                Some(Some(v)) => v.to_string(),
                _ => String::new(),
            });
        }
        writer.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Scales a validated record onto `[0,1]^d` in schema order: element i is
/// response_i / 4, with missing values imputed per `policy`.
pub fn to_feature_vector(
    record: &SurveyRecord,
    schema: &SurveySchema,
    policy: ImputePolicy,
) -> Vec<f64> {
    let max = f64::from(RESPONSE_MAX);
    let fill = match policy {
        ImputePolicy::Zero => 0.0,
        ImputePolicy::RecordMean => {
            let present: Vec<f64> = schema
                .field_names()
                .iter()
                .filter_map(|f| record.response(f))
                .map(|v| f64::from(v) / max)
                .collect();
            if present.is_empty() {
                0.0
            } else {
                present.iter().sum::<f64>() / present.len() as f64
            }
        }
    };
    schema
        .field_names()
        .iter()
        .map(|f| match record.response(f) {
            Some(v) => f64::from(v) / max,
            None => fill,
        })
        .collect()
}

struct HeaderLayout {
    year_col: Option<usize>,
    stratum_col: Option<usize>,
    first_field_col: usize,
}

impl HeaderLayout {
    fn resolve(headers: &[String], schema: &SurveySchema) -> Result<Self> {
        if headers.first().map(String::as_str) != Some(ORG_ID_COLUMN) {
            return Err(Error::validation(format!(
                "first column must be {ORG_ID_COLUMN:?}, found {:?}",
                headers.first().cloned().unwrap_or_default()
            )));
        }
        let mut next = 1;
        let mut year_col = None;
        let mut stratum_col = None;
        if headers.get(next).map(String::as_str) == Some(YEAR_COLUMN) {
            year_col = Some(next);
            next += 1;
        }
        if headers.get(next).map(String::as_str) == Some(STRATUM_COLUMN) {
            stratum_col = Some(next);
            next += 1;
        }

        let found: Vec<&str> = headers[next..].iter().map(String::as_str).collect();
        let expected: Vec<&str> = schema.field_names().iter().map(String::as_str).collect();
        if found != expected {
            let missing: Vec<&str> = expected
                .iter()
                .filter(|f| !found.contains(f))
                .copied()
                .collect();
            let extra: Vec<&str> = found
                .iter()
                .filter(|f| !expected.contains(f))
                .copied()
                .collect();
            let mut parts = Vec::new();
            if !missing.is_empty() {
                parts.push(format!("missing columns: {}", missing.join(", ")));
            }
            if !extra.is_empty() {
                parts.push(format!("extra columns: {}", extra.join(", ")));
            }
            if parts.is_empty() {
                parts.push("columns out of schema order".to_string());
            }
            return Err(Error::validation(format!(
                "survey header does not match schema ({})",
                parts.join("; ")
            )));
        }
        Ok(HeaderLayout {
            year_col,
            stratum_col,
            first_field_col: next,
        })
    }

    fn parse_row(
        &self,
        row: &csv::StringRecord,
        row_no: usize,
        schema: &SurveySchema,
    ) -> Result<SurveyRecord> {
        let org_id = row.get(0).unwrap_or("").trim().to_string();
        if org_id.is_empty() {
            return Err(Error::validation(format!("row {row_no}: empty org_id")));
        }
        let year = match self.year_col {
            Some(col) => {
                let cell = row.get(col).unwrap_or("").trim();
                if cell.is_empty() {
                    None
                } else {
                    Some(cell.parse::<i32>().map_err(|_| {
                        Error::validation(format!(
                            "row {row_no}, column {YEAR_COLUMN:?}: invalid year {cell:?}"
                        ))
                    })?)
                }
            }
            None => None,
        };
        let population_stratum = match self.stratum_col {
            Some(col) => {
                let cell = row.get(col).unwrap_or("").trim();
                if cell.is_empty() {
                    None
                } else {
                    Some(cell.parse::<PopulationStratum>().map_err(|()| {
                        Error::validation(format!(
                            "row {row_no}, column {STRATUM_COLUMN:?}: unknown stratum {cell:?}"
                        ))
                    })?)
                }
            }
            None => None,
        };

        let (lo, hi) = schema.allowed_range();
        let mut responses = IndexMap::with_capacity(schema.len());
        for (offset, field) in schema.field_names().iter().enumerate() {
            let cell = row.get(self.first_field_col + offset).unwrap_or("").trim();
            let value = if cell.is_empty() {
                None
            } else {
                let v: i64 = cell.parse().map_err(|_| {
                    Error::validation(format!(
                        "row {row_no}, column {field:?}: non-integer value {cell:?}"
                    ))
                })?;
                if v < i64::from(lo) || v > i64::from(hi) {
                    return Err(Error::validation(format!(
                        "row {row_no}, column {field:?}: value {v} outside allowed range [{lo},{hi}]"
                    )));
                }
                Some(v as u8)
            };
            responses.insert(field.clone(), value);
        }
        Ok(SurveyRecord {
            org_id,
            responses,
            year,
            population_stratum,
        })
    }
}

fn csv_error(path: &Path, err: csv::Error) -> Error {
    if err.is_io_error() {
        match err.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        }
    } else {
        let line = err
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or_default();
        Error::Parse {
            path: path.to_path_buf(),
            line,
            msg: err.to_string(),
        }
    }
}
