//! Corpus assembly: one cleaned document per organization, optionally
//! merged with its survey record and index label, persisted as JSON
//! (one file per organization plus a manifest).

use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::clean::{clean_text, Gazetteer};
use crate::crawl::{CrawlPolicy, Crawler, FetchEntry};
use crate::error::{Error, Result};
use crate::html::extract_text;
use crate::survey::SurveyRecord;

/// Cleaned web text for one organization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusDocument {
    pub org_id: String,
    pub text: String,
    pub source_urls: Vec<String>,
    /// Index label in [0,100] when known.
    #[serde(rename = "dti")]
    pub dti_label: Option<f64>,
    pub survey: Option<SurveyRecord>,
}

/// Manifest entry describing one emitted document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub org_id: String,
    pub path: String,
    pub chars: usize,
    pub pages: usize,
    pub labeled: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub documents: Vec<ManifestEntry>,
}

/// Result of a corpus build: documents plus the merged fetch log and
/// per-organization warnings.
pub struct CorpusBuild {
    pub documents: Vec<CorpusDocument>,
    pub warnings: Vec<String>,
    pub fetch_log: Vec<FetchEntry>,
}

/// Turns raw per-page HTML into one cleaned document. Page texts are
/// concatenated in crawl order with single-space joins before cleaning.
pub fn assemble_document(
    org_id: &str,
    pages: &[(String, String)],
    gazetteer: &Gazetteer,
    label: Option<f64>,
    survey: Option<SurveyRecord>,
) -> CorpusDocument {
    let joined = pages
        .iter()
        .map(|(_, html)| extract_text(html))
        .collect::<Vec<_>>()
        .join(" ");
    CorpusDocument {
        org_id: org_id.to_string(),
        text: clean_text(&joined, gazetteer),
        source_urls: pages.iter().map(|(url, _)| url.clone()).collect(),
        dti_label: label,
        survey,
    }
}

/// Crawls every site and assembles the corpus. An organization whose
/// crawl fails entirely still yields a document (empty text) plus a
/// warning; it is never silently omitted.
pub fn build_corpus(
    sites: &[(String, String)],
    policy: &CrawlPolicy,
    gazetteer: &Gazetteer,
    labels: Option<&IndexMap<String, f64>>,
    surveys: Option<&IndexMap<String, SurveyRecord>>,
) -> Result<CorpusBuild> {
    let mut seen = std::collections::HashSet::new();
    for (org_id, _) in sites {
        if !seen.insert(org_id.as_str()) {
            return Err(Error::validation(format!(
                "duplicate org_id {org_id:?} in site list"
            )));
        }
    }
    let crawler = Crawler::new(policy.clone())?;
    let mut documents = Vec::with_capacity(sites.len());
    let mut warnings = Vec::new();
    let mut fetch_log = Vec::new();
    for (org_id, seed) in sites {
        let pages: Vec<(String, String)> = match crawler.crawl(seed) {
            Ok(outcome) => {
                fetch_log.extend(outcome.log);
                outcome
                    .pages
                    .into_iter()
                    .map(|p| (p.url.to_string(), p.html))
                    .collect()
            }
            Err(err) => {
                warnings.push(format!("{org_id}: crawl of {seed} failed: {err}"));
                Vec::new()
            }
        };
        let label = labels.and_then(|l| l.get(org_id)).copied();
        let survey = surveys.and_then(|s| s.get(org_id)).cloned();
        documents.push(assemble_document(org_id, &pages, gazetteer, label, survey));
    }
    Ok(CorpusBuild {
        documents,
        warnings,
        fetch_log,
    })
}

/// Writes one JSON file per document under `dir/docs/` plus
/// `dir/manifest.json`. UTF-8, LF line endings, stable field order.
pub fn write_corpus(
    dir: impl AsRef<Path>,
    documents: &[CorpusDocument],
    warnings_by_org: &[String],
) -> Result<Manifest> {
    let dir = dir.as_ref();
    let docs_dir = dir.join("docs");
    std::fs::create_dir_all(&docs_dir).map_err(|e| Error::io(&docs_dir, e))?;
    let mut entries = Vec::with_capacity(documents.len());
    for doc in documents {
        let file = docs_dir.join(format!("{}.json", sanitize_filename(&doc.org_id)));
        let json = serde_json::to_string_pretty(doc)
            .map_err(|e| Error::data(format!("serialize document {}: {e}", doc.org_id)))?;
        std::fs::write(&file, json + "\n").map_err(|e| Error::io(&file, e))?;
        entries.push(ManifestEntry {
            org_id: doc.org_id.clone(),
            path: format!("docs/{}.json", sanitize_filename(&doc.org_id)),
            chars: doc.text.chars().count(),
            pages: doc.source_urls.len(),
            labeled: doc.dti_label.is_some(),
            warnings: warnings_by_org
                .iter()
                .filter(|w| w.starts_with(&format!("{}:", doc.org_id)))
                .cloned()
                .collect(),
        });
    }
    let manifest = Manifest { documents: entries };
    let manifest_path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::data(format!("serialize manifest: {e}")))?;
    std::fs::write(&manifest_path, json + "\n").map_err(|e| Error::io(&manifest_path, e))?;
    Ok(manifest)
}

/// Reads a corpus back from `dir` via its manifest.
pub fn read_corpus(dir: impl AsRef<Path>) -> Result<Vec<CorpusDocument>> {
    let dir = dir.as_ref();
    let manifest_path = dir.join("manifest.json");
    let raw = std::fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: Manifest = serde_json::from_str(&raw).map_err(|e| Error::Parse {
        path: manifest_path.clone(),
        line: e.line(),
        msg: e.to_string(),
    })?;
    let mut documents = Vec::with_capacity(manifest.documents.len());
    for entry in &manifest.documents {
        let path = dir.join(&entry.path);
        let raw = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let doc: CorpusDocument = serde_json::from_str(&raw).map_err(|e| Error::Parse {
            path: path.clone(),
            line: e.line(),
            msg: e.to_string(),
        })?;
        documents.push(doc);
    }
    Ok(documents)
}

fn sanitize_filename(org_id: &str) -> String {
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clean::{tag_residue_regex, url_residue_regex};

    fn gaz() -> Gazetteer {
        Gazetteer::new(vec!["Villarreal".to_string()]).unwrap()
    }

    #[test]
    fn empty_site_list_builds_empty_corpus() {
        let build = build_corpus(&[], &CrawlPolicy::default(), &gaz(), None, None).unwrap();
        assert!(build.documents.is_empty());
        assert!(build.warnings.is_empty());
    }

    #[test]
    fn duplicate_org_ids_rejected() {
        let sites = vec![
            ("a".to_string(), "http://x/".to_string()),
            ("a".to_string(), "http://y/".to_string()),
        ];
        assert!(build_corpus(&sites, &CrawlPolicy::default(), &gaz(), None, None).is_err());
    }

    #[test]
    fn assemble_concatenates_in_crawl_order_and_cleans() {
        let pages = vec![
            ("http://a/1".to_string(), "<p>Ayuntamiento de Villarreal</p>".to_string()),
            ("http://a/2".to_string(), "<p>Menú</p><script>x</script>".to_string()),
        ];
        let doc = assemble_document("a", &pages, &gaz(), Some(72.88), None);
        assert_eq!(doc.text, "ayuntamiento de orgtoken menu");
        assert_eq!(doc.source_urls.len(), 2);
        assert_eq!(doc.dti_label, Some(72.88));
        assert!(!tag_residue_regex().is_match(&doc.text));
        assert!(!url_residue_regex().is_match(&doc.text));
    }

    #[test]
    fn unlabeled_org_has_no_label() {
        let labels = IndexMap::from([("other".to_string(), 50.0)]);
        let doc = assemble_document("a", &[], &gaz(), labels.get("a").copied(), None);
        assert_eq!(doc.dti_label, None);
        assert_eq!(doc.text, "");
    }

    #[test]
    fn corpus_round_trips_through_disk() {
        let docs = vec![
            CorpusDocument {
                org_id: "alcoy".into(),
                text: "texto limpio uno".into(),
                source_urls: vec!["http://a/1".into()],
                dti_label: Some(72.88),
                survey: None,
            },
            CorpusDocument {
                org_id: "elda/2021".into(), // exercises filename sanitizing
                text: String::new(),
                source_urls: vec![],
                dti_label: None,
                survey: None,
            },
        ];
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_corpus(dir.path(), &docs, &[]).unwrap();
        assert_eq!(manifest.documents.len(), 2);
        assert!(manifest.documents[0].labeled);
        assert_eq!(manifest.documents[1].pages, 0);
        let reloaded = read_corpus(dir.path()).unwrap();
        assert_eq!(docs, reloaded);
    }

    #[test]
    fn failed_crawl_yields_empty_document_with_warning() {
        let sites = vec![("ghost".to_string(), "http://127.0.0.1:1/x.html".to_string())];
        let policy = CrawlPolicy {
            timeout_ms: 300,
            per_host_delay_ms: 1,
            ..CrawlPolicy::default()
        };
        let build = build_corpus(&sites, &policy, &gaz(), None, None).unwrap();
        assert_eq!(build.documents.len(), 1);
        assert_eq!(build.documents[0].text, "");
        assert_eq!(build.warnings.len(), 1);
        assert!(build.warnings[0].contains("ghost"));
    }
}
