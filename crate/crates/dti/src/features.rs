//! Hashed bag-of-words features with smoothed TF-IDF weighting.
//!
//! Tokens hash into a power-of-two bucket space (seeded FNV-1a, so the
//! mapping is stable across runs and platforms), get weighted by
//! idf[j] = ln((1+N)/(1+df_j)) + 1, and the resulting vector is
//! L2-normalized. Collisions are not hidden: fitting reports the bucket
//! occupancy histogram.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_DIM: usize = 4096;

/// Splits cleaned text into tokens: whitespace separation, then tokens
/// shorter than two characters and stopwords are dropped.
pub fn tokenize<'a>(text: &'a str, stopwords: &BTreeSet<String>) -> Vec<&'a str> {
    text.split_whitespace()
        .filter(|t| t.chars().count() >= 2)
        .filter(|t| !stopwords.contains(*t))
        .collect()
}

/// Seeded 64-bit FNV-1a. Stable by construction; no platform-dependent
/// hasher is involved.
fn fnv1a(seed: u64, token: &str) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64 ^ seed;
    for byte in token.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x1000_0000_01b3);
    }
    hash
}

/// Fitted hashing vectorizer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Vectorizer {
    dim: usize,
    hash_seed: u64,
    /// Hash of the stopword set active at fit time; transform-time
    /// stopwords must match.
    stopword_hash: u64,
    idf: Vec<f64>,
    #[serde(skip)]
    stopwords: BTreeSet<String>,
}

/// Fit diagnostics: how many buckets hold how many distinct documents.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub documents: usize,
    pub dim: usize,
    pub occupied_buckets: usize,
    /// histogram[k] = number of buckets whose document frequency is k,
    /// for k in 0..=documents.
    pub occupancy_histogram: Vec<usize>,
}

fn hash_stopwords(stopwords: &BTreeSet<String>) -> u64 {
    let mut acc = 0xcbf2_9ce4_8422_2325u64;
    for word in stopwords {
        acc = fnv1a(acc, word);
    }
    acc
}

/// Normalizes a raw stopword list into the set used by tokenize: the
/// same accent/case fold applied to corpus text.
pub fn stopword_set(raw: &[String]) -> BTreeSet<String> {
    raw.iter()
        .map(|w| crate::clean::normalize_for_match(w))
        .filter(|w| !w.is_empty())
        .collect()
}

impl Vectorizer {
    /// Fits idf weights over cleaned document texts.
    pub fn fit(
        documents: &[&str],
        dim: usize,
        stopwords: BTreeSet<String>,
        hash_seed: u64,
    ) -> Result<(Self, FitReport)> {
        if documents.is_empty() {
            return Err(Error::validation("cannot fit a vectorizer on an empty corpus"));
        }
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::validation(format!(
                "feature dimension must be a power of two, got {dim}"
            )));
        }
        let mask = (dim - 1) as u64;
        let n_docs = documents.len();
        let mut df = vec![0usize; dim];
        for text in documents {
            let mut seen = BTreeSet::new();
            for token in tokenize(text, &stopwords) {
                seen.insert((fnv1a(hash_seed, token) & mask) as usize);
            }
            for bucket in seen {
                df[bucket] += 1;
            }
        }
        let idf: Vec<f64> = df
            .iter()
            .map(|&d| ((1.0 + n_docs as f64) / (1.0 + d as f64)).ln() + 1.0)
            .collect();

        let mut histogram = vec![0usize; n_docs + 1];
        for &d in &df {
            histogram[d] += 1;
        }
        let report = FitReport {
            documents: n_docs,
            dim,
            occupied_buckets: df.iter().filter(|d| **d > 0).count(),
            occupancy_histogram: histogram,
        };
        let vectorizer = Vectorizer {
            dim,
            hash_seed,
            stopword_hash: hash_stopwords(&stopwords),
            idf,
            stopwords,
        };
        Ok((vectorizer, report))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hash_seed(&self) -> u64 {
        self.hash_seed
    }

    /// Bucket index a token hashes into.
    pub fn bucket_of(&self, token: &str) -> usize {
        (fnv1a(self.hash_seed, token) & (self.dim - 1) as u64) as usize
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    /// Raw bucket counts, idf-weighted, L2-normalized. An input with no
    /// surviving tokens yields the zero vector.
    pub fn transform(&self, text: &str) -> Vec<f64> {
        let mut counts = vec![0.0f64; self.dim];
        for token in tokenize(text, &self.stopwords) {
            counts[self.bucket_of(token)] += 1.0;
        }
        for (c, idf) in counts.iter_mut().zip(&self.idf) {
            *c *= idf;
        }
        let norm = counts.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for c in &mut counts {
                *c /= norm;
            }
        }
        counts
    }

    /// Persists the artifact as JSON: dim, seed, stopword hash, idf.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::data(format!("serialize vectorizer: {e}")))?;
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    /// Loads a persisted vectorizer. The provided stopword set must hash
    /// to the fit-time value, otherwise transform results would silently
    /// drift.
    pub fn load(path: impl AsRef<Path>, stopwords: BTreeSet<String>) -> Result<Self> {
        let path = path.as_ref();
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut v: Vectorizer = serde_json::from_str(&raw).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            msg: e.to_string(),
        })?;
        if v.idf.len() != v.dim {
            return Err(Error::validation(format!(
                "vectorizer artifact is inconsistent: dim {} but {} idf entries",
                v.dim,
                v.idf.len()
            )));
        }
        let have = hash_stopwords(&stopwords);
        if have != v.stopword_hash {
            return Err(Error::validation(
                "stopword list does not match the one the vectorizer was fitted with".to_string(),
            ));
        }
        v.stopwords = stopwords;
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sw(words: &[&str]) -> BTreeSet<String> {
        words.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn tokenize_drops_stopwords_and_short_tokens() {
        let stop = sw(&["de", "la"]);
        assert_eq!(tokenize("de la casa azul", &stop), vec!["casa", "azul"]);
        assert_eq!(tokenize("", &stop), Vec::<&str>::new());
        assert_eq!(tokenize("a b casa", &stop), vec!["casa"]);
    }

    #[test]
    fn idf_of_ubiquitous_token_is_one() {
        let docs = vec!["casa azul", "casa roja", "casa verde"];
        let (v, _) = Vectorizer::fit(&docs, 64, BTreeSet::new(), 7).unwrap();
        // "casa" appears in every document: ln((1+3)/(1+3)) + 1 = 1
        assert!((v.idf()[v.bucket_of("casa")] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_document_bucket_idf_is_one() {
        let docs = vec!["casa"];
        let (v, _) = Vectorizer::fit(&docs, 64, BTreeSet::new(), 7).unwrap();
        assert!((v.idf()[v.bucket_of("casa")] - 1.0).abs() < 1e-12);
    }

    /// Brute-force oracle over the explicit vocabulary, then mapped
    /// through the same hash bucketing.
    #[test]
    fn toy_corpus_matches_explicit_vocabulary_oracle() {
        let docs = ["casa azul", "casa roja"];
        let dim = DEFAULT_DIM;
        let seed = 42u64;
        let (v, report) = Vectorizer::fit(&docs.to_vec(), dim, BTreeSet::new(), seed).unwrap();

        let vocab = ["casa", "azul", "roja"];
        let buckets: Vec<usize> = vocab.iter().map(|t| v.bucket_of(t)).collect();
        let unique: BTreeSet<usize> = buckets.iter().copied().collect();
        assert_eq!(unique.len(), vocab.len(), "toy vocabulary must not collide");

        let n = docs.len() as f64;
        for (d, doc) in docs.iter().enumerate() {
            // explicit-vocabulary tf-idf
            let mut dense = vec![0.0f64; vocab.len()];
            for (t, term) in vocab.iter().enumerate() {
                let tf = doc.split_whitespace().filter(|w| w == term).count() as f64;
                let df = docs
                    .iter()
                    .filter(|dd| dd.split_whitespace().any(|w| &w == term))
                    .count() as f64;
                let idf = ((1.0 + n) / (1.0 + df)).ln() + 1.0;
                dense[t] = tf * idf;
            }
            let norm = dense.iter().map(|x| x * x).sum::<f64>().sqrt();
            for x in &mut dense {
                *x /= norm;
            }

            let got = v.transform(doc);
            assert_eq!(got.len(), dim);
            for (t, &bucket) in buckets.iter().enumerate() {
                assert!(
                    (got[bucket] - dense[t]).abs() <= 1e-9,
                    "doc {d} term {t}: {} vs {}",
                    got[bucket],
                    dense[t]
                );
            }
            // no mass outside the vocabulary buckets
            let outside: f64 = got
                .iter()
                .enumerate()
                .filter(|(j, _)| !unique.contains(j))
                .map(|(_, x)| x.abs())
                .sum();
            assert_eq!(outside, 0.0);
        }
        assert_eq!(report.occupied_buckets, 3);
    }

    #[test]
    fn transform_contracts_hold() {
        let docs = vec!["uno dos tres", "dos tres cuatro", "cinco"];
        let (v, _) = Vectorizer::fit(&docs, 128, BTreeSet::new(), 3).unwrap();
        // empty text -> zero vector of full dimension
        let zero = v.transform("");
        assert_eq!(zero.len(), 128);
        assert!(zero.iter().all(|x| *x == 0.0));
        // nonzero outputs have unit norm
        for doc in &docs {
            let out = v.transform(doc);
            let norm = out.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() <= 1e-9);
        }
        // dim contract independent of input length
        assert_eq!(v.transform("palabra repetida palabra muchas veces").len(), 128);
    }

    #[test]
    fn same_seed_same_vectors() {
        let docs = vec!["casa azul grande", "otra casa roja"];
        let (v1, _) = Vectorizer::fit(&docs, 256, sw(&["otra"]), 99).unwrap();
        let (v2, _) = Vectorizer::fit(&docs, 256, sw(&["otra"]), 99).unwrap();
        for doc in &docs {
            assert_eq!(v1.transform(doc), v2.transform(doc));
        }
        // different seed relocates buckets
        let (v3, _) = Vectorizer::fit(&docs, 256, sw(&["otra"]), 100).unwrap();
        assert_ne!(v1.bucket_of("casa"), v3.bucket_of("casa"));
    }

    #[test]
    fn empty_corpus_and_bad_dim_rejected() {
        assert!(Vectorizer::fit(&[], 64, BTreeSet::new(), 1).is_err());
        assert!(Vectorizer::fit(&["x y"], 100, BTreeSet::new(), 1).is_err());
    }

    #[test]
    fn histogram_counts_every_bucket() {
        let docs = vec!["casa azul", "casa roja"];
        let (_, report) = Vectorizer::fit(&docs, 64, BTreeSet::new(), 42).unwrap();
        assert_eq!(report.occupancy_histogram.iter().sum::<usize>(), 64);
        // one bucket holds a term in both docs, two hold single-doc terms
        assert_eq!(report.occupancy_histogram[2], 1);
        assert_eq!(report.occupancy_histogram[1], 2);
    }

    #[test]
    fn persistence_round_trip_and_stopword_guard() {
        let docs = vec!["casa azul", "casa roja"];
        let stops = sw(&["de"]);
        let (v, _) = Vectorizer::fit(&docs, 64, stops.clone(), 5).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        v.save(f.path()).unwrap();
        let loaded = Vectorizer::load(f.path(), stops).unwrap();
        assert_eq!(loaded.transform("casa azul"), v.transform("casa azul"));

        let err = Vectorizer::load(f.path(), sw(&["different"])).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }
}
