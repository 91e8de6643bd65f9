//! Corpus text cleaning and anonymization.
//!
//! The cleaning pass is idempotent: lowercase, strip accents (ñ folds to
//! n, combining marks are dropped), remove URL tokens, keep only letters,
//! digits, and basic punctuation, collapse whitespace, and replace every
//! gazetteer term with the placeholder token `orgtoken`. The placeholder
//! deliberately carries no angle brackets so cleaned text stays free of
//! tag-like residue.

use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

/// Replacement token for anonymized organization names and demonyms.
pub const ORG_PLACEHOLDER: &str = "orgtoken";

/// Punctuation allowed to survive cleaning. Everything else outside
/// letters, digits, and whitespace is deleted.
const ALLOWED_PUNCT: &[char] = &['.', ',', ';', ':', '!', '?', '(', ')', '-'];

/// Matches URL tokens slated for removal.
fn url_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)https?://\S+|www\.\S+").unwrap())
}

/// Residue detectors used by hygiene checks: any match means dirty text.
pub fn tag_residue_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"<[a-zA-Z!/]").unwrap())
}

pub fn url_residue_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)https?://|www\.\S").unwrap())
}

/// Organization names and demonyms to anonymize, matched case- and
/// accent-insensitively, longest first, on word boundaries.
#[derive(Debug, Clone)]
pub struct Gazetteer {
    terms: Vec<String>,
    matcher: Option<Regex>,
}

impl Gazetteer {
    /// Empty gazetteer: cleaning performs no replacement.
    pub fn empty() -> Self {
        Gazetteer {
            terms: Vec::new(),
            matcher: None,
        }
    }

    /// Builds a gazetteer from raw terms. Terms are normalized through
    /// the same fold as the text they will match against.
    pub fn new(raw_terms: impl IntoIterator<Item = String>) -> Result<Self> {
        let mut terms: Vec<String> = raw_terms
            .into_iter()
            .map(|t| normalize_for_match(&t))
            .filter(|t| !t.is_empty())
            .collect();
        terms.sort();
        terms.dedup();
        // longest first so multi-word names win over their substrings
        terms.sort_by_key(|t| std::cmp::Reverse(t.len()));
        if terms.is_empty() {
            return Ok(Gazetteer::empty());
        }
        let pattern = format!(
            r"\b(?:{})\b",
            terms
                .iter()
                .map(|t| regex::escape(t))
                .collect::<Vec<_>>()
                .join("|")
        );
        let matcher = Regex::new(&pattern)
            .map_err(|e| Error::validation(format!("gazetteer pattern: {e}")))?;
        Ok(Gazetteer {
            terms,
            matcher: Some(matcher),
        })
    }

    /// Loads the tab-separated gazetteer file:
    /// `org_id<TAB>name<TAB>demonym1,demonym2,...` (demonyms optional).
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut terms = Vec::new();
        for (idx, line) in raw.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            let _org_id = parts.next();
            let name = parts.next().ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                msg: "expected org_id<TAB>name".into(),
            })?;
            if name.trim().is_empty() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    msg: "empty organization name".into(),
                });
            }
            terms.push(name.to_string());
            if let Some(demonyms) = parts.next() {
                terms.extend(
                    demonyms
                        .split(',')
                        .map(str::trim)
                        .filter(|d| !d.is_empty())
                        .map(str::to_string),
                );
            }
        }
        Gazetteer::new(terms)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    fn replace(&self, text: &str) -> String {
        match &self.matcher {
            Some(re) => re.replace_all(text, ORG_PLACEHOLDER).into_owned(),
            None => text.to_string(),
        }
    }
}

/// Lowercases and strips accents: NFD decomposition with combining marks
/// removed, so ñ becomes n and é becomes e.
pub fn normalize_for_match(text: &str) -> String {
    text.nfd()
        .filter(|c| !is_combining_mark(*c))
        .flat_map(char::to_lowercase)
        .collect()
}

fn is_combining_mark(c: char) -> bool {
    matches!(c,
        '\u{0300}'..='\u{036F}'
        | '\u{1AB0}'..='\u{1AFF}'
        | '\u{1DC0}'..='\u{1DFF}'
        | '\u{20D0}'..='\u{20FF}'
        | '\u{FE20}'..='\u{FE2F}')
}

/// Cleans extracted plain text for corpus use. Idempotent:
/// `clean_text(clean_text(x), g) == clean_text(x, g)`.
pub fn clean_text(text: &str, gazetteer: &Gazetteer) -> String {
    let folded = normalize_for_match(text);
    let no_urls = url_regex().replace_all(&folded, " ");
    let filtered: String = no_urls
        .chars()
        .map(|c| {
            if c.is_alphanumeric() || c.is_whitespace() || ALLOWED_PUNCT.contains(&c) {
                c
            } else {
                // deletion, not substitution: "l'alcalde" -> "lalcalde"
                '\u{0}'
            }
        })
        .filter(|c| *c != '\u{0}')
        .collect();
    // char filtering may have spliced a url-looking token together
    let no_urls = url_regex().replace_all(&filtered, " ");
    let collapsed = no_urls.split_whitespace().collect::<Vec<_>>().join(" ");
    gazetteer.replace(&collapsed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn urls_are_removed() {
        let g = Gazetteer::empty();
        assert_eq!(clean_text("Visita https://example.org ya", &g), "visita ya");
        assert_eq!(clean_text("ver www.ayto.es/tramites hoy", &g), "ver hoy");
    }

    #[test]
    fn gazetteer_terms_are_replaced() {
        let g = Gazetteer::new(vec!["Benidorm".to_string()]).unwrap();
        assert_eq!(
            clean_text("Ajuntament de Benidorm", &g),
            "ajuntament de orgtoken"
        );
        // accent/case variants of the term also match
        assert_eq!(clean_text("BENIDÓRM", &g), "orgtoken");
    }

    #[test]
    fn accents_fold_and_special_chars_drop() {
        let g = Gazetteer::empty();
        assert_eq!(clean_text("Español  —  menú", &g), "espanol menu");
        assert_eq!(clean_text("l'alcalde dijo «hola»", &g), "lalcalde dijo hola");
        assert_eq!(clean_text("año/NIÑO", &g), "anonino");
    }

    #[test]
    fn multiword_and_demonym_terms() {
        let g = Gazetteer::new(vec![
            "Villanueva de la Vega".to_string(),
            "villanovense".to_string(),
        ])
        .unwrap();
        let out = clean_text("Los villanovenses de Villanueva de la Vega", &g);
        // "villanovenses" (plural) is a different token; only exact terms match
        assert_eq!(out, "los villanovenses de orgtoken");
        let g2 = Gazetteer::new(vec!["villanovenses".to_string(), "villanovense".into()]).unwrap();
        assert_eq!(
            clean_text("Los villanovenses llegaron", &g2),
            "los orgtoken llegaron"
        );
    }

    #[test]
    fn placeholder_carries_no_tag_residue() {
        let g = Gazetteer::new(vec!["Altea".to_string()]).unwrap();
        let out = clean_text("Altea <b>Altea</b>", &g);
        assert!(!tag_residue_regex().is_match(&out));
        assert!(out.contains(ORG_PLACEHOLDER));
    }

    #[test]
    fn empty_input_stays_empty() {
        assert_eq!(clean_text("", &Gazetteer::empty()), "");
        assert_eq!(clean_text("   \n\t ", &Gazetteer::empty()), "");
    }

    fn random_messy_text(rng: &mut ChaCha8Rng) -> String {
        let fragments = [
            "Ayuntamiento",
            "de",
            "Benidorm",
            "BENIDORM",
            "benidormense",
            "Página",
            "España",
            "ñoño",
            "https://x.es/a?b=1",
            "www.sitio.es",
            "<div>",
            "&amp;",
            "—",
            "«cita»",
            "número: 42",
            "¡hola!",
            "¿qué?",
            "a@b.es",
            "\t",
            "\n\n",
            "  ",
            "e'mail",
            "tróleo",
        ];
        let n = rng.random_range(0..30usize);
        (0..n)
            .map(|_| fragments[rng.random_range(0..fragments.len())])
            .collect::<Vec<_>>()
            .join(" ")
    }

    #[test]
    fn cleaning_is_idempotent_and_hygienic_on_fuzzed_input() {
        let g = Gazetteer::new(vec!["Benidorm".to_string(), "benidormense".to_string()]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(505);
        for _ in 0..500 {
            let input = random_messy_text(&mut rng);
            let once = clean_text(&input, &g);
            assert_eq!(once, clean_text(&once, &g), "not idempotent for {input:?}");
            assert!(!tag_residue_regex().is_match(&once), "tag residue in {once:?}");
            assert!(!url_residue_regex().is_match(&once), "url residue in {once:?}");
            for term in g.terms() {
                assert!(
                    !once.split(' ').any(|tok| tok == term),
                    "gazetteer term {term:?} survived in {once:?}"
                );
            }
        }
    }
}
