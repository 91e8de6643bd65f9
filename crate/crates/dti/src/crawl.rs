//! Depth-limited, polite, same-site web crawler.
//!
//! Breadth-first from a seed URL: only HTML responses enter the result,
//! only links on the seed's registrable domain are followed, URLs are
//! deduplicated after canonicalization (fragment stripped, default ports
//! dropped), and requests to one host are spaced by at least the
//! configured delay. robots.txt disallow rules are honored by default.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use regex::Regex;
use serde::{Deserialize, Serialize};
use url::Url;

use crate::error::{Error, Result};

/// Crawl limits and politeness settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CrawlPolicy {
    /// Link distance from the seed; the seed itself is depth 0.
    pub max_depth: usize,
    /// Cap on fetched HTML pages per site.
    pub max_pages: usize,
    /// Minimum gap between two requests to the same host, milliseconds.
    pub per_host_delay_ms: u64,
    pub respect_robots: bool,
    pub user_agent: String,
    /// Per-request timeout, milliseconds.
    pub timeout_ms: u64,
}

impl Default for CrawlPolicy {
    fn default() -> Self {
        CrawlPolicy {
            max_depth: 2,
            max_pages: 200,
            per_host_delay_ms: 1000,
            respect_robots: true,
            user_agent: format!("dti-crawler/{}", env!("CARGO_PKG_VERSION")),
            timeout_ms: 10_000,
        }
    }
}

impl CrawlPolicy {
    pub fn per_host_delay(&self) -> Duration {
        Duration::from_millis(self.per_host_delay_ms)
    }
}

/// One fetched HTML page.
#[derive(Debug, Clone)]
pub struct CrawledPage {
    pub url: Url,
    pub depth: usize,
    pub html: String,
}

/// One line of the fetch log. `elapsed_ms` counts from crawl start;
/// status 0 records a transport-level failure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchEntry {
    pub elapsed_ms: u64,
    pub url: String,
    pub status: u16,
    pub depth: usize,
    pub bytes: usize,
}

impl FetchEntry {
    /// Tab-separated line: timestamp, URL, HTTP status, depth, bytes.
    pub fn to_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}",
            self.elapsed_ms, self.url, self.status, self.depth, self.bytes
        )
    }
}

/// Crawl result: pages in breadth-first fetch order plus the fetch log.
#[derive(Debug, Default)]
pub struct CrawlOutcome {
    pub pages: Vec<CrawledPage>,
    pub log: Vec<FetchEntry>,
}

/// Serializes per-host request pacing and stamps log entries.
struct Pacer {
    started: Instant,
    delay: Duration,
    last_request: HashMap<String, Instant>,
}

impl Pacer {
    fn new(delay: Duration) -> Self {
        Pacer {
            started: Instant::now(),
            delay,
            last_request: HashMap::new(),
        }
    }

    fn wait_for(&mut self, host: &str) {
        if let Some(last) = self.last_request.get(host) {
            let since = last.elapsed();
            if since < self.delay {
                std::thread::sleep(self.delay - since);
            }
        }
        self.last_request.insert(host.to_string(), Instant::now());
    }

    fn elapsed_ms(&self) -> u64 {
        self.started.elapsed().as_millis() as u64
    }
}

pub struct Crawler {
    client: reqwest::blocking::Client,
    policy: CrawlPolicy,
}

impl Crawler {
    pub fn new(policy: CrawlPolicy) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .user_agent(policy.user_agent.clone())
            .timeout(Duration::from_millis(policy.timeout_ms))
            .build()
            .map_err(|e| Error::data(format!("http client: {e}")))?;
        Ok(Crawler { client, policy })
    }

    /// Breadth-first crawl from an absolute http(s) seed URL. A failure
    /// on the seed itself is a hard error; failures on discovered pages
    /// are logged and skipped.
    pub fn crawl(&self, seed_url: &str) -> Result<CrawlOutcome> {
        let seed = Url::parse(seed_url)
            .map_err(|e| Error::validation(format!("seed url {seed_url:?}: {e}")))?;
        if !matches!(seed.scheme(), "http" | "https") {
            return Err(Error::validation(format!(
                "seed url must be http(s), got {:?}",
                seed.scheme()
            )));
        }
        let seed = canonicalize(&seed);
        let site = registrable_domain(&seed).ok_or_else(|| {
            Error::validation(format!("seed url {seed} carries no host"))
        })?;

        let mut pacer = Pacer::new(self.policy.per_host_delay());
        let mut outcome = CrawlOutcome::default();
        let mut robots = RobotsCache::default();

        let mut visited: HashSet<String> = HashSet::new();
        let mut queue: VecDeque<(Url, usize)> = VecDeque::new();
        visited.insert(seed.as_str().to_string());
        queue.push_back((seed.clone(), 0));

        while let Some((url, depth)) = queue.pop_front() {
            if outcome.pages.len() >= self.policy.max_pages {
                break;
            }
            if self.policy.respect_robots
                && !robots.allowed(&url, self, &mut pacer, &mut outcome.log)
            {
                continue;
            }
            match self.fetch(&url, depth, &mut pacer, &mut outcome.log) {
                Ok(Some(html)) => {
                    if depth < self.policy.max_depth {
                        for link in extract_links(&url, &html) {
                            if registrable_domain(&link).as_deref() != Some(site.as_str()) {
                                continue;
                            }
                            if visited.insert(link.as_str().to_string()) {
                                queue.push_back((link, depth + 1));
                            }
                        }
                    }
                    outcome.pages.push(CrawledPage { url, depth, html });
                }
                Ok(None) => {} // non-HTML or HTTP error, already logged
                Err(err) => {
                    if depth == 0 {
                        return Err(err);
                    }
                    // transport failure on a discovered page: logged, move on
                }
            }
        }
        if outcome.pages.is_empty() {
            return Err(Error::data(format!(
                "seed page {seed} yielded no HTML content"
            )));
        }
        Ok(outcome)
    }

    /// Fetches one URL. Returns Ok(Some(html)) for 2xx HTML responses,
    /// Ok(None) for non-HTML or HTTP-level errors (logged), Err for
    /// transport failures (also logged).
    fn fetch(
        &self,
        url: &Url,
        depth: usize,
        pacer: &mut Pacer,
        log: &mut Vec<FetchEntry>,
    ) -> Result<Option<String>> {
        let host = host_key(url);
        pacer.wait_for(&host);
        let stamp = pacer.elapsed_ms();
        match self.client.get(url.as_str()).send() {
            Ok(resp) => {
                let status = resp.status().as_u16();
                let is_html = resp
                    .headers()
                    .get(reqwest::header::CONTENT_TYPE)
                    .and_then(|v| v.to_str().ok())
                    .map(|ct| ct.starts_with("text/html") || ct.starts_with("application/xhtml"))
                    .unwrap_or(false);
                let body = resp.text().unwrap_or_default();
                log.push(FetchEntry {
                    elapsed_ms: stamp,
                    url: url.as_str().to_string(),
                    status,
                    depth,
                    bytes: body.len(),
                });
                if (200..300).contains(&status) && is_html {
                    Ok(Some(body))
                } else if depth == 0 {
                    Err(Error::data(format!(
                        "seed fetch failed: {url} returned status {status}{}",
                        if is_html { "" } else { " (not HTML)" }
                    )))
                } else {
                    Ok(None)
                }
            }
            Err(e) => {
                log.push(FetchEntry {
                    elapsed_ms: stamp,
                    url: url.as_str().to_string(),
                    status: 0,
                    depth,
                    bytes: 0,
                });
                Err(Error::data(format!("fetch {url}: {e}")))
            }
        }
    }
}

#[derive(Default)]
struct RobotsCache {
    /// host -> disallow path prefixes (empty = everything allowed).
    rules: HashMap<String, Vec<String>>,
}

impl RobotsCache {
    fn allowed(
        &mut self,
        url: &Url,
        crawler: &Crawler,
        pacer: &mut Pacer,
        log: &mut Vec<FetchEntry>,
    ) -> bool {
        let host = host_key(url);
        if !self.rules.contains_key(&host) {
            let prefixes = self.fetch_rules(url, crawler, pacer, log);
            self.rules.insert(host.clone(), prefixes);
        }
        let prefixes = &self.rules[&host];
        let path = url.path();
        !prefixes.iter().any(|p| !p.is_empty() && path.starts_with(p))
    }

    fn fetch_rules(
        &self,
        url: &Url,
        crawler: &Crawler,
        pacer: &mut Pacer,
        log: &mut Vec<FetchEntry>,
    ) -> Vec<String> {
        let Ok(robots_url) = url.join("/robots.txt") else {
            return Vec::new();
        };
        let host = host_key(url);
        pacer.wait_for(&host);
        let stamp = pacer.elapsed_ms();
        let Ok(resp) = crawler.client.get(robots_url.as_str()).send() else {
            log.push(FetchEntry {
                elapsed_ms: stamp,
                url: robots_url.to_string(),
                status: 0,
                depth: 0,
                bytes: 0,
            });
            return Vec::new();
        };
        let status = resp.status().as_u16();
        let body = resp.text().unwrap_or_default();
        log.push(FetchEntry {
            elapsed_ms: stamp,
            url: robots_url.to_string(),
            status,
            depth: 0,
            bytes: body.len(),
        });
        if status != 200 {
            return Vec::new();
        }
        parse_robots(&body, &crawler.policy.user_agent)
    }
}

/// Extracts the Disallow prefixes applying to `user_agent` (or `*`).
pub fn parse_robots(body: &str, user_agent: &str) -> Vec<String> {
    let agent_token = user_agent
        .split('/')
        .next()
        .unwrap_or(user_agent)
        .to_ascii_lowercase();
    let mut prefixes = Vec::new();
    let mut group_matches = false;
    let mut in_group_header = false;
    for line in body.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once(':') else {
            continue;
        };
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim();
        match key.as_str() {
            "user-agent" => {
                let agent = value.to_ascii_lowercase();
                let matches = agent == "*" || agent_token.contains(&agent) || agent.contains(&agent_token);
                if in_group_header {
                    group_matches |= matches;
                } else {
                    group_matches = matches;
                }
                in_group_header = true;
            }
            "disallow" => {
                in_group_header = false;
                if group_matches && !value.is_empty() {
                    prefixes.push(value.to_string());
                }
            }
            _ => {
                in_group_header = false;
            }
        }
    }
    prefixes
}

/// Strips the fragment; the url crate already drops default ports.
pub fn canonicalize(url: &Url) -> Url {
    let mut out = url.clone();
    out.set_fragment(None);
    out
}

fn host_key(url: &Url) -> String {
    match (url.host_str(), url.port()) {
        (Some(h), Some(p)) => format!("{h}:{p}"),
        (Some(h), None) => h.to_string(),
        _ => String::new(),
    }
}

/// Multi-label public suffixes common in this corpus; anything else is
/// treated as a single-label TLD.
const MULTI_LABEL_SUFFIXES: &[&str] = &[
    "co.uk", "org.uk", "gov.uk", "ac.uk", "com.es", "nom.es", "org.es", "gob.es", "edu.es",
    "com.au", "net.au", "org.au", "com.br", "com.mx", "com.ar",
];

/// The registrable domain (eTLD+1): the unit inside which links are
/// followed. IP hosts are their own site; ports are ignored so that a
/// fixture server and its pages compare equal.
pub fn registrable_domain(url: &Url) -> Option<String> {
    let host = url.host_str()?.to_ascii_lowercase();
    if host.parse::<std::net::IpAddr>().is_ok() {
        return Some(host);
    }
    let labels: Vec<&str> = host.split('.').collect();
    if labels.len() <= 2 {
        return Some(host);
    }
    let last_two = labels[labels.len() - 2..].join(".");
    let take = if MULTI_LABEL_SUFFIXES.contains(&last_two.as_str()) {
        3
    } else {
        2
    };
    Some(labels[labels.len() - take.min(labels.len())..].join("."))
}

fn href_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r#"(?is)<a\s[^>]*?href\s*=\s*(?:"([^"]*)"|'([^']*)'|([^\s>]+))"#).unwrap()
    })
}

/// Anchors in document order, resolved against the page URL,
/// canonicalized, http(s) only.
pub fn extract_links(base: &Url, html: &str) -> Vec<Url> {
    let mut links = Vec::new();
    for caps in href_regex().captures_iter(html) {
        let raw = caps
            .get(1)
            .or_else(|| caps.get(2))
            .or_else(|| caps.get(3))
            .map(|m| m.as_str().trim())
            .unwrap_or("");
        if raw.is_empty() {
            continue;
        }
        let Ok(resolved) = base.join(raw) else { continue };
        if !matches!(resolved.scheme(), "http" | "https") {
            continue;
        }
        links.push(canonicalize(&resolved));
    }
    links
}

/// Writes the fetch log as tab-separated text with a header line.
pub fn write_fetch_log(path: impl AsRef<std::path::Path>, entries: &[FetchEntry]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("elapsed_ms\turl\tstatus\tdepth\tbytes\n");
    for entry in entries {
        out.push_str(&entry.to_line());
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
