//! Breadth-first spider driven by a start URL, link-following rules, an
//! optional path filter and a content selector.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use corpuskit::{Document, SpiderSection};
use scraper::Html;
use sha2::{Digest, Sha256};
use thiserror::Error;
use url::Url;

use crate::fetch::{FetchError, FetchResponse, Fetcher};
use crate::html::{discover_from, extract_from, page_title};
use crate::robots::RobotsRules;
use crate::selector::{ContentSelector, SelectorError};
use crate::urls::{parse_absolute, AllowPattern, UrlError};

#[derive(Debug, Error)]
pub enum SpiderConfigError {
    #[error("invalid spider key `{key}`: {message}")]
    Invalid { key: String, message: String },
}

#[derive(Debug, Clone)]
pub struct SpiderConfig {
    pub name: String,
    pub start_urls: Vec<Url>,
    pub allow_patterns: Vec<AllowPattern>,
    pub url_must_contain: Option<String>,
    pub content_selector: ContentSelector,
    pub max_pages: u64,
    pub min_delay: Duration,
    pub same_host_only: bool,
    pub respect_robots: bool,
    pub user_agent: String,
    pub concurrency: usize,
    pub timeout: Duration,
}

impl SpiderConfig {
    /// Seed-only spider with defaults: no link rules, one page, no delay.
    pub fn new(name: &str, start_urls: &[&str], selector: &str) -> Result<Self, SpiderConfigError> {
        let section = SpiderSection {
            start_urls: start_urls.iter().map(|s| s.to_string()).collect(),
            allow_patterns: Vec::new(),
            url_must_contain: None,
            content_selector: selector.to_owned(),
            max_pages: SpiderSection::DEFAULT_MAX_PAGES,
            min_delay_ms: 0,
            same_host_only: true,
            respect_robots: true,
            user_agent: SpiderSection::DEFAULT_USER_AGENT.to_owned(),
            concurrency: 1,
            timeout_ms: SpiderSection::DEFAULT_TIMEOUT_MS,
        };
        Self::from_section(name, &section)
    }

    /// Validates URLs, patterns and the selector; errors name the config key.
    pub fn from_section(name: &str, s: &SpiderSection) -> Result<Self, SpiderConfigError> {
        let invalid = |field: &str, message: String| SpiderConfigError::Invalid {
            key: format!("source.{name}.{field}"),
            message,
        };
        if s.start_urls.is_empty() {
            return Err(invalid("start_urls", "at least one start URL is required".into()));
        }
        let start_urls = s
            .start_urls
            .iter()
            .map(|u| parse_absolute(u))
            .collect::<Result<Vec<_>, UrlError>>()
            .map_err(|e| invalid("start_urls", e.to_string()))?;
        let allow_patterns = s
            .allow_patterns
            .iter()
            .map(|p| AllowPattern::parse(p))
            .collect::<Result<Vec<_>, UrlError>>()
            .map_err(|e| invalid("allow_patterns", e.to_string()))?;
        let content_selector = ContentSelector::parse(&s.content_selector)
            .map_err(|e: SelectorError| invalid("content_selector", e.to_string()))?;
        if s.max_pages < 1 {
            return Err(invalid("max_pages", "must be >= 1".into()));
        }
        if let Some(m) = &s.url_must_contain {
            if m.is_empty() {
                return Err(invalid("url_must_contain", "must not be empty".into()));
            }
        }
        Ok(SpiderConfig {
            name: name.to_owned(),
            start_urls,
            allow_patterns,
            url_must_contain: s.url_must_contain.clone(),
            content_selector,
            max_pages: s.max_pages,
            min_delay: Duration::from_millis(s.min_delay_ms),
            same_host_only: s.same_host_only,
            respect_robots: s.respect_robots,
            user_agent: s.user_agent.clone(),
            concurrency: s.concurrency.max(1),
            timeout: Duration::from_millis(s.timeout_ms),
        })
    }

    fn start_hosts(&self) -> impl Iterator<Item = &str> {
        self.start_urls.iter().filter_map(|u| u.host_str())
    }
}

/// Host restriction (when `same_host_only`) and the `url_must_contain` path
/// substring.
pub fn url_filter(url: &Url, config: &SpiderConfig) -> bool {
    if config.same_host_only {
        let Some(host) = url.host_str() else { return false };
        if !config.start_hosts().any(|h| h == host) {
            return false;
        }
    }
    match &config.url_must_contain {
        Some(needle) => url.path().contains(needle.as_str()),
        None => true,
    }
}

/// Time source for politeness delays; injectable so tests need not sleep.
pub trait Clock: Sync {
    /// Monotonic time since an arbitrary origin.
    fn now(&self) -> Duration;
    fn sleep(&self, d: Duration);
}

pub struct SystemClock {
    origin: Instant,
}

impl Default for SystemClock {
    fn default() -> Self {
        SystemClock { origin: Instant::now() }
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }

    fn sleep(&self, d: Duration) {
        std::thread::sleep(d);
    }
}

/// Virtual clock: `sleep` advances time instantly.
#[derive(Debug, Default)]
pub struct ManualClock {
    nanos: AtomicU64,
}

impl ManualClock {
    pub fn advance(&self, d: Duration) {
        self.nanos.fetch_add(d.as_nanos() as u64, Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Duration {
        Duration::from_nanos(self.nanos.load(Ordering::SeqCst))
    }

    fn sleep(&self, d: Duration) {
        self.advance(d);
    }
}

/// Per-host request slots spaced at least `delay` apart, shared by workers.
struct Politeness<'c> {
    clock: &'c dyn Clock,
    delay: Duration,
    next: Mutex<HashMap<String, Duration>>,
}

impl Politeness<'_> {
    fn wait_turn(&self, host: &str) {
        if self.delay.is_zero() {
            return;
        }
        let (slot, now) = {
            let mut next = self.next.lock().expect("politeness table poisoned");
            let now = self.clock.now();
            let slot = next.get(host).copied().map_or(now, |n| n.max(now));
            next.insert(host.to_owned(), slot + self.delay);
            (slot, now)
        };
        if slot > now {
            self.clock.sleep(slot - now);
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CrawlStats {
    pub pages_fetched: u64,
    pub docs_emitted: u64,
    pub errors: u64,
    pub robots_blocked: u64,
}

/// Frontier, visited set and counters of one crawl.
#[derive(Debug, Default)]
pub struct CrawlState {
    pub frontier: VecDeque<Url>,
    pub visited: HashSet<String>,
    enqueued: HashSet<String>,
    pub stats: CrawlStats,
}

impl CrawlState {
    fn enqueue(&mut self, url: Url) {
        if self.enqueued.insert(url.as_str().to_owned()) {
            self.frontier.push_back(url);
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CrawlOptions {
    /// Stamp documents with the fetch time (off for reproducible output).
    pub record_fetch_time: bool,
}

/// Stable document id for a page: hex SHA-256 of its canonical URL.
pub fn url_digest(url: &Url) -> String {
    hex::encode(Sha256::digest(url.as_str().as_bytes()))
}

fn robots_url(url: &Url) -> Option<Url> {
    let mut u = url.clone();
    u.set_path("/robots.txt");
    u.set_query(None);
    u.set_fragment(None);
    Some(u)
}

fn host_key(url: &Url) -> String {
    match url.port() {
        Some(p) => format!("{}:{p}", url.host_str().unwrap_or("")),
        None => url.host_str().unwrap_or("").to_owned(),
    }
}

fn fetch_with_retry(fetcher: &dyn Fetcher, polite: &Politeness<'_>, url: &Url) -> Result<FetchResponse, FetchError> {
    let host = host_key(url);
    polite.wait_turn(&host);
    match fetcher.fetch(url) {
        Err(FetchError::Timeout) => {
            polite.wait_turn(&host);
            fetcher.fetch(url)
        }
        other => other,
    }
}

/// Breadth-first crawl from the start URLs.
///
/// Pages are fetched in frontier order, up to `concurrency` at a time, and
/// processed in that same order, so output does not depend on the worker
/// count. Fetch failures are counted, never fatal. Each page emits at most
/// one document: the selector's text, when non-empty and the page URL passes
/// [`url_filter`].
pub fn crawl<F>(
    config: &SpiderConfig,
    fetcher: &dyn Fetcher,
    clock: &dyn Clock,
    options: CrawlOptions,
    mut emit: F,
) -> CrawlStats
where
    F: FnMut(Document),
{
    let polite = Politeness { clock, delay: config.min_delay, next: Mutex::new(HashMap::new()) };
    let mut robots: HashMap<String, RobotsRules> = HashMap::new();
    let mut state = CrawlState::default();
    for u in &config.start_urls {
        state.enqueue(u.clone());
    }

    while state.stats.pages_fetched < config.max_pages && !state.frontier.is_empty() {
        let budget = (config.max_pages - state.stats.pages_fetched).min(config.concurrency as u64) as usize;
        let mut batch: Vec<Url> = Vec::with_capacity(budget);
        while batch.len() < budget {
            let Some(url) = state.frontier.pop_front() else { break };
            if config.respect_robots {
                let key = format!("{}://{}", url.scheme(), host_key(&url));
                let rules = robots.entry(key).or_insert_with(|| load_robots(fetcher, &polite, &url, &config.user_agent));
                let mut target = url.path().to_owned();
                if let Some(q) = url.query() {
                    target.push('?');
                    target.push_str(q);
                }
                if !rules.is_allowed(&target) {
                    state.stats.robots_blocked += 1;
                    continue;
                }
            }
            batch.push(url);
        }
        if batch.is_empty() {
            continue;
        }
        for u in &batch {
            state.visited.insert(u.as_str().to_owned());
        }
        state.stats.pages_fetched += batch.len() as u64;

        let results: Vec<Result<FetchResponse, FetchError>> = if batch.len() == 1 {
            vec![fetch_with_retry(fetcher, &polite, &batch[0])]
        } else {
            std::thread::scope(|s| {
                let handles: Vec<_> =
                    batch.iter().map(|u| s.spawn(|| fetch_with_retry(fetcher, &polite, u))).collect();
                handles
                    .into_iter()
                    .map(|h| h.join().unwrap_or_else(|_| Err(FetchError::Network("fetch worker panicked".into()))))
                    .collect()
            })
        };

        for (url, result) in batch.into_iter().zip(results) {
            let resp = match result {
                Ok(r) if r.status < 400 => r,
                _ => {
                    state.stats.errors += 1;
                    continue;
                }
            };
            if !(200..300).contains(&resp.status) || !resp.is_html() {
                continue;
            }
            let doc = Html::parse_document(&resp.body);
            let text = extract_from(&doc, &config.content_selector);
            if !text.is_empty() && url_filter(&url, config) {
                emit(Document {
                    id: url_digest(&url),
                    source_id: config.name.clone(),
                    url: Some(url.as_str().to_owned()),
                    title: page_title(&doc),
                    text,
                    fetched_at: options.record_fetch_time.then(chrono::Utc::now),
                });
                state.stats.docs_emitted += 1;
            }
            for link in discover_from(&doc, &url, config) {
                if !state.visited.contains(link.as_str()) {
                    state.enqueue(link);
                }
            }
        }
    }
    state.stats
}

/// 2xx parses, 4xx means no rules, 5xx disallows the host. Transport errors
/// fall through to allow-all so the page fetch itself reports the failure.
fn load_robots(fetcher: &dyn Fetcher, polite: &Politeness<'_>, url: &Url, user_agent: &str) -> RobotsRules {
    let Some(robots) = robots_url(url) else { return RobotsRules::allow_all() };
    match fetch_with_retry(fetcher, polite, &robots) {
        Ok(r) if (200..300).contains(&r.status) => RobotsRules::parse(&r.body, user_agent),
        Ok(r) if r.status >= 500 => RobotsRules::disallow_all(),
        _ => RobotsRules::allow_all(),
    }
}

/// Collects a crawl into memory.
pub fn crawl_to_vec(
    config: &SpiderConfig,
    fetcher: &dyn Fetcher,
    clock: &dyn Clock,
    options: CrawlOptions,
) -> (Vec<Document>, CrawlStats) {
    let mut docs = Vec::new();
    let stats = crawl(config, fetcher, clock, options, |d| docs.push(d));
    (docs, stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(must: Option<&str>) -> SpiderConfig {
        let mut c = SpiderConfig::new("t", &["https://x.org/pa/"], "p").unwrap();
        c.url_must_contain = must.map(str::to_owned);
        c
    }

    #[test]
    fn url_filter_examples() {
        let c = cfg(Some("/pa/"));
        assert!(url_filter(&parse_absolute("https://x.org/pa/news/1").unwrap(), &c));
        assert!(!url_filter(&parse_absolute("https://x.org/en/news/1").unwrap(), &c));
        let c = cfg(None);
        assert!(url_filter(&parse_absolute("https://x.org/anything").unwrap(), &c));
        assert!(!url_filter(&parse_absolute("https://other.org/pa/").unwrap(), &c));
        let mut open = cfg(None);
        open.same_host_only = false;
        assert!(url_filter(&parse_absolute("https://other.org/pa/").unwrap(), &open));
    }

    #[test]
    fn must_contain_checks_path_not_query() {
        let c = cfg(Some("/pa/"));
        assert!(!url_filter(&parse_absolute("https://x.org/en/?next=/pa/").unwrap(), &c));
    }

    #[test]
    fn config_errors_name_keys() {
        let bad_sel = SpiderConfig::new("s", &["https://x.org/"], "p > a").unwrap_err();
        assert!(bad_sel.to_string().contains("source.s.content_selector"), "{bad_sel}");
        let bad_url = SpiderConfig::new("s", &["/relative"], "p").unwrap_err();
        assert!(bad_url.to_string().contains("source.s.start_urls"), "{bad_url}");
        assert!(SpiderConfig::new("s", &[], "p").is_err());
    }

    #[test]
    fn manual_clock_politeness_spacing() {
        let clock = ManualClock::default();
        let p = Politeness { clock: &clock, delay: Duration::from_millis(100), next: Mutex::new(HashMap::new()) };
        let mut times = Vec::new();
        for _ in 0..3 {
            p.wait_turn("a");
            times.push(clock.now());
        }
        p.wait_turn("b");
        assert_eq!(times, [Duration::ZERO, Duration::from_millis(100), Duration::from_millis(200)]);
        // another host is not delayed
        assert_eq!(clock.now(), Duration::from_millis(200));
    }
}
