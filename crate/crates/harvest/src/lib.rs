//! Web harvesting for corpuskit: a polite breadth-first spider with CSS-style
//! content extraction, link discovery and robots.txt handling.

pub mod fetch;
pub mod html;
pub mod robots;
pub mod selector;
pub mod spider;
pub mod urls;

pub use fetch::{FetchError, FetchResponse, Fetcher, HttpFetcher};
pub use html::{discover_links, extract_content};
pub use robots::RobotsRules;
pub use selector::{ContentSelector, SelectorError};
pub use spider::{
    crawl, crawl_to_vec, url_digest, url_filter, Clock, CrawlOptions, CrawlStats, ManualClock, SpiderConfig,
    SpiderConfigError, SystemClock,
};
pub use urls::{canonicalize, parse_absolute, AllowPattern, UrlError};
