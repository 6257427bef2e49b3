//! TOML run configuration with `[pipeline]`, `[langid]` and `[source.NAME]`
//! sections. Unknown keys are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::filters::LangIdConfig;
use crate::model::{Category, CodepointRange, ScriptProfile, SourceKind, SourceSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("invalid config key `{key}`: {message}")]
    Invalid { key: String, message: String },
}

impl ConfigError {
    pub fn invalid(key: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid { key: key.into(), message: message.into() }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    pipeline: RawPipeline,
    #[serde(default)]
    langid: RawLangId,
    #[serde(default)]
    source: IndexMap<String, RawSource>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPipeline {
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    #[serde(default = "default_min_tokens")]
    min_tokens: i64,
    #[serde(default = "default_shard_max_docs")]
    shard_max_docs: i64,
    #[serde(default = "default_true")]
    deterministic: bool,
    #[serde(default)]
    compress: bool,
    #[serde(default = "default_jobs")]
    jobs: i64,
}

impl Default for RawPipeline {
    fn default() -> Self {
        RawPipeline {
            output_dir: default_output_dir(),
            min_tokens: default_min_tokens(),
            shard_max_docs: default_shard_max_docs(),
            deterministic: true,
            compress: false,
            jobs: default_jobs(),
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_min_tokens() -> i64 {
    10
}
fn default_shard_max_docs() -> i64 {
    100_000
}
fn default_true() -> bool {
    true
}
fn default_jobs() -> i64 {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLangId {
    #[serde(default = "default_profile")]
    profile: String,
    ranges: Option<Vec<[u32; 2]>>,
    #[serde(default = "default_min_ratio")]
    min_ratio: f64,
    #[serde(default = "default_threshold")]
    token_membership_threshold: f64,
}

impl Default for RawLangId {
    fn default() -> Self {
        RawLangId {
            profile: default_profile(),
            ranges: None,
            min_ratio: default_min_ratio(),
            token_membership_threshold: default_threshold(),
        }
    }
}

fn default_profile() -> String {
    "pashto".into()
}
fn default_min_ratio() -> f64 {
    LangIdConfig::DEFAULT_MIN_RATIO
}
fn default_threshold() -> f64 {
    LangIdConfig::DEFAULT_MEMBERSHIP_THRESHOLD
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSource {
    category: Category,
    kind: SourceKind,
    input: PathBuf,
    start_urls: Option<Vec<String>>,
    allow_patterns: Option<Vec<String>>,
    url_must_contain: Option<String>,
    content_selector: Option<String>,
    max_pages: Option<i64>,
    min_delay_ms: Option<i64>,
    same_host_only: Option<bool>,
    respect_robots: Option<bool>,
    user_agent: Option<String>,
    concurrency: Option<i64>,
    timeout_ms: Option<i64>,
}

/// Spider fields of a `kind = "crawl"` source, validated for presence and
/// ranges only. URL and selector syntax are checked by the crawler.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpiderSection {
    pub start_urls: Vec<String>,
    pub allow_patterns: Vec<String>,
    pub url_must_contain: Option<String>,
    pub content_selector: String,
    pub max_pages: u64,
    pub min_delay_ms: u64,
    pub same_host_only: bool,
    pub respect_robots: bool,
    pub user_agent: String,
    pub concurrency: usize,
    pub timeout_ms: u64,
}

impl SpiderSection {
    pub const DEFAULT_MAX_PAGES: u64 = 1000;
    pub const DEFAULT_USER_AGENT: &'static str = concat!("corpuskit/", env!("CARGO_PKG_VERSION"));
    pub const DEFAULT_TIMEOUT_MS: u64 = 30_000;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceEntry {
    pub spec: SourceSpec,
    pub input: PathBuf,
    pub spider: Option<SpiderSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub sources: Vec<SourceEntry>,
    pub langid: LangIdConfig,
    pub min_tokens: u64,
    pub output_dir: PathBuf,
    pub shard_max_docs: usize,
    pub deterministic: bool,
    pub compress: bool,
    pub jobs: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            sources: Vec::new(),
            langid: LangIdConfig::default(),
            min_tokens: default_min_tokens() as u64,
            output_dir: default_output_dir(),
            shard_max_docs: default_shard_max_docs() as usize,
            deterministic: true,
            compress: false,
            jobs: 1,
        }
    }
}

fn non_negative(key: &str, v: i64) -> Result<u64, ConfigError> {
    u64::try_from(v).map_err(|_| ConfigError::invalid(key, format!("must be >= 0, got {v}")))
}

fn positive(key: &str, v: i64) -> Result<u64, ConfigError> {
    if v < 1 {
        return Err(ConfigError::invalid(key, format!("must be >= 1, got {v}")));
    }
    Ok(v as u64)
}

impl PipelineConfig {
    /// Reads a config file; relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path)
            .map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base_dir.join(p) };

        let ranges = match raw.langid.ranges {
            Some(r) => r.into_iter().map(|[lo, hi]| CodepointRange::new(lo, hi)).collect(),
            None => Vec::new(),
        };
        let profile = if ranges.is_empty() {
            ScriptProfile::builtin(&raw.langid.profile)
                .map_err(|e| ConfigError::invalid("langid.profile", e.to_string()))?
        } else {
            ScriptProfile::new(raw.langid.profile.clone(), ranges)
                .map_err(|e| ConfigError::invalid("langid.ranges", e.to_string()))?
        };
        let langid = LangIdConfig::new(profile, raw.langid.min_ratio, raw.langid.token_membership_threshold)
            .map_err(|e| match e {
                crate::filters::LangIdConfigError::MinRatio(_) => ConfigError::invalid("langid.min_ratio", e.to_string()),
                crate::filters::LangIdConfigError::MembershipThreshold(_) => {
                    ConfigError::invalid("langid.token_membership_threshold", e.to_string())
                }
            })?;

        let mut sources = Vec::with_capacity(raw.source.len());
        for (name, src) in raw.source {
            let key = |field: &str| format!("source.{name}.{field}");
            if name.is_empty() || name.contains(['/', '\\']) || name.starts_with('.') {
                return Err(ConfigError::invalid(format!("source.{name}"), "source name must be non-empty and path-safe"));
            }
            let spider = match src.kind {
                SourceKind::Dump => {
                    let stray = [
                        ("start_urls", src.start_urls.is_some()),
                        ("allow_patterns", src.allow_patterns.is_some()),
                        ("url_must_contain", src.url_must_contain.is_some()),
                        ("content_selector", src.content_selector.is_some()),
                        ("max_pages", src.max_pages.is_some()),
                        ("min_delay_ms", src.min_delay_ms.is_some()),
                        ("same_host_only", src.same_host_only.is_some()),
                        ("respect_robots", src.respect_robots.is_some()),
                        ("user_agent", src.user_agent.is_some()),
                        ("concurrency", src.concurrency.is_some()),
                        ("timeout_ms", src.timeout_ms.is_some()),
                    ];
                    if let Some((field, _)) = stray.iter().find(|(_, set)| *set) {
                        return Err(ConfigError::invalid(key(field), "spider field on a dump source"));
                    }
                    None
                }
                SourceKind::Crawl => {
                    let start_urls = src
                        .start_urls
                        .filter(|u| !u.is_empty())
                        .ok_or_else(|| ConfigError::invalid(key("start_urls"), "crawl source needs at least one start URL"))?;
                    let content_selector = src
                        .content_selector
                        .ok_or_else(|| ConfigError::invalid(key("content_selector"), "crawl source needs a content selector"))?;
                    Some(SpiderSection {
                        start_urls,
                        allow_patterns: src.allow_patterns.unwrap_or_default(),
                        url_must_contain: src.url_must_contain,
                        content_selector,
                        max_pages: match src.max_pages {
                            Some(v) => positive(&key("max_pages"), v)?,
                            None => SpiderSection::DEFAULT_MAX_PAGES,
                        },
                        min_delay_ms: match src.min_delay_ms {
                            Some(v) => non_negative(&key("min_delay_ms"), v)?,
                            None => 0,
                        },
                        same_host_only: src.same_host_only.unwrap_or(true),
                        respect_robots: src.respect_robots.unwrap_or(true),
                        user_agent: src.user_agent.unwrap_or_else(|| SpiderSection::DEFAULT_USER_AGENT.to_owned()),
                        concurrency: match src.concurrency {
                            Some(v) => positive(&key("concurrency"), v)? as usize,
                            None => 1,
                        },
                        timeout_ms: match src.timeout_ms {
                            Some(v) => positive(&key("timeout_ms"), v)?,
                            None => SpiderSection::DEFAULT_TIMEOUT_MS,
                        },
                    })
                }
            };
            sources.push(SourceEntry {
                spec: SourceSpec { name, category: src.category, kind: src.kind },
                input: resolve(src.input),
                spider,
            });
        }

        Ok(PipelineConfig {
            sources,
            langid,
            min_tokens: non_negative("pipeline.min_tokens", raw.pipeline.min_tokens)?,
            output_dir: resolve(raw.pipeline.output_dir),
            shard_max_docs: positive("pipeline.shard_max_docs", raw.pipeline.shard_max_docs)? as usize,
            deterministic: raw.pipeline.deterministic,
            compress: raw.pipeline.compress,
            jobs: positive("pipeline.jobs", raw.pipeline.jobs)? as usize,
        })
    }

    pub fn source(&self, name: &str) -> Option<&SourceEntry> {
        self.sources.iter().find(|s| s.spec.name == name)
    }

    /// SHA-256 over the settings that determine run output. Output location
    /// and worker count are excluded.
    pub fn digest(&self) -> String {
        #[derive(Serialize)]
        struct View<'a> {
            sources: &'a [SourceEntry],
            langid: &'a LangIdConfig,
            min_tokens: u64,
            shard_max_docs: usize,
            compress: bool,
        }
        let view = View {
            sources: &self.sources,
            langid: &self.langid,
            min_tokens: self.min_tokens,
            shard_max_docs: self.shard_max_docs,
            compress: self.compress,
        };
        let bytes = serde_json::to_vec(&view).expect("config view serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}
