//! Domain types shared by every stage, plus whitespace tokenization and the
//! content normalization used for exact deduplication.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// One text unit flowing through the pipeline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    #[serde(rename = "source")]
    pub source_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fetched_at: Option<DateTime<Utc>>,
}

/// Source category, one per row of the corpus composition table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    WebCrawl,
    NewsRadio,
    AfghanNews,
    AggregatorBlog,
    PdfBooks,
    Encyclopedia,
    ParallelTranslation,
    Other,
}

impl Category {
    pub const ALL: [Category; 8] = [
        Category::WebCrawl,
        Category::NewsRadio,
        Category::AfghanNews,
        Category::AggregatorBlog,
        Category::PdfBooks,
        Category::Encyclopedia,
        Category::ParallelTranslation,
        Category::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::WebCrawl => "web_crawl",
            Category::NewsRadio => "news_radio",
            Category::AfghanNews => "afghan_news",
            Category::AggregatorBlog => "aggregator_blog",
            Category::PdfBooks => "pdf_books",
            Category::Encyclopedia => "encyclopedia",
            Category::ParallelTranslation => "parallel_translation",
            Category::Other => "other",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Whether a source arrives as an exported dump or is produced by a spider.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Dump,
    Crawl,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub name: String,
    pub category: Category,
    pub kind: SourceKind,
}

/// Inclusive code-point interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodepointRange {
    pub lo: u32,
    pub hi: u32,
}

impl CodepointRange {
    pub const fn new(lo: u32, hi: u32) -> Self {
        CodepointRange { lo, hi }
    }

    #[inline]
    pub fn contains(&self, cp: u32) -> bool {
        self.lo <= cp && cp <= self.hi
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProfileError {
    #[error("script profile `{name}` has no ranges")]
    Empty { name: String },
    #[error("script profile `{name}`: range U+{lo:04X}..U+{hi:04X} has lo > hi")]
    Inverted { name: String, lo: u32, hi: u32 },
    #[error("script profile `{name}`: range starting at U+{lo:04X} overlaps or is out of order")]
    Unordered { name: String, lo: u32 },
    #[error("script profile `{name}`: U+{cp:X} is not a Unicode scalar value bound")]
    OutOfRange { name: String, cp: u32 },
    #[error("unknown built-in script profile `{0}`")]
    UnknownBuiltin(String),
}

/// A named set of code-point ranges defining the target script.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScriptProfile {
    name: String,
    ranges: Vec<CodepointRange>,
}

impl ScriptProfile {
    /// Ranges must be sorted by `lo`, non-overlapping, each with `lo <= hi`.
    pub fn new(name: impl Into<String>, ranges: Vec<CodepointRange>) -> Result<Self, ProfileError> {
        let name = name.into();
        if ranges.is_empty() {
            return Err(ProfileError::Empty { name });
        }
        let mut prev_hi: Option<u32> = None;
        for r in &ranges {
            if r.hi > char::MAX as u32 {
                return Err(ProfileError::OutOfRange { name, cp: r.hi });
            }
            if r.lo > r.hi {
                return Err(ProfileError::Inverted { name, lo: r.lo, hi: r.hi });
            }
            if let Some(p) = prev_hi {
                if r.lo <= p {
                    return Err(ProfileError::Unordered { name, lo: r.lo });
                }
            }
            prev_hi = Some(r.hi);
        }
        Ok(ScriptProfile { name, ranges })
    }

    /// Arabic, Arabic Supplement, Arabic Extended-A and both presentation-form blocks.
    pub fn pashto() -> Self {
        ScriptProfile {
            name: "pashto".to_owned(),
            ranges: vec![
                CodepointRange::new(0x0600, 0x06FF),
                CodepointRange::new(0x0750, 0x077F),
                CodepointRange::new(0x08A0, 0x08FF),
                CodepointRange::new(0xFB50, 0xFDFF),
                CodepointRange::new(0xFE70, 0xFEFF),
            ],
        }
    }

    pub fn builtin(name: &str) -> Result<Self, ProfileError> {
        match name {
            "pashto" => Ok(Self::pashto()),
            other => Err(ProfileError::UnknownBuiltin(other.to_owned())),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ranges(&self) -> &[CodepointRange] {
        &self.ranges
    }

    #[inline]
    pub fn contains(&self, c: char) -> bool {
        let cp = c as u32;
        // ranges are sorted and disjoint
        let idx = self.ranges.partition_point(|r| r.hi < cp);
        self.ranges.get(idx).is_some_and(|r| r.contains(cp))
    }
}

impl<'de> Deserialize<'de> for ScriptProfile {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            name: String,
            ranges: Vec<CodepointRange>,
        }
        let raw = Raw::deserialize(deserializer)?;
        ScriptProfile::new(raw.name, raw.ranges).map_err(serde::de::Error::custom)
    }
}

/// Maximal runs of non-whitespace code points, split on Unicode `White_Space`.
pub fn tokenize(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

pub fn token_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Per-code-point simple lowercase, whitespace runs collapsed to one ASCII
/// space, ends trimmed.
pub fn normalize_for_hash(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for (i, token) in text.split_whitespace().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        for c in token.chars() {
            out.push(simple_lowercase(c));
        }
    }
    out
}

#[inline]
fn simple_lowercase(c: char) -> char {
    if c.is_ascii() {
        return c.to_ascii_lowercase();
    }
    // Only U+0130 has a multi-code-point full lowercase; its simple mapping
    // is the first code point of that expansion.
    c.to_lowercase().next().unwrap_or(c)
}

/// SHA-256 digest of document content.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContentHash(pub [u8; 32]);

impl ContentHash {
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Display for ContentHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for ContentHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ContentHash({})", self.to_hex())
    }
}

impl FromStr for ContentHash {
    type Err = hex::FromHexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = [0u8; 32];
        hex::decode_to_slice(s, &mut out)?;
        Ok(ContentHash(out))
    }
}

impl Serialize for ContentHash {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for ContentHash {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = <std::borrow::Cow<'de, str>>::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Hashes the UTF-8 bytes of `text`; callers pass normalized content.
pub fn content_hash(text: &str) -> ContentHash {
    ContentHash(Sha256::digest(text.as_bytes()).into())
}
