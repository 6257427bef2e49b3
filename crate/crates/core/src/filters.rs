//! The three filter stages: script-ratio language identification, exact
//! content deduplication and the minimum-token quality gate.

use std::collections::HashSet;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{content_hash, normalize_for_hash, ContentHash, Document, ScriptProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Keep,
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Langid,
    Dedup,
    MinTokens,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Langid => "langid",
            Stage::Dedup => "dedup",
            Stage::MinTokens => "min_tokens",
        }
    }
}

/// Stage-specific evidence attached to a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Detail {
    Ratio(f64),
    Tokens(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterDecision {
    pub verdict: Verdict,
    pub stage: Stage,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Detail>,
}

impl FilterDecision {
    pub fn is_keep(&self) -> bool {
        self.verdict == Verdict::Keep
    }

    fn new(keep: bool, stage: Stage, detail: Option<Detail>) -> Self {
        FilterDecision {
            verdict: if keep { Verdict::Keep } else { Verdict::Reject },
            stage,
            detail,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum LangIdConfigError {
    #[error("min_ratio must be within [0, 1], got {0}")]
    MinRatio(f64),
    #[error("token_membership_threshold must be within [0, 1], got {0}")]
    MembershipThreshold(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LangIdConfig {
    pub profile: ScriptProfile,
    pub min_ratio: f64,
    pub token_membership_threshold: f64,
}

impl LangIdConfig {
    pub const DEFAULT_MIN_RATIO: f64 = 0.70;
    pub const DEFAULT_MEMBERSHIP_THRESHOLD: f64 = 0.5;

    pub fn new(
        profile: ScriptProfile,
        min_ratio: f64,
        token_membership_threshold: f64,
    ) -> Result<Self, LangIdConfigError> {
        if !(0.0..=1.0).contains(&min_ratio) {
            return Err(LangIdConfigError::MinRatio(min_ratio));
        }
        if !(0.0..=1.0).contains(&token_membership_threshold) {
            return Err(LangIdConfigError::MembershipThreshold(token_membership_threshold));
        }
        Ok(LangIdConfig { profile, min_ratio, token_membership_threshold })
    }
}

impl Default for LangIdConfig {
    fn default() -> Self {
        LangIdConfig {
            profile: ScriptProfile::pashto(),
            min_ratio: Self::DEFAULT_MIN_RATIO,
            token_membership_threshold: Self::DEFAULT_MEMBERSHIP_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScriptClass {
    InScript,
    OutOfScript,
    /// No letters at all: digits, punctuation, symbols.
    Neutral,
}

/// Classifies a single non-empty token by the share of its letters that fall
/// inside the profile.
///
/// # Panics
///
/// Panics on an empty token.
pub fn token_script_class(token: &str, profile: &ScriptProfile, threshold: f64) -> ScriptClass {
    assert!(!token.is_empty(), "token_script_class called with an empty token");
    let mut letters = 0u32;
    let mut inside = 0u32;
    for c in token.chars() {
        if c.is_alphabetic() {
            letters += 1;
            if profile.contains(c) {
                inside += 1;
            }
        }
    }
    if letters == 0 {
        ScriptClass::Neutral
    } else if f64::from(inside) >= threshold * f64::from(letters) {
        ScriptClass::InScript
    } else {
        ScriptClass::OutOfScript
    }
}

/// In-script tokens over non-neutral tokens; 0.0 when nothing is countable.
pub fn script_ratio<'a, I>(tokens: I, config: &LangIdConfig) -> f64
where
    I: IntoIterator<Item = &'a str>,
{
    let (inside, counted) = script_counts(tokens, config);
    if counted == 0 {
        0.0
    } else {
        inside as f64 / counted as f64
    }
}

fn script_counts<'a, I>(tokens: I, config: &LangIdConfig) -> (u64, u64)
where
    I: IntoIterator<Item = &'a str>,
{
    let mut inside = 0u64;
    let mut counted = 0u64;
    for token in tokens {
        match token_script_class(token, &config.profile, config.token_membership_threshold) {
            ScriptClass::InScript => {
                inside += 1;
                counted += 1;
            }
            ScriptClass::OutOfScript => counted += 1,
            ScriptClass::Neutral => {}
        }
    }
    (inside, counted)
}

/// Keeps when the script ratio reaches `min_ratio`. Equality keeps.
pub fn langid_filter(doc: &Document, config: &LangIdConfig) -> FilterDecision {
    langid_decision(&doc.text, config)
}

pub(crate) fn langid_decision(text: &str, config: &LangIdConfig) -> FilterDecision {
    let (inside, counted) = script_counts(text.split_whitespace(), config);
    let ratio = if counted == 0 { 0.0 } else { inside as f64 / counted as f64 };
    // compare in integers so 7/10 against 0.70 is not at the mercy of rounding
    let keep = counted > 0 && ratio_at_least(inside, counted, config.min_ratio);
    let keep = keep || (counted == 0 && config.min_ratio <= 0.0);
    FilterDecision::new(keep, Stage::Langid, Some(Detail::Ratio(ratio)))
}

/// `inside / counted >= min_ratio`, robust to the decimal threshold not being
/// exactly representable.
fn ratio_at_least(inside: u64, counted: u64, min_ratio: f64) -> bool {
    let lhs = inside as f64;
    let rhs = min_ratio * counted as f64;
    // thresholds are given with a handful of decimals; treat anything within
    // a few ulps of the product as equal
    lhs >= rhs || (rhs - lhs) <= rhs.abs() * 4.0 * f64::EPSILON
}

/// Keeps when the document has at least `min_tokens` whitespace tokens.
pub fn min_token_filter(doc: &Document, min_tokens: u64) -> FilterDecision {
    min_tokens_decision(crate::model::token_count(&doc.text) as u64, min_tokens)
}

pub(crate) fn min_tokens_decision(count: u64, min_tokens: u64) -> FilterDecision {
    FilterDecision::new(count >= min_tokens, Stage::MinTokens, Some(Detail::Tokens(count)))
}

/// Set of content digests with keep-first check-and-insert.
///
/// Insertion goes through a mutex, so one index can be shared by concurrent
/// workers with linearizable set semantics.
#[derive(Debug, Default)]
pub struct DedupIndex {
    digests: Mutex<HashSet<ContentHash>>,
}

impl DedupIndex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns true when `digest` was not present (and is now).
    pub fn check_and_insert(&self, digest: ContentHash) -> bool {
        self.digests.lock().expect("dedup index poisoned").insert(digest)
    }

    pub fn contains(&self, digest: &ContentHash) -> bool {
        self.digests.lock().expect("dedup index poisoned").contains(digest)
    }

    pub fn inserted_count(&self) -> u64 {
        self.digests.lock().expect("dedup index poisoned").len() as u64
    }
}

pub fn document_digest(text: &str) -> ContentHash {
    content_hash(&normalize_for_hash(text))
}

pub fn dedup_check(index: &DedupIndex, doc: &Document) -> FilterDecision {
    dedup_decision(index, document_digest(&doc.text))
}

pub(crate) fn dedup_decision(index: &DedupIndex, digest: ContentHash) -> FilterDecision {
    FilterDecision::new(index.check_and_insert(digest), Stage::Dedup, None)
}
