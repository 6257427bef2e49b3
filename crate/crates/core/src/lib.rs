//! Corpus construction for low-resource, script-identifiable languages:
//! script-ratio language ID, exact SHA-256 deduplication and a token-count
//! quality gate over line-delimited JSON, plus the vocabulary statistics used
//! to characterise the result.

pub mod analytics;
pub mod config;
pub mod filters;
pub mod model;
pub mod pipeline;

pub use config::{ConfigError, PipelineConfig, SourceEntry, SpiderSection};
pub use filters::{
    dedup_check, langid_filter, min_token_filter, script_ratio, token_script_class, DedupIndex, FilterDecision,
    LangIdConfig, ScriptClass, Stage, Verdict,
};
pub use model::{
    content_hash, normalize_for_hash, token_count, tokenize, Category, CodepointRange, ContentHash, Document,
    ScriptProfile, SourceKind, SourceSpec,
};
pub use pipeline::{merge_reports, run_pipeline, Manifest, PipelineError, PipelineReport, RunOptions, RunOutput};
