//! Line-delimited JSON records: the pipeline input format and the enriched
//! shard format.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ContentHash, Document};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RecordError {
    #[error("line is not valid UTF-8")]
    Utf8,
    #[error("malformed record: {0}")]
    Json(String),
    #[error("record has an empty id")]
    EmptyId,
    #[error("record source `{found}` does not match configured source `{expected}`")]
    SourceMismatch { expected: String, found: String },
    #[error("duplicate document id `{0}`")]
    DuplicateId(String),
}

#[derive(Debug, Deserialize)]
struct InputRecord {
    id: String,
    #[serde(default)]
    source: Option<String>,
    #[serde(default)]
    url: Option<String>,
    #[serde(default)]
    title: Option<String>,
    text: String,
    #[serde(default)]
    fetched_at: Option<DateTime<Utc>>,
}

/// Parses one input line. A missing `source` takes `default_source`; a
/// present one must equal it when `default_source` is given.
pub fn parse_input_line(line: &[u8], default_source: Option<&str>) -> Result<Document, RecordError> {
    let line = std::str::from_utf8(line).map_err(|_| RecordError::Utf8)?;
    let rec: InputRecord = serde_json::from_str(line).map_err(|e| RecordError::Json(e.to_string()))?;
    if rec.id.is_empty() {
        return Err(RecordError::EmptyId);
    }
    let source_id = match (rec.source, default_source) {
        (Some(found), Some(expected)) if found != expected => {
            return Err(RecordError::SourceMismatch { expected: expected.to_owned(), found })
        }
        (Some(found), _) => found,
        (None, Some(expected)) => expected.to_owned(),
        (None, None) => return Err(RecordError::Json("missing field `source`".into())),
    };
    Ok(Document {
        id: rec.id,
        source_id,
        url: rec.url,
        title: rec.title,
        text: rec.text,
        fetched_at: rec.fetched_at,
    })
}

/// Serializes a document as one input-format line (no trailing newline).
pub fn to_input_line(doc: &Document) -> String {
    serde_json::to_string(doc).expect("document serializes")
}

/// A retained document plus the provenance the filters computed for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShardRecord {
    #[serde(flatten)]
    pub doc: Document,
    pub script_ratio: f64,
    pub token_count: u64,
    pub content_hash: ContentHash,
}

impl ShardRecord {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("shard record serializes")
    }
}

/// The fields analytics needs from a shard line.
#[derive(Debug, Deserialize)]
pub struct TextRecord {
    pub source: String,
    pub text: String,
}

pub fn parse_text_record(line: &[u8]) -> Result<TextRecord, RecordError> {
    let line = std::str::from_utf8(line).map_err(|_| RecordError::Utf8)?;
    serde_json::from_str(line).map_err(|e| RecordError::Json(e.to_string()))
}
