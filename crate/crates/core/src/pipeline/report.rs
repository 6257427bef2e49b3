use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::model::Category;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceTally {
    pub raw: u64,
    pub retained: u64,
    pub retained_words: u64,
    #[serde(default)]
    pub parse_errors: u64,
}

/// Per-stage removal counts. `parse_errors` sit outside `raw_docs`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub schema_version: u32,
    pub raw_docs: u64,
    pub removed_langid: u64,
    pub removed_dedup: u64,
    pub removed_min_tokens: u64,
    pub retained_docs: u64,
    pub retained_words: u64,
    pub parse_errors: u64,
    pub per_source: BTreeMap<String, SourceTally>,
}

impl Default for PipelineReport {
    fn default() -> Self {
        PipelineReport {
            schema_version: SCHEMA_VERSION,
            raw_docs: 0,
            removed_langid: 0,
            removed_dedup: 0,
            removed_min_tokens: 0,
            retained_docs: 0,
            retained_words: 0,
            parse_errors: 0,
            per_source: BTreeMap::new(),
        }
    }
}

impl PipelineReport {
    pub fn total_removed(&self) -> u64 {
        self.removed_langid + self.removed_dedup + self.removed_min_tokens
    }

    /// Checks `raw = removals + retained` and that per-source tallies sum to
    /// the totals.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.raw_docs != self.total_removed() + self.retained_docs {
            return Err(format!(
                "raw_docs {} != removed {} + retained {}",
                self.raw_docs,
                self.total_removed(),
                self.retained_docs
            ));
        }
        let sum = |f: fn(&SourceTally) -> u64| self.per_source.values().map(f).sum::<u64>();
        if !self.per_source.is_empty() || self.raw_docs > 0 {
            if sum(|t| t.raw) != self.raw_docs {
                return Err("per-source raw does not sum to raw_docs".into());
            }
            if sum(|t| t.retained) != self.retained_docs {
                return Err("per-source retained does not sum to retained_docs".into());
            }
            if sum(|t| t.retained_words) != self.retained_words {
                return Err("per-source words do not sum to retained_words".into());
            }
            if sum(|t| t.parse_errors) != self.parse_errors {
                return Err("per-source parse errors do not sum to parse_errors".into());
            }
        }
        Ok(())
    }

    /// Stage table with percentages of raw recomputed from the counts.
    pub fn render_table(&self) -> String {
        let rows = [
            ("langid (script ratio)", self.removed_langid),
            ("dedup (sha-256)", self.removed_dedup),
            ("min_tokens", self.removed_min_tokens),
        ];
        let mut out = String::new();
        let _ = writeln!(out, "{:<24} {:>14} {:>9}", "stage", "docs removed", "% of raw");
        for (name, n) in rows {
            let _ = writeln!(out, "{:<24} {:>14} {:>9}", name, n, percent(n, self.raw_docs));
        }
        let _ = writeln!(out, "{:<24} {:>14} {:>9}", "total rejected", self.total_removed(), percent(self.total_removed(), self.raw_docs));
        let _ = writeln!(out, "{:<24} {:>14} {:>9}", "retained", self.retained_docs, percent(self.retained_docs, self.raw_docs));
        let _ = writeln!(out, "{:<24} {:>14}", "raw", self.raw_docs);
        let _ = writeln!(out, "{:<24} {:>14}", "retained words", self.retained_words);
        if self.parse_errors > 0 {
            let _ = writeln!(out, "{:<24} {:>14}", "parse errors (skipped)", self.parse_errors);
        }
        out
    }
}

/// One-decimal percentage, "-" when the denominator is zero.
pub fn percent(part: u64, whole: u64) -> String {
    if whole == 0 {
        "-".to_owned()
    } else {
        format!("{:.1}%", part as f64 * 100.0 / whole as f64)
    }
}

/// Field-wise sum of reports over disjoint document sets.
pub fn merge_reports(parts: &[PipelineReport]) -> PipelineReport {
    let mut out = PipelineReport::default();
    for p in parts {
        out.raw_docs += p.raw_docs;
        out.removed_langid += p.removed_langid;
        out.removed_dedup += p.removed_dedup;
        out.removed_min_tokens += p.removed_min_tokens;
        out.retained_docs += p.retained_docs;
        out.retained_words += p.retained_words;
        out.parse_errors += p.parse_errors;
        for (name, t) in &p.per_source {
            let e = out.per_source.entry(name.clone()).or_default();
            e.raw += t.raw;
            e.retained += t.retained;
            e.retained_words += t.retained_words;
            e.parse_errors += t.parse_errors;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryRollup {
    pub sources: u64,
    pub docs: u64,
    pub words: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShardEntry {
    pub file: String,
    pub source: String,
    pub docs: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub toolkit_version: String,
    pub config_digest: String,
    /// Absent in deterministic runs.
    pub run_timestamp: Option<chrono::DateTime<chrono::Utc>>,
    pub categories: BTreeMap<Category, CategoryRollup>,
    pub totals: CategoryRollup,
    pub shards: Vec<ShardEntry>,
    pub report: PipelineReport,
}

impl Manifest {
    pub fn check_invariants(&self) -> Result<(), String> {
        let docs: u64 = self.categories.values().map(|c| c.docs).sum();
        let words: u64 = self.categories.values().map(|c| c.words).sum();
        let sources: u64 = self.categories.values().map(|c| c.sources).sum();
        if docs != self.totals.docs || words != self.totals.words || sources != self.totals.sources {
            return Err("category rollup does not sum to totals".into());
        }
        if self.totals.docs != self.report.retained_docs || self.totals.words != self.report.retained_words {
            return Err("manifest totals disagree with report".into());
        }
        self.report.check_invariants()
    }

    pub fn render_categories(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<22} {:>8} {:>12} {:>14}", "category", "sources", "docs", "words");
        for (cat, r) in &self.categories {
            let _ = writeln!(out, "{:<22} {:>8} {:>12} {:>14}", cat.as_str(), r.sources, r.docs, r.words);
        }
        let _ = writeln!(out, "{:<22} {:>8} {:>12} {:>14}", "total", self.totals.sources, self.totals.docs, self.totals.words);
        out
    }
}
