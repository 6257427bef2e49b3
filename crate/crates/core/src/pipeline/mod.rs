//! Streaming orchestration: read each configured source once, run
//! langid → dedup → min_tokens, write retained documents to bounded shards,
//! and account for every input line.

mod record;
mod report;
mod shard;

pub use record::{parse_input_line, parse_text_record, to_input_line, RecordError, ShardRecord, TextRecord};
pub use report::{
    merge_reports, percent, CategoryRollup, Manifest, PipelineReport, ShardEntry, SourceTally, SCHEMA_VERSION,
};
pub use shard::{shard_file_name, write_shard};

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use flate2::read::MultiGzDecoder;
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{PipelineConfig, SourceEntry};
use crate::filters::{dedup_decision, document_digest, langid_decision, DedupIndex, Detail, Stage};
use crate::model::{ContentHash, Document};

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Lines handed to the parallel stage at a time.
const BATCH_LINES: usize = 4096;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("source `{source_name}`: cannot read {path}: {error}")]
    Source { source_name: String, path: PathBuf, error: io::Error },
    #[error("cannot write {path}: {error}")]
    Output { path: PathBuf, error: io::Error },
    #[error("cannot build worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Compute the report without writing shards.
    pub dry_run: bool,
}

#[derive(Debug)]
pub struct RunOutput {
    pub report: PipelineReport,
    pub manifest: Manifest,
    pub shards: Vec<PathBuf>,
    pub report_path: PathBuf,
    pub manifest_path: PathBuf,
}

/// Where a document ended up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Retained,
    Removed(Stage),
    ParseError,
}

/// Filter state that spans sources: the corpus-wide dedup index and the set
/// of ids seen so far.
pub struct Filtering<'a> {
    config: &'a PipelineConfig,
    dedup: DedupIndex,
    seen_ids: HashSet<String>,
    pool: Option<rayon::ThreadPool>,
}

struct Prepared {
    doc: Document,
    tokens: u64,
    ratio: f64,
    langid_keep: bool,
    digest: Option<ContentHash>,
}

impl<'a> Filtering<'a> {
    pub fn new(config: &'a PipelineConfig) -> Result<Self, PipelineError> {
        let pool = if config.jobs > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(config.jobs)
                    .build()
                    .map_err(|e| PipelineError::Pool(e.to_string()))?,
            )
        } else {
            None
        };
        Ok(Filtering { config, dedup: DedupIndex::new(), seen_ids: HashSet::new(), pool })
    }

    pub fn dedup_index(&self) -> &DedupIndex {
        &self.dedup
    }

    fn prepare(&self, line: &[u8], source: &str) -> Result<Prepared, RecordError> {
        let doc = parse_input_line(line, Some(source))?;
        let langid = langid_decision(&doc.text, &self.config.langid);
        let ratio = match langid.detail {
            Some(Detail::Ratio(r)) => r,
            _ => 0.0,
        };
        let tokens = crate::model::token_count(&doc.text) as u64;
        let digest = langid.is_keep().then(|| document_digest(&doc.text));
        Ok(Prepared { doc, tokens, ratio, langid_keep: langid.is_keep(), digest })
    }

    /// Parses and scores a batch (in parallel when configured), then applies
    /// the order-sensitive steps sequentially in input order.
    pub fn process_batch<F>(&mut self, lines: &[Vec<u8>], source: &str, mut sink: F)
    where
        F: FnMut(Outcome, Option<ShardRecord>),
    {
        let prepared: Vec<Result<Prepared, RecordError>> = match &self.pool {
            Some(pool) => pool.install(|| lines.par_iter().map(|l| self.prepare(l, source)).collect()),
            None => lines.iter().map(|l| self.prepare(l, source)).collect(),
        };
        for p in prepared {
            let p = match p {
                Ok(p) => p,
                Err(_) => {
                    sink(Outcome::ParseError, None);
                    continue;
                }
            };
            if !self.seen_ids.insert(p.doc.id.clone()) {
                sink(Outcome::ParseError, None);
                continue;
            }
            if !p.langid_keep {
                sink(Outcome::Removed(Stage::Langid), None);
                continue;
            }
            let digest = p.digest.expect("digest computed for langid survivors");
            if !dedup_decision(&self.dedup, digest).is_keep() {
                sink(Outcome::Removed(Stage::Dedup), None);
                continue;
            }
            if p.tokens < self.config.min_tokens {
                sink(Outcome::Removed(Stage::MinTokens), None);
                continue;
            }
            let rec = ShardRecord { doc: p.doc, script_ratio: p.ratio, token_count: p.tokens, content_hash: digest };
            sink(Outcome::Retained, Some(rec));
        }
    }
}

fn open_input(path: &Path) -> io::Result<Box<dyn BufRead>> {
    let file = File::open(path)?;
    let reader: Box<dyn Read> = if path.extension().is_some_and(|e| e == "gz") {
        Box::new(MultiGzDecoder::new(file))
    } else {
        Box::new(file)
    };
    Ok(Box::new(BufReader::with_capacity(1 << 20, reader)))
}

struct ShardSink<'a> {
    dir: &'a Path,
    source: &'a str,
    max_docs: usize,
    compress: bool,
    dry_run: bool,
    serial: u32,
    buffer: Vec<String>,
    written: Vec<(PathBuf, u64)>,
}

impl ShardSink<'_> {
    fn push(&mut self, rec: &ShardRecord) -> Result<(), PipelineError> {
        if self.dry_run {
            return Ok(());
        }
        self.buffer.push(rec.to_line());
        if self.buffer.len() >= self.max_docs {
            self.flush()?;
        }
        Ok(())
    }

    fn flush(&mut self) -> Result<(), PipelineError> {
        if self.buffer.is_empty() {
            return Ok(());
        }
        let path = self.dir.join(shard_file_name(self.source, self.serial, self.compress));
        shard::write_lines_atomic(&self.buffer, &path, self.compress)
            .map_err(|error| PipelineError::Output { path: path.clone(), error })?;
        self.written.push((path, self.buffer.len() as u64));
        self.serial += 1;
        self.buffer.clear();
        Ok(())
    }
}

fn run_source(
    filtering: &mut Filtering<'_>,
    entry: &SourceEntry,
    config: &PipelineConfig,
    options: RunOptions,
    report: &mut PipelineReport,
) -> Result<Vec<(PathBuf, u64)>, PipelineError> {
    let name = entry.spec.name.as_str();
    let source_err = |error| PipelineError::Source { source_name: name.to_owned(), path: entry.input.clone(), error };
    let mut reader = open_input(&entry.input).map_err(source_err)?;

    let mut sink = ShardSink {
        dir: &config.output_dir,
        source: name,
        max_docs: config.shard_max_docs,
        compress: config.compress,
        dry_run: options.dry_run,
        serial: 0,
        buffer: Vec::new(),
        written: Vec::new(),
    };
    let mut tally = SourceTally::default();
    let mut pending_err: Option<PipelineError> = None;
    let mut batch: Vec<Vec<u8>> = Vec::with_capacity(BATCH_LINES);
    let mut eof = false;

    while !eof {
        batch.clear();
        while batch.len() < BATCH_LINES {
            let mut buf = Vec::new();
            if reader.read_until(b'\n', &mut buf).map_err(source_err)? == 0 {
                eof = true;
                break;
            }
            while matches!(buf.last(), Some(b'\n' | b'\r')) {
                buf.pop();
            }
            if buf.iter().all(u8::is_ascii_whitespace) {
                continue;
            }
            batch.push(buf);
        }
        filtering.process_batch(&batch, name, |outcome, rec| {
            match outcome {
                Outcome::ParseError => {
                    tally.parse_errors += 1;
                    return;
                }
                Outcome::Removed(Stage::Langid) => report.removed_langid += 1,
                Outcome::Removed(Stage::Dedup) => report.removed_dedup += 1,
                Outcome::Removed(Stage::MinTokens) => report.removed_min_tokens += 1,
                Outcome::Retained => {
                    let rec = rec.expect("retained documents carry a record");
                    tally.retained += 1;
                    tally.retained_words += rec.token_count;
                    if pending_err.is_none() {
                        if let Err(e) = sink.push(&rec) {
                            pending_err = Some(e);
                        }
                    }
                }
            }
            tally.raw += 1;
        });
        if let Some(e) = pending_err.take() {
            return Err(e);
        }
    }
    sink.flush()?;

    report.raw_docs += tally.raw;
    report.retained_docs += tally.retained;
    report.retained_words += tally.retained_words;
    report.parse_errors += tally.parse_errors;
    report.per_source.insert(name.to_owned(), tally);
    Ok(sink.written)
}

/// Runs every configured source in config order and writes shards,
/// `report.json` and `manifest.json` into the output directory.
pub fn run_pipeline(config: &PipelineConfig, options: RunOptions) -> Result<RunOutput, PipelineError> {
    let out_err = |path: &Path| {
        let path = path.to_path_buf();
        move |error| PipelineError::Output { path, error }
    };
    fs::create_dir_all(&config.output_dir).map_err(out_err(&config.output_dir))?;

    let mut filtering = Filtering::new(config)?;
    let mut report = PipelineReport::default();
    let mut shards = Vec::new();
    let mut shard_entries = Vec::new();

    for entry in &config.sources {
        let written = match run_source(&mut filtering, entry, config, options, &mut report) {
            Ok(w) => w,
            Err(e) => {
                // keep the "complete or absent" promise for the run as a whole
                for (path, _) in &shards {
                    let _ = fs::remove_file(path);
                }
                return Err(e);
            }
        };
        for (path, docs) in written {
            shard_entries.push(ShardEntry {
                file: path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
                source: entry.spec.name.clone(),
                docs,
            });
            shards.push((path, docs));
        }
    }
    debug_assert!(report.check_invariants().is_ok());

    let manifest = build_manifest(config, &report, shard_entries);
    let report_path = config.output_dir.join("report.json");
    let manifest_path = config.output_dir.join("manifest.json");
    write_json(&report_path, &report)?;
    write_json(&manifest_path, &manifest)?;

    Ok(RunOutput {
        report,
        manifest,
        shards: shards.into_iter().map(|(p, _)| p).collect(),
        report_path,
        manifest_path,
    })
}

pub fn build_manifest(config: &PipelineConfig, report: &PipelineReport, shards: Vec<ShardEntry>) -> Manifest {
    let mut categories: BTreeMap<_, CategoryRollup> = BTreeMap::new();
    for entry in &config.sources {
        let row = categories.entry(entry.spec.category).or_default();
        row.sources += 1;
        if let Some(t) = report.per_source.get(&entry.spec.name) {
            row.docs += t.retained;
            row.words += t.retained_words;
        }
    }
    let totals = categories.values().fold(CategoryRollup::default(), |acc, r| CategoryRollup {
        sources: acc.sources + r.sources,
        docs: acc.docs + r.docs,
        words: acc.words + r.words,
    });
    Manifest {
        schema_version: SCHEMA_VERSION,
        toolkit_version: TOOLKIT_VERSION.to_owned(),
        config_digest: config.digest(),
        run_timestamp: if config.deterministic { None } else { Some(chrono::Utc::now()) },
        categories,
        totals,
        shards,
        report: report.clone(),
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut body = serde_json::to_string_pretty(value).expect("report serializes");
    body.push('\n');
    shard::write_bytes_atomic(body.as_bytes(), path).map_err(|error| PipelineError::Output { path: path.to_path_buf(), error })
}
