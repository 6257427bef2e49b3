use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use flate2::read::MultiGzDecoder;

use crate::pipeline::parse_text_record;

/// Word-type frequencies plus, per source, the set of types it contains.
///
/// Types are interned; ids are an internal detail and equality compares by
/// surface form, so two indexes built from permuted streams are equal.
#[derive(Debug, Clone, Default)]
pub struct VocabIndex {
    types: Vec<String>,
    ids: HashMap<String, u32>,
    freq: Vec<u64>,
    per_source: BTreeMap<String, SourceVocab>,
    total_tokens: u64,
    total_docs: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub(crate) struct SourceVocab {
    pub(crate) docs: u64,
    pub(crate) types: HashSet<u32>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildStats {
    pub records: u64,
    pub malformed: u64,
}

impl VocabIndex {
    pub fn new() -> Self {
        Self::default()
    }

    fn intern(&mut self, token: &str) -> u32 {
        if let Some(&id) = self.ids.get(token) {
            return id;
        }
        let id = u32::try_from(self.types.len()).expect("more than u32::MAX word types");
        self.types.push(token.to_owned());
        self.ids.insert(token.to_owned(), id);
        self.freq.push(0);
        id
    }

    pub fn add_document(&mut self, source: &str, text: &str) {
        if !self.per_source.contains_key(source) {
            self.per_source.insert(source.to_owned(), SourceVocab::default());
        }
        let mut seen = Vec::new();
        for token in text.split_whitespace() {
            let id = self.intern(token);
            self.freq[id as usize] += 1;
            self.total_tokens += 1;
            seen.push(id);
        }
        let sv = self.per_source.get_mut(source).expect("inserted above");
        sv.docs += 1;
        sv.types.extend(seen);
        self.total_docs += 1;
    }

    /// Records a source with no documents so it still shows up in per-source
    /// reports.
    pub fn ensure_source(&mut self, source: &str) {
        self.per_source.entry(source.to_owned()).or_default();
    }

    pub fn from_documents<'a, I>(docs: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut index = VocabIndex::new();
        for (source, text) in docs {
            index.add_document(source, text);
        }
        index
    }

    /// Streams shard lines into the index; malformed lines are counted.
    pub fn add_shard_reader<R: BufRead>(&mut self, mut reader: R) -> io::Result<BuildStats> {
        let mut stats = BuildStats::default();
        let mut buf = Vec::new();
        loop {
            buf.clear();
            if reader.read_until(b'\n', &mut buf)? == 0 {
                break;
            }
            while matches!(buf.last(), Some(b'\n' | b'\r')) {
                buf.pop();
            }
            if buf.iter().all(u8::is_ascii_whitespace) {
                continue;
            }
            match parse_text_record(&buf) {
                Ok(rec) => {
                    self.add_document(&rec.source, &rec.text);
                    stats.records += 1;
                }
                Err(_) => stats.malformed += 1,
            }
        }
        Ok(stats)
    }

    /// Set union of per-source types, sum of frequencies and totals.
    pub fn merge(&mut self, other: &VocabIndex) {
        let remap: Vec<u32> = other.types.iter().map(|t| self.intern(t)).collect();
        for (old, &f) in other.freq.iter().enumerate() {
            self.freq[remap[old] as usize] += f;
        }
        for (name, sv) in &other.per_source {
            let mine = self.per_source.entry(name.clone()).or_default();
            mine.docs += sv.docs;
            mine.types.extend(sv.types.iter().map(|&id| remap[id as usize]));
        }
        self.total_tokens += other.total_tokens;
        self.total_docs += other.total_docs;
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn total_docs(&self) -> u64 {
        self.total_docs
    }

    pub fn vocab_size(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty() && self.per_source.is_empty()
    }

    pub fn freq(&self, token: &str) -> u64 {
        self.ids.get(token).map_or(0, |&id| self.freq[id as usize])
    }

    pub fn contains(&self, token: &str) -> bool {
        self.ids.contains_key(token)
    }

    pub fn sources(&self) -> impl Iterator<Item = &str> {
        self.per_source.keys().map(String::as_str)
    }

    pub fn has_source(&self, source: &str) -> bool {
        self.per_source.contains_key(source)
    }

    pub fn source_docs(&self, source: &str) -> Option<u64> {
        self.per_source.get(source).map(|s| s.docs)
    }

    /// Document count per source.
    pub fn doc_counts(&self) -> BTreeMap<String, u64> {
        self.per_source.iter().map(|(k, v)| (k.clone(), v.docs)).collect()
    }

    pub fn source_vocab_size(&self, source: &str) -> Option<usize> {
        self.per_source.get(source).map(|s| s.types.len())
    }

    /// Types of one source, sorted.
    pub fn source_types(&self, source: &str) -> Option<Vec<&str>> {
        self.per_source.get(source).map(|s| {
            let mut v: Vec<&str> = s.types.iter().map(|&id| self.types[id as usize].as_str()).collect();
            v.sort_unstable();
            v
        })
    }

    /// `(type, frequency)` by descending frequency, ties in byte order.
    pub fn ranked(&self) -> Vec<(&str, u64)> {
        let mut v: Vec<(&str, u64)> = self.types.iter().map(String::as_str).zip(self.freq.iter().copied()).collect();
        v.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v
    }

    pub(crate) fn type_id(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    pub(crate) fn source_entries(&self) -> &BTreeMap<String, SourceVocab> {
        &self.per_source
    }

    /// Rebuilds an index from its persisted parts; the caller validates.
    pub(crate) fn from_parts(
        freqs: Vec<(String, u64)>,
        sources: Vec<(String, u64, Vec<String>)>,
        total_tokens: u64,
        total_docs: u64,
    ) -> Result<Self, String> {
        let mut index = VocabIndex::new();
        for (t, f) in freqs {
            if index.ids.contains_key(&t) {
                return Err(format!("type `{t}` listed twice"));
            }
            let id = index.intern(&t);
            index.freq[id as usize] = f;
        }
        for (name, docs, types) in sources {
            let mut sv = SourceVocab { docs, types: HashSet::with_capacity(types.len()) };
            for t in types {
                let id = index.type_id(&t).ok_or_else(|| format!("source `{name}` lists unknown type `{t}`"))?;
                sv.types.insert(id);
            }
            if index.per_source.insert(name.clone(), sv).is_some() {
                return Err(format!("source `{name}` listed twice"));
            }
        }
        index.total_tokens = total_tokens;
        index.total_docs = total_docs;
        index.check_invariants()?;
        Ok(index)
    }

    /// Frequencies sum to `total_tokens`; per-source sets cover exactly the
    /// key set; per-source docs sum to `total_docs`.
    pub fn check_invariants(&self) -> Result<(), String> {
        let sum: u64 = self.freq.iter().sum();
        if sum != self.total_tokens {
            return Err(format!("frequencies sum to {sum}, total_tokens is {}", self.total_tokens));
        }
        if self.freq.contains(&0) {
            return Err("type with zero frequency".into());
        }
        let mut covered = vec![false; self.types.len()];
        for sv in self.per_source.values() {
            for &id in &sv.types {
                covered[id as usize] = true;
            }
        }
        if let Some(pos) = covered.iter().position(|c| !c) {
            return Err(format!("type `{}` belongs to no source", self.types[pos]));
        }
        let docs: u64 = self.per_source.values().map(|s| s.docs).sum();
        if docs != self.total_docs {
            return Err(format!("per-source docs sum to {docs}, total_docs is {}", self.total_docs));
        }
        Ok(())
    }
}

impl PartialEq for VocabIndex {
    fn eq(&self, other: &Self) -> bool {
        if self.total_tokens != other.total_tokens
            || self.total_docs != other.total_docs
            || self.types.len() != other.types.len()
            || self.per_source.len() != other.per_source.len()
        {
            return false;
        }
        let freq_ok = self.types.iter().zip(&self.freq).all(|(t, &f)| other.freq(t) == f);
        freq_ok
            && self.per_source.iter().all(|(name, sv)| {
                other.per_source.get(name).is_some_and(|o| {
                    o.docs == sv.docs
                        && o.types.len() == sv.types.len()
                        && sv.types.iter().all(|&id| {
                            other.type_id(&self.types[id as usize]).is_some_and(|oid| o.types.contains(&oid))
                        })
                })
            })
    }
}

impl Eq for VocabIndex {}

fn open_maybe_gz(path: &Path) -> io::Result<Box<dyn BufRead>> {
    let file = File::open(path)?;
    let reader: Box<dyn Read> = if path.extension().is_some_and(|e| e == "gz") {
        Box::new(MultiGzDecoder::new(file))
    } else {
        Box::new(file)
    };
    Ok(Box::new(BufReader::with_capacity(1 << 20, reader)))
}

/// Shard files (`*.jsonl`, `*.jsonl.gz`) directly inside `dir`, sorted by name.
pub fn shard_files_in(dir: &Path) -> io::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        if !name.starts_with('.') && (name.ends_with(".jsonl") || name.ends_with(".jsonl.gz")) && path.is_file() {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// One pass over shard files (directories expand to their shards).
pub fn build_vocab_index(paths: &[PathBuf]) -> io::Result<(VocabIndex, BuildStats)> {
    let mut index = VocabIndex::new();
    let mut stats = BuildStats::default();
    for path in paths {
        let files = if path.is_dir() { shard_files_in(path)? } else { vec![path.clone()] };
        for file in files {
            let s = index.add_shard_reader(open_maybe_gz(&file)?)?;
            stats.records += s.records;
            stats.malformed += s.malformed;
        }
    }
    Ok((index, stats))
}
