//! On-disk index: `<path>` holds `type<TAB>frequency` lines in rank order
//! (frequency descending, ties by type); `<path>.sources.json` holds totals
//! and each source's document count and sorted type list.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::VocabIndex;
use crate::pipeline::SCHEMA_VERSION;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("{path}: {error}")]
    Io { path: PathBuf, error: io::Error },
    #[error("{path} line {line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{path}: {message}")]
    Sidecar { path: PathBuf, message: String },
    #[error("index is inconsistent: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sidecar {
    schema_version: u32,
    total_tokens: u64,
    total_docs: u64,
    sources: BTreeMap<String, SidecarSource>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SidecarSource {
    docs: u64,
    types: Vec<String>,
}

pub fn sidecar_path(index_path: &Path) -> PathBuf {
    let mut name = index_path.as_os_str().to_owned();
    name.push(".sources.json");
    PathBuf::from(name)
}

pub fn write_index(index: &VocabIndex, path: &Path) -> Result<PathBuf, PersistError> {
    let io_err = |p: &Path| {
        let p = p.to_path_buf();
        move |error| PersistError::Io { path: p, error }
    };
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    for (t, f) in index.ranked() {
        writeln!(w, "{t}\t{f}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))?;

    let sidecar = Sidecar {
        schema_version: SCHEMA_VERSION,
        total_tokens: index.total_tokens(),
        total_docs: index.total_docs(),
        sources: index
            .sources()
            .map(|s| {
                let types = index.source_types(s).unwrap_or_default().into_iter().map(str::to_owned).collect();
                (s.to_owned(), SidecarSource { docs: index.source_docs(s).unwrap_or(0), types })
            })
            .collect(),
    };
    let side = sidecar_path(path);
    let body = serde_json::to_vec(&sidecar).expect("sidecar serializes");
    fs::write(&side, body).map_err(io_err(&side))?;
    Ok(side)
}

/// Parses `type<TAB>frequency` lines.
pub fn parse_frequency_lines<R: BufRead>(reader: R) -> Result<Vec<(String, u64)>, (usize, String)> {
    let mut out = Vec::new();
    for (i, line) in reader.split(b'\n').enumerate() {
        let line = line.map_err(|e| (i + 1, e.to_string()))?;
        let line = String::from_utf8(line).map_err(|_| (i + 1, "not valid UTF-8".to_owned()))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.is_empty() {
            continue;
        }
        let (t, f) = line.rsplit_once('\t').ok_or_else(|| (i + 1, "expected `type<TAB>frequency`".to_owned()))?;
        if t.is_empty() || t.chars().any(char::is_whitespace) {
            return Err((i + 1, "type must be one non-empty whitespace-free form".to_owned()));
        }
        let f: u64 = f.parse().map_err(|_| (i + 1, format!("bad frequency `{f}`")))?;
        if f == 0 {
            return Err((i + 1, "frequency must be positive".to_owned()));
        }
        out.push((t.to_owned(), f));
    }
    Ok(out)
}

pub fn read_index(path: &Path) -> Result<VocabIndex, PersistError> {
    let file = File::open(path).map_err(|error| PersistError::Io { path: path.to_path_buf(), error })?;
    let freqs = parse_frequency_lines(BufReader::new(file))
        .map_err(|(line, message)| PersistError::Parse { path: path.to_path_buf(), line, message })?;
    let side = sidecar_path(path);
    let body = fs::read(&side).map_err(|error| PersistError::Io { path: side.clone(), error })?;
    let sidecar: Sidecar =
        serde_json::from_slice(&body).map_err(|e| PersistError::Sidecar { path: side.clone(), message: e.to_string() })?;
    if sidecar.schema_version != SCHEMA_VERSION {
        return Err(PersistError::Sidecar {
            path: side,
            message: format!("unsupported schema_version {}", sidecar.schema_version),
        });
    }
    let sources = sidecar.sources.into_iter().map(|(name, s)| (name, s.docs, s.types)).collect();
    VocabIndex::from_parts(freqs, sources, sidecar.total_tokens, sidecar.total_docs).map_err(PersistError::Inconsistent)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vocab.tsv");
        let idx = VocabIndex::from_documents([("A", "x y x"), ("B", "y z"), ("C", "")]);
        write_index(&idx, &path).unwrap();
        let body = fs::read_to_string(&path).unwrap();
        assert_eq!(body, "x\t2\ny\t2\nz\t1\n");
        let back = read_index(&path).unwrap();
        assert_eq!(back, idx);
        assert_eq!(back.source_docs("C"), Some(1));
    }

    #[test]
    fn frequency_parser_errors() {
        assert!(parse_frequency_lines("a\t1\nb\t2\n".as_bytes()).is_ok());
        assert_eq!(parse_frequency_lines("a 1\n".as_bytes()).unwrap_err().0, 1);
        assert!(parse_frequency_lines("a\tx\n".as_bytes()).is_err());
        assert!(parse_frequency_lines("a\t0\n".as_bytes()).is_err());
        assert!(parse_frequency_lines("\t3\n".as_bytes()).is_err());
        assert!(parse_frequency_lines("a\t-3\n".as_bytes()).is_err());
    }

    #[test]
    fn inconsistent_sidecar_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.tsv");
        let idx = VocabIndex::from_documents([("A", "x y")]);
        write_index(&idx, &path).unwrap();
        fs::write(&path, "x\t1\ny\t1\nw\t4\n").unwrap();
        assert!(matches!(read_index(&path), Err(PersistError::Inconsistent(_))));
        fs::write(&path, "x\t1\nx\t1\n").unwrap();
        assert!(matches!(read_index(&path), Err(PersistError::Inconsistent(_))));
        fs::write(sidecar_path(&path), "{}").unwrap();
        assert!(matches!(read_index(&path), Err(PersistError::Sidecar { .. })));
    }
}
