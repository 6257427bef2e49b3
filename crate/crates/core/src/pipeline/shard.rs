use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use flate2::write::GzEncoder;
use flate2::{Compression, GzBuilder};

use super::record::ShardRecord;

/// `{source}-{serial:05}.jsonl`, with `.gz` appended when compressed.
pub fn shard_file_name(source: &str, serial: u32, compress: bool) -> String {
    if compress {
        format!("{source}-{serial:05}.jsonl.gz")
    } else {
        format!("{source}-{serial:05}.jsonl")
    }
}

/// Writes one record per line to `path` via a temporary sibling and a rename,
/// so the shard is either complete or absent. Writes nothing for no records.
pub fn write_shard(records: &[ShardRecord], path: &Path, compress: bool) -> io::Result<Option<PathBuf>> {
    let lines: Vec<String> = records.iter().map(ShardRecord::to_line).collect();
    write_lines_atomic(&lines, path, compress)
}

pub(crate) fn write_lines_atomic(lines: &[String], path: &Path, compress: bool) -> io::Result<Option<PathBuf>> {
    if lines.is_empty() {
        return Ok(None);
    }
    atomic_write(path, |file| {
        if compress {
            // fixed header (mtime 0, no name) so compressed shards are reproducible
            let gz: GzEncoder<File> = GzBuilder::new().mtime(0).write(file, Compression::default());
            let mut w = BufWriter::new(gz);
            emit(&mut w, lines)?;
            let gz = w.into_inner().map_err(|e| e.into_error())?;
            gz.finish()?.sync_all()
        } else {
            let mut w = BufWriter::new(file);
            emit(&mut w, lines)?;
            w.into_inner().map_err(|e| e.into_error())?.sync_all()
        }
    })?;
    Ok(Some(path.to_path_buf()))
}

pub(crate) fn write_bytes_atomic(bytes: &[u8], path: &Path) -> io::Result<()> {
    atomic_write(path, |mut file| {
        file.write_all(bytes)?;
        file.sync_all()
    })
}

fn atomic_write<F>(path: &Path, write: F) -> io::Result<()>
where
    F: FnOnce(File) -> io::Result<()>,
{
    let file_name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);

    let result = File::create(&tmp).and_then(write).and_then(|()| fs::rename(&tmp, path));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

fn emit<W: Write>(w: &mut W, lines: &[String]) -> io::Result<()> {
    for line in lines {
        w.write_all(line.as_bytes())?;
        w.write_all(b"\n")?;
    }
    w.flush()
}
