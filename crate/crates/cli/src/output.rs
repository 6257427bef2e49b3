use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

/// Writes via a sibling temp file so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::runtime(format!("cannot create {}: {e}", parent.display())))?;
    }
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    let res = fs::write(&tmp, bytes).and_then(|_| fs::rename(&tmp, path));
    if let Err(e) = res {
        let _ = fs::remove_file(&tmp);
        return Err(CliError::runtime(format!("cannot write {}: {e}", path.display())));
    }
    Ok(())
}

/// `{"schema_version": 1, <key>: <value>}`, pretty-printed.
pub fn write_json<T: Serialize>(dir: &Path, file: &str, key: &str, value: &T) -> CliResult<PathBuf> {
    let mut obj = Map::new();
    obj.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
    obj.insert(key.into(), serde_json::to_value(value).map_err(CliError::runtime)?);
    let mut text = serde_json::to_string_pretty(&Value::Object(obj)).map_err(CliError::runtime)?;
    text.push('\n');
    let path = dir.join(file);
    write_atomic(&path, text.as_bytes())?;
    Ok(path)
}
