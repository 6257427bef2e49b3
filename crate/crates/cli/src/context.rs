use std::path::{Path, PathBuf};

use corpuskit::analytics::{build_vocab_index, read_index, VocabIndex};
use corpuskit::PipelineConfig;
use corpuskit_harvest::SpiderConfig;

use crate::error::{CliError, CliResult};

#[derive(Debug, Default)]
pub struct Globals {
    pub config: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub deterministic: Option<bool>,
    pub dry_run: bool,
}

impl Globals {
    /// Loads the config, applies flag overrides and validates spider
    /// sections, so a bad selector is reported before any work starts.
    pub fn load_config(&self) -> CliResult<PipelineConfig> {
        let path = self
            .config
            .as_deref()
            .ok_or_else(|| CliError::usage("no config given (use --config or CORPUSKIT_CONFIG)"))?;
        if !path.is_file() {
            return Err(CliError::usage(format!("config file not found: {}", path.display())));
        }
        let mut config = PipelineConfig::load(path).map_err(CliError::usage)?;
        if let Some(d) = &self.output_dir {
            config.output_dir = d.clone();
        }
        if let Some(j) = self.jobs {
            if j == 0 {
                return Err(CliError::usage("--jobs must be >= 1"));
            }
            config.jobs = j;
        }
        if let Some(d) = self.deterministic {
            config.deterministic = d;
        }
        for entry in &config.sources {
            if let Some(spider) = &entry.spider {
                SpiderConfig::from_section(&entry.spec.name, spider).map_err(CliError::usage)?;
            }
        }
        Ok(config)
    }

    /// Output directory for analysis files: the flag, else the config's,
    /// else the working directory.
    pub fn analysis_dir(&self) -> CliResult<PathBuf> {
        if let Some(d) = &self.output_dir {
            return Ok(d.clone());
        }
        if self.config.is_some() {
            return Ok(self.load_config()?.output_dir);
        }
        Ok(PathBuf::from("."))
    }
}

fn is_shard_path(p: &Path) -> bool {
    let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    p.is_dir() || name.ends_with(".jsonl") || name.ends_with(".jsonl.gz")
}

/// A saved index (one non-shard file) or shard files and directories.
pub fn load_index(inputs: &[PathBuf]) -> CliResult<VocabIndex> {
    if inputs.is_empty() {
        return Err(CliError::usage("no index or shard paths given"));
    }
    for p in inputs {
        if !p.exists() {
            return Err(CliError::usage(format!("input not found: {}", p.display())));
        }
    }
    if let [single] = inputs {
        if !is_shard_path(single) {
            return read_index(single).map_err(CliError::runtime);
        }
    }
    if let Some(p) = inputs.iter().find(|p| !is_shard_path(p)) {
        return Err(CliError::usage(format!(
            "{} is not a shard file or directory; a saved index must be the only input",
            p.display()
        )));
    }
    let (index, stats) = build_vocab_index(inputs).map_err(|e| CliError::runtime(format!("reading shards: {e}")))?;
    if stats.malformed > 0 {
        eprintln!("warning: skipped {} malformed shard records", stats.malformed);
    }
    Ok(index)
}
