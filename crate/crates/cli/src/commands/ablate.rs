use std::collections::HashSet;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use clap::Args;
use corpuskit::analytics::{leave_one_out, read_groups};
use corpuskit::pipeline::percent;

use super::coverage::read_tokens_file;
use crate::context::{load_index, Globals};
use crate::error::{CliError, CliResult};
use crate::output::write_json;

#[derive(Debug, Args)]
pub struct AblateArgs {
    /// Saved index, or shard files and directories.
    #[arg(required = true)]
    index: Vec<PathBuf>,
    /// `group<TAB>source` lines; every source in exactly one group.
    #[arg(long)]
    groups: PathBuf,
    /// Optional `category<TAB>token` lines; all categories pooled.
    #[arg(long)]
    tokens: Option<PathBuf>,
}

pub fn run(globals: &Globals, args: &AblateArgs) -> CliResult {
    let f = File::open(&args.groups)
        .map_err(|e| CliError::usage(format!("cannot open groups file {}: {e}", args.groups.display())))?;
    let groups = read_groups(BufReader::new(f))
        .map_err(|(line, msg)| CliError::usage(format!("{} line {line}: {msg}", args.groups.display())))?;
    let tokens: Option<HashSet<String>> = match &args.tokens {
        Some(p) => Some(read_tokens_file(p)?.into_iter().flat_map(|(_, s)| s).collect()),
        None => None,
    };
    let index = load_index(&args.index)?;
    let rows = leave_one_out(&index, &groups, tokens.as_ref()).map_err(CliError::usage)?;

    let full = index.vocab_size() as u64;
    println!("{:<24} {:>12} {:>12} {:>12} {:>10}", "group", "docs", "vocab", "vocab lost", "coverage");
    for r in &rows {
        let lost = percent(full - r.vocab_remaining.min(full), full);
        let cov = r.coverage_after.map_or_else(|| "-".to_owned(), |c| format!("{:.1}%", c * 100.0));
        println!("{:<24} {:>12} {:>12} {:>12} {:>10}", r.group, r.docs_removed, r.vocab_remaining, lost, cov);
    }
    if !globals.dry_run {
        let p = write_json(&globals.analysis_dir()?, "ablation.json", "ablation", &rows)?;
        println!("wrote {}", p.display());
    }
    Ok(())
}
