use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::Args;
use corpuskit::analytics::{coverage, read_token_sets, union_set, TokenSet};

use crate::context::{load_index, Globals};
use crate::error::{CliError, CliResult};
use crate::output::write_json;

pub const ALL_LABEL: &str = "ALL";

#[derive(Debug, Args)]
pub struct CoverageArgs {
    /// Saved index, or shard files and directories.
    #[arg(required = true)]
    index: Vec<PathBuf>,
    /// `category<TAB>token` lines.
    #[arg(long)]
    tokens: PathBuf,
}

pub fn read_tokens_file(path: &Path) -> CliResult<Vec<TokenSet>> {
    let f = File::open(path).map_err(|e| CliError::usage(format!("cannot open token file {}: {e}", path.display())))?;
    read_token_sets(BufReader::new(f)).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

pub fn run(globals: &Globals, args: &CoverageArgs) -> CliResult {
    let mut sets = read_tokens_file(&args.tokens)?;
    if sets.is_empty() {
        return Err(CliError::usage(format!("{}: no tokens", args.tokens.display())));
    }
    if sets.len() > 1 {
        sets.push(union_set(&sets, ALL_LABEL));
    }
    let index = load_index(&args.index)?;
    let report = coverage(&index, &sets).map_err(CliError::usage)?;

    println!("{:<24} {:>10} {:>10} {:>9}", "category", "covered", "total", "coverage");
    for r in &report.rows {
        println!("{:<24} {:>10} {:>10} {:>9}", r.category, r.covered, r.total, r.percent());
    }
    if !globals.dry_run {
        let p = write_json(&globals.analysis_dir()?, "coverage.json", "coverage", &report.rows)?;
        println!("wrote {}", p.display());
    }
    Ok(())
}
