//! `corpuskit`: crawl sources, run the filter pipeline and analyse the
//! retained corpus.

mod commands;
mod context;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use context::Globals;

#[derive(Debug, Parser)]
#[command(name = "corpuskit", version, about = "Build and analyse script-filtered text corpora")]
struct Cli {
    #[command(flatten)]
    globals: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Pipeline config (TOML).
    #[arg(long, global = true, env = "CORPUSKIT_CONFIG")]
    config: Option<PathBuf>,
    /// Where outputs are written; overrides the config.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Worker count; overrides the config.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Reproducible output (no timestamps). `--deterministic=false` turns it off.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true", require_equals = true)]
    deterministic: Option<bool>,
    /// Compute and print results without writing data files.
    #[arg(long, global = true)]
    dry_run: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Crawl one spider source into its input file.
    Crawl(commands::crawl::CrawlArgs),
    /// Filter every configured source into retained shards.
    Pipeline,
    /// Vocabulary statistics over shards or a saved index.
    Stats(commands::stats::StatsArgs),
    /// Leave-one-out vocabulary ablation by source group.
    Ablate(commands::ablate::AblateArgs),
    /// Coverage of external token sets by the vocabulary.
    Coverage(commands::coverage::CoverageArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = cli.globals;
    let globals = Globals {
        config: g.config,
        output_dir: g.output_dir,
        jobs: g.jobs,
        deterministic: g.deterministic,
        dry_run: g.dry_run,
    };
    let result = match cli.command {
        Command::Crawl(a) => commands::crawl::run(&globals, &a),
        Command::Pipeline => commands::pipeline::run(&globals),
        Command::Stats(a) => commands::stats::run(&globals, &a),
        Command::Ablate(a) => commands::ablate::run(&globals, &a),
        Command::Coverage(a) => commands::coverage::run(&globals, &a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("corpuskit: {e}");
            e.exit_code()
        }
    }
}
