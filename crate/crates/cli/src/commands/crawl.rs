use std::path::PathBuf;

use clap::Args;
use corpuskit::pipeline::to_input_line;
use corpuskit::SourceKind;
use corpuskit_harvest::{crawl, CrawlOptions, HttpFetcher, SpiderConfig, SystemClock};

use crate::context::Globals;
use crate::error::{CliError, CliResult};
use crate::output::write_atomic;

#[derive(Debug, Args)]
pub struct CrawlArgs {
    /// Name of a `kind = "crawl"` source in the config.
    #[arg(long)]
    source: String,
    /// Page budget; overrides the source's max_pages.
    #[arg(long)]
    max_pages: Option<u64>,
}

pub fn run(globals: &Globals, args: &CrawlArgs) -> CliResult {
    let config = globals.load_config()?;
    let entry = config
        .source(&args.source)
        .ok_or_else(|| CliError::usage(format!("unknown source `{}`", args.source)))?;
    let section = match (&entry.spider, entry.spec.kind) {
        (Some(s), SourceKind::Crawl) => s,
        _ => return Err(CliError::usage(format!("source `{}` is not a crawl source", args.source))),
    };
    let mut spider = SpiderConfig::from_section(&entry.spec.name, section).map_err(CliError::usage)?;
    if let Some(m) = args.max_pages {
        if m == 0 {
            return Err(CliError::usage("--max-pages must be >= 1"));
        }
        spider.max_pages = m;
    }
    if let Some(j) = globals.jobs {
        spider.concurrency = j.max(1);
    }
    let fetcher = HttpFetcher::new(&spider.user_agent, spider.timeout).map_err(CliError::runtime)?;

    // raw documents go where the pipeline will read them
    let target: PathBuf = match &globals.output_dir {
        Some(dir) => dir.join(entry.input.file_name().unwrap_or(entry.spec.name.as_ref())),
        None => entry.input.clone(),
    };
    let options = CrawlOptions { record_fetch_time: !config.deterministic };

    let mut body = String::new();
    let mut docs = 0u64;
    let stats = crawl(&spider, &fetcher, &SystemClock::default(), options, |doc| {
        body.push_str(&to_input_line(&doc));
        body.push('\n');
        docs += 1;
    });

    if !globals.dry_run {
        write_atomic(&target, body.as_bytes())?;
        println!("wrote {} ({docs} documents)", target.display());
    }
    println!(
        "pages_fetched={} docs_emitted={} errors={} robots_blocked={}",
        stats.pages_fetched, stats.docs_emitted, stats.errors, stats.robots_blocked
    );
    Ok(())
}
