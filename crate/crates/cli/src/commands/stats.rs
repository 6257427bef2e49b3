use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use corpuskit::analytics::{marginal_vocab_all, vocab_growth_curve, write_index, zipf_fit, DEFAULT_TOP_K};
use serde::Serialize;

use crate::context::{load_index, Globals};
use crate::error::{CliError, CliResult};
use crate::output::{write_atomic, write_json};

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Saved index (`.tsv` with its `.sources.json` sidecar), or shard files
    /// and directories. Defaults to the config's output directory.
    inputs: Vec<PathBuf>,
    /// Fit Zipf's law to the rank-frequency curve.
    #[arg(long)]
    zipf: bool,
    /// Ranks used by the Zipf fit.
    #[arg(long, default_value_t = DEFAULT_TOP_K)]
    top_k: usize,
    /// Cumulative vocabulary as sources are added, largest first.
    #[arg(long)]
    growth: bool,
    /// Types found in exactly one source.
    #[arg(long)]
    marginal: bool,
    /// Save the index for later `stats`, `ablate` and `coverage` runs.
    #[arg(long)]
    save_index: Option<PathBuf>,
}

#[derive(Serialize)]
struct ZipfOut {
    alpha: f64,
    r_squared: f64,
    n_ranks: usize,
    intercept: f64,
    top_k: usize,
}

pub fn run(globals: &Globals, args: &StatsArgs) -> CliResult {
    let inputs = if args.inputs.is_empty() && globals.config.is_some() {
        vec![globals.load_config()?.output_dir]
    } else {
        args.inputs.clone()
    };
    if args.top_k < 2 {
        return Err(CliError::usage("--top-k must be >= 2"));
    }
    let index = load_index(&inputs)?;
    let dir = globals.analysis_dir()?;
    let write = !globals.dry_run;

    println!(
        "sources={} docs={} tokens={} types={}",
        index.sources().count(),
        index.total_docs(),
        index.total_tokens(),
        index.vocab_size()
    );

    if let Some(path) = &args.save_index {
        if write {
            let sidecar = write_index(&index, path).map_err(CliError::runtime)?;
            println!("wrote {}", path.display());
            println!("wrote {}", sidecar.display());
        }
    }

    if args.zipf {
        let fit = zipf_fit(&index, args.top_k).map_err(CliError::runtime)?;
        println!("alpha={:.3} r2={:.3} n_ranks={}", fit.alpha, fit.r_squared, fit.n_ranks);
        if write {
            let out = ZipfOut {
                alpha: fit.alpha,
                r_squared: fit.r_squared,
                n_ranks: fit.n_ranks,
                intercept: fit.intercept,
                top_k: args.top_k,
            };
            let p = write_json(&dir, "zipf.json", "zipf", &out)?;
            println!("wrote {}", p.display());
        }
    }

    if args.growth {
        let curve = vocab_growth_curve(&index, &index.doc_counts()).map_err(CliError::runtime)?;
        let mut table = format!("{:<24} {:>10} {:>14}\n", "source", "docs", "cumulative vocab");
        let mut tsv = String::from("source\tdocs\tcumulative_vocab\n");
        for p in &curve {
            let _ = writeln!(table, "{:<24} {:>10} {:>14}", p.source, p.docs, p.cumulative_vocab);
            let _ = writeln!(tsv, "{}\t{}\t{}", p.source, p.docs, p.cumulative_vocab);
        }
        print!("{table}");
        if write {
            let tsv_path = dir.join("growth.tsv");
            write_atomic(&tsv_path, tsv.as_bytes())?;
            let p = write_json(&dir, "growth.json", "growth", &curve)?;
            println!("wrote {}", tsv_path.display());
            println!("wrote {}", p.display());
        }
    }

    if args.marginal {
        let rows = marginal_vocab_all(&index);
        println!("{:<24} {:>10} {:>10} {:>10}", "source", "docs", "vocab", "marginal");
        for (name, r) in &rows {
            println!("{:<24} {:>10} {:>10} {:>10}", name, r.docs, r.vocab, r.marginal);
        }
        if write {
            let p = write_json(&dir, "marginal.json", "marginal", &rows)?;
            println!("wrote {}", p.display());
        }
    }
    Ok(())
}
