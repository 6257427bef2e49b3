use std::io::ErrorKind;

use corpuskit::{run_pipeline, PipelineError, RunOptions};

use crate::context::Globals;
use crate::error::{CliError, CliResult};

pub fn run(globals: &Globals) -> CliResult {
    let config = globals.load_config()?;
    for entry in &config.sources {
        if !entry.input.is_file() {
            return Err(CliError::usage(format!(
                "source `{}`: input file not found: {}",
                entry.spec.name,
                entry.input.display()
            )));
        }
    }
    let out = run_pipeline(&config, RunOptions { dry_run: globals.dry_run }).map_err(|e| match &e {
        PipelineError::Source { error, .. } if error.kind() == ErrorKind::NotFound => CliError::usage(e),
        _ => CliError::runtime(e),
    })?;

    print!("{}", out.report.render_table());
    println!();
    print!("{}", out.manifest.render_categories());
    println!();
    for shard in &out.shards {
        println!("wrote {}", shard.display());
    }
    println!("wrote {}", out.report_path.display());
    println!("wrote {}", out.manifest_path.display());
    Ok(())
}
