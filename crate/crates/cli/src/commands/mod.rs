pub mod ablate;
pub mod coverage;
pub mod crawl;
pub mod pipeline;
pub mod stats;
