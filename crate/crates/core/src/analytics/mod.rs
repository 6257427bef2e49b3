//! Corpus statistics over retained shards: vocabulary index, Zipf fit,
//! growth curve, marginal vocabulary, leave-one-out ablation and coverage of
//! external token sets.

mod ablation;
mod coverage;
mod persist;
mod vocab;
mod zipf;

pub use ablation::{
    leave_one_out, lost_fraction, marginal_vocab, marginal_vocab_all, read_groups, vocab_growth_curve, AblationError,
    AblationRow, Group, GrowthPoint, MarginalRow, BASELINE_LABEL,
};
pub use coverage::{coverage, read_token_sets, union_set, CoverageError, CoverageReport, CoverageRow, TokenSet};
pub use persist::{parse_frequency_lines, read_index, sidecar_path, write_index, PersistError};
pub use vocab::{build_vocab_index, shard_files_in, BuildStats, VocabIndex};
pub use zipf::{fit_rank_frequency, zipf_fit, ZipfError, ZipfFit, DEFAULT_TOP_K};
