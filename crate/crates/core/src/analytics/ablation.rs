//! Source-level vocabulary algebra: growth curve, marginal vocabulary and
//! leave-one-group-out ablation.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::VocabIndex;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AblationError {
    #[error("unknown source `{0}`")]
    UnknownSource(String),
    #[error("source `{0}` has no document count")]
    MissingDocCount(String),
    #[error("source `{source_name}` is in both group `{first}` and group `{second}`")]
    Overlap { source_name: String, first: String, second: String },
    #[error("source `{0}` is not assigned to any group")]
    Unassigned(String),
    #[error("group `{0}` is listed twice")]
    DuplicateGroup(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthPoint {
    pub source: String,
    pub docs: u64,
    pub cumulative_vocab: u64,
}

/// Cumulative vocabulary as sources are added in descending document-count
/// order (ties by name).
pub fn vocab_growth_curve(index: &VocabIndex, doc_counts: &BTreeMap<String, u64>) -> Result<Vec<GrowthPoint>, AblationError> {
    for name in doc_counts.keys() {
        if !index.has_source(name) {
            return Err(AblationError::UnknownSource(name.clone()));
        }
    }
    let mut order: Vec<(&str, u64)> = Vec::new();
    for name in index.sources() {
        let docs = *doc_counts.get(name).ok_or_else(|| AblationError::MissingDocCount(name.to_owned()))?;
        order.push((name, docs));
    }
    order.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

    let entries = index.source_entries();
    let mut seen: HashSet<u32> = HashSet::new();
    Ok(order
        .into_iter()
        .map(|(name, docs)| {
            seen.extend(entries[name].types.iter().copied());
            GrowthPoint { source: name.to_owned(), docs, cumulative_vocab: seen.len() as u64 }
        })
        .collect())
}

const SHARED: u32 = u32::MAX;
const NOBODY: u32 = u32::MAX - 1;

/// For every type id, the single owner index in `owner_of_source` terms, or
/// SHARED when several owners contain it.
fn exclusive_owners(index: &VocabIndex, owner_of_source: &HashMap<&str, u32>) -> Vec<u32> {
    let mut owner = vec![NOBODY; index.vocab_size()];
    for (name, sv) in index.source_entries() {
        let o = owner_of_source[name.as_str()];
        for &id in &sv.types {
            let slot = &mut owner[id as usize];
            if *slot == NOBODY {
                *slot = o;
            } else if *slot != o {
                *slot = SHARED;
            }
        }
    }
    owner
}

/// Types that occur in `source` and in no other source.
pub fn marginal_vocab(index: &VocabIndex, source: &str) -> Result<u64, AblationError> {
    marginal_vocab_all(index)
        .get(source)
        .map(|m| m.marginal)
        .ok_or_else(|| AblationError::UnknownSource(source.to_owned()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarginalRow {
    pub docs: u64,
    pub vocab: u64,
    pub marginal: u64,
}

/// Marginal vocabulary of every source in one pass.
pub fn marginal_vocab_all(index: &VocabIndex) -> BTreeMap<String, MarginalRow> {
    let names: Vec<&str> = index.sources().collect();
    let owner_of: HashMap<&str, u32> = names.iter().enumerate().map(|(i, n)| (*n, i as u32)).collect();
    let owners = exclusive_owners(index, &owner_of);
    let mut marginal = vec![0u64; names.len()];
    for o in owners {
        if o != SHARED && o != NOBODY {
            marginal[o as usize] += 1;
        }
    }
    let entries = index.source_entries();
    names
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let sv = &entries[*n];
            ((*n).to_owned(), MarginalRow { docs: sv.docs, vocab: sv.types.len() as u64, marginal: marginal[i] })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub group: String,
    pub docs_removed: u64,
    pub vocab_remaining: u64,
    pub vocab_lost_fraction: f64,
    /// Share of the external token set still in the vocabulary; absent when
    /// no token set was supplied.
    pub coverage_after: Option<f64>,
}

/// A labelled set of sources removed together.
pub type Group = (String, Vec<String>);

pub const BASELINE_LABEL: &str = "(full corpus)";

/// A baseline row, then one row per group with that group's sources removed.
///
/// Every source in the index must be in exactly one group; groups may be
/// empty. `external_tokens` drives `coverage_after`.
pub fn leave_one_out(
    index: &VocabIndex,
    groups: &[Group],
    external_tokens: Option<&HashSet<String>>,
) -> Result<Vec<AblationRow>, AblationError> {
    let mut group_of: HashMap<&str, u32> = HashMap::new();
    let mut labels: HashSet<&str> = HashSet::new();
    for (gi, (label, members)) in groups.iter().enumerate() {
        if !labels.insert(label) {
            return Err(AblationError::DuplicateGroup(label.clone()));
        }
        for s in members {
            if !index.has_source(s) {
                return Err(AblationError::UnknownSource(s.clone()));
            }
            if let Some(prev) = group_of.insert(s.as_str(), gi as u32) {
                if prev != gi as u32 {
                    return Err(AblationError::Overlap {
                        source_name: s.clone(),
                        first: groups[prev as usize].0.clone(),
                        second: label.clone(),
                    });
                }
            }
        }
    }
    if let Some(s) = index.sources().find(|s| !group_of.contains_key(s)) {
        return Err(AblationError::Unassigned(s.to_owned()));
    }

    let owners = exclusive_owners(index, &group_of);
    let mut exclusive = vec![0u64; groups.len()];
    for &o in &owners {
        if o != SHARED && o != NOBODY {
            exclusive[o as usize] += 1;
        }
    }
    // external tokens present in the vocabulary, bucketed by owning group
    let (ext_total, ext_covered, ext_exclusive) = match external_tokens {
        Some(tokens) => {
            let mut per_group = vec![0u64; groups.len()];
            let mut covered = 0u64;
            for t in tokens {
                if let Some(id) = index.type_id(t) {
                    covered += 1;
                    let o = owners[id as usize];
                    if o != SHARED && o != NOBODY {
                        per_group[o as usize] += 1;
                    }
                }
            }
            (tokens.len() as u64, covered, Some(per_group))
        }
        None => (0, 0, None),
    };
    let coverage = |covered: u64| external_tokens.map(|_| if ext_total == 0 { 0.0 } else { covered as f64 / ext_total as f64 });

    let mut docs_by_group = vec![0u64; groups.len()];
    for (s, &g) in &group_of {
        docs_by_group[g as usize] += index.source_docs(s).unwrap_or(0);
    }

    let full = index.vocab_size() as u64;
    let mut rows = Vec::with_capacity(groups.len() + 1);
    rows.push(AblationRow {
        group: BASELINE_LABEL.to_owned(),
        docs_removed: 0,
        vocab_remaining: full,
        vocab_lost_fraction: 0.0,
        coverage_after: coverage(ext_covered),
    });
    for (gi, (label, _)) in groups.iter().enumerate() {
        let remaining = full - exclusive[gi];
        let docs_removed = docs_by_group[gi];
        let lost_cov = ext_exclusive.as_ref().map_or(0, |v| v[gi]);
        rows.push(AblationRow {
            group: label.clone(),
            docs_removed,
            vocab_remaining: remaining,
            vocab_lost_fraction: lost_fraction(remaining, full),
            coverage_after: coverage(ext_covered - lost_cov),
        });
    }
    Ok(rows)
}

/// `1 - remaining / full`, zero for an empty vocabulary.
pub fn lost_fraction(remaining: u64, full: u64) -> f64 {
    if full == 0 {
        0.0
    } else {
        1.0 - remaining as f64 / full as f64
    }
}

/// Reads `group<TAB>source` lines; a line holding only a group label
/// declares an empty group. Group order follows first appearance.
pub fn read_groups<R: std::io::BufRead>(reader: R) -> Result<Vec<Group>, (usize, String)> {
    let mut groups: Vec<Group> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| (i + 1, e.to_string()))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        let (label, source) = match line.split_once('\t') {
            Some((l, s)) => (l, Some(s)),
            None => (line, None),
        };
        if label.is_empty() {
            return Err((i + 1, "empty group label".into()));
        }
        let pos = match groups.iter().position(|(g, _)| g == label) {
            Some(p) => p,
            None => {
                groups.push((label.to_owned(), Vec::new()));
                groups.len() - 1
            }
        };
        if let Some(s) = source {
            if s.is_empty() || s.contains('\t') {
                return Err((i + 1, "expected `group<TAB>source`".into()));
            }
            if !groups[pos].1.iter().any(|m| m == s) {
                groups[pos].1.push(s.to_owned());
            }
        }
    }
    Ok(groups)
}
