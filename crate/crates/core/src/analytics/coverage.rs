use std::collections::{BTreeSet, HashMap};
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::VocabIndex;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoverageError {
    #[error("token category `{0}` is empty")]
    EmptyCategory(String),
    #[error("no token categories supplied")]
    NoCategories,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("read error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub category: String,
    pub covered: u64,
    pub total: u64,
    pub coverage: f64,
}

impl CoverageRow {
    /// Percentage with one decimal, e.g. `95.9%`.
    pub fn percent(&self) -> String {
        format!("{:.1}%", self.coverage * 100.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub rows: Vec<CoverageRow>,
}

/// A named token set, e.g. all entity tokens tagged PER.
pub type TokenSet = (String, BTreeSet<String>);

/// Exact surface-form membership of each category's tokens in the vocabulary.
pub fn coverage(index: &VocabIndex, token_sets: &[TokenSet]) -> Result<CoverageReport, CoverageError> {
    let mut rows = Vec::with_capacity(token_sets.len());
    for (category, tokens) in token_sets {
        if tokens.is_empty() {
            return Err(CoverageError::EmptyCategory(category.clone()));
        }
        let covered = tokens.iter().filter(|t| index.contains(t)).count() as u64;
        let total = tokens.len() as u64;
        rows.push(CoverageRow { category: category.clone(), covered, total, coverage: covered as f64 / total as f64 });
    }
    Ok(CoverageReport { rows })
}

/// Reads `category<TAB>token` lines. Categories keep first-appearance order;
/// repeated tokens within a category count once. Blank lines are skipped.
pub fn read_token_sets<R: BufRead>(reader: R) -> Result<Vec<TokenSet>, CoverageError> {
    let mut order: Vec<TokenSet> = Vec::new();
    let mut slot: HashMap<String, usize> = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CoverageError::Io(e.to_string()))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        let (category, token) = line
            .split_once('\t')
            .ok_or_else(|| CoverageError::Parse { line: i + 1, message: "expected `category<TAB>token`".into() })?;
        if category.is_empty() {
            return Err(CoverageError::Parse { line: i + 1, message: "empty category".into() });
        }
        if token.is_empty() || token.chars().any(char::is_whitespace) {
            return Err(CoverageError::Parse { line: i + 1, message: "token must be one non-empty whitespace-free form".into() });
        }
        let idx = *slot.entry(category.to_owned()).or_insert_with(|| {
            order.push((category.to_owned(), BTreeSet::new()));
            order.len() - 1
        });
        order[idx].1.insert(token.to_owned());
    }
    Ok(order)
}

/// Union of all categories, labelled `label`.
pub fn union_set(sets: &[TokenSet], label: &str) -> TokenSet {
    (label.to_owned(), sets.iter().flat_map(|(_, s)| s.iter().cloned()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(cat: &str, toks: &[&str]) -> TokenSet {
        (cat.to_owned(), toks.iter().map(|t| t.to_string()).collect())
    }

    #[test]
    fn basic_coverage() {
        let idx = VocabIndex::from_documents([("s", "a b c")]);
        let r = coverage(&idx, &[set("all", &["a", "b", "c", "d"])]).unwrap();
        assert_eq!(r.rows[0].covered, 3);
        assert_eq!(r.rows[0].total, 4);
        assert_eq!(r.rows[0].coverage, 0.75);
        let full = coverage(&idx, &[set("in", &["a", "c"])]).unwrap();
        assert_eq!(full.rows[0].coverage, 1.0);
    }

    #[test]
    fn percent_rounds_to_one_decimal() {
        let row = CoverageRow { category: "x".into(), covered: 2062, total: 2151, coverage: 2062.0 / 2151.0 };
        assert_eq!(row.percent(), "95.9%");
    }

    #[test]
    fn matching_is_exact() {
        let idx = VocabIndex::from_documents([("s", "Kabul")]);
        let r = coverage(&idx, &[set("LOC", &["kabul", "Kabul"])]).unwrap();
        assert_eq!(r.rows[0].covered, 1);
    }

    #[test]
    fn empty_category_is_an_error() {
        let idx = VocabIndex::new();
        assert_eq!(coverage(&idx, &[set("PER", &[])]), Err(CoverageError::EmptyCategory("PER".into())));
    }

    #[test]
    fn reads_token_file() {
        let body = "PER\tاحمد\nLOC\tکابل\nPER\tاحمد\n\nPER\tNATO\r\n";
        let sets = read_token_sets(body.as_bytes()).unwrap();
        assert_eq!(sets.len(), 2);
        assert_eq!(sets[0].0, "PER");
        assert_eq!(sets[0].1.len(), 2);
        assert_eq!(union_set(&sets, "ALL").1.len(), 3);
        assert!(matches!(read_token_sets("no tab here\n".as_bytes()), Err(CoverageError::Parse { line: 1, .. })));
        assert!(matches!(read_token_sets("P\ta b\n".as_bytes()), Err(CoverageError::Parse { .. })));
        assert!(matches!(read_token_sets("\tx\n".as_bytes()), Err(CoverageError::Parse { .. })));
    }
}
