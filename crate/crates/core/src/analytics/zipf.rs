use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::VocabIndex;

pub const DEFAULT_TOP_K: usize = 100_000;

#[derive(Debug, Error, PartialEq)]
pub enum ZipfError {
    #[error("degenerate fit: need at least 2 ranks, have {0}")]
    Degenerate(usize),
    #[error("frequency at rank {rank} is not a positive finite number ({value})")]
    BadFrequency { rank: usize, value: f64 },
}

/// Least-squares fit of `ln f = intercept - alpha * ln r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZipfFit {
    pub alpha: f64,
    pub r_squared: f64,
    pub n_ranks: usize,
    /// Natural-log intercept.
    pub intercept: f64,
}

/// Fits frequencies already listed in rank order (rank 1 first).
pub fn fit_rank_frequency(freqs: &[f64]) -> Result<ZipfFit, ZipfError> {
    let n = freqs.len();
    if n < 2 {
        return Err(ZipfError::Degenerate(n));
    }
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for (i, &f) in freqs.iter().enumerate() {
        if !(f.is_finite() && f > 0.0) {
            return Err(ZipfError::BadFrequency { rank: i + 1, value: f });
        }
        xs.push(((i + 1) as f64).ln());
        ys.push(f.ln());
    }
    let nf = n as f64;
    let x_mean = xs.iter().sum::<f64>() / nf;
    let y_mean = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        let dx = x - x_mean;
        let dy = y - y_mean;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    // a flat line is fitted exactly
    let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    Ok(ZipfFit { alpha: -slope, r_squared, n_ranks: n, intercept })
}

/// Ranks the index's types (frequency descending, ties by type) and fits the
/// top `top_k` ranks.
pub fn zipf_fit(index: &VocabIndex, top_k: usize) -> Result<ZipfFit, ZipfError> {
    let freqs: Vec<f64> = index.ranked().into_iter().take(top_k).map(|(_, f)| f as f64).collect();
    fit_rank_frequency(&freqs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power_law(c: f64, a: f64, n: usize) -> Vec<f64> {
        (1..=n).map(|r| c * (r as f64).powf(-a)).collect()
    }

    #[test]
    fn exact_inverse_rank() {
        let fit = fit_rank_frequency(&[96.0, 48.0, 32.0, 24.0]).unwrap();
        assert!((fit.alpha - 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!((fit.intercept - 96f64.ln()).abs() < 1e-12);
        assert_eq!(fit.n_ranks, 4);
    }

    #[test]
    fn exact_inverse_square() {
        let fit = fit_rank_frequency(&power_law(1000.0, 2.0, 50)).unwrap();
        assert!((fit.alpha - 2.0).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-9);
    }

    #[test]
    fn exact_power_laws_recover_exponent() {
        for a in [0.5, 1.0, 1.624, 2.0] {
            for n in [2, 10, 1000, 100_000] {
                let fit = fit_rank_frequency(&power_law(5e6, a, n)).unwrap();
                assert!((fit.alpha - a).abs() < 1e-9, "a={a} n={n} got {}", fit.alpha);
                assert!((fit.r_squared - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn from_index_uses_ranking_and_top_k() {
        let mut text = String::new();
        for (w, f) in [("a", 96), ("b", 48), ("c", 32), ("d", 24)] {
            for _ in 0..f {
                text.push_str(w);
                text.push(' ');
            }
        }
        let idx = VocabIndex::from_documents([("s", text.as_str())]);
        let fit = zipf_fit(&idx, DEFAULT_TOP_K).unwrap();
        assert!((fit.alpha - 1.0).abs() < 1e-12);
        let fit = zipf_fit(&idx, 2).unwrap();
        assert_eq!(fit.n_ranks, 2);
        assert!((fit.alpha - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(fit_rank_frequency(&[]), Err(ZipfError::Degenerate(0)));
        assert_eq!(fit_rank_frequency(&[5.0]), Err(ZipfError::Degenerate(1)));
        let idx = VocabIndex::from_documents([("s", "same same same")]);
        assert!(matches!(zipf_fit(&idx, 10), Err(ZipfError::Degenerate(1))));
        assert!(zipf_fit(&idx, 10).unwrap_err().to_string().contains("degenerate fit"));
        assert!(matches!(fit_rank_frequency(&[1.0, 0.0]), Err(ZipfError::BadFrequency { rank: 2, .. })));
    }

    #[test]
    fn flat_distribution() {
        let fit = fit_rank_frequency(&[3.0, 3.0, 3.0]).unwrap();
        assert_eq!(fit.alpha, 0.0);
        assert_eq!(fit.r_squared, 1.0);
    }
}
