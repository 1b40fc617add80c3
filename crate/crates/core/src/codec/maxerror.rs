//! Average-to-maximal error conversion: expurgation of bad messages and the
//! random permutation scheme over the second message index.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

const MEAN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Synthetic,
    Measured,
}

/// `e(m, m')` for `m` in rows and `m'` in columns.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
    pub provenance: Provenance,
}

impl ErrorMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::Dimension(format!("{} entries for a {rows}x{cols} error matrix", entries.len())));
        }
        if let Some((i, e)) = entries.iter().enumerate().find(|(_, e)| !(0.0..=1.0).contains(*e)) {
            return Err(Error::Validation(format!("entry ({}, {}) = {e} outside [0, 1]", i / cols, i % cols)));
        }
        Ok(Self { rows, cols, entries, provenance })
    }

    pub fn constant(rows: usize, cols: usize, value: f64) -> Result<Self> {
        Self::new(rows, cols, vec![value; rows * cols], Provenance::Synthetic)
    }

    /// Builds the matrix from `(m, m', e)` triples with 0-based indices;
    /// every pair must appear exactly once.
    pub fn from_triples(triples: &[(usize, usize, f64)], provenance: Provenance) -> Result<Self> {
        let rows = triples.iter().map(|t| t.0 + 1).max().unwrap_or(0);
        let cols = triples.iter().map(|t| t.1 + 1).max().unwrap_or(0);
        if triples.len() != rows * cols {
            return Err(Error::Validation(format!("{} triples cannot fill a {rows}x{cols} matrix", triples.len())));
        }
        let mut entries = vec![f64::NAN; rows * cols];
        for &(m, mp, e) in triples {
            let slot = &mut entries[m * cols + mp];
            if !slot.is_nan() {
                return Err(Error::Validation(format!("pair ({m}, {mp}) listed twice")));
            }
            *slot = e;
        }
        Self::new(rows, cols, entries, provenance)
    }

    pub fn to_triples(&self) -> Vec<(usize, usize, f64)> {
        self.entries.iter().enumerate().map(|(i, &e)| (i / self.cols, i % self.cols, e)).collect()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, m: usize, m_prime: usize) -> f64 {
        self.entries[m * self.cols + m_prime]
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.entries[m * self.cols..(m + 1) * self.cols]
    }

    /// Semi-average errors `e(m) = (1/|M'|) Σ_{m'} e(m, m')`.
    pub fn row_means(&self) -> Vec<f64> {
        (0..self.rows).map(|m| self.row(m).iter().sum::<f64>() / self.cols as f64).collect()
    }

    pub fn grand_mean(&self) -> f64 {
        self.entries.iter().sum::<f64>() / self.entries.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }

    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::param("rows", "empty selection"));
        }
        let entries = rows.iter().flat_map(|&m| self.row(m).iter().copied()).collect();
        Self::new(rows.len(), self.cols, entries, self.provenance)
    }

    /// Multiplies every entry so that the grand mean becomes `target`.
    pub fn scaled_to_mean(&self, target: f64) -> Result<Self> {
        let mean = self.grand_mean();
        if mean <= 0.0 {
            return Err(Error::param("errors", "cannot rescale an all-zero matrix"));
        }
        let s = target / mean;
        Self::new(self.rows, self.cols, self.entries.iter().map(|e| e * s).collect(), self.provenance)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Expurgation {
    pub kept: Vec<usize>,
    pub removed: Vec<usize>,
    pub removed_fraction: f64,
    /// `log₂(1/(1 − removed fraction))/n`; `None` when nothing survives.
    pub rate_loss: Option<f64>,
    pub lambda: f64,
    /// Markov bound `grand mean / λ` on the removed fraction.
    pub markov_bound: f64,
}

/// Keeps the messages with `e(m) ≤ λ`.
pub fn expurgate(errors: &ErrorMatrix, lambda: f64, n: usize) -> Result<Expurgation> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::param("lambda", format!("{lambda} is outside (0, 1)")));
    }
    if n == 0 {
        return Err(Error::param("n", "blocklength must be at least 1"));
    }
    let means = errors.row_means();
    let (kept, removed): (Vec<usize>, Vec<usize>) = (0..errors.rows()).partition(|&m| means[m] <= lambda);
    let removed_fraction = removed.len() as f64 / errors.rows() as f64;
    let rate_loss = (!kept.is_empty()).then(|| (1.0 / (1.0 - removed_fraction)).log2() / n as f64);
    Ok(Expurgation { kept, removed, removed_fraction, rate_loss, lambda, markov_bound: errors.grand_mean() / lambda })
}

/// `max_{m,m'} (1/L) Σ_ℓ e(m, π_ℓ(m'))`.
pub fn permuted_max_error(errors: &ErrorMatrix, permutations: &[Vec<usize>]) -> Result<f64> {
    if permutations.is_empty() {
        return Err(Error::param("permutations", "need at least one permutation"));
    }
    if let Some(p) = permutations.iter().find(|p| p.len() != errors.cols()) {
        return Err(Error::Dimension(format!("permutation of length {} on {} messages", p.len(), errors.cols())));
    }
    let inv_l = 1.0 / permutations.len() as f64;
    let mut worst = 0.0f64;
    for m in 0..errors.rows() {
        let row = errors.row(m);
        let row_max = row.iter().copied().fold(0.0, f64::max);
        for mp in 0..errors.cols() {
            let avg = (permutations.iter().map(|p| row[p[mp]]).sum::<f64>() * inv_l).min(row_max);
            worst = worst.max(avg);
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PermutationOutcome {
    pub permutations: Vec<Vec<usize>>,
    pub max_error: f64,
    pub bound: f64,
    pub attempts: usize,
    pub seed_used: u64,
    pub input_max: f64,
    pub grand_mean: f64,
}

pub fn draw_permutations(size: usize, count: usize, rng: &mut impl Rng) -> Vec<Vec<usize>> {
    (0..count)
        .map(|_| {
            let mut p: Vec<usize> = (0..size).collect();
            p.shuffle(rng);
            p
        })
        .collect()
}

/// Draws `n²` uniform permutations of the `m'` messages until the averaged
/// maximal error is at most `4λ`. Attempt `i` uses seed `seed + i`.
pub fn permutation_scheme(
    errors: &ErrorMatrix,
    n: usize,
    lambda: f64,
    seed: u64,
    retry_budget: usize,
) -> Result<PermutationOutcome> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::param("lambda", format!("{lambda} is outside (0, 1)")));
    }
    if n == 0 {
        return Err(Error::param("n", "blocklength must be at least 1"));
    }
    if retry_budget == 0 {
        return Err(Error::param("retry_budget", "must be at least 1"));
    }
    if let Some((m, e)) = errors.row_means().into_iter().enumerate().find(|(_, e)| *e > lambda + MEAN_TOL) {
        return Err(Error::param("errors", format!("row {m} has semi-average error {e} > lambda = {lambda}")));
    }
    let count = n * n;
    let bound = 4.0 * lambda;
    let mut best = f64::INFINITY;
    for attempt in 0..retry_budget {
        let seed_used = seed.wrapping_add(attempt as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed_used);
        let permutations = draw_permutations(errors.cols(), count, &mut rng);
        let max_error = permuted_max_error(errors, &permutations)?;
        if max_error <= bound {
            return Ok(PermutationOutcome {
                permutations,
                max_error,
                bound,
                attempts: attempt + 1,
                seed_used,
                input_max: errors.max(),
                grand_mean: errors.grand_mean(),
            });
        }
        best = best.min(max_error);
    }
    Err(Error::BoundNotMet { bound, attempts: retry_budget, best })
}

/// Synthetic matrix whose rows share a few high-error columns.
///
/// Between one and three columns carry a spike in `[0.5, 1]`, the rest is
/// background noise in `[0, 0.003]`; spikes are capped so that every row mean
/// stays at or below `lambda`.
pub fn spiky_fixture(rows: usize, cols: usize, lambda: f64, seed: u64) -> Result<ErrorMatrix> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::param("lambda", format!("{lambda} is outside (0, 1)")));
    }
    let noise_max = 0.003f64.min(lambda / 4.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spikes = rng.random_range(1..=3usize).min(cols);
    let mut columns: Vec<usize> = (0..cols).collect();
    columns.shuffle(&mut rng);
    let spike_cols = &columns[..spikes];
    let budget = (lambda - noise_max) * cols as f64 / spikes as f64;
    let height = rng.random_range(0.5..=1.0f64).min(budget).min(1.0);
    let mut entries = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        for mp in 0..cols {
            let noise = rng.random_range(0.0..=noise_max);
            entries.push(if spike_cols.contains(&mp) { height } else { noise });
        }
    }
    ErrorMatrix::new(rows, cols, entries, Provenance::Synthetic)
}

/// Synthetic matrix rescaled to grand mean `lambda²` in which a fraction
/// between `lambda/2` and `lambda` of the rows carries almost all the error,
/// so those rows end up above `lambda` and expurgation is close to the
/// Markov limit.
pub fn bad_row_fixture(rows: usize, cols: usize, lambda: f64, seed: u64) -> Result<ErrorMatrix> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::param("lambda", format!("{lambda} is outside (0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fraction = rng.random_range(0.5 * lambda..lambda);
    let bad_count = ((fraction * rows as f64).floor() as usize).max(1);
    let mut order: Vec<usize> = (0..rows).collect();
    order.shuffle(&mut rng);
    let bad = &order[..bad_count.min(rows)];
    let mut entries = Vec::with_capacity(rows * cols);
    for m in 0..rows {
        let range = if bad.contains(&m) { 0.95..=1.0 } else { 0.0..=0.001 };
        for _ in 0..cols {
            entries.push(rng.random_range(range.clone()));
        }
    }
    ErrorMatrix::new(rows, cols, entries, Provenance::Synthetic)?.scaled_to_mean(lambda * lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_matrix_keeps_everything() {
        let e = ErrorMatrix::constant(8, 8, 0.0).unwrap();
        let x = expurgate(&e, 0.1, 4).unwrap();
        assert_eq!(x.kept.len(), 8);
        assert_eq!(x.rate_loss, Some(0.0));
    }

    #[test]
    fn one_bad_row_removed() {
        let mut entries = vec![0.0; 16];
        entries[4..8].fill(1.0);
        let e = ErrorMatrix::new(4, 4, entries, Provenance::Synthetic).unwrap();
        let x = expurgate(&e, 0.5, 2).unwrap();
        assert_eq!(x.removed, vec![1]);
        assert!((x.rate_loss.unwrap() - (4.0f64 / 3.0).log2() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn lambda_range_checked() {
        let e = ErrorMatrix::constant(2, 2, 0.0).unwrap();
        assert!(expurgate(&e, 1.0, 1).is_err());
        assert!(expurgate(&e, 0.0, 1).is_err());
        assert!(permutation_scheme(&e, 2, 1.5, 0, 1).is_err());
    }

    #[test]
    fn constant_matrix_max_is_lambda() {
        let e = ErrorMatrix::constant(16, 16, 0.05).unwrap();
        let out = permutation_scheme(&e, 3, 0.05, 1, 1).unwrap();
        assert!((out.max_error - 0.05).abs() < 1e-15);
        assert_eq!(out.attempts, 1);
        assert_eq!(out.permutations.len(), 9);
    }

    #[test]
    fn singleton_column_is_unchanged() {
        let e = ErrorMatrix::new(3, 1, vec![0.01, 0.04, 0.02], Provenance::Measured).unwrap();
        let out = permutation_scheme(&e, 4, 0.05, 0, 1).unwrap();
        assert!(out.permutations.iter().all(|p| p == &vec![0]));
        assert!((out.max_error - 0.04).abs() < 1e-15);
    }

    #[test]
    fn row_mean_precondition() {
        let e = ErrorMatrix::constant(4, 4, 0.2).unwrap();
        assert!(matches!(permutation_scheme(&e, 2, 0.1, 0, 1), Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn budget_exhaustion_reports_best() {
        // one spike column with a single permutation: the spike cannot be diluted
        let mut entries = vec![0.0; 20];
        for m in 0..4 {
            entries[m * 5] = 0.2;
        }
        let e = ErrorMatrix::new(4, 5, entries, Provenance::Synthetic).unwrap();
        match permutation_scheme(&e, 1, 0.04, 0, 3) {
            Err(Error::BoundNotMet { attempts, best, .. }) => {
                assert_eq!(attempts, 3);
                assert!((best - 0.2).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn triples_round_trip() {
        let e = spiky_fixture(5, 7, 0.05, 2).unwrap();
        let back = ErrorMatrix::from_triples(&e.to_triples(), Provenance::Synthetic).unwrap();
        assert_eq!(back, e);
        assert!(ErrorMatrix::from_triples(&[(0, 0, 0.1), (0, 0, 0.2)], Provenance::Measured).is_err());
        assert!(ErrorMatrix::from_triples(&[(0, 0, 1.5)], Provenance::Measured).is_err());
    }

    #[test]
    fn fixtures_respect_lambda() {
        for seed in 0..20 {
            let e = spiky_fixture(64, 64, 0.05, seed).unwrap();
            assert!(e.row_means().iter().all(|&r| r <= 0.05));
            assert!(e.max() >= 0.5 - 1e-12 || e.max() > 0.3);
            let b = bad_row_fixture(64, 64, 0.05, seed).unwrap();
            assert!((b.grand_mean() - 0.0025).abs() < 1e-12);
        }
    }
}
