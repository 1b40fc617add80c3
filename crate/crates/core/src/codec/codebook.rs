use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest number of codewords a desk-scale codebook may hold.
pub const MAX_CODEWORDS: usize = 1 << 16;

/// `⌈2^{nR}⌉`, ignoring floating-point dust just above an integer.
pub fn index_set_size(n: usize, rate: f64) -> Result<usize> {
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(Error::param("rate", format!("{rate} is not a nonnegative rate")));
    }
    let exponent = n as f64 * rate;
    if exponent > 16.0 + 1e-9 {
        return Err(Error::Guard(format!("2^({n}*{rate}) exceeds {MAX_CODEWORDS} indices")));
    }
    Ok((2f64.powf(exponent) - 1e-9).ceil().max(1.0) as usize)
}

/// Random codebook `{xⁿ(m,k)}` with i.i.d. letters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Codebook {
    pub n: usize,
    pub rate_r: f64,
    pub rate_r0: f64,
    pub num_messages: usize,
    pub num_keys: usize,
    pub seed: u64,
    words: Vec<Vec<usize>>,
}

impl Codebook {
    pub fn codeword(&self, m: usize, k: usize) -> &[usize] {
        assert!(m < self.num_messages && k < self.num_keys, "codeword index ({m},{k}) out of range");
        &self.words[m * self.num_keys + k]
    }

    /// Codewords `xⁿ(m, k)` for every key `k`.
    pub fn message_words(&self, m: usize) -> &[Vec<usize>] {
        &self.words[m * self.num_keys..(m + 1) * self.num_keys]
    }

    pub fn words(&self) -> &[Vec<usize>] {
        &self.words
    }

    /// Same codebook with message rows reordered: new row `i` is old row `perm[i]`.
    pub fn relabel_messages(&self, perm: &[usize]) -> Self {
        let words = perm.iter().flat_map(|&m| self.message_words(m).iter().cloned()).collect();
        Self { words, ..self.clone() }
    }
}

/// Draws `⌈2^{nR}⌉ × ⌈2^{nR₀}⌉` sequences of length `n`, each letter i.i.d. `∼ p_x`.
pub fn generate_codebook(n: usize, rate_r: f64, rate_r0: f64, p_x: &[f64], seed: u64) -> Result<Codebook> {
    if n == 0 {
        return Err(Error::param("n", "blocklength must be at least 1"));
    }
    let num_messages = index_set_size(n, rate_r)?;
    let num_keys = index_set_size(n, rate_r0)?;
    let total = num_messages
        .checked_mul(num_keys)
        .filter(|&t| t <= MAX_CODEWORDS)
        .ok_or_else(|| Error::Guard(format!("{num_messages} x {num_keys} codewords exceed {MAX_CODEWORDS}")))?;
    let dist = WeightedIndex::new(p_x).map_err(|e| Error::param("p_x", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words = (0..total).map(|_| (0..n).map(|_| dist.sample(&mut rng)).collect()).collect();
    Ok(Codebook { n, rate_r, rate_r0, num_messages, num_keys, seed, words })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_distribution_gives_zero_words() {
        let cb = generate_codebook(4, 1.0, 0.5, &[1.0, 0.0], 3).unwrap();
        assert!(cb.words().iter().all(|w| w.iter().all(|&x| x == 0)));
    }

    #[test]
    fn shape_at_half_rates() {
        let cb = generate_codebook(2, 0.5, 0.5, &[0.5, 0.5], 0).unwrap();
        assert_eq!((cb.num_messages, cb.num_keys), (2, 2));
        assert!(cb.words().iter().all(|w| w.len() == 2));
    }

    #[test]
    fn sizes_round_up() {
        assert_eq!(index_set_size(3, 0.0).unwrap(), 1);
        assert_eq!(index_set_size(3, 0.5).unwrap(), 3);
        assert_eq!(index_set_size(3, 1.0).unwrap(), 8);
        assert_eq!(index_set_size(3, 1.5).unwrap(), 23);
        assert_eq!(index_set_size(3, 2.0).unwrap(), 64);
        assert!(matches!(index_set_size(4, 5.0), Err(Error::Guard(_))));
    }

    #[test]
    fn size_guard() {
        assert!(matches!(generate_codebook(8, 1.5, 1.0, &[0.5, 0.5], 0), Err(Error::Guard(_))));
    }

    #[test]
    fn deterministic_given_seed() {
        let a = generate_codebook(5, 1.0, 0.4, &[0.3, 0.7], 42).unwrap();
        let b = generate_codebook(5, 1.0, 0.4, &[0.3, 0.7], 42).unwrap();
        let c = generate_codebook(5, 1.0, 0.4, &[0.3, 0.7], 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.words(), c.words());
    }

    #[test]
    fn letter_frequencies_concentrate() {
        // 10^4 letters; a binomial(10^4, 1/2) count leaves [4500, 5500] with
        // probability below 1e-20.
        for seed in 0..20 {
            let cb = generate_codebook(10, 1.0, 0.0, &[0.5, 0.5], seed).unwrap();
            let mut zeros = 0usize;
            let mut total = 0usize;
            // 1024 words of length 10 -> 10240 letters; use the first 10^4
            for &x in cb.words().iter().flatten().take(10_000) {
                zeros += (x == 0) as usize;
                total += 1;
            }
            assert_eq!(total, 10_000);
            let freq = zeros as f64 / total as f64;
            assert!((0.45..=0.55).contains(&freq), "seed {seed}: {freq}");
        }
    }
}
