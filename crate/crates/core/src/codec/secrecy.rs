//! Eve's states under keyed encoding and the covering diagnostics `Δ*_m`
//! and `Δ_{m'|m,k}`.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::codebook::{index_set_size, Codebook};
use super::types::{conditional_types, keyed_unitary, schmidt_decompose, GammaKey, SchmidtDecomposition, TypeDecomposition};
use crate::channels::WiretapChannel;
use crate::ensembles::{build_omega, marginal, Ensemble, Subsystem};
use crate::error::{Error, Result};
use crate::linalg::{permute_vector, tensor_product_all, tensor_vectors, trace_distance, ComplexMatrix, DimensionList};

/// Largest blocklength for explicit `EⁿG₂ⁿ` states.
pub const MAX_EVE_LETTERS: usize = 6;
/// Largest blocklength for `Δ_{m'|m,k}`.
pub const MAX_EXCESS_LETTERS: usize = 4;
/// Key spaces up to this size are averaged exhaustively.
pub const EXHAUSTIVE_KEY_LIMIT: u128 = 1 << 14;
/// Sample size for `ζ` when the key space is too large to enumerate.
pub const ZETA_SAMPLE_SIZE: usize = 1 << 12;

const KEY_CHUNK: usize = 64;

/// SplitMix64 step, used to derive independent stream seeds.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KeyCount {
    Sampled(usize),
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ZetaProvenance {
    pub key_space: u128,
    pub exhaustive: bool,
    pub sample_size: usize,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Zeta {
    pub state: ComplexMatrix,
    pub provenance: ZetaProvenance,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeltaExcess {
    pub value: f64,
    pub keys_used: usize,
    pub zeta: ZetaProvenance,
}

/// Per-letter data of a fixed channel and ensemble.
#[derive(Clone, Debug)]
pub struct SecrecyModel {
    channel: WiretapChannel,
    ensemble: Ensemble,
    schmidt: Vec<SchmidtDecomposition>,
    psi: Vec<Vec<crate::linalg::C64>>,
    letter_states: Vec<ComplexMatrix>,
    average: ComplexMatrix,
}

impl SecrecyModel {
    pub fn new(channel: &WiretapChannel, ensemble: &Ensemble) -> Result<Self> {
        let omega = build_omega(channel, ensemble)?;
        let g2e = marginal(&omega, &[Subsystem::G2, Subsystem::E])?;
        let letter_states: Vec<ComplexMatrix> = g2e.blocks().iter().map(|(_, rho)| rho.clone()).collect();
        let average = g2e.average();
        let psi = (0..ensemble.alphabet_size()).map(|x| ensemble.psi_ag2(x)).collect::<Result<Vec<_>>>()?;
        let schmidt = psi
            .iter()
            .map(|p| schmidt_decompose(p, ensemble.a_dim(), ensemble.g2_dim()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { channel: channel.clone(), ensemble: ensemble.clone(), schmidt, psi, letter_states, average })
    }

    pub fn ensemble(&self) -> &Ensemble {
        &self.ensemble
    }

    pub fn channel(&self) -> &WiretapChannel {
        &self.channel
    }

    pub fn schmidt(&self, x: usize) -> &SchmidtDecomposition {
        &self.schmidt[x]
    }

    /// `ω^x_{G₂E}`.
    pub fn letter_state(&self, x: usize) -> &ComplexMatrix {
        &self.letter_states[x]
    }

    /// `ω_{G₂E} = Σ_x p(x) ω^x_{G₂E}`.
    pub fn average_state(&self) -> &ComplexMatrix {
        &self.average
    }

    /// Per-letter `(G₂ᵢ, Eᵢ)` dimensions of an `n`-letter Eve state.
    pub fn eve_dims(&self, n: usize) -> DimensionList {
        let pair = [self.ensemble.g2_dim(), self.channel.d_e()];
        DimensionList::new(pair.iter().copied().cycle().take(2 * n).collect()).expect("positive dimensions")
    }

    fn check_sequence(&self, x_n: &[usize], limit: usize) -> Result<()> {
        if x_n.is_empty() {
            return Err(Error::param("x_n", "empty sequence"));
        }
        if x_n.len() > limit {
            return Err(Error::Guard(format!("blocklength {} exceeds the limit of {limit}", x_n.len())));
        }
        if let Some(&x) = x_n.iter().find(|&&x| x >= self.letter_states.len()) {
            return Err(Error::param("x_n", format!("letter {x} outside alphabet of size {}", self.letter_states.len())));
        }
        Ok(())
    }

    /// `⊗ᵢ ω^{xᵢ}_{G₂E}`.
    pub fn product_state(&self, x_n: &[usize]) -> Result<ComplexMatrix> {
        self.check_sequence(x_n, MAX_EVE_LETTERS)?;
        Ok(tensor_product_all(x_n.iter().map(|&x| &self.letter_states[x])).expect("nonempty sequence"))
    }

    /// `ω_{G₂E}^{⊗n}`.
    pub fn reference_state(&self, n: usize) -> Result<ComplexMatrix> {
        if n == 0 || n > MAX_EVE_LETTERS {
            return Err(Error::Guard(format!("blocklength {n} outside 1..={MAX_EVE_LETTERS}")));
        }
        Ok(tensor_product_all(std::iter::repeat_n(&self.average, n)).expect("n >= 1"))
    }

    pub fn type_decomposition(&self, x_n: &[usize]) -> Result<TypeDecomposition> {
        conditional_types(x_n, self.ensemble.a_dim())
    }

    /// Key-independent data for one conditioning sequence.
    pub fn keyed_sequence(&self, x_n: &[usize]) -> Result<KeyedSequence<'_>> {
        self.check_sequence(x_n, MAX_EVE_LETTERS)?;
        let n = x_n.len();
        let decomp = self.type_decomposition(x_n)?;
        let basis = decomp.subspace_basis(&self.schmidt)?;
        let (d_a, d_g2) = (self.ensemble.a_dim(), self.ensemble.g2_dim());
        let mut joint = vec![crate::linalg::ONE];
        for &x in x_n {
            joint = tensor_vectors(&joint, &self.psi[x]);
        }
        let interleaved = DimensionList::new([d_a, d_g2].iter().copied().cycle().take(2 * n).collect())?;
        let perm: Vec<usize> = (0..n).map(|i| 2 * i).chain((0..n).map(|i| 2 * i + 1)).collect();
        let (grouped, _) = permute_vector(&joint, &interleaved, &perm)?;
        let amplitudes = ComplexMatrix::from_vec(d_a.pow(n as u32), d_g2.pow(n as u32), grouped)?;
        Ok(KeyedSequence { model: self, decomp, basis, amplitudes })
    }

    /// `ρ^{γ,xⁿ}_{EⁿG₂ⁿ}` with factors ordered `(G₂₁, E₁, …, G₂ₙ, Eₙ)`.
    pub fn eve_state(&self, x_n: &[usize], key: &GammaKey) -> Result<ComplexMatrix> {
        self.keyed_sequence(x_n)?.eve_state(key)
    }

    /// `(1/|K|) Σ_k ⊗ᵢ ω^{xᵢ(m,k)}` against `ω^{⊗n}`.
    pub fn delta_star(&self, codebook: &Codebook, m: usize) -> Result<f64> {
        if m >= codebook.num_messages {
            return Err(Error::param("m", format!("message {m} outside 0..{}", codebook.num_messages)));
        }
        let n = codebook.n;
        let reference = self.reference_state(n)?;
        let words = codebook.message_words(m);
        let mut avg = ComplexMatrix::zeros(reference.rows(), reference.cols());
        for w in words {
            avg.add_scaled(&self.product_state(w)?, 1.0 / words.len() as f64)?;
        }
        Ok(trace_distance(&avg.symmetrized(), &reference.symmetrized())?.clamp(0.0, 1.0))
    }

    /// Full-key average `ζ^{xⁿ}`; sampled with `seed` when the key space
    /// exceeds [`EXHAUSTIVE_KEY_LIMIT`].
    pub fn zeta(&self, x_n: &[usize], seed: u64) -> Result<Zeta> {
        self.check_sequence(x_n, MAX_EXCESS_LETTERS)?;
        self.keyed_sequence(x_n)?.zeta(seed)
    }

    /// `½‖(1/K) Σ_{k'} ρ^{γ_{k'},xⁿ} − ζ^{xⁿ}‖₁` with keys drawn uniformly
    /// with replacement, or all keys for [`KeyCount::Full`].
    pub fn delta_excess(&self, x_n: &[usize], key_count: KeyCount, seed: u64) -> Result<DeltaExcess> {
        self.check_sequence(x_n, MAX_EXCESS_LETTERS)?;
        let seq = self.keyed_sequence(x_n)?;
        let zeta = seq.zeta(derive_seed(seed, u64::MAX))?;
        seq.delta_excess(&zeta, key_count, seed)
    }

    /// `Δ*_m` for every message of a random codebook.
    pub fn covering_sample(&self, n: usize, rate_r: f64, rate_r0: f64, seed: u64) -> Result<CoveringSample> {
        let codebook = super::codebook::generate_codebook(n, rate_r, rate_r0, self.ensemble.p_x(), seed)?;
        let delta_star = (0..codebook.num_messages).map(|m| self.delta_star(&codebook, m)).collect::<Result<Vec<_>>>()?;
        Ok(CoveringSample { n, r0: rate_r0, seed, delta_star })
    }

    /// Draws `xⁿ ∼ p_Xⁿ` from `seed` and evaluates `Δ_{m'|m,k}` for each of
    /// the `⌈2^{nR'}⌉` messages `m'`, each with its own key draw.
    pub fn excess_sample(&self, n: usize, key_count: KeyCount, rate_r_prime: f64, seed: u64) -> Result<ExcessSample> {
        if n == 0 || n > MAX_EXCESS_LETTERS {
            return Err(Error::Guard(format!("blocklength {n} outside 1..={MAX_EXCESS_LETTERS}")));
        }
        let dist = WeightedIndex::new(self.ensemble.p_x()).map_err(|e| Error::param("p_x", e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x_n: Vec<usize> = (0..n).map(|_| dist.sample(&mut rng)).collect();
        let messages = index_set_size(n, rate_r_prime)?;
        let seq = self.keyed_sequence(&x_n)?;
        let zeta = seq.zeta(derive_seed(seed, u64::MAX))?;
        let values = (0..messages)
            .map(|mp| Ok(seq.delta_excess(&zeta, key_count, derive_seed(seed, mp as u64))?.value))
            .collect::<Result<Vec<_>>>()?;
        Ok(ExcessSample { n, key_count, seed, x_n, values, zeta: zeta.provenance })
    }

    /// `Δ*_m` for every `m` and `Δ_{m'|m,k}` for every `(m, k, m')` of a
    /// codebook, with `⌈2^{nR'₀}⌉` sampled keys per `m'`.
    pub fn diagnostics(
        &self,
        codebook: &Codebook,
        rate_r_prime: f64,
        rate_r0_prime: f64,
        seed: u64,
    ) -> Result<SecrecyDiagnostics> {
        let n = codebook.n;
        if n > MAX_EXCESS_LETTERS {
            return Err(Error::Guard(format!("blocklength {n} exceeds the limit of {MAX_EXCESS_LETTERS}")));
        }
        let delta_star = (0..codebook.num_messages).map(|m| self.delta_star(codebook, m)).collect::<Result<Vec<_>>>()?;
        let messages = index_set_size(n, rate_r_prime)?;
        let keys = index_set_size(n, rate_r0_prime)?;
        let mut delta_excess = Vec::new();
        let mut zetas = Vec::new();
        for m in 0..codebook.num_messages {
            for k in 0..codebook.num_keys {
                let stream = (m * codebook.num_keys + k) as u64;
                let seq = self.keyed_sequence(codebook.codeword(m, k))?;
                let zeta = seq.zeta(derive_seed(seed, stream ^ (1 << 63)))?;
                for m_prime in 0..messages {
                    let s = derive_seed(derive_seed(seed, stream), m_prime as u64);
                    let d = seq.delta_excess(&zeta, KeyCount::Sampled(keys), s)?;
                    delta_excess.push(ExcessRecord { m, k, m_prime, value: d.value });
                }
                zetas.push(zeta.provenance);
            }
        }
        let diag = SecrecyDiagnostics {
            n,
            r0: codebook.rate_r0,
            r0_prime: rate_r0_prime,
            delta_star,
            delta_excess,
            seeds: vec![codebook.seed, seed],
            repetitions: 1,
            zeta: zetas,
        };
        diag.validate()?;
        Ok(diag)
    }
}

/// Key-independent part of `ρ^{γ,xⁿ}`: the type decomposition, its basis on
/// `Aⁿ` and the amplitudes of `⊗ᵢ|ψ^{xᵢ}⟩` as an `Aⁿ × G₂ⁿ` matrix.
#[derive(Clone, Debug)]
pub struct KeyedSequence<'a> {
    model: &'a SecrecyModel,
    decomp: TypeDecomposition,
    basis: ComplexMatrix,
    amplitudes: ComplexMatrix,
}

impl KeyedSequence<'_> {
    pub fn decomposition(&self) -> &TypeDecomposition {
        &self.decomp
    }

    /// Columns of the type-ordered basis of `Aⁿ`.
    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    /// `U(γ)` expressed in the computational basis of `Aⁿ`.
    pub fn computational_unitary(&self, key: &GammaKey) -> Result<ComplexMatrix> {
        let u = keyed_unitary(&self.decomp, key)?;
        self.basis.matmul(&u)?.matmul(&self.basis.adjoint())
    }

    pub fn eve_state(&self, key: &GammaKey) -> Result<ComplexMatrix> {
        let n = self.decomp.n();
        let chan = &self.model.channel;
        let (d_a, d_g2) = (self.model.ensemble.a_dim(), self.model.ensemble.g2_dim());
        let rotated = self.computational_unitary(key)?.matmul(&self.amplitudes)?;
        let mut dims = DimensionList::new(vec![d_a; n].into_iter().chain(vec![d_g2; n]).collect())?;
        let mut v = rotated.data().to_vec();
        for i in 0..n {
            let (out, new_dims) = chan.apply_to_vector(&v, &dims, 2 * i)?;
            v = out;
            dims = new_dims;
        }
        // dims: B₁ E₁ … Bₙ Eₙ G₂₁ … G₂ₙ
        let perm: Vec<usize> = (0..n).flat_map(|i| [2 * n + i, 2 * i + 1]).chain((0..n).map(|i| 2 * i)).collect();
        let (v, _) = permute_vector(&v, &dims, &perm)?;
        let eve_dim = (d_g2 * chan.d_e()).pow(n as u32);
        let r = ComplexMatrix::from_vec(eve_dim, chan.d_b().pow(n as u32), v)?;
        Ok(r.matmul(&r.adjoint())?.symmetrized())
    }

    /// Average of `eve_state` over `keys`, summed in fixed-size chunks so the
    /// result does not depend on the thread count.
    pub fn average_over(&self, keys: &[GammaKey]) -> Result<ComplexMatrix> {
        if keys.is_empty() {
            return Err(Error::param("keys", "no keys to average"));
        }
        let partials = keys
            .par_chunks(KEY_CHUNK)
            .map(|chunk| {
                let mut acc: Option<ComplexMatrix> = None;
                for key in chunk {
                    let rho = self.eve_state(key)?;
                    match acc.as_mut() {
                        Some(a) => a.add_scaled(&rho, 1.0)?,
                        None => acc = Some(rho),
                    }
                }
                Ok(acc.expect("nonempty chunk"))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut total = partials[0].clone();
        for p in &partials[1..] {
            total.add_scaled(p, 1.0)?;
        }
        Ok(total.scale(1.0 / keys.len() as f64).symmetrized())
    }

    fn key_space(&self) -> Result<u128> {
        self.decomp.key_space_size().ok_or_else(|| Error::Guard("key space size overflows".into()))
    }

    pub fn all_keys(&self) -> Result<Vec<GammaKey>> {
        let size = self.key_space()?;
        if size > EXHAUSTIVE_KEY_LIMIT {
            return Err(Error::Guard(format!("key space of {size} exceeds {EXHAUSTIVE_KEY_LIMIT}")));
        }
        (0..size).map(|i| GammaKey::from_index(&self.decomp, i)).collect()
    }

    pub fn sample_keys(&self, count: usize, seed: u64) -> Vec<GammaKey> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| GammaKey::random(&self.decomp, &mut rng)).collect()
    }

    pub fn zeta(&self, seed: u64) -> Result<Zeta> {
        let key_space = self.key_space()?;
        if key_space <= EXHAUSTIVE_KEY_LIMIT {
            let state = self.average_over(&self.all_keys()?)?;
            Ok(Zeta { state, provenance: ZetaProvenance { key_space, exhaustive: true, sample_size: key_space as usize, seed: None } })
        } else {
            let state = self.average_over(&self.sample_keys(ZETA_SAMPLE_SIZE, seed))?;
            Ok(Zeta {
                state,
                provenance: ZetaProvenance { key_space, exhaustive: false, sample_size: ZETA_SAMPLE_SIZE, seed: Some(seed) },
            })
        }
    }

    pub fn delta_excess(&self, zeta: &Zeta, key_count: KeyCount, seed: u64) -> Result<DeltaExcess> {
        let keys = match key_count {
            KeyCount::Full => self.all_keys()?,
            KeyCount::Sampled(0) => return Err(Error::param("key_count", "must be at least 1")),
            KeyCount::Sampled(k) => self.sample_keys(k, seed),
        };
        let avg = self.average_over(&keys)?;
        let value = trace_distance(&avg, &zeta.state)?.clamp(0.0, 1.0);
        Ok(DeltaExcess { value, keys_used: keys.len(), zeta: zeta.provenance })
    }
}

/// `Δ*_m` over the messages of one codebook draw.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoveringSample {
    pub n: usize,
    pub r0: f64,
    pub seed: u64,
    pub delta_star: Vec<f64>,
}

impl CoveringSample {
    pub fn mean(&self) -> f64 {
        self.delta_star.iter().sum::<f64>() / self.delta_star.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.delta_star.iter().copied().fold(0.0, f64::max)
    }
}

/// `Δ_{m'|m,k}` over the messages `m'` for one drawn `xⁿ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExcessSample {
    pub n: usize,
    pub key_count: KeyCount,
    pub seed: u64,
    pub x_n: Vec<usize>,
    pub values: Vec<f64>,
    pub zeta: ZetaProvenance,
}

impl ExcessSample {
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExcessRecord {
    pub m: usize,
    pub k: usize,
    pub m_prime: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SecrecyDiagnostics {
    pub n: usize,
    pub r0: f64,
    pub r0_prime: f64,
    pub delta_star: Vec<f64>,
    pub delta_excess: Vec<ExcessRecord>,
    pub seeds: Vec<u64>,
    pub repetitions: usize,
    pub zeta: Vec<ZetaProvenance>,
}

impl SecrecyDiagnostics {
    pub fn validate(&self) -> Result<()> {
        let bad = self
            .delta_star
            .iter()
            .chain(self.delta_excess.iter().map(|r| &r.value))
            .find(|v| !(0.0..=1.0).contains(*v));
        match bad {
            Some(v) => Err(Error::Validation(format!("trace distance {v} outside [0, 1]"))),
            None => Ok(()),
        }
    }
}

pub fn eve_state(chan: &WiretapChannel, ens: &Ensemble, x_n: &[usize], key: &GammaKey) -> Result<ComplexMatrix> {
    SecrecyModel::new(chan, ens)?.eve_state(x_n, key)
}

pub fn delta_star(chan: &WiretapChannel, ens: &Ensemble, codebook: &Codebook, m: usize) -> Result<f64> {
    SecrecyModel::new(chan, ens)?.delta_star(codebook, m)
}

pub fn delta_excess(chan: &WiretapChannel, ens: &Ensemble, x_n: &[usize], key_count: KeyCount, seed: u64) -> Result<f64> {
    Ok(SecrecyModel::new(chan, ens)?.delta_excess(x_n, key_count, seed)?.value)
}
