//! Input ensembles `(p_X, φ_{G₁G₂}, F^(x))` and the classical-quantum state
//! `ω_{XG₂BE} = Σ_x p_X(x) |x⟩⟨x| ⊗ (id_{G₂} ⊗ N_{A→BE})(ψˣ)` they induce,
//! where `ψˣ = (F^(x) ⊗ id)φ`.
//!
//! The classical register is never materialized: a [`CqState`] keeps one
//! weighted block per letter on `G₂⊗B⊗E` (or a marginal of it).

use std::f64::consts::FRAC_1_SQRT_2;

use crate::channels::{pauli_x, WiretapChannel};
use crate::error::{Error, Result};
use crate::linalg::{
    partial_trace, re, validate_density, ComplexMatrix, DimensionList, C64, ZERO,
};

const PROBABILITY_TOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-12;
const ENCODER_TOL: f64 = 1e-10;
const BLOCK_TOL: f64 = 1e-9;

/// Quantum registers of a cq block. Blocks always list them in the order
/// `G₂, B, E`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subsystem {
    G2,
    B,
    E,
}

impl Subsystem {
    pub fn name(self) -> &'static str {
        match self {
            Subsystem::G2 => "G2",
            Subsystem::B => "B",
            Subsystem::E => "E",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    p_x: Vec<f64>,
    phi: Vec<C64>,
    g1_dim: usize,
    g2_dim: usize,
    encoders: Vec<ComplexMatrix>,
    label: String,
}

impl Ensemble {
    /// `phi` is a vector on `G₁⊗G₂` (G₁ index major); each encoder maps
    /// `G₁` to `A`.
    pub fn new(
        p_x: Vec<f64>,
        phi: Vec<C64>,
        g1_dim: usize,
        g2_dim: usize,
        encoders: Vec<ComplexMatrix>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if p_x.is_empty() {
            return Err(Error::param("p_x", "empty alphabet"));
        }
        if p_x.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::param("p_x", "entries must be finite and nonnegative"));
        }
        let total: f64 = p_x.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_TOL {
            return Err(Error::param("p_x", format!("entries sum to {total}, not 1")));
        }
        if g1_dim == 0 || g2_dim == 0 || phi.len() != g1_dim * g2_dim {
            return Err(Error::Dimension(format!(
                "phi has {} amplitudes, G1 x G2 is {g1_dim} x {g2_dim}",
                phi.len()
            )));
        }
        let norm = phi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::param("phi", format!("norm {norm} is not 1")));
        }
        if encoders.len() != p_x.len() {
            return Err(Error::param(
                "encoders",
                format!("{} encoders for an alphabet of size {}", encoders.len(), p_x.len()),
            ));
        }
        let d_a = encoders[0].rows();
        for (x, f) in encoders.iter().enumerate() {
            if f.cols() != g1_dim || f.rows() != d_a {
                return Err(Error::Dimension(format!(
                    "encoder {x} is {}x{}, expected {d_a}x{g1_dim}",
                    f.rows(),
                    f.cols()
                )));
            }
            if !f.is_isometry(ENCODER_TOL) {
                return Err(Error::param("encoders", format!("encoder {x} is not an isometry")));
            }
        }
        Ok(Self { p_x, phi, g1_dim, g2_dim, encoders, label: label.into() })
    }

    /// Uniform bit-flip encoding of the `β`-family of partially entangled
    /// pairs (see [`build_phi`]).
    pub fn bitflip_family(beta: f64) -> Result<Self> {
        Self::new(vec![0.5, 0.5], build_phi(beta)?, 2, 2, bitflip_encoders(), format!("bitflip(beta={beta})"))
    }

    pub fn p_x(&self) -> &[f64] {
        &self.p_x
    }

    pub fn phi(&self) -> &[C64] {
        &self.phi
    }

    pub fn encoders(&self) -> &[ComplexMatrix] {
        &self.encoders
    }

    pub fn alphabet_size(&self) -> usize {
        self.p_x.len()
    }

    pub fn g1_dim(&self) -> usize {
        self.g1_dim
    }

    pub fn g2_dim(&self) -> usize {
        self.g2_dim
    }

    pub fn a_dim(&self) -> usize {
        self.encoders[0].rows()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Shannon entropy of `p_X` in bits.
    pub fn letter_entropy(&self) -> f64 {
        self.p_x.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
    }

    /// `|ψˣ⟩ = (F^(x) ⊗ 1)|φ⟩` on `A⊗G₂` (A index major).
    pub fn psi_ag2(&self, x: usize) -> Result<Vec<C64>> {
        let f = self
            .encoders
            .get(x)
            .ok_or_else(|| Error::param("x", format!("letter {x} outside alphabet of size {}", self.p_x.len())))?;
        let d_a = f.rows();
        let mut psi = vec![ZERO; d_a * self.g2_dim];
        for a in 0..d_a {
            for g1 in 0..self.g1_dim {
                let fa = f[(a, g1)];
                if fa == ZERO {
                    continue;
                }
                for g2 in 0..self.g2_dim {
                    psi[a * self.g2_dim + g2] += fa * self.phi[g1 * self.g2_dim + g2];
                }
            }
        }
        Ok(psi)
    }

    /// Same letter with the encoder images relabelled, i.e. `F^(x) ↦ F^(σ(x))`
    /// and `p(x) ↦ p(σ(x))`.
    pub fn relabelled(&self, sigma: &[usize]) -> Result<Self> {
        let mut sorted = sigma.to_vec();
        sorted.sort_unstable();
        if sorted != (0..self.p_x.len()).collect::<Vec<_>>() {
            return Err(Error::param("sigma", "not a permutation of the alphabet"));
        }
        Self::new(
            sigma.iter().map(|&s| self.p_x[s]).collect(),
            self.phi.clone(),
            self.g1_dim,
            self.g2_dim,
            sigma.iter().map(|&s| self.encoders[s].clone()).collect(),
            format!("{} relabelled", self.label),
        )
    }
}

/// `(|00⟩ + |11⟩)/√2`.
pub fn maximally_entangled_pair() -> Vec<C64> {
    vec![re(FRAC_1_SQRT_2), ZERO, ZERO, re(FRAC_1_SQRT_2)]
}

/// `|u_β⟩ = √(1−β)|00⟩ + √β|Φ⟩`, not normalized.
pub fn u_beta(beta: f64) -> Result<Vec<C64>> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::param("beta", format!("{beta} is outside [0, 1]")));
    }
    let mut u: Vec<C64> = maximally_entangled_pair().into_iter().map(|z| z * beta.sqrt()).collect();
    u[0] += re((1.0 - beta).sqrt());
    Ok(u)
}

/// `|u_β⟩ / ‖u_β‖` on `G₁⊗G₂`.
pub fn build_phi(beta: f64) -> Result<Vec<C64>> {
    let u = u_beta(beta)?;
    let norm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Ok(u.into_iter().map(|z| z / norm).collect())
}

/// `{F^(0) = I, F^(1) = Σ_X}`.
pub fn bitflip_encoders() -> Vec<ComplexMatrix> {
    vec![ComplexMatrix::identity(2), pauli_x()]
}

/// Text-configurable ensemble description.
#[derive(Clone, Debug, PartialEq)]
pub enum EnsembleSpec {
    BitFlip { beta: f64 },
    Custom { p_x: Vec<f64>, phi: Vec<C64>, g1_dim: usize, g2_dim: usize, encoders: Vec<ComplexMatrix> },
}

impl EnsembleSpec {
    pub fn build(&self) -> Result<Ensemble> {
        match self {
            EnsembleSpec::BitFlip { beta } => Ensemble::bitflip_family(*beta),
            EnsembleSpec::Custom { p_x, phi, g1_dim, g2_dim, encoders } => {
                Ensemble::new(p_x.clone(), phi.clone(), *g1_dim, *g2_dim, encoders.clone(), "custom")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CqState {
    blocks: Vec<(f64, ComplexMatrix)>,
    dims: DimensionList,
    labels: Vec<Subsystem>,
}

impl CqState {
    pub fn new(blocks: Vec<(f64, ComplexMatrix)>, dims: DimensionList, labels: Vec<Subsystem>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::param("blocks", "a cq state needs at least one block"));
        }
        if labels.len() != dims.len() || labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Dimension(format!("labels {labels:?} do not match dims {:?}", dims.as_slice())));
        }
        let total: f64 = blocks.iter().map(|(p, _)| p).sum();
        if blocks.iter().any(|(p, _)| *p < 0.0) || (total - 1.0).abs() > PROBABILITY_TOL {
            return Err(Error::param("p_x", format!("block weights sum to {total}")));
        }
        for (x, (_, rho)) in blocks.iter().enumerate() {
            if rho.rows() != dims.total() {
                return Err(Error::Dimension(format!("block {x} has dimension {}", rho.rows())));
            }
            validate_density(rho, BLOCK_TOL)?
                .into_result()
                .map_err(|e| Error::Validation(format!("block {x}: {e}")))?;
        }
        Ok(Self { blocks, dims, labels })
    }

    pub fn blocks(&self) -> &[(f64, ComplexMatrix)] {
        &self.blocks
    }

    pub fn dims(&self) -> &DimensionList {
        &self.dims
    }

    pub fn labels(&self) -> &[Subsystem] {
        &self.labels
    }

    pub fn weights(&self) -> Vec<f64> {
        self.blocks.iter().map(|(p, _)| *p).collect()
    }

    /// `Σ_x p_x ρˣ`.
    pub fn average(&self) -> ComplexMatrix {
        let d = self.dims.total();
        let mut avg = ComplexMatrix::zeros(d, d);
        for (p, rho) in &self.blocks {
            avg.add_scaled(rho, *p).expect("blocks share a shape");
        }
        avg
    }

    /// Explicit `Σ_x p_x |x⟩⟨x| ⊗ ρˣ` with the classical register first.
    pub fn to_block_diagonal(&self) -> (ComplexMatrix, DimensionList) {
        let d = self.dims.total();
        let nx = self.blocks.len();
        let mut full = ComplexMatrix::zeros(nx * d, nx * d);
        for (x, (p, rho)) in self.blocks.iter().enumerate() {
            for i in 0..d {
                for j in 0..d {
                    full[(x * d + i, x * d + j)] = rho[(i, j)] * *p;
                }
            }
        }
        let mut dims = vec![nx];
        dims.extend_from_slice(self.dims.as_slice());
        (full, DimensionList::new(dims).expect("positive dimensions"))
    }

    /// Indices of the requested registers within this state's block layout.
    pub fn positions(&self, subsystems: &[Subsystem]) -> Result<Vec<usize>> {
        subsystems
            .iter()
            .map(|s| {
                self.labels
                    .iter()
                    .position(|l| l == s)
                    .ok_or_else(|| Error::param("subsystem", format!("{} is not present in this state", s.name())))
            })
            .collect()
    }
}

/// `ω_{XG₂BE}`: one pure block per letter on `G₂⊗B⊗E`.
pub fn build_omega(chan: &WiretapChannel, ens: &Ensemble) -> Result<CqState> {
    if ens.a_dim() != chan.d_a() {
        return Err(Error::Dimension(format!(
            "encoders output dimension {} but channel input is {}",
            ens.a_dim(),
            chan.d_a()
        )));
    }
    let d_a = ens.a_dim();
    let dims_g2a = DimensionList::new(vec![ens.g2_dim, d_a])?;
    let mut blocks = Vec::with_capacity(ens.alphabet_size());
    for (x, &p) in ens.p_x.iter().enumerate() {
        let psi = ens.psi_ag2(x)?;
        let mut v = vec![ZERO; psi.len()];
        for a in 0..d_a {
            for g2 in 0..ens.g2_dim {
                v[g2 * d_a + a] = psi[a * ens.g2_dim + g2];
            }
        }
        let (out, _) = chan.apply_to_vector(&v, &dims_g2a, 1)?;
        blocks.push((p, ComplexMatrix::projector(&out)));
    }
    let dims = DimensionList::new(vec![ens.g2_dim, chan.d_b(), chan.d_e()])?;
    CqState::new(blocks, dims, vec![Subsystem::G2, Subsystem::B, Subsystem::E])
}

/// Per-block partial trace onto `keep`; weights are unchanged.
pub fn marginal(cq: &CqState, keep: &[Subsystem]) -> Result<CqState> {
    if keep.is_empty() {
        return Err(Error::param("keep", "empty subsystem set"));
    }
    let mut labels = keep.to_vec();
    labels.sort_unstable();
    labels.dedup();
    let positions = cq.positions(&labels)?;
    let blocks = cq
        .blocks
        .iter()
        .map(|(p, rho)| Ok((*p, partial_trace(rho, &cq.dims, &positions)?)))
        .collect::<Result<Vec<_>>>()?;
    let dims = DimensionList::new(cq.dims.select(&positions))?;
    Ok(CqState { blocks, dims, labels })
}
