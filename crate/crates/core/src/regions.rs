//! Entropic quantities of the cq state `ω_{XG₂BE}`, the two achievable
//! rate-pair corners (interception and passive eavesdropper), parameter
//! sweeps over the `β`-family, Pareto frontiers of the resulting union of
//! rectangles, gap (disconnection) reports and time-division baselines.
//!
//! No convexification is applied anywhere: a region is the plain union of
//! rectangles `{(R, R') : R ≤ r, R' ≤ r'}` over the sampled ensembles.

use rayon::prelude::*;
use serde::Serialize;

use crate::channels::ChannelSpec;
use crate::ensembles::{build_omega, marginal, CqState, Ensemble, Subsystem};
use crate::error::{Error, Result};
use crate::linalg::{partial_trace, von_neumann_entropy};

/// Slack for information inequalities and negative-dust clipping.
pub const INFO_TOL: f64 = 1e-9;
pub const DEFAULT_GRID_POINTS: usize = 1001;
pub const DEFAULT_R_FLOOR: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Interception,
    Passive,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Interception => "interception",
            Model::Passive => "passive",
        }
    }
}

fn clip(x: f64) -> f64 {
    x.max(0.0)
}

/// `I(X;S)_ω = S(Σ p_x ρˣ_S) − Σ p_x S(ρˣ_S)`.
pub fn holevo_information(cq: &CqState, s: &[Subsystem]) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::param("subsystems", "empty subsystem set"));
    }
    let m = marginal(cq, s)?;
    let mut conditional = 0.0;
    for (p, rho) in m.blocks() {
        if *p > 0.0 {
            conditional += p * von_neumann_entropy(rho)?;
        }
    }
    Ok(clip(von_neumann_entropy(&m.average())? - conditional))
}

/// `I(S;T|X)_ω = Σ p_x [S(ρˣ_S) + S(ρˣ_T) − S(ρˣ_{ST})]`. Purity of the
/// blocks is not assumed.
pub fn conditional_mutual_information(cq: &CqState, s: &[Subsystem], t: &[Subsystem]) -> Result<f64> {
    if s.is_empty() || t.is_empty() {
        return Err(Error::param("subsystems", "empty subsystem set"));
    }
    if s.iter().any(|x| t.contains(x)) {
        return Err(Error::param("subsystems", "S and T overlap"));
    }
    let mut joint: Vec<Subsystem> = s.iter().chain(t).copied().collect();
    joint.sort_unstable();
    joint.dedup();
    let st = marginal(cq, &joint)?;
    let s_pos = st.positions(s)?;
    let t_pos = st.positions(t)?;
    let mut total = 0.0;
    for (p, rho) in st.blocks() {
        if *p == 0.0 {
            continue;
        }
        let rho_s = partial_trace(rho, st.dims(), &s_pos)?;
        let rho_t = partial_trace(rho, st.dims(), &t_pos)?;
        total += p * (von_neumann_entropy(&rho_s)? + von_neumann_entropy(&rho_t)? - von_neumann_entropy(rho)?);
    }
    Ok(clip(total))
}

/// The five information quantities entering both rate regions, in bits.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropicQuantities {
    pub i_xb: f64,
    pub i_xe: f64,
    pub i_xeg2: f64,
    pub i_g2b_x: f64,
    pub i_g2e_x: f64,
    /// `H(p_X)`, the ceiling for every `I(X;·)`.
    pub letter_entropy: f64,
    pub provenance: String,
}

impl EntropicQuantities {
    pub fn compute(cq: &CqState, provenance: impl Into<String>) -> Result<Self> {
        use Subsystem::{B, E, G2};
        let weights = cq.weights();
        let letter_entropy = weights.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum();
        let q = Self {
            i_xb: holevo_information(cq, &[B])?,
            i_xe: holevo_information(cq, &[E])?,
            i_xeg2: holevo_information(cq, &[G2, E])?,
            i_g2b_x: conditional_mutual_information(cq, &[G2], &[B])?,
            i_g2e_x: conditional_mutual_information(cq, &[G2], &[E])?,
            letter_entropy,
            provenance: provenance.into(),
        };
        q.check()?;
        Ok(q)
    }

    fn check(&self) -> Result<()> {
        if self.i_xe > self.i_xeg2 + INFO_TOL {
            return Err(Error::Validation(format!(
                "I(X;E) = {} exceeds I(X;EG2) = {} ({})",
                self.i_xe, self.i_xeg2, self.provenance
            )));
        }
        for (name, v) in [("I(X;B)", self.i_xb), ("I(X;E)", self.i_xe), ("I(X;EG2)", self.i_xeg2)] {
            if v > self.letter_entropy + INFO_TOL {
                return Err(Error::Validation(format!(
                    "{name} = {v} exceeds H(X) = {} ({})",
                    self.letter_entropy, self.provenance
                )));
            }
        }
        Ok(())
    }

    /// Guaranteed-rate difference before `[·]₊` clipping.
    pub fn guaranteed_margin(&self, model: Model) -> f64 {
        match model {
            Model::Interception => self.i_xb - self.i_xeg2,
            Model::Passive => self.i_xb - self.i_xe,
        }
    }

    /// Excess-rate bound before clipping.
    pub fn excess_margin(&self, model: Model) -> f64 {
        match model {
            Model::Interception => self.i_g2b_x - self.i_g2e_x,
            Model::Passive => self.i_g2b_x,
        }
    }

    pub fn rates(&self, model: Model) -> RatePair {
        RatePair { r: clip(self.guaranteed_margin(model)), r_prime: clip(self.excess_margin(model)), model }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatePair {
    pub r: f64,
    pub r_prime: f64,
    pub model: Model,
}

impl RatePair {
    /// Whether the rectangle with this corner contains `(r, r_prime)`.
    pub fn covers(&self, r: f64, r_prime: f64) -> bool {
        r <= self.r && r_prime <= self.r_prime
    }

    /// Both coordinates strictly larger than the given point.
    pub fn strictly_dominates(&self, r: f64, r_prime: f64) -> bool {
        self.r > r && self.r_prime > r_prime
    }
}

/// Interception corner: `([I(X;B) − I(X;EG₂)]₊, [I(G₂;B|X) − I(G₂;E|X)]₊)`.
pub fn rsi_rates(eq: &EntropicQuantities) -> RatePair {
    eq.rates(Model::Interception)
}

/// Passive corner: `([I(X;B) − I(X;E)]₊, I(G₂;B|X))`.
pub fn rpe_rates(eq: &EntropicQuantities) -> RatePair {
    eq.rates(Model::Passive)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionSample {
    pub parameter: f64,
    pub rates: RatePair,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapReport {
    /// Largest excess rate over all samples.
    pub b0: f64,
    /// Largest excess rate among samples with guaranteed rate at least `r_floor`.
    pub b_plus: f64,
    pub gap: f64,
    pub r_floor: f64,
    /// False when no sample reaches the floor (then `b_plus` is 0).
    pub floor_met: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionBoundary {
    pub model: Model,
    pub samples: Vec<RegionSample>,
    pub frontier: Vec<RegionSample>,
    pub gap_report: Option<GapReport>,
}

impl RegionBoundary {
    pub fn from_samples(model: Model, samples: Vec<RegionSample>) -> Self {
        let frontier = pareto_frontier(&samples);
        Self { model, samples, frontier, gap_report: None }
    }

    /// Whether the union of sampled rectangles contains the point.
    pub fn covers(&self, r: f64, r_prime: f64) -> bool {
        self.samples.iter().any(|s| s.rates.covers(r, r_prime))
    }

    /// Sample with the largest excess rate (first on ties).
    pub fn excess_extreme(&self) -> Option<&RegionSample> {
        self.samples.iter().fold(None, |best: Option<&RegionSample>, s| match best {
            Some(b) if b.rates.r_prime >= s.rates.r_prime => Some(b),
            _ => Some(s),
        })
    }

    /// Sample with the largest guaranteed rate (first on ties).
    pub fn guaranteed_extreme(&self) -> Option<&RegionSample> {
        self.samples.iter().fold(None, |best: Option<&RegionSample>, s| match best {
            Some(b) if b.rates.r >= s.rates.r => Some(b),
            _ => Some(s),
        })
    }
}

/// Pareto-maximal corners of a union of rectangles, ordered by decreasing `r`.
pub fn pareto_frontier(samples: &[RegionSample]) -> Vec<RegionSample> {
    let mut sorted: Vec<&RegionSample> = samples.iter().collect();
    sorted.sort_by(|a, b| {
        b.rates
            .r
            .total_cmp(&a.rates.r)
            .then(b.rates.r_prime.total_cmp(&a.rates.r_prime))
            .then(a.parameter.total_cmp(&b.parameter))
    });
    let mut frontier: Vec<RegionSample> = Vec::new();
    let mut best_rp = f64::NEG_INFINITY;
    for s in sorted {
        if s.rates.r_prime > best_rp {
            best_rp = s.rates.r_prime;
            frontier.push(s.clone());
        }
    }
    frontier
}

/// `n` evenly spaced points covering `[0, 1]`.
pub fn uniform_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

pub fn default_beta_grid() -> Vec<f64> {
    uniform_grid(DEFAULT_GRID_POINTS)
}

fn check_grid(name: &'static str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::param(name, "empty grid"));
    }
    if let Some(b) = grid.iter().find(|b| !(0.0..=1.0).contains(*b)) {
        return Err(Error::param(name, format!("value {b} outside [0, 1]")));
    }
    Ok(())
}

/// Entropic quantities of the bit-flip `β`-family for every grid value, in
/// grid order. Grid points are evaluated in parallel.
pub fn evaluate_beta_family(channel: &ChannelSpec, beta_grid: &[f64]) -> Result<Vec<(f64, EntropicQuantities)>> {
    check_grid("beta", beta_grid)?;
    let chan = channel.wiretap()?;
    beta_grid
        .par_iter()
        .map(|&beta| {
            let ens = Ensemble::bitflip_family(beta)?;
            let cq = build_omega(&chan, &ens)?;
            let q = EntropicQuantities::compute(&cq, format!("{}; beta={beta}", chan.label()))?;
            Ok((beta, q))
        })
        .collect()
}

pub fn boundary_from_quantities(model: Model, quantities: &[(f64, EntropicQuantities)]) -> RegionBoundary {
    let samples = quantities
        .iter()
        .map(|(beta, q)| RegionSample { parameter: *beta, rates: q.rates(model) })
        .collect();
    RegionBoundary::from_samples(model, samples)
}

/// One rate pair per `β`, plus the Pareto frontier of their rectangles.
pub fn sweep_region(channel: &ChannelSpec, model: Model, beta_grid: &[f64]) -> Result<RegionBoundary> {
    Ok(boundary_from_quantities(model, &evaluate_beta_family(channel, beta_grid)?))
}

/// `B⁰ = max r'`, `B⁺ = max r'` over samples with `r ≥ r_floor`, gap `B⁰ − B⁺`.
pub fn detect_disconnection(boundary: &RegionBoundary, r_floor: f64) -> GapReport {
    let b0 = boundary.samples.iter().map(|s| s.rates.r_prime).fold(0.0, f64::max);
    let above: Vec<f64> =
        boundary.samples.iter().filter(|s| s.rates.r >= r_floor).map(|s| s.rates.r_prime).collect();
    let floor_met = !above.is_empty();
    let b_plus = above.into_iter().fold(0.0, f64::max);
    let gap = if boundary.samples.len() <= 1 { 0.0 } else { b0 - b_plus };
    GapReport { b0, b_plus, gap, r_floor, floor_met }
}

/// Segment `{(t·r*, (1−t)·r'*) : t ∈ t_grid}` between the two extreme strategies.
pub fn time_division_baseline(r_star: f64, rp_star: f64, t_grid: &[f64], model: Model) -> Result<Vec<RatePair>> {
    if !(r_star >= 0.0) || !(rp_star >= 0.0) {
        return Err(Error::param("baseline", "extreme rates must be nonnegative"));
    }
    check_grid("t", t_grid)?;
    Ok(t_grid.iter().map(|&t| RatePair { r: t * r_star, r_prime: (1.0 - t) * rp_star, model }).collect())
}

/// Time-division endpoints `(r*, r'*)`: the largest guaranteed and excess
/// bounds reached anywhere in the sweep.
pub fn baseline_endpoints(boundary: &RegionBoundary) -> (f64, f64) {
    let r_star = boundary.samples.iter().map(|s| s.rates.r).fold(0.0, f64::max);
    let rp_star = boundary.samples.iter().map(|s| s.rates.r_prime).fold(0.0, f64::max);
    (r_star, rp_star)
}

/// First interior baseline point strictly dominated by a sampled corner,
/// returned as `(baseline point, dominating sample)`.
pub fn beats_time_division<'a>(
    boundary: &'a RegionBoundary,
    baseline: &[RatePair],
) -> Option<(RatePair, &'a RegionSample)> {
    let n = baseline.len();
    baseline.iter().enumerate().filter(|(i, _)| *i != 0 && *i + 1 != n).find_map(|(_, p)| {
        boundary.samples.iter().find(|s| s.rates.strictly_dominates(p.r, p.r_prime)).map(|s| (*p, s))
    })
}
