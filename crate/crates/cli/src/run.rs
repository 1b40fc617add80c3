//! Executes a [`RunConfig`] and writes its CSV and JSON artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use qwiretap_core::codec::maxerror::{bad_row_fixture, spiky_fixture};
use qwiretap_core::codec::secrecy::{derive_seed, CoveringSample, ExcessSample, ZetaProvenance};
use qwiretap_core::codec::{expurgate, index_set_size, permutation_scheme, ErrorMatrix, KeyCount, Provenance, SecrecyModel};
use qwiretap_core::ensembles::build_omega;
use qwiretap_core::regions::{
    baseline_endpoints, beats_time_division, boundary_from_quantities, detect_disconnection, evaluate_beta_family,
    time_division_baseline, uniform_grid, EntropicQuantities, GapReport, Model, RegionSample,
};
use qwiretap_core::Error as CoreError;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Command, ConfigErrors, RunConfig};
use crate::format::{fmt_num, round9};

pub const VERSION: &str = concat!("qwiretap ", env!("CARGO_PKG_VERSION"));

pub const REGION_HEADER: [&str; 10] =
    ["beta", "I_XB", "I_XE", "I_XEG2", "I_G2B_X", "I_G2E_X", "R_SI", "Rp_SI", "R_PE", "Rp_PE"];
pub const COVERING_HEADER: [&str; 5] = ["n", "R0", "seed", "delta_star_mean", "delta_star_max"];
pub const EXCESS_HEADER: [&str; 4] = ["n", "key_count", "seed", "delta_excess_mean"];
pub const PERMUTATION_HEADER: [&str; 10] =
    ["fixture", "rows", "cols", "lambda", "max_error", "bound", "attempts", "seed_used", "input_max", "grand_mean"];

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigErrors),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("guard violation: {0}")]
    Guard(String),
    #[error("numerical validation failed: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Guard(_) => RunError::Guard(e.to_string()),
            CoreError::Dimension(_) | CoreError::InvalidParameter { .. } => RunError::Input(e.to_string()),
            _ => RunError::Numerical(e.to_string()),
        }
    }
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: &'a str,
    exit_code: i32,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    issues: Option<&'a [crate::config::ConfigIssue]>,
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Input(_) | RunError::Io(_) => 2,
            RunError::Guard(_) => 3,
            RunError::Numerical(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Input(_) => "input",
            RunError::Guard(_) => "guard",
            RunError::Numerical(_) => "numerical",
            RunError::Io(_) => "io",
        }
    }

    /// One-line JSON error record.
    pub fn record(&self) -> String {
        let issues = match self {
            RunError::Config(c) => Some(c.0.as_slice()),
            _ => None,
        };
        let rec = ErrorRecord { error: self.kind(), exit_code: self.exit_code(), message: self.to_string(), issues };
        serde_json::to_string(&rec).expect("plain record")
    }
}

/// A file to be written under the output directory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: Vec<u8>,
}

/// Artifacts of a run plus an optional failure detected after they were
/// produced (the artifacts still document the failure).
#[derive(Debug)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub failure: Option<RunError>,
}

fn csv_artifact(name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<Artifact, RunError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| RunError::Io(e.to_string()))?;
    for r in rows {
        w.write_record(r).map_err(|e| RunError::Io(e.to_string()))?;
    }
    let contents = w.into_inner().map_err(|e| RunError::Io(e.to_string()))?;
    Ok(Artifact { name: name.to_string(), contents })
}

#[derive(Serialize)]
struct Summary<'a, T: Serialize> {
    version: &'static str,
    command: Command,
    config: String,
    seeds: Vec<u64>,
    result: &'a T,
}

fn summary_artifact<T: Serialize>(config: &RunConfig, seeds: Vec<u64>, result: &T) -> Artifact {
    let s = Summary { version: VERSION, command: config.command, config: config.to_text(), seeds, result };
    let mut contents = serde_json::to_vec_pretty(&s).expect("summary serializes");
    contents.push(b'\n');
    Artifact { name: "summary.json".into(), contents }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Point {
    pub beta: f64,
    pub r: f64,
    pub r_prime: f64,
}

impl Point {
    fn of(s: &RegionSample) -> Self {
        Self { beta: s.parameter, r: round9(s.rates.r), r_prime: round9(s.rates.r_prime) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeDivision {
    pub r_star: f64,
    pub rp_star: f64,
    pub points: usize,
    /// Interior segment point strictly dominated by a swept rectangle.
    pub beaten_at: Option<(f64, f64)>,
    pub dominating: Option<Point>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelSummary {
    pub model: Model,
    pub frontier: Vec<Point>,
    pub excess_extreme: Point,
    pub guaranteed_extreme: Point,
    pub gap_report: GapReport,
    pub time_division: TimeDivision,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionSummary {
    pub gamma: Option<f64>,
    pub channel: String,
    pub grid_points: usize,
    pub csv: String,
    pub models: Vec<ModelSummary>,
}

fn round_gap(g: GapReport) -> GapReport {
    GapReport { b0: round9(g.b0), b_plus: round9(g.b_plus), gap: round9(g.gap), ..g }
}

fn region(config: &RunConfig, gamma: Option<f64>, csv_name: &str) -> Result<(Artifact, RegionSummary), RunError> {
    let spec = config.channel_spec(gamma);
    let grid = config.beta_grid.values();
    let quantities = evaluate_beta_family(&spec, &grid)?;
    let rows: Vec<Vec<String>> = quantities
        .iter()
        .map(|(beta, q)| {
            let si = q.rates(Model::Interception);
            let pe = q.rates(Model::Passive);
            [*beta, q.i_xb, q.i_xe, q.i_xeg2, q.i_g2b_x, q.i_g2e_x, si.r, si.r_prime, pe.r, pe.r_prime]
                .iter()
                .map(|&v| fmt_num(v))
                .collect()
        })
        .collect();
    let csv = csv_artifact(csv_name, &REGION_HEADER, &rows)?;
    let t_grid = uniform_grid(config.td_points);
    let mut models = Vec::new();
    for model in config.model.models() {
        let boundary = boundary_from_quantities(model, &quantities);
        let gap_report = detect_disconnection(&boundary, config.r_floor);
        let (r_star, rp_star) = baseline_endpoints(&boundary);
        let baseline = time_division_baseline(r_star, rp_star, &t_grid, model)?;
        let win = beats_time_division(&boundary, &baseline);
        models.push(ModelSummary {
            model,
            frontier: boundary.frontier.iter().map(Point::of).collect(),
            excess_extreme: Point::of(boundary.excess_extreme().expect("nonempty grid")),
            guaranteed_extreme: Point::of(boundary.guaranteed_extreme().expect("nonempty grid")),
            gap_report: round_gap(gap_report),
            time_division: TimeDivision {
                r_star: round9(r_star),
                rp_star: round9(rp_star),
                points: config.td_points,
                beaten_at: win.map(|(p, _)| (round9(p.r), round9(p.r_prime))),
                dominating: win.map(|(_, s)| Point::of(s)),
            },
        });
    }
    let label = spec.wiretap()?.label().to_string();
    Ok((csv, RegionSummary { gamma, channel: label, grid_points: grid.len(), csv: csv_name.into(), models }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrendPoint<T: Serialize> {
    pub value: T,
    pub mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoveringSummary {
    pub n: usize,
    pub excess_n: usize,
    pub rate_r: f64,
    pub rate_r_prime: f64,
    pub i_xeg2: f64,
    pub i_g2e_x: f64,
    pub delta_star: Vec<TrendPoint<f64>>,
    pub delta_star_strictly_decreasing: bool,
    pub delta_excess: Vec<TrendPoint<KeyCount>>,
    pub delta_excess_strictly_decreasing: bool,
    pub zeta: Vec<ZetaProvenance>,
    pub repetitions: usize,
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] > w[1])
}

fn covering(config: &RunConfig) -> Result<(Vec<Artifact>, CoveringSummary), RunError> {
    for (key, n) in [("n", config.n), ("excess_n", config.excess_n)] {
        if n > config.max_n {
            return Err(RunError::Guard(format!("{key} = {n} exceeds max_n = {}", config.max_n)));
        }
    }
    for &r0 in &config.r0_grid {
        let words = index_set_size(config.n, config.rate_r)?
            .checked_mul(index_set_size(config.n, r0)?)
            .unwrap_or(usize::MAX);
        if words > config.max_codebook {
            return Err(RunError::Guard(format!(
                "codebook with R = {}, R0 = {r0} at n = {} has {words} words, above max_codebook = {}",
                config.rate_r, config.n, config.max_codebook
            )));
        }
    }
    let chan = config.channel_spec(config.gamma).wiretap()?;
    let ens = config.ensemble_spec().build()?;
    let q = EntropicQuantities::compute(&build_omega(&chan, &ens)?, chan.label())?;
    let model = SecrecyModel::new(&chan, &ens)?;
    let seeds = config.seed_values();

    let cover_jobs: Vec<(f64, u64)> = config.r0_grid.iter().flat_map(|&r0| seeds.iter().map(move |&s| (r0, s))).collect();
    let cover: Vec<CoveringSample> = cover_jobs
        .par_iter()
        .map(|&(r0, s)| model.covering_sample(config.n, config.rate_r, r0, s))
        .collect::<Result<_, _>>()?;
    let excess_jobs: Vec<(KeyCount, u64)> =
        config.key_counts.iter().flat_map(|&k| seeds.iter().map(move |&s| (k, s))).collect();
    let excess: Vec<ExcessSample> = excess_jobs
        .par_iter()
        .map(|&(k, s)| model.excess_sample(config.excess_n, k, config.rate_r_prime, s))
        .collect::<Result<_, _>>()?;

    let cover_rows: Vec<Vec<String>> = cover
        .iter()
        .map(|c| vec![c.n.to_string(), fmt_num(c.r0), c.seed.to_string(), fmt_num(c.mean()), fmt_num(c.max())])
        .collect();
    let excess_rows: Vec<Vec<String>> = excess
        .iter()
        .map(|e| {
            let k = match e.key_count {
                KeyCount::Full => "full".to_string(),
                KeyCount::Sampled(k) => k.to_string(),
            };
            vec![e.n.to_string(), k, e.seed.to_string(), fmt_num(e.mean())]
        })
        .collect();

    let per = seeds.len() as f64;
    let delta_star: Vec<TrendPoint<f64>> = config
        .r0_grid
        .iter()
        .zip(cover.chunks(seeds.len()))
        .map(|(&r0, c)| TrendPoint { value: r0, mean: round9(c.iter().map(CoveringSample::mean).sum::<f64>() / per) })
        .collect();
    let delta_excess: Vec<TrendPoint<KeyCount>> = config
        .key_counts
        .iter()
        .zip(excess.chunks(seeds.len()))
        .map(|(&k, e)| TrendPoint { value: k, mean: round9(e.iter().map(ExcessSample::mean).sum::<f64>() / per) })
        .collect();
    let mut zeta: Vec<ZetaProvenance> = Vec::new();
    for e in &excess {
        if !zeta.contains(&e.zeta) {
            zeta.push(e.zeta);
        }
    }
    let summary = CoveringSummary {
        n: config.n,
        excess_n: config.excess_n,
        rate_r: config.rate_r,
        rate_r_prime: config.rate_r_prime,
        i_xeg2: round9(q.i_xeg2),
        i_g2e_x: round9(q.i_g2e_x),
        delta_star_strictly_decreasing: strictly_decreasing(&delta_star.iter().map(|t| t.mean).collect::<Vec<_>>()),
        delta_star,
        delta_excess_strictly_decreasing: strictly_decreasing(
            &delta_excess.iter().map(|t| t.mean).collect::<Vec<_>>(),
        ),
        delta_excess,
        zeta,
        repetitions: seeds.len(),
    };
    let artifacts = vec![
        csv_artifact("covering.csv", &COVERING_HEADER, &cover_rows)?,
        csv_artifact("excess.csv", &EXCESS_HEADER, &excess_rows)?,
    ];
    Ok((artifacts, summary))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpurgationReport {
    pub source: String,
    pub grand_mean: f64,
    pub removed: usize,
    pub removed_fraction: f64,
    pub markov_bound: f64,
    pub rate_loss: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixtureReport {
    pub fixture: usize,
    pub rows: usize,
    pub cols: usize,
    pub provenance: Provenance,
    pub bound: f64,
    pub max_error: Option<f64>,
    pub attempts: usize,
    pub seed_used: Option<u64>,
    pub best_failed: Option<f64>,
    pub input_max: f64,
    pub grand_mean: f64,
    pub permutations: Vec<Vec<usize>>,
    pub expurgation: Vec<ExpurgationReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PermutationSummary {
    pub lambda: f64,
    pub n: usize,
    pub permutations_per_fixture: usize,
    pub retry_budget: usize,
    pub all_within_bound: bool,
    pub fixtures: Vec<FixtureReport>,
}

pub fn load_error_matrix(path: &Path) -> Result<ErrorMatrix, RunError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
    let mut triples = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
        let parsed = (rec.len() == 3)
            .then(|| Some((rec[0].parse::<usize>().ok()?, rec[1].parse::<usize>().ok()?, rec[2].parse::<f64>().ok()?)))
            .flatten();
        match parsed {
            Some(t) => triples.push(t),
            None if i == 0 => continue,
            None => {
                return Err(RunError::Input(format!("{}: record {} is not `m,m',e`", path.display(), i + 1)));
            }
        }
    }
    Ok(ErrorMatrix::from_triples(&triples, Provenance::Measured)?)
}

fn expurgation_report(source: &str, errors: &ErrorMatrix, lambda: f64, n: usize) -> Result<ExpurgationReport, RunError> {
    let x = expurgate(errors, lambda, n)?;
    Ok(ExpurgationReport {
        source: source.into(),
        grand_mean: round9(errors.grand_mean()),
        removed: x.removed.len(),
        removed_fraction: round9(x.removed_fraction),
        markov_bound: round9(x.markov_bound),
        rate_loss: x.rate_loss.map(round9),
    })
}

fn permutation(config: &RunConfig) -> Result<(Artifact, PermutationSummary), RunError> {
    let seed = config.seed.expect("validated");
    let lambda = config.lambda;
    let matrices: Vec<ErrorMatrix> = match &config.matrix {
        Some(p) => vec![load_error_matrix(p)?],
        None => (0..config.fixtures)
            .map(|i| spiky_fixture(config.fixture_rows, config.fixture_cols, lambda, derive_seed(seed, 2 * i as u64)))
            .collect::<Result<_, _>>()?,
    };
    let reports: Vec<FixtureReport> = matrices
        .par_iter()
        .enumerate()
        .map(|(i, errors)| -> Result<FixtureReport, RunError> {
            let mut expurgation = vec![expurgation_report("input", errors, lambda, config.n)?];
            if errors.grand_mean() > 0.0 {
                let scaled = errors.scaled_to_mean(lambda * lambda)?;
                expurgation.push(expurgation_report("input rescaled to grand mean lambda^2", &scaled, lambda, config.n)?);
            }
            if config.matrix.is_none() {
                let bad = bad_row_fixture(errors.rows(), errors.cols(), lambda, derive_seed(seed, 2 * i as u64 + 1))?;
                expurgation.push(expurgation_report("bad-row fixture at grand mean lambda^2", &bad, lambda, config.n)?);
            }
            let outcome = permutation_scheme(errors, config.n, lambda, derive_seed(seed, (1 << 32) + i as u64), config.retry_budget);
            let mut report = FixtureReport {
                fixture: i,
                rows: errors.rows(),
                cols: errors.cols(),
                provenance: errors.provenance,
                bound: round9(4.0 * lambda),
                max_error: None,
                attempts: config.retry_budget,
                seed_used: None,
                best_failed: None,
                input_max: round9(errors.max()),
                grand_mean: round9(errors.grand_mean()),
                permutations: Vec::new(),
                expurgation,
            };
            match outcome {
                Ok(o) => {
                    report.max_error = Some(round9(o.max_error));
                    report.attempts = o.attempts;
                    report.seed_used = Some(o.seed_used);
                    report.permutations = o.permutations;
                }
                Err(CoreError::BoundNotMet { best, attempts, .. }) => {
                    report.best_failed = Some(round9(best));
                    report.attempts = attempts;
                }
                Err(e) => return Err(e.into()),
            }
            Ok(report)
        })
        .collect::<Result<_, _>>()?;
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.fixture.to_string(),
                r.rows.to_string(),
                r.cols.to_string(),
                fmt_num(lambda),
                r.max_error.map(fmt_num).unwrap_or_else(|| "NA".into()),
                fmt_num(r.bound),
                r.attempts.to_string(),
                r.seed_used.map(|s| s.to_string()).unwrap_or_else(|| "NA".into()),
                fmt_num(r.input_max),
                fmt_num(r.grand_mean),
            ]
        })
        .collect();
    let summary = PermutationSummary {
        lambda,
        n: config.n,
        permutations_per_fixture: config.n * config.n,
        retry_budget: config.retry_budget,
        all_within_bound: reports.iter().all(|r| r.max_error.is_some()),
        fixtures: reports,
    };
    Ok((csv_artifact("permutation.csv", &PERMUTATION_HEADER, &rows)?, summary))
}

/// Runs the configured command entirely in memory.
pub fn execute(config: &RunConfig) -> Result<Outcome, RunError> {
    match config.command {
        Command::Region => {
            let (csv, summary) = region(config, config.gamma, "region.csv")?;
            let json = summary_artifact(config, Vec::new(), &summary);
            Ok(Outcome { artifacts: vec![csv, json], failure: None })
        }
        Command::Sweep => {
            let gammas = config.gamma_grid.clone().unwrap_or_default();
            let results: Vec<(Artifact, RegionSummary)> = gammas
                .iter()
                .map(|&g| region(config, Some(g), &format!("region_gamma_{}.csv", fmt_num(g))))
                .collect::<Result<_, _>>()?;
            let (mut artifacts, summaries): (Vec<Artifact>, Vec<RegionSummary>) = results.into_iter().unzip();
            artifacts.push(summary_artifact(config, Vec::new(), &summaries));
            Ok(Outcome { artifacts, failure: None })
        }
        Command::Covering => {
            let (mut artifacts, summary) = covering(config)?;
            artifacts.push(summary_artifact(config, config.seed_values(), &summary));
            Ok(Outcome { artifacts, failure: None })
        }
        Command::Permutation => {
            let (csv, summary) = permutation(config)?;
            let failed: Vec<String> = summary
                .fixtures
                .iter()
                .filter(|f| f.max_error.is_none())
                .map(|f| format!("fixture {} (best {} after {} attempts)", f.fixture, f.best_failed.unwrap_or(f64::NAN), f.attempts))
                .collect();
            let failure = (!failed.is_empty()).then(|| {
                RunError::Numerical(format!(
                    "max error bound {} not met within the retry budget: {}",
                    fmt_num(4.0 * config.lambda),
                    failed.join(", ")
                ))
            });
            let json = summary_artifact(config, vec![config.seed.expect("validated")], &summary);
            Ok(Outcome { artifacts: vec![csv, json], failure })
        }
    }
}

/// Writes every artifact under `out_dir` in order.
pub fn write_artifacts(out_dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, RunError> {
    fs::create_dir_all(out_dir).map_err(|e| RunError::Io(format!("{}: {e}", out_dir.display())))?;
    artifacts
        .iter()
        .map(|a| {
            let path = out_dir.join(&a.name);
            fs::write(&path, &a.contents).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
            Ok(path)
        })
        .collect()
}

/// Computes, writes, and reports the first failure (artifacts are written
/// even when a post-computation check fails).
pub fn run(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    let outcome = execute(config)?;
    let paths = write_artifacts(out_dir, &outcome.artifacts)?;
    match outcome.failure {
        Some(f) => Err(f),
        None => Ok(paths),
    }
}
