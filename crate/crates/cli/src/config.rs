//! Line-oriented `key = value` run configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use qwiretap_core::channels::ChannelSpec;
use qwiretap_core::codec::KeyCount;
use qwiretap_core::ensembles::EnsembleSpec;
use qwiretap_core::linalg::{ComplexMatrix, C64};
use qwiretap_core::regions::{uniform_grid, Model, DEFAULT_GRID_POINTS, DEFAULT_R_FLOOR};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Region,
    Sweep,
    Covering,
    Permutation,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Region => "region",
            Command::Sweep => "sweep",
            Command::Covering => "covering",
            Command::Permutation => "permutation",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "region" => Command::Region,
            "sweep" => Command::Sweep,
            "covering" => Command::Covering,
            "permutation" => Command::Permutation,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelSelection {
    Interception,
    Passive,
    Both,
}

impl ModelSelection {
    pub fn models(self) -> Vec<Model> {
        match self {
            ModelSelection::Interception => vec![Model::Interception],
            ModelSelection::Passive => vec![Model::Passive],
            ModelSelection::Both => vec![Model::Interception, Model::Passive],
        }
    }

    fn name(self) -> &'static str {
        match self {
            ModelSelection::Interception => "interception",
            ModelSelection::Passive => "passive",
            ModelSelection::Both => "both",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ChannelChoice {
    AmplitudeDamping,
    Kraus(Vec<ComplexMatrix>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum EnsembleChoice {
    BitFlip,
    Custom { p_x: Vec<f64>, phi: Vec<C64>, phi_dims: (usize, usize), encoders: Vec<ComplexMatrix> },
}

/// `uniform:<points>` or an explicit list.
#[derive(Clone, Debug, PartialEq)]
pub enum Grid {
    Uniform(usize),
    List(Vec<f64>),
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::Uniform(n) => uniform_grid(*n),
            Grid::List(v) => v.clone(),
        }
    }

    fn to_text(&self) -> String {
        match self {
            Grid::Uniform(n) => format!("uniform:{n}"),
            Grid::List(v) => join(v),
        }
    }
}

/// `a..b` (half open) or an explicit list.
#[derive(Clone, Debug, PartialEq)]
pub enum Seeds {
    Range(u64, u64),
    List(Vec<u64>),
}

impl Seeds {
    pub fn values(&self) -> Vec<u64> {
        match self {
            Seeds::Range(a, b) => (*a..*b).collect(),
            Seeds::List(v) => v.clone(),
        }
    }

    fn to_text(&self) -> String {
        match self {
            Seeds::Range(a, b) => format!("{a}..{b}"),
            Seeds::List(v) => join(v),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub channel: ChannelChoice,
    pub gamma: Option<f64>,
    pub gamma_grid: Option<Vec<f64>>,
    pub ensemble: EnsembleChoice,
    pub beta: Option<f64>,
    pub beta_grid: Grid,
    pub model: ModelSelection,
    pub r_floor: f64,
    pub td_points: usize,
    pub n: usize,
    pub rate_r: f64,
    pub r0_grid: Vec<f64>,
    pub seeds: Option<Seeds>,
    pub key_counts: Vec<KeyCount>,
    pub excess_n: usize,
    pub rate_r_prime: f64,
    pub lambda: f64,
    pub matrix: Option<PathBuf>,
    pub fixtures: usize,
    pub fixture_rows: usize,
    pub fixture_cols: usize,
    pub seed: Option<u64>,
    pub retry_budget: usize,
    pub max_n: usize,
    pub max_codebook: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConfigIssue {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: `{}`: {}", self.key, self.message),
            None => write!(f, "`{}`: {}", self.key, self.message),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{} configuration error(s): {}", .0.len(), .0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "))]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

const KNOWN_KEYS: &[&str] = &[
    "command",
    "channel",
    "gamma",
    "gamma_grid",
    "ensemble",
    "beta",
    "beta_grid",
    "model",
    "r_floor",
    "td_points",
    "n",
    "rate_r",
    "r0_grid",
    "seeds",
    "key_counts",
    "excess_n",
    "rate_r_prime",
    "lambda",
    "matrix",
    "fixtures",
    "fixture_rows",
    "fixture_cols",
    "seed",
    "retry_budget",
    "max_n",
    "max_codebook",
    "p_x",
    "phi",
    "phi_dims",
];

fn indexed_key(key: &str, prefix: &str) -> Option<usize> {
    key.strip_prefix(prefix)?.parse().ok()
}

fn is_known(key: &str) -> bool {
    KNOWN_KEYS.contains(&key) || indexed_key(key, "kraus_").is_some() || indexed_key(key, "encoder_").is_some()
}

struct Reader {
    entries: BTreeMap<String, (usize, String)>,
    issues: Vec<ConfigIssue>,
}

impl Reader {
    fn issue(&mut self, key: &str, message: impl Into<String>) {
        let line = self.entries.get(key).map(|(l, _)| *l);
        self.issues.push(ConfigIssue { line, key: key.to_string(), message: message.into() });
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    fn parsed<T>(&mut self, key: &str, what: &str, f: impl Fn(&str) -> Option<T>) -> Option<T> {
        let raw = self.raw(key)?.to_string();
        match f(&raw) {
            Some(v) => Some(v),
            None => {
                self.issue(key, format!("expected {what}, got `{raw}`"));
                None
            }
        }
    }

    fn real(&mut self, key: &str, lo: f64, hi: f64) -> Option<f64> {
        let v = self.parsed(key, "a real number", parse_real)?;
        if !(lo..=hi).contains(&v) {
            self.issue(key, format!("value {v} outside [{lo}, {hi}]"));
            return None;
        }
        Some(v)
    }

    fn count(&mut self, key: &str, lo: usize, hi: usize) -> Option<usize> {
        let v = self.parsed(key, "a nonnegative integer", |s| s.parse::<usize>().ok())?;
        if !(lo..=hi).contains(&v) {
            self.issue(key, format!("value {v} outside [{lo}, {hi}]"));
            return None;
        }
        Some(v)
    }

    fn reals(&mut self, key: &str, lo: f64, hi: f64) -> Option<Vec<f64>> {
        let v = self.parsed(key, "a comma-separated list of reals", |s| parse_list(s, parse_real))?;
        if v.is_empty() {
            self.issue(key, "empty list");
            return None;
        }
        if let Some(x) = v.iter().find(|x| !(lo..=hi).contains(*x)) {
            self.issue(key, format!("value {x} outside [{lo}, {hi}]"));
            return None;
        }
        Some(v)
    }

    fn matrix(&mut self, key: &str) -> Option<ComplexMatrix> {
        self.parsed(key, "a matrix `a,b|c,d` with complex entries `re` or `re:im`", parse_matrix)
    }

    fn indexed_matrices(&mut self, prefix: &str) -> Vec<ComplexMatrix> {
        let mut indices: Vec<usize> = self.entries.keys().filter_map(|k| indexed_key(k, prefix)).collect();
        indices.sort_unstable();
        let mut out = Vec::new();
        for (expected, i) in indices.into_iter().enumerate() {
            let key = format!("{prefix}{i}");
            if i != expected {
                self.issue(&key, format!("indices must run 0, 1, ... without gaps (missing {prefix}{expected})"));
                break;
            }
            if let Some(m) = self.matrix(&key) {
                out.push(m);
            }
        }
        out
    }
}

fn parse_real(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_complex(s: &str) -> Option<C64> {
    match s.trim().split_once(':') {
        Some((re, im)) => Some(C64::new(parse_real(re)?, parse_real(im)?)),
        None => Some(C64::new(parse_real(s)?, 0.0)),
    }
}

fn parse_list<T>(s: &str, f: impl Fn(&str) -> Option<T>) -> Option<Vec<T>> {
    if s.trim().is_empty() {
        return Some(Vec::new());
    }
    s.split(',').map(|t| f(t.trim())).collect()
}

fn parse_matrix(s: &str) -> Option<ComplexMatrix> {
    let rows: Vec<Vec<C64>> = s.split('|').map(|r| parse_list(r, parse_complex)).collect::<Option<_>>()?;
    let cols = rows.first()?.len();
    if cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return None;
    }
    ComplexMatrix::from_vec(rows.len(), cols, rows.into_iter().flatten().collect()).ok()
}

fn fmt_complex(z: &C64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}:{}", z.re, z.im)
    }
}

fn fmt_matrix(m: &ComplexMatrix) -> String {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| fmt_complex(&m[(i, j)])).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join("|")
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_grid(s: &str) -> Option<Grid> {
    match s.trim().strip_prefix("uniform:") {
        Some(n) => n.trim().parse().ok().map(Grid::Uniform),
        None => parse_list(s, parse_real).map(Grid::List),
    }
}

fn parse_seeds(s: &str) -> Option<Seeds> {
    match s.split_once("..") {
        Some((a, b)) => Some(Seeds::Range(a.trim().parse().ok()?, b.trim().parse().ok()?)),
        None => parse_list(s, |t| t.parse().ok()).map(Seeds::List),
    }
}

fn parse_key_count(s: &str) -> Option<KeyCount> {
    if s == "full" {
        Some(KeyCount::Full)
    } else {
        s.parse().ok().map(KeyCount::Sampled)
    }
}

fn fmt_key_count(k: &KeyCount) -> String {
    match k {
        KeyCount::Full => "full".into(),
        KeyCount::Sampled(k) => k.to_string(),
    }
}

/// Splits text into `(line number, key, value)` entries.
fn tokenize(text: &str) -> (Vec<(usize, String, String)>, Vec<ConfigIssue>) {
    let mut entries = Vec::new();
    let mut issues = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() => entries.push((i + 1, k.trim().to_string(), v.trim().to_string())),
            _ => issues.push(ConfigIssue {
                line: Some(i + 1),
                key: line.to_string(),
                message: "expected `key = value`".into(),
            }),
        }
    }
    (entries, issues)
}

/// Parses and validates a configuration, collecting every problem found.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    parse_config_for(text, None)
}

/// As [`parse_config`], with `command` supplied by the caller when the text
/// does not name one (a mismatch is an error).
pub fn parse_config_for(text: &str, command: Option<Command>) -> Result<RunConfig, ConfigErrors> {
    let (tokens, mut issues) = tokenize(text);
    let mut entries = BTreeMap::new();
    for (line, key, value) in tokens {
        if !is_known(&key) {
            issues.push(ConfigIssue { line: Some(line), key, message: "unknown key".into() });
        } else if let Some((first, _)) = entries.get(&key) {
            issues.push(ConfigIssue { line: Some(line), key, message: format!("duplicate key (first set on line {first})") });
        } else {
            entries.insert(key, (line, value));
        }
    }
    let mut r = Reader { entries, issues };

    let named = r.parsed("command", "region, sweep, covering or permutation", Command::parse);
    let command = match (named, command) {
        (Some(a), Some(b)) if a != b => {
            r.issue("command", format!("configuration is for `{}` but `{}` was requested", a.name(), b.name()));
            None
        }
        (Some(a), _) => Some(a),
        (None, Some(b)) if r.raw("command").is_none() => Some(b),
        (None, _) => {
            if r.raw("command").is_none() {
                r.issue("command", "missing");
            }
            None
        }
    };

    let channel = match r.raw("channel").unwrap_or("amplitude_damping") {
        "amplitude_damping" => Some(ChannelChoice::AmplitudeDamping),
        "kraus" => {
            let ops = r.indexed_matrices("kraus_");
            if ops.is_empty() {
                r.issue("channel", "a kraus channel needs kraus_0, kraus_1, ...");
                None
            } else {
                Some(ChannelChoice::Kraus(ops))
            }
        }
        other => {
            let other = other.to_string();
            r.issue("channel", format!("unknown channel `{other}` (amplitude_damping or kraus)"));
            None
        }
    };
    let gamma = r.real("gamma", 0.0, 1.0);
    let gamma_grid = r.reals("gamma_grid", 0.0, 1.0);

    let ensemble = match r.raw("ensemble").unwrap_or("bitflip") {
        "bitflip" => Some(EnsembleChoice::BitFlip),
        "custom" => {
            let p_x = r.reals("p_x", 0.0, 1.0);
            let phi = r.parsed("phi", "a list of complex amplitudes", |s| parse_list(s, parse_complex));
            let phi_dims = r.parsed("phi_dims", "two dimensions `d1,d2`", |s| {
                let v: Vec<usize> = parse_list(s, |t| t.parse().ok())?;
                (v.len() == 2 && v[0] > 0 && v[1] > 0).then(|| (v[0], v[1]))
            });
            let encoders = r.indexed_matrices("encoder_");
            for key in ["p_x", "phi", "phi_dims"] {
                if r.raw(key).is_none() {
                    r.issue(key, "required for a custom ensemble");
                }
            }
            match (p_x, phi, phi_dims) {
                (Some(p_x), Some(phi), Some(phi_dims)) => {
                    if encoders.len() != p_x.len() {
                        r.issue("ensemble", format!("{} encoders for {} letters", encoders.len(), p_x.len()));
                    }
                    Some(EnsembleChoice::Custom { p_x, phi, phi_dims, encoders })
                }
                _ => None,
            }
        }
        other => {
            let other = other.to_string();
            r.issue("ensemble", format!("unknown ensemble `{other}` (bitflip or custom)"));
            None
        }
    };
    let beta = r.real("beta", 0.0, 1.0);
    let beta_grid = match r.raw("beta_grid") {
        None => Some(Grid::Uniform(DEFAULT_GRID_POINTS)),
        Some(_) => r.parsed("beta_grid", "`uniform:<points>` or a list of reals", parse_grid).and_then(|g| {
            let values = g.values();
            if values.is_empty() {
                r.issue("beta_grid", "empty grid");
                None
            } else if let Some(b) = values.iter().find(|b| !(0.0..=1.0).contains(*b)) {
                r.issue("beta_grid", format!("value {b} outside [0, 1]"));
                None
            } else {
                Some(g)
            }
        }),
    };
    let model = match r.raw("model") {
        None => Some(ModelSelection::Both),
        Some(_) => r.parsed("model", "interception, passive or both", |s| match s {
            "interception" => Some(ModelSelection::Interception),
            "passive" => Some(ModelSelection::Passive),
            "both" => Some(ModelSelection::Both),
            _ => None,
        }),
    };
    let r_floor = r.real("r_floor", 0.0, f64::MAX).or(r.raw("r_floor").is_none().then_some(DEFAULT_R_FLOOR));
    let td_points = r.count("td_points", 3, 1_000_000).or(r.raw("td_points").is_none().then_some(101));

    let default_n = if command == Some(Command::Permutation) { 4 } else { 3 };
    let n = r.count("n", 1, 64).or(r.raw("n").is_none().then_some(default_n));
    let rate_r = r.real("rate_r", 0.0, 64.0).or(r.raw("rate_r").is_none().then_some(0.0));
    let r0_grid = r.reals("r0_grid", 0.0, 64.0).or(r.raw("r0_grid").is_none().then(|| vec![0.0, 0.5, 1.0, 1.5, 2.0]));
    let seeds = r.parsed("seeds", "`a..b` or a list of integers", parse_seeds);
    if let Some(s) = &seeds {
        if s.values().is_empty() {
            r.issue("seeds", "no seeds");
        }
    }
    let key_counts = match r.raw("key_counts") {
        None => Some(vec![KeyCount::Sampled(1), KeyCount::Sampled(4), KeyCount::Sampled(16), KeyCount::Full]),
        Some(_) => r.parsed("key_counts", "a list of positive integers or `full`", |s| {
            let v: Vec<KeyCount> = parse_list(s, parse_key_count)?;
            (!v.is_empty() && !v.contains(&KeyCount::Sampled(0))).then_some(v)
        }),
    };
    let excess_n = r.count("excess_n", 1, 64).or(r.raw("excess_n").is_none().then_some(2));
    let rate_r_prime = r.real("rate_r_prime", 0.0, 64.0).or(r.raw("rate_r_prime").is_none().then_some(0.0));

    let lambda = r.real("lambda", 0.0, 1.0).or(r.raw("lambda").is_none().then_some(0.05));
    if let Some(l) = lambda {
        if l == 0.0 || l == 1.0 {
            r.issue("lambda", "must lie strictly between 0 and 1");
        }
    }
    let matrix = r.raw("matrix").map(PathBuf::from);
    let fixtures = r.count("fixtures", 1, 100_000).or(r.raw("fixtures").is_none().then_some(20));
    let fixture_rows = r.count("fixture_rows", 1, 1 << 16).or(r.raw("fixture_rows").is_none().then_some(64));
    let fixture_cols = r.count("fixture_cols", 1, 1 << 16).or(r.raw("fixture_cols").is_none().then_some(64));
    let seed = r.parsed("seed", "a nonnegative integer", |s| s.parse::<u64>().ok());
    let retry_budget = r.count("retry_budget", 1, 1_000_000).or(r.raw("retry_budget").is_none().then_some(64));
    let max_n = r.count("max_n", 1, 64).or(r.raw("max_n").is_none().then_some(6));
    let max_codebook = r.count("max_codebook", 1, 1 << 16).or(r.raw("max_codebook").is_none().then_some(1 << 16));

    // per-command requirements
    match command {
        Some(Command::Region) | Some(Command::Covering) => {
            if channel == Some(ChannelChoice::AmplitudeDamping) && r.raw("gamma").is_none() {
                r.issue("gamma", "required for the amplitude damping channel");
            }
        }
        Some(Command::Sweep) => {
            if r.raw("gamma_grid").is_none() {
                r.issue("gamma_grid", "required for a sweep");
            }
            if matches!(channel, Some(ChannelChoice::Kraus(_))) {
                r.issue("channel", "a sweep varies the damping parameter and needs amplitude_damping");
            }
        }
        _ => {}
    }
    if matches!(command, Some(Command::Region | Command::Sweep)) && matches!(ensemble, Some(EnsembleChoice::Custom { .. })) {
        r.issue("ensemble", "region and sweep runs scan the bit-flip family");
    }
    if command == Some(Command::Covering) {
        if ensemble == Some(EnsembleChoice::BitFlip) && r.raw("beta").is_none() {
            r.issue("beta", "required for a covering run with the bit-flip ensemble");
        }
        if r.raw("seeds").is_none() {
            r.issue("seeds", "required (no implicit seeds)");
        }
    }
    if command == Some(Command::Permutation) && r.raw("seed").is_none() {
        r.issue("seed", "required (no implicit seed)");
    }

    if !r.issues.is_empty() {
        r.issues.sort_by_key(|i| (i.line.unwrap_or(usize::MAX), i.key.clone()));
        return Err(ConfigErrors(r.issues));
    }
    Ok(RunConfig {
        command: command.expect("checked"),
        channel: channel.expect("checked"),
        gamma,
        gamma_grid,
        ensemble: ensemble.expect("checked"),
        beta,
        beta_grid: beta_grid.expect("checked"),
        model: model.expect("checked"),
        r_floor: r_floor.expect("checked"),
        td_points: td_points.expect("checked"),
        n: n.expect("checked"),
        rate_r: rate_r.expect("checked"),
        r0_grid: r0_grid.expect("checked"),
        seeds,
        key_counts: key_counts.expect("checked"),
        excess_n: excess_n.expect("checked"),
        rate_r_prime: rate_r_prime.expect("checked"),
        lambda: lambda.expect("checked"),
        matrix,
        fixtures: fixtures.expect("checked"),
        fixture_rows: fixture_rows.expect("checked"),
        fixture_cols: fixture_cols.expect("checked"),
        seed,
        retry_budget: retry_budget.expect("checked"),
        max_n: max_n.expect("checked"),
        max_codebook: max_codebook.expect("checked"),
    })
}

impl RunConfig {
    /// Canonical text form; parsing it yields an equal configuration.
    pub fn to_text(&self) -> String {
        let mut lines: Vec<String> = vec![format!("command = {}", self.command.name())];
        let mut kv = |k: &str, v: String| lines.push(format!("{k} = {v}"));
        match &self.channel {
            ChannelChoice::AmplitudeDamping => kv("channel", "amplitude_damping".into()),
            ChannelChoice::Kraus(ops) => {
                kv("channel", "kraus".into());
                for (i, k) in ops.iter().enumerate() {
                    kv(&format!("kraus_{i}"), fmt_matrix(k));
                }
            }
        }
        if let Some(g) = self.gamma {
            kv("gamma", g.to_string());
        }
        if let Some(g) = &self.gamma_grid {
            kv("gamma_grid", join(g));
        }
        match &self.ensemble {
            EnsembleChoice::BitFlip => kv("ensemble", "bitflip".into()),
            EnsembleChoice::Custom { p_x, phi, phi_dims, encoders } => {
                kv("ensemble", "custom".into());
                kv("p_x", join(p_x));
                kv("phi", phi.iter().map(fmt_complex).collect::<Vec<_>>().join(","));
                kv("phi_dims", format!("{},{}", phi_dims.0, phi_dims.1));
                for (i, e) in encoders.iter().enumerate() {
                    kv(&format!("encoder_{i}"), fmt_matrix(e));
                }
            }
        }
        if let Some(b) = self.beta {
            kv("beta", b.to_string());
        }
        kv("beta_grid", self.beta_grid.to_text());
        kv("model", self.model.name().into());
        kv("r_floor", self.r_floor.to_string());
        kv("td_points", self.td_points.to_string());
        kv("n", self.n.to_string());
        kv("rate_r", self.rate_r.to_string());
        kv("r0_grid", join(&self.r0_grid));
        if let Some(s) = &self.seeds {
            kv("seeds", s.to_text());
        }
        kv("key_counts", self.key_counts.iter().map(fmt_key_count).collect::<Vec<_>>().join(","));
        kv("excess_n", self.excess_n.to_string());
        kv("rate_r_prime", self.rate_r_prime.to_string());
        kv("lambda", self.lambda.to_string());
        if let Some(p) = &self.matrix {
            kv("matrix", p.display().to_string());
        }
        kv("fixtures", self.fixtures.to_string());
        kv("fixture_rows", self.fixture_rows.to_string());
        kv("fixture_cols", self.fixture_cols.to_string());
        if let Some(s) = self.seed {
            kv("seed", s.to_string());
        }
        kv("retry_budget", self.retry_budget.to_string());
        kv("max_n", self.max_n.to_string());
        kv("max_codebook", self.max_codebook.to_string());
        lines.join("\n") + "\n"
    }

    pub fn channel_spec(&self, gamma: Option<f64>) -> ChannelSpec {
        match &self.channel {
            ChannelChoice::AmplitudeDamping => ChannelSpec::AmplitudeDamping { gamma: gamma.unwrap_or(0.0) },
            ChannelChoice::Kraus(ops) => ChannelSpec::Kraus { operators: ops.clone() },
        }
    }

    pub fn ensemble_spec(&self) -> EnsembleSpec {
        match &self.ensemble {
            EnsembleChoice::BitFlip => EnsembleSpec::BitFlip { beta: self.beta.unwrap_or(1.0) },
            EnsembleChoice::Custom { p_x, phi, phi_dims, encoders } => EnsembleSpec::Custom {
                p_x: p_x.clone(),
                phi: phi.clone(),
                g1_dim: phi_dims.0,
                g2_dim: phi_dims.1,
                encoders: encoders.clone(),
            },
        }
    }

    pub fn seed_values(&self) -> Vec<u64> {
        self.seeds.as_ref().map(Seeds::values).unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_region_config() {
        let c = parse_config("command=region\nchannel=amplitude_damping\ngamma=0.3\nmodel=both").unwrap();
        assert_eq!(c.command, Command::Region);
        assert_eq!(c.beta_grid, Grid::Uniform(1001));
        assert_eq!(c.beta_grid.values().len(), 1001);
        assert_eq!(c.model, ModelSelection::Both);
        assert_eq!(c.gamma, Some(0.3));
    }

    #[test]
    fn range_error_names_key() {
        let e = parse_config("command=region\ngamma=1.5").unwrap_err();
        assert_eq!(e.0.len(), 1);
        assert_eq!(e.0[0].key, "gamma");
        assert_eq!(e.0[0].line, Some(2));
    }

    #[test]
    fn all_errors_are_reported() {
        let text = "command=covering\ngamma=2\nbogus=1\nbeta=x\nn=0\nmodel=sideways\nthis line is wrong\n";
        let e = parse_config(text).unwrap_err();
        let keys: Vec<&str> = e.0.iter().map(|i| i.key.as_str()).collect();
        for k in ["gamma", "bogus", "beta", "n", "model", "seeds"] {
            assert!(keys.contains(&k), "{k} missing from {keys:?}");
        }
        assert!(e.0.iter().any(|i| i.line == Some(7)));
    }

    #[test]
    fn empty_beta_grid_rejected() {
        let e = parse_config("command=region\ngamma=0.3\nbeta_grid=").unwrap_err();
        assert_eq!(e.0[0].key, "beta_grid");
    }

    #[test]
    fn duplicate_and_command_mismatch() {
        let e = parse_config("command=region\ngamma=0.3\ngamma=0.4").unwrap_err();
        assert!(e.0[0].message.contains("duplicate"));
        let e = parse_config_for("command=region\ngamma=0.3", Some(Command::Sweep)).unwrap_err();
        assert_eq!(e.0[0].key, "command");
        let c = parse_config_for("gamma=0.3 # comment", Some(Command::Region)).unwrap();
        assert_eq!(c.command, Command::Region);
    }

    #[test]
    fn seeds_are_explicit() {
        let e = parse_config("command=covering\ngamma=0.3\nbeta=1").unwrap_err();
        assert_eq!(e.0[0].key, "seeds");
        let e = parse_config("command=permutation").unwrap_err();
        assert_eq!(e.0[0].key, "seed");
    }

    #[test]
    fn round_trip() {
        let texts = [
            "command=region\ngamma=0.3\nbeta_grid=0,0.25,0.5\nmodel=passive\nr_floor=0.02",
            "command=sweep\ngamma_grid=0.1,0.3,0.5\nbeta_grid=uniform:11",
            "command=covering\ngamma=0.3\nbeta=1\nseeds=0..100\nr0_grid=0,0.5,1\nkey_counts=1,4,full\nensemble=bitflip",
            "command=permutation\nseed=7\nlambda=0.05\nfixtures=3\nretry_budget=10",
            "command=covering\nchannel=kraus\nkraus_0=1,0|0,0.8\nkraus_1=0,0.6|0,0\nensemble=custom\np_x=0.25,0.75\n\
             phi=0.6,0,0,0:0.8\nphi_dims=2,2\nencoder_0=1,0|0,1\nencoder_1=0,1|1,0\nseeds=3,5,8",
        ];
        for t in texts {
            let c = parse_config(t).unwrap();
            let again = parse_config(&c.to_text()).unwrap();
            assert_eq!(c, again, "{}", c.to_text());
            assert_eq!(again.to_text(), c.to_text());
        }
    }

    #[test]
    fn kraus_indices_must_be_contiguous() {
        let e = parse_config("command=region\nchannel=kraus\nkraus_0=1,0|0,1\nkraus_2=1,0|0,1").unwrap_err();
        assert!(e.0.iter().any(|i| i.key == "kraus_2"));
    }
}
