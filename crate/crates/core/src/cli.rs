//! Command-line front end: parameter sweeps, critical-point scans, direct
//! entanglement measures on a state file, and the self checks.
//!
//! Output is deterministic: rows are computed in parallel but emitted in
//! grid order, and floats are printed with 17 significant digits.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entanglement::{self, Cut, DensityMatrix};
use crate::error::Error;
use crate::gamma::{self, ScanAxis, TwoParamModel};
use crate::kane::{self, KaneParams};
use crate::selftest;
use crate::tfim::{self, Scheme, TfimParams};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Environment variable capping sweep parallelism (0 = automatic).
pub const THREADS_ENV: &str = "QG_THREADS";
const MIN_SCAN_POINTS: usize = 8;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(e) => write!(f, "numeric failure in {}: {e}", e.op()),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Numeric(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn config_err<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Config(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Tfim,
    Kane,
    Tilted,
    Custom,
}

impl ModelKind {
    fn as_str(self) -> &'static str {
        match self {
            ModelKind::Tfim => "tfim",
            ModelKind::Kane => "kane",
            ModelKind::Tilted => "tilted",
            ModelKind::Custom => "custom",
        }
    }

    fn parameters(self) -> &'static [&'static str] {
        match self {
            ModelKind::Tfim => &["B", "J"],
            ModelKind::Kane => &["A", "Jp", "muBB"],
            ModelKind::Tilted => &["h", "g"],
            ModelKind::Custom => &[],
        }
    }

    fn default_value(self, name: &str) -> f64 {
        match (self, name) {
            (ModelKind::Kane, "A") => 1e-3,
            (ModelKind::Kane, "Jp") => 0.25,
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum OutputKind {
    E0,
    Cross,
    Second,
    SecondTerm,
    Gamma,
    EntropyBits,
    Concurrence,
    Splitting,
    EdSplitting,
}

impl OutputKind {
    fn column(self) -> &'static str {
        match self {
            OutputKind::E0 => "e0",
            OutputKind::Cross => "cross",
            OutputKind::Second => "second",
            OutputKind::SecondTerm => "second_term",
            OutputKind::Gamma => "gamma",
            OutputKind::EntropyBits => "entropy_bits",
            OutputKind::Concurrence => "concurrence",
            OutputKind::Splitting => "splitting",
            OutputKind::EdSplitting => "ed_splitting",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Linear grid or explicit values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Linear { start: f64, stop: f64, count: usize },
    Values(Vec<f64>),
}

impl Grid {
    pub fn points(&self) -> CliResult<Vec<f64>> {
        match *self {
            Grid::Linear { start, stop, count } => {
                if count < 2 {
                    return config_err(format!("grid count {count} must be ≥ 2"));
                }
                if !(start.is_finite() && stop.is_finite() && start < stop) {
                    return config_err(format!("grid needs finite start < stop, got {start}:{stop}"));
                }
                let span = stop - start;
                let last = (count - 1) as f64;
                Ok((0..count)
                    .map(|i| if i + 1 == count { stop } else { start + span * i as f64 / last })
                    .collect())
            }
            Grid::Values(ref v) => {
                if v.len() < 2 {
                    return config_err("explicit grid needs at least 2 values");
                }
                if v.iter().any(|x| !x.is_finite()) || v.windows(2).any(|w| !(w[1] > w[0])) {
                    return config_err("explicit grid must be finite and strictly increasing");
                }
                Ok(v.clone())
            }
        }
    }
}

impl std::str::FromStr for Grid {
    type Err = String;

    /// `start:stop:count`
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(format!("expected start:stop:count, got {s:?}"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
        Ok(Grid::Linear {
            start: num(a)?,
            stop: num(b)?,
            count: n.trim().parse().map_err(|e| format!("{n:?}: {e}"))?,
        })
    }
}

/// Sweep or scan configuration, as read from a JSON document.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub model: Option<ModelKind>,
    #[serde(default)]
    pub fixed: BTreeMap<String, f64>,
    pub swept: Option<String>,
    pub grid: Option<Grid>,
    pub outputs: Option<Vec<OutputKind>>,
    pub n_sites: Option<usize>,
    pub output_path: Option<PathBuf>,
    pub format: Option<Format>,
    pub cut: Option<Cut>,
}

impl SweepConfig {
    pub fn from_json_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Parser)]
#[command(name = "quantum-grueneisen", version, about = "Zero-temperature Grüneisen parameter and entanglement of quantum spin models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Transverse-field Ising chain: energy, derivatives, Γ and ED entanglement per grid point.
    TfimSweep(SweepArgs),
    /// Two-donor exchange splitting, its derivatives and Γ per grid point.
    KaneSweep(SweepArgs),
    /// Divergence and sign-change scan of a model; JSON report.
    Scan(SweepArgs),
    /// Entropy and concurrence of a pure state read from a JSON file.
    Entanglement(EntanglementArgs),
    /// Runs the built-in checks.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Default, Args)]
#[command(allow_negative_numbers = true)]
pub struct SweepArgs {
    /// JSON configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    /// Swept parameter (tfim: lambda, J, B; kane: Jp, muBB; tilted: h, g).
    #[arg(long)]
    pub swept: Option<String>,
    /// Linear grid start:stop:count.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<Grid>,
    /// Explicit grid, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "grid")]
    pub values: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', value_enum)]
    pub outputs: Option<Vec<OutputKind>>,
    /// Chain length for ED outputs (tfim).
    #[arg(long)]
    pub n_sites: Option<usize>,
    #[arg(long, value_enum)]
    pub cut: Option<Cut>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long = "B")]
    pub b: Option<f64>,
    #[arg(long = "J")]
    pub j: Option<f64>,
    #[arg(long = "A")]
    pub a: Option<f64>,
    #[arg(long = "Jp")]
    pub jp: Option<f64>,
    #[arg(long = "muBB")]
    pub mu_b_b: Option<f64>,
    #[arg(long = "h")]
    pub h: Option<f64>,
    #[arg(long = "g")]
    pub g: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct EntanglementArgs {
    /// JSON array of [re, im] amplitude pairs, length 2^n.
    #[arg(long)]
    pub state: PathBuf,
    /// Kept qubits, comma separated (default: the first half).
    #[arg(long, value_delimiter = ',')]
    pub keep: Option<Vec<usize>>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SelftestArgs {
    /// Run only these checks, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub only: Option<Vec<u32>>,
}

impl clap::ValueEnum for Cut {
    fn value_variants<'a>() -> &'a [Self] {
        &[Cut::HalfChain, Cut::SingleSite, Cut::BondPair]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(match self {
            Cut::HalfChain => "half_chain",
            Cut::SingleSite => "single_site",
            Cut::BondPair => "bond_pair",
        }))
    }
}

/// Fully resolved sweep request.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub model: ModelKind,
    pub fixed: BTreeMap<String, f64>,
    pub swept: String,
    pub grid: Vec<f64>,
    pub outputs: Vec<OutputKind>,
    pub n_sites: Option<usize>,
    pub cut: Cut,
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

/// Merges the config file with the flags (flags win) and validates.
pub fn resolve(kind: &str, implied: Option<ModelKind>, args: &SweepArgs) -> CliResult<Sweep> {
    let mut cfg = match &args.config {
        Some(p) => SweepConfig::from_json_file(p)?,
        None => SweepConfig::default(),
    };
    if let Some(m) = args.model {
        cfg.model = Some(m);
    }
    let model = match (implied, cfg.model) {
        (Some(i), Some(m)) if i != m => {
            return config_err(format!("{kind} requires model {}, config says {}", i.as_str(), m.as_str()))
        }
        (Some(i), _) => i,
        (None, Some(m)) => m,
        (None, None) => return config_err(format!("{kind} needs --model")),
    };
    if model == ModelKind::Custom {
        return config_err("custom models are available through the library API only");
    }
    for (name, v) in [
        ("B", args.b),
        ("J", args.j),
        ("A", args.a),
        ("Jp", args.jp),
        ("muBB", args.mu_b_b),
        ("h", args.h),
        ("g", args.g),
    ] {
        if let Some(v) = v {
            cfg.fixed.insert(name.to_string(), v);
        }
    }
    let allowed = model.parameters();
    if let Some(bad) = cfg.fixed.keys().find(|k| !allowed.contains(&k.as_str())) {
        return config_err(format!("parameter {bad} does not belong to model {}", model.as_str()));
    }
    if let Some((k, v)) = cfg.fixed.iter().find(|(_, v)| !v.is_finite()) {
        return config_err(format!("parameter {k} = {v} is not finite"));
    }
    let explicit: std::collections::BTreeSet<String> = cfg.fixed.keys().cloned().collect();
    let mut fixed: BTreeMap<String, f64> = allowed.iter().map(|&k| (k.to_string(), model.default_value(k))).collect();
    fixed.extend(cfg.fixed);

    let swept = args.swept.clone().or(cfg.swept).unwrap_or_else(|| {
        match (kind, model) {
            ("scan", ModelKind::Kane) | (_, ModelKind::Kane) => "Jp",
            ("scan", _) => allowed.get(1).copied().unwrap_or("g"),
            (_, ModelKind::Tfim) => "lambda",
            _ => "g",
        }
        .to_string()
    });
    let swept_ok = match (kind, model) {
        ("scan", _) => allowed.contains(&swept.as_str()) && !(model == ModelKind::Kane && swept == "A"),
        (_, ModelKind::Tfim) => ["lambda", "J", "B"].contains(&swept.as_str()),
        (_, ModelKind::Kane) => ["Jp", "muBB"].contains(&swept.as_str()),
        _ => allowed.contains(&swept.as_str()),
    };
    if !swept_ok {
        return config_err(format!("cannot sweep {swept} in {kind} for model {}", model.as_str()));
    }
    let varied = if swept == "lambda" { "J" } else { swept.as_str() };
    if explicit.contains(varied) {
        return config_err(format!("{varied} is fixed but also varied by the sweep over {swept}"));
    }

    let grid = match (&args.values, &args.grid, cfg.grid) {
        (Some(v), _, _) => Grid::Values(v.clone()),
        (None, Some(g), _) => g.clone(),
        (None, None, Some(g)) => g,
        (None, None, None) => return config_err("no grid given (--grid start:stop:count or config grid)"),
    };
    let grid = grid.points()?;
    if kind == "scan" && grid.len() < MIN_SCAN_POINTS {
        return config_err(format!("scan needs at least {MIN_SCAN_POINTS} grid points"));
    }

    let n_sites = args.n_sites.or(cfg.n_sites);
    if let Some(n) = n_sites {
        if !(2..=crate::ed::TFIM_MAX_SITES).contains(&n) {
            return config_err(format!("n_sites = {n} outside 2..={}", crate::ed::TFIM_MAX_SITES));
        }
    }
    let outputs = args.outputs.clone().or(cfg.outputs).unwrap_or_else(|| match model {
        ModelKind::Tfim if n_sites.is_some() => vec![
            OutputKind::E0,
            OutputKind::Cross,
            OutputKind::Second,
            OutputKind::Gamma,
            OutputKind::EntropyBits,
            OutputKind::Concurrence,
        ],
        ModelKind::Tfim => vec![OutputKind::E0, OutputKind::Cross, OutputKind::Second, OutputKind::Gamma],
        _ => vec![
            OutputKind::Splitting,
            OutputKind::Cross,
            OutputKind::SecondTerm,
            OutputKind::Gamma,
        ],
    });
    if kind != "scan" {
        if outputs.is_empty() {
            return config_err("no outputs requested");
        }
        let valid: &[OutputKind] = match model {
            ModelKind::Tfim => &[
                OutputKind::E0,
                OutputKind::Cross,
                OutputKind::Second,
                OutputKind::Gamma,
                OutputKind::EntropyBits,
                OutputKind::Concurrence,
            ],
            _ => &[
                OutputKind::Splitting,
                OutputKind::Cross,
                OutputKind::Second,
                OutputKind::SecondTerm,
                OutputKind::Gamma,
                OutputKind::EdSplitting,
            ],
        };
        if let Some(o) = outputs.iter().find(|o| !valid.contains(o)) {
            return config_err(format!("output {} is not available for {}", o.column(), model.as_str()));
        }
        let wants_ed = outputs
            .iter()
            .any(|o| matches!(o, OutputKind::EntropyBits | OutputKind::Concurrence));
        if wants_ed && n_sites.is_none() {
            return config_err("entropy_bits and concurrence need --n-sites");
        }
    }
    let format = args.format.or(cfg.format).unwrap_or(if kind == "scan" { Format::Json } else { Format::Csv });
    if kind == "scan" && format != Format::Json {
        return config_err("scan reports are JSON only");
    }
    Ok(Sweep {
        model,
        fixed,
        swept,
        grid,
        outputs,
        n_sites,
        cut: args.cut.or(cfg.cut).unwrap_or_default(),
        output_path: args.output.clone().or(cfg.output_path),
        format,
    })
}

/// One output row: grid coordinates, requested values, status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub coords: Vec<f64>,
    /// `None` everywhere unless `status == "ok"`.
    pub values: Vec<Option<f64>>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub program: String,
    pub version: String,
    pub model: String,
    pub units: String,
    pub coord_columns: Vec<String>,
    pub value_columns: Vec<String>,
    pub rows: Vec<Row>,
}

fn status_of(e: &Error) -> Option<&'static str> {
    match e {
        Error::Singular { .. } => Some("singular"),
        Error::Identification { .. } => Some("identification_failed"),
        Error::Degenerate { .. } => Some("degenerate"),
        _ => None,
    }
}

/// Runs the row closure for every grid point; recoverable failures turn
/// into a status, everything else aborts the sweep.
fn build_rows<F>(sweep: &Sweep, row: F) -> CliResult<Vec<Row>>
where
    F: Fn(f64) -> crate::Result<(Vec<f64>, Vec<f64>)> + Sync,
{
    let n_values = sweep.outputs.len();
    sweep
        .grid
        .par_iter()
        .map(|&x| match row(x) {
            Ok((coords, values)) => {
                if values.iter().all(|v| v.is_finite()) {
                    Ok(Row {
                        coords,
                        values: values.into_iter().map(Some).collect(),
                        status: "ok".to_string(),
                    })
                } else {
                    Ok(Row {
                        coords,
                        values: vec![None; n_values],
                        status: "undefined".to_string(),
                    })
                }
            }
            Err(e) => match status_of(&e) {
                Some(s) => Ok(Row {
                    coords: Vec::new(),
                    values: vec![None; n_values],
                    status: s.to_string(),
                }),
                None => Err(CliError::Numeric(e)),
            },
        })
        .collect()
}

fn tfim_point(sweep: &Sweep, x: f64) -> (f64, f64) {
    let (b, j) = (sweep.fixed["B"], sweep.fixed["J"]);
    match sweep.swept.as_str() {
        "lambda" => (b, x * b),
        "J" => (b, x),
        _ => (x, j),
    }
}

pub fn tfim_table(sweep: &Sweep) -> CliResult<Table> {
    let mut rows = build_rows(sweep, |x| {
        let (b, j) = tfim_point(sweep, x);
        let p = TfimParams::new(b, j)?;
        let coords = vec![p.lambda(), b, j];
        let needs_derivs = sweep
            .outputs
            .iter()
            .any(|o| matches!(o, OutputKind::Cross | OutputKind::Second | OutputKind::Gamma));
        let d = if needs_derivs { Some(tfim::derivatives(&p, Scheme::Analytic)?) } else { None };
        let profile = match sweep.n_sites {
            Some(n)
                if sweep
                    .outputs
                    .iter()
                    .any(|o| matches!(o, OutputKind::EntropyBits | OutputKind::Concurrence)) =>
            {
                Some(entanglement::tfim_entanglement_profile(n, &p, sweep.cut)?)
            }
            _ => None,
        };
        let mut values = Vec::with_capacity(sweep.outputs.len());
        for o in &sweep.outputs {
            values.push(match o {
                OutputKind::E0 => tfim::e0_per_site(&p)?,
                OutputKind::Cross => d.expect("derivatives").cross,
                OutputKind::Second => d.expect("derivatives").second,
                OutputKind::Gamma => {
                    let d = d.expect("derivatives");
                    -d.cross / (b * d.second)
                }
                OutputKind::EntropyBits => profile.expect("profile").entropy.bits,
                OutputKind::Concurrence => profile.expect("profile").concurrence,
                _ => unreachable!("validated in resolve"),
            });
        }
        Ok((coords, values))
    })?;
    fill_coords(&mut rows, sweep, |x| {
        let (b, j) = tfim_point(sweep, x);
        vec![if b > 0.0 { j / b } else { f64::INFINITY }, b, j]
    });
    Ok(table(sweep, vec!["lambda", "B", "J"], rows))
}

fn kane_point(sweep: &Sweep, x: f64) -> (f64, f64) {
    match sweep.swept.as_str() {
        "Jp" => (x, sweep.fixed["muBB"]),
        _ => (sweep.fixed["Jp"], x),
    }
}

pub fn kane_table(sweep: &Sweep) -> CliResult<Table> {
    let a = sweep.fixed["A"];
    let mut rows = build_rows(sweep, |x| {
        let (jp, mu_b_b) = kane_point(sweep, x);
        let p = KaneParams::new(a, jp, mu_b_b)?;
        let coords = vec![jp, mu_b_b, p.exchange_ratio()];
        let d = kane::derivatives(&p)?;
        let mut values = Vec::with_capacity(sweep.outputs.len());
        for o in &sweep.outputs {
            values.push(match o {
                OutputKind::Splitting => kane::splitting(&p)?,
                OutputKind::Cross => d.cross,
                OutputKind::Second => d.second,
                OutputKind::SecondTerm => d.second_term,
                OutputKind::Gamma => kane::gamma0k_kane(&p)?,
                OutputKind::EdSplitting => kane::ed_splitting(&p)?,
                _ => unreachable!("validated in resolve"),
            });
        }
        Ok((coords, values))
    })?;
    fill_coords(&mut rows, sweep, |x| {
        let (jp, mu_b_b) = kane_point(sweep, x);
        vec![jp, mu_b_b, 2.0 * jp / mu_b_b]
    });
    Ok(table(sweep, vec!["Jp", "muBB", "exchange_ratio"], rows))
}

fn fill_coords(rows: &mut [Row], sweep: &Sweep, coords: impl Fn(f64) -> Vec<f64>) {
    for (row, &x) in rows.iter_mut().zip(&sweep.grid) {
        if row.coords.is_empty() {
            row.coords = coords(x);
        }
    }
}

fn table(sweep: &Sweep, coord_columns: Vec<&str>, rows: Vec<Row>) -> Table {
    Table {
        program: "quantum-grueneisen".to_string(),
        version: VERSION.to_string(),
        model: sweep.model.as_str().to_string(),
        units: "muB=1".to_string(),
        coord_columns: coord_columns.into_iter().map(String::from).collect(),
        value_columns: sweep.outputs.iter().map(|o| o.column().to_string()).collect(),
        rows,
    }
}

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn table_to_csv(t: &Table) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {} v{}; model={}; units: {}", t.program, t.version, t.model, t.units);
    let header: Vec<&str> = t
        .coord_columns
        .iter()
        .chain(&t.value_columns)
        .map(String::as_str)
        .chain(["status"])
        .collect();
    let _ = writeln!(out, "{}", header.join(","));
    for r in &t.rows {
        let cells: Vec<String> = r
            .coords
            .iter()
            .map(|&c| fmt_float(c))
            .chain(r.values.iter().map(|v| v.map(fmt_float).unwrap_or_default()))
            .chain([r.status.clone()])
            .collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn render_table(t: &Table, format: Format) -> CliResult<String> {
    match format {
        Format::Csv => Ok(table_to_csv(t)),
        Format::Json => to_json(t),
    }
}

/// The model and scan axis for `scan`.
pub fn scan_model(sweep: &Sweep) -> (TwoParamModel, ScanAxis, f64) {
    let f = &sweep.fixed;
    match sweep.model {
        ModelKind::Tfim => {
            if sweep.swept == "B" {
                (tfim::energy_model(), ScanAxis::H, f["J"])
            } else {
                (tfim::energy_model(), ScanAxis::G, f["B"])
            }
        }
        ModelKind::Kane => {
            let m = kane::energy_model(f["A"]);
            if sweep.swept == "muBB" {
                (m, ScanAxis::G, f["Jp"])
            } else {
                (m, ScanAxis::H, f["muBB"])
            }
        }
        _ => {
            if sweep.swept == "h" {
                (gamma::tilted_field_model(), ScanAxis::H, f["g"])
            } else {
                (gamma::tilted_field_model(), ScanAxis::G, f["h"])
            }
        }
    }
}

pub fn scan_report(sweep: &Sweep) -> CliResult<gamma::ScanReport> {
    let (model, axis, fixed) = scan_model(sweep);
    Ok(gamma::scan(&model, axis, fixed, &sweep.grid)?)
}

/// Result of the `entanglement` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub n_qubits: usize,
    pub keep: Vec<usize>,
    pub entropy_bits: f64,
    pub entropy_nats: f64,
    /// Of the whole state for two qubits, of the kept pair otherwise.
    pub concurrence: Option<f64>,
}

pub fn read_state(path: &Path) -> CliResult<Vec<Complex64>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let pairs: Vec<[f64; 2]> =
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
}

pub fn entanglement_report(psi: &[Complex64], keep: Option<&[usize]>) -> CliResult<EntanglementReport> {
    let dim = psi.len();
    if dim < 4 || !dim.is_power_of_two() {
        return config_err(format!("state length {dim} is not 2^n with n ≥ 2"));
    }
    let n = dim.trailing_zeros() as usize;
    let keep: Vec<usize> = keep.map(<[usize]>::to_vec).unwrap_or_else(|| (0..n / 2).collect());
    let rho = entanglement::partial_trace(psi, n, &keep)?;
    let s = entanglement::von_neumann_entropy(&rho);
    let concurrence = if n == 2 {
        Some(entanglement::concurrence(&DensityMatrix::from_pure(psi)?)?)
    } else if keep.len() == 2 {
        Some(entanglement::concurrence(&rho)?)
    } else {
        None
    };
    Ok(EntanglementReport {
        n_qubits: n,
        keep,
        entropy_bits: s.bits,
        entropy_nats: s.nats,
        concurrence,
    })
}

fn emit(text: &str, path: Option<&Path>) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let n = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Config(format!("{THREADS_ENV} = {v:?} is not a non-negative integer")))?,
        Err(std::env::VarError::NotPresent) => 0,
        Err(e) => return config_err(format!("{THREADS_ENV}: {e}")),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

/// Executes a parsed command; returns the process exit code.
pub fn execute(cli: Cli) -> i32 {
    let result = thread_pool().and_then(|pool| pool.install(|| dispatch(cli.command)));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("quantum-grueneisen: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> CliResult<i32> {
    match command {
        Command::TfimSweep(args) => {
            let sweep = resolve("tfim-sweep", Some(ModelKind::Tfim), &args)?;
            let text = render_table(&tfim_table(&sweep)?, sweep.format)?;
            emit(&text, sweep.output_path.as_deref())?;
        }
        Command::KaneSweep(args) => {
            let sweep = resolve("kane-sweep", Some(ModelKind::Kane), &args)?;
            let text = render_table(&kane_table(&sweep)?, sweep.format)?;
            emit(&text, sweep.output_path.as_deref())?;
        }
        Command::Scan(args) => {
            let sweep = resolve("scan", None, &args)?;
            let text = to_json(&scan_report(&sweep)?)?;
            emit(&text, sweep.output_path.as_deref())?;
        }
        Command::Entanglement(args) => {
            let psi = read_state(&args.state)?;
            let report = entanglement_report(&psi, args.keep.as_deref())?;
            emit(&to_json(&report)?, args.output.as_deref())?;
        }
        Command::Selftest(args) => {
            let ids = args.only.unwrap_or_else(selftest::ids);
            let mut all_passed = true;
            for id in ids {
                let Some(r) = selftest::run(id) else {
                    return config_err(format!("no check with id {id}"));
                };
                println!("{}", r.line());
                all_passed &= r.passed;
            }
            return Ok(if all_passed { 0 } else { 3 });
        }
    }
    Ok(0)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                2
            } else {
                0
            }
        }
    }
}
