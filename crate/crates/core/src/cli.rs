//! Command-line front end.
//!
//! Exit status: 0 on success, 2 for invalid configuration or input, 3 when a
//! numerical kernel fails.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::error::Error;
use crate::experiments::{
    gen_potential, gen_timeseries, load_electricity, load_motion, make_lagged_pair, ChargeConfig,
    ColumnNormalization, ExperimentPair, LagSpec, DESK_ROWS,
};
use crate::id::{id_fixed_precision_with, id_fixed_rank_with, IdOptions};
use crate::io::{read_matrix, write_binary};
use crate::matrix::{matmul, Matrix};
use crate::qr::default_rank_tol;
use crate::regression::{cca_spectrum, raid_with, rapca, Method};
use crate::report::{analyze, csv_num, lag_table_csv, six_sig, AnalysisOptions, ExperimentReport, Metric};
use crate::solve::Norm;

pub const ELECTRICITY_FILE: &str = "LD2011_2014.txt";
pub const MOTION_FILE: &str = "motion.csv";
pub const MOTION_LIST: &str = "motion-files.txt";
pub const ELECTRICITY_URL: &str =
    "https://archive.ics.uci.edu/ml/machine-learning-databases/00321/LD2011_2014.txt.zip";
pub const MOTION_URL: &str =
    "https://archive.ics.uci.edu/ml/machine-learning-databases/00302/gesture_phase_dataset.zip";
/// Rows kept as the target block in the transposed electricity preset.
pub const TRANSPOSED_TARGET_ROWS: usize = 100_000;

#[derive(Debug, Parser)]
#[command(name = "raidkit", version, about = "Interpolative and regression-aware decompositions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Interpolative decomposition of B.
    Id(Flags),
    /// Regression-aware ID of B for the design A.
    Raid(Flags),
    /// Regression-aware principal components of B for A.
    Rapca(Flags),
    /// Canonical correlations between the column spaces of A and B.
    Cca(Flags),
    /// Run one of the reference experiments end to end.
    Preset {
        #[arg(value_enum)]
        name: PresetName,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Flags {
    /// Design matrix (CSV or RADM binary).
    #[arg(long)]
    pub a: Option<PathBuf>,
    /// Target matrix (CSV or RADM binary).
    #[arg(long)]
    pub b: Option<PathBuf>,
    /// Take A and B from a reference experiment instead of files.
    #[arg(long, value_enum)]
    pub preset: Option<PresetName>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Absolute spectral-norm tolerance for a fixed-precision ID.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, value_enum, default_value_t = MethodArg::Qr)]
    pub method: MethodArg,
    /// Norm used for the headline error in summaries.
    #[arg(long, value_enum, default_value_t = NormArg::Spectral)]
    pub norm: NormArg,
    #[arg(long)]
    pub rank_tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Row count of the synthetic time series.
    #[arg(long)]
    pub rows: Option<usize>,
    /// Lag(s); comma-separated or repeated.
    #[arg(long = "l", value_delimiter = ',', num_args = 1..)]
    pub lags: Vec<usize>,
    #[arg(long, env = "RAIDKIT_DATA_DIR", default_value = "data")]
    pub data_dir: PathBuf,
    #[arg(long, default_value = "raidkit-out")]
    pub out: PathBuf,
    /// Summary printed on stdout.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Run the column-swap pass after pivoted QR.
    #[arg(long)]
    pub strengthen: bool,
    /// Fetch the dataset into the data directory before running.
    #[arg(long)]
    pub download: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetName {
    Potential,
    Timeseries,
    Electricity,
    #[value(name = "electricity-t")]
    ElectricityT,
    Motion,
}

impl PresetName {
    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::Potential => "potential",
            PresetName::Timeseries => "timeseries",
            PresetName::Electricity => "electricity",
            PresetName::ElectricityT => "electricity-t",
            PresetName::Motion => "motion",
        }
    }

    pub fn default_k(self) -> usize {
        match self {
            PresetName::Potential => 10,
            PresetName::Timeseries => 4,
            PresetName::Electricity => 200,
            PresetName::ElectricityT => 3,
            PresetName::Motion => 2,
        }
    }

    pub fn default_lags(self) -> Vec<usize> {
        match self {
            PresetName::Electricity => vec![100, 200, 300],
            PresetName::ElectricityT => vec![300],
            PresetName::Motion => vec![20, 40, 60],
            _ => Vec::new(),
        }
    }

    fn uses_lags(self) -> bool {
        !self.default_lags().is_empty()
    }

    /// Presets whose lags each get their own subdirectory and a table row.
    fn tabulated(self) -> bool {
        matches!(self, PresetName::Electricity | PresetName::Motion)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Qr,
    Whitened,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Qr => Method::Qr,
            MethodArg::Whitened => Method::Whitened,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    Spectral,
    Frobenius,
}

impl From<NormArg> for Norm {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::Spectral => Norm::Spectral,
            NormArg::Frobenius => Norm::Frobenius,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Id,
    Raid,
    Rapca,
    Cca,
    Preset,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Preset(PresetName),
    Files { a: Option<PathBuf>, b: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    Rank(usize),
    Precision(f64),
}

/// A validated invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub input: Input,
    pub target: Option<Target>,
    pub method: Method,
    pub norm: Norm,
    pub rank_tol: Option<f64>,
    pub seed: u64,
    pub rows: usize,
    pub lags: Vec<usize>,
    pub data_dir: PathBuf,
    pub out: PathBuf,
    pub format: Format,
    pub strengthen: bool,
    pub download: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
    pub remedy: String,
}

impl CliError {
    fn invalid(message: impl Into<String>, remedy: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
            remedy: remedy.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "error: {}\nremedy: {}", self.message, self.remedy)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let remedy = match &e {
            Error::Io { .. } => "check that the path exists and is readable",
            Error::Parse { .. } => "fix the reported line; matrices are header-less CSV or RADM binary",
            Error::DimensionMismatch { .. } => "A and B must have the same number of rows",
            Error::NonFinite { .. } => "remove NaN and infinite entries from the input",
            Error::Shape(_) => "check that the dataset files are complete and listed in order",
            Error::Contract(m) if m.contains("exceeds") => "choose a smaller --k",
            Error::Contract(_) => "adjust the argument named in the message",
            Error::ZeroMatrix(_) => "the input has no nonzero entries; check the data",
            Error::NoConvergence { .. } => "rescale the input or raise --rank-tol",
        };
        CliError {
            code: if e.is_numerical() { 3 } else { 2 },
            message: e.to_string(),
            remedy: remedy.into(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

impl RunConfig {
    pub fn from_cli(cli: Cli) -> CliResult<Self> {
        let (command, flags, positional) = match cli.command {
            Command::Id(f) => (CommandKind::Id, f, None),
            Command::Raid(f) => (CommandKind::Raid, f, None),
            Command::Rapca(f) => (CommandKind::Rapca, f, None),
            Command::Cca(f) => (CommandKind::Cca, f, None),
            Command::Preset { name, flags } => (CommandKind::Preset, flags, Some(name)),
        };

        let input = match (positional, flags.preset, &flags.a, &flags.b) {
            (Some(_), Some(_), _, _) => {
                return Err(CliError::invalid(
                    "preset named twice",
                    "drop --preset; the preset name is the positional argument",
                ))
            }
            (Some(_), None, Some(_), _) | (Some(_), None, _, Some(_)) => {
                return Err(CliError::invalid(
                    "preset runs generate their own A and B",
                    "drop --a/--b, or use raid/rapca/cca/id with files",
                ))
            }
            (Some(p), None, None, None) => Input::Preset(p),
            (None, Some(_), Some(_), _) | (None, Some(_), _, Some(_)) => {
                return Err(CliError::invalid(
                    "both --preset and matrix files given",
                    "give either --preset or --a/--b, not both",
                ))
            }
            (None, Some(p), None, None) => Input::Preset(p),
            (None, None, a, b) => {
                let b = b.clone().ok_or_else(|| {
                    CliError::invalid("no target matrix", "pass --b <file> or --preset <name>")
                })?;
                match (command, a) {
                    (CommandKind::Id, Some(_)) => {
                        return Err(CliError::invalid(
                            "id decomposes B alone",
                            "drop --a, or run raid to use a design matrix",
                        ))
                    }
                    (CommandKind::Id, None) => Input::Files { a: None, b },
                    (_, None) => {
                        return Err(CliError::invalid(
                            "no design matrix",
                            "pass --a <file> or --preset <name>",
                        ))
                    }
                    (_, Some(a)) => Input::Files { a: Some(a.clone()), b },
                }
            }
        };
        let preset = match &input {
            Input::Preset(p) => Some(*p),
            Input::Files { .. } => None,
        };

        let target = match (flags.k, flags.eps) {
            (Some(_), Some(_)) => {
                return Err(CliError::invalid("both --k and --eps given", "give exactly one of --k or --eps"))
            }
            (Some(0), None) => return Err(CliError::invalid("k must be ≥ 1", "pass --k 1 or larger")),
            (Some(k), None) => Some(Target::Rank(k)),
            (None, Some(eps)) => {
                if !(eps.is_finite() && eps > 0.0) {
                    return Err(CliError::invalid(
                        format!("eps must be a positive number, got {eps}"),
                        "pass e.g. --eps 1e-6",
                    ));
                }
                Some(Target::Precision(eps))
            }
            (None, None) => None,
        };
        let target = match (command, target) {
            (CommandKind::Cca, Some(_)) => {
                return Err(CliError::invalid("cca takes no rank", "drop --k/--eps"))
            }
            (CommandKind::Cca, None) => None,
            (CommandKind::Id, t) => Some(match (t, preset) {
                (Some(t), _) => t,
                (None, Some(p)) => Target::Rank(p.default_k()),
                (None, None) => {
                    return Err(CliError::invalid(
                        "neither --k nor --eps given",
                        "give exactly one of --k or --eps",
                    ))
                }
            }),
            (_, Some(Target::Precision(_))) => {
                return Err(CliError::invalid("--eps applies only to id", "pass --k instead"))
            }
            (_, Some(t)) => Some(t),
            (_, None) => match preset {
                Some(p) => Some(Target::Rank(p.default_k())),
                None => return Err(CliError::invalid("no rank given", "pass --k")),
            },
        };

        if let Some(tol) = flags.rank_tol {
            if !(tol.is_finite() && tol >= 0.0) {
                return Err(CliError::invalid(
                    format!("rank tolerance must be a nonnegative number, got {tol}"),
                    "pass e.g. --rank-tol 1e-12",
                ));
            }
        }
        if preset != Some(PresetName::Timeseries) && (flags.rows.is_some() || flags.seed.is_some()) {
            return Err(CliError::invalid(
                "--rows and --seed only apply to the timeseries preset",
                "drop them or use --preset timeseries",
            ));
        }
        let rows = flags.rows.unwrap_or(DESK_ROWS);
        if rows < 3 {
            return Err(CliError::invalid(
                format!("time series needs at least 3 rows, got {rows}"),
                "pass --rows 3 or larger",
            ));
        }
        let lags = match preset {
            Some(p) if p.uses_lags() => {
                if flags.lags.is_empty() {
                    p.default_lags()
                } else {
                    flags.lags.clone()
                }
            }
            _ if !flags.lags.is_empty() => {
                return Err(CliError::invalid(
                    "--l only applies to the electricity, electricity-t and motion presets",
                    "drop --l",
                ))
            }
            _ => Vec::new(),
        };
        if lags.contains(&0) {
            return Err(CliError::invalid("lag must be ≥ 1", "pass --l 1 or larger"));
        }
        if command != CommandKind::Preset && lags.len() > 1 {
            return Err(CliError::invalid(
                "several lags given for a single decomposition",
                "pass one --l, or run the preset command for a table",
            ));
        }
        if preset == Some(PresetName::ElectricityT) && lags.len() > 1 {
            return Err(CliError::invalid(
                "electricity-t takes a single history length",
                "pass one --l",
            ));
        }
        if flags.download && !matches!(preset, Some(PresetName::Electricity | PresetName::ElectricityT | PresetName::Motion)) {
            return Err(CliError::invalid(
                "--download only applies to dataset presets",
                "drop --download",
            ));
        }
        if flags.strengthen && matches!(command, CommandKind::Cca | CommandKind::Rapca) {
            return Err(CliError::invalid(
                "--strengthen only affects id, raid and preset runs",
                "drop --strengthen",
            ));
        }

        Ok(RunConfig {
            command,
            input,
            target,
            method: flags.method.into(),
            norm: flags.norm.into(),
            rank_tol: flags.rank_tol,
            seed: flags.seed.unwrap_or(0),
            rows,
            lags,
            data_dir: flags.data_dir,
            out: flags.out,
            format: flags.format,
            strengthen: flags.strengthen,
            download: flags.download,
        })
    }

    fn id_options(&self) -> IdOptions {
        IdOptions {
            strengthen: self.strengthen,
        }
    }

    fn k(&self) -> usize {
        match self.target {
            Some(Target::Rank(k)) => k,
            _ => 0,
        }
    }
}

/// What a successful run produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    /// Text for stdout in the requested format.
    pub summary: String,
    pub reports: Vec<ExperimentReport>,
}

/// Parses arguments, runs, prints, and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match RunConfig::from_cli(cli).and_then(|cfg| run(&cfg)) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            0
        }
        Err(e) => {
            eprintln!("{e}");
            e.code
        }
    }
}

pub fn run(cfg: &RunConfig) -> CliResult<Outcome> {
    std::fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    if cfg.download {
        if let Input::Preset(p) = cfg.input {
            download(p, &cfg.data_dir)?;
        }
    }
    match cfg.command {
        CommandKind::Preset => run_preset(cfg),
        CommandKind::Id => run_id(cfg),
        CommandKind::Raid => run_raid(cfg),
        CommandKind::Rapca => run_rapca(cfg),
        CommandKind::Cca => run_cca(cfg),
    }
}

struct LoadedInput {
    a: Option<Matrix>,
    b: Matrix,
    params: BTreeMap<String, serde_json::Value>,
}

fn load_input(cfg: &RunConfig) -> CliResult<LoadedInput> {
    match &cfg.input {
        Input::Files { a, b } => Ok(LoadedInput {
            a: a.as_deref().map(read_matrix).transpose()?,
            b: read_matrix(b)?,
            params: BTreeMap::new(),
        }),
        Input::Preset(p) => {
            let mut runs = preset_pairs(*p, cfg)?;
            let (params, pair) = runs.next().expect("at least one preset run")?;
            Ok(LoadedInput {
                a: Some(pair.a),
                b: pair.b,
                params,
            })
        }
    }
}

fn rank_tol_for(cfg: &RunConfig, m: &Matrix) -> f64 {
    cfg.rank_tol.unwrap_or_else(|| default_rank_tol(m.rows(), m.cols()))
}

fn metric_json(norm: Norm, value: f64) -> serde_json::Value {
    json!({
        "norm": norm,
        "value": six_sig(value),
        "hex": crate::report::hexfloat::to_hex(value),
    })
}

fn write_json(path: &Path, value: &serde_json::Value) -> CliResult<String> {
    let mut text = serde_json::to_string_pretty(value).expect("json value serializes");
    text.push('\n');
    std::fs::write(path, &text).map_err(|e| Error::io(path, e))?;
    Ok(text)
}

fn run_id(cfg: &RunConfig) -> CliResult<Outcome> {
    let input = load_input(cfg)?;
    let b = &input.b;
    let r = match cfg.target {
        Some(Target::Precision(eps)) => id_fixed_precision_with(b, eps, cfg.id_options())?,
        _ => id_fixed_rank_with(b, cfg.k(), cfg.id_options())?,
    };
    write_binary(&cfg.out.join("p.radm"), r.p())?;
    let error = match cfg.norm {
        Norm::Spectral => r.certificate().achieved_error,
        Norm::Frobenius => b.sub(&matmul(&r.columns_of(b), r.p())?)?.frobenius_norm(),
    };
    let doc = json!({
        "k": r.k(),
        "selected": r.selected(),
        "p_file": "p.radm",
        "certificate": r.certificate(),
        "error": metric_json(cfg.norm, error),
        "params": input.params,
    });
    let text = write_json(&cfg.out.join("id.json"), &doc)?;
    let summary = match cfg.format {
        Format::Json => text,
        Format::Csv => format!(
            "k,error,sigma_next,bound\n{},{},{},{}\n",
            r.k(),
            csv_num(error),
            csv_num(r.certificate().sigma_next),
            csv_num(r.certificate().bound)
        ),
    };
    Ok(Outcome {
        summary,
        reports: Vec::new(),
    })
}

fn run_raid(cfg: &RunConfig) -> CliResult<Outcome> {
    let input = load_input(cfg)?;
    let a = input.a.as_ref().expect("validated");
    let b = &input.b;
    let r = raid_with(a, b, cfg.k(), cfg.method, rank_tol_for(cfg, a), cfg.id_options())?;
    write_binary(&cfg.out.join("p.radm"), r.p())?;
    write_binary(&cfg.out.join("y.radm"), &r.y)?;
    let error = match cfg.norm {
        Norm::Spectral => r.raid_error,
        Norm::Frobenius => r.raid_error_frobenius,
    };
    let doc = json!({
        "k": cfg.k(),
        "method": r.method,
        "selected": r.selected(),
        "p_file": "p.radm",
        "y_file": "y.radm",
        "design_rank": r.design_rank,
        "raid_error": Metric(r.raid_error),
        "raid_error_frobenius": Metric(r.raid_error_frobenius),
        "min_residual": Metric(r.min_residual),
        "error": metric_json(cfg.norm, error),
        "certificate": r.id.certificate(),
        "params": input.params,
    });
    let text = write_json(&cfg.out.join("raid.json"), &doc)?;
    let summary = match cfg.format {
        Format::Json => text,
        Format::Csv => format!(
            "k,method,error,min_residual\n{},{},{},{}\n",
            cfg.k(),
            serde_json::to_value(r.method).expect("method").as_str().unwrap_or_default(),
            csv_num(error),
            csv_num(r.min_residual)
        ),
    };
    Ok(Outcome {
        summary,
        reports: Vec::new(),
    })
}

fn run_rapca(cfg: &RunConfig) -> CliResult<Outcome> {
    let input = load_input(cfg)?;
    let a = input.a.as_ref().expect("validated");
    let r = rapca(a, &input.b, cfg.k(), cfg.method, rank_tol_for(cfg, a))?;
    write_binary(&cfg.out.join("t.radm"), &r.t)?;
    write_binary(&cfg.out.join("v.radm"), &r.v)?;
    write_binary(&cfg.out.join("left.radm"), &r.left)?;
    let error = match cfg.norm {
        Norm::Spectral => r.rapca_error,
        Norm::Frobenius => r.spectrum.iter().skip(cfg.k()).map(|s| s * s).sum::<f64>().sqrt(),
    };
    let doc = json!({
        "k": cfg.k(),
        "method": r.method,
        "sigma": r.sigma,
        "spectrum": r.spectrum,
        "rapca_error": Metric(r.rapca_error),
        "error": metric_json(cfg.norm, error),
        "t_file": "t.radm",
        "v_file": "v.radm",
        "left_file": "left.radm",
        "params": input.params,
    });
    let text = write_json(&cfg.out.join("rapca.json"), &doc)?;
    let summary = match cfg.format {
        Format::Json => text,
        Format::Csv => format!("k,error\n{},{}\n", cfg.k(), csv_num(error)),
    };
    Ok(Outcome {
        summary,
        reports: Vec::new(),
    })
}

fn run_cca(cfg: &RunConfig) -> CliResult<Outcome> {
    let input = load_input(cfg)?;
    let a = input.a.as_ref().expect("validated");
    let b = &input.b;
    let tol = cfg
        .rank_tol
        .unwrap_or_else(|| default_rank_tol(a.rows(), a.cols().max(b.cols())));
    let c = cca_spectrum(a, b, tol)?;
    let doc = json!({
        "sigma": c.sigma,
        "max_unclamped": Metric(c.max_unclamped),
        "params": input.params,
    });
    let text = write_json(&cfg.out.join("cca.json"), &doc)?;
    let summary = match cfg.format {
        Format::Json => text,
        Format::Csv => {
            let mut s = String::from("index,sigma\n");
            for (i, v) in c.sigma.iter().enumerate() {
                let _ = writeln!(s, "{},{}", i + 1, v);
            }
            s
        }
    };
    Ok(Outcome {
        summary,
        reports: Vec::new(),
    })
}

type PresetRun = CliResult<(BTreeMap<String, serde_json::Value>, ExperimentPair)>;

/// Lazily yields one pair per lag so large datasets are sliced one at a time.
fn preset_pairs<'a>(p: PresetName, cfg: &'a RunConfig) -> CliResult<Box<dyn Iterator<Item = PresetRun> + 'a>> {
    let base = |extra: &[(&str, serde_json::Value)]| {
        let mut params = BTreeMap::new();
        params.insert("k".to_string(), json!(cfg.k()));
        params.insert("method".to_string(), json!(cfg.method));
        if cfg.strengthen {
            params.insert("strengthen".to_string(), json!(true));
        }
        if let Some(tol) = cfg.rank_tol {
            params.insert("rank_tol".to_string(), json!(tol));
        }
        for (key, v) in extra {
            params.insert(key.to_string(), v.clone());
        }
        params
    };
    Ok(match p {
        PresetName::Potential => {
            let pair = gen_potential(&ChargeConfig::default()).map_err(CliError::from);
            Box::new(std::iter::once(pair.map(|pair| (base(&[]), pair))))
        }
        PresetName::Timeseries => {
            let pair = gen_timeseries(cfg.rows, cfg.seed).map_err(CliError::from);
            let params = base(&[("m", json!(cfg.rows)), ("seed", json!(cfg.seed))]);
            Box::new(std::iter::once(pair.map(|pair| (params, pair))))
        }
        PresetName::Electricity | PresetName::ElectricityT => {
            let path = cfg.data_dir.join(ELECTRICITY_FILE);
            if !path.exists() {
                return Err(CliError::invalid(
                    format!("dataset not found: {}", path.display()),
                    format!(
                        "rerun with --download, or place {ELECTRICITY_FILE} in the data directory (--data-dir or RAIDKIT_DATA_DIR)"
                    ),
                ));
            }
            let c = load_electricity(&path)?;
            let specs: Vec<LagSpec> = if p == PresetName::Electricity {
                cfg.lags.iter().map(|&l| LagSpec::direct(l, ColumnNormalization::SourceColumns)).collect()
            } else {
                vec![LagSpec::transposed(cfg.lags[0], TRANSPOSED_TARGET_ROWS, ColumnNormalization::SourceColumns)]
            };
            Box::new(specs.into_iter().map(move |spec| {
                let pair = make_lagged_pair(&c, &spec)?;
                Ok((base(&[("l", json!(spec.lag))]), pair))
            }))
        }
        PresetName::Motion => {
            let c = load_motion_source(&cfg.data_dir)?;
            Box::new(cfg.lags.iter().map(move |&l| {
                let pair = make_lagged_pair(&c, &LagSpec::direct(l, ColumnNormalization::PairColumns))?;
                Ok((base(&[("l", json!(l))]), pair))
            }))
        }
    })
}

/// `motion.csv` holds the assembled matrix; otherwise `motion-files.txt`
/// lists the gesture-phase files to concatenate, one per line, relative to
/// the data directory.
fn load_motion_source(dir: &Path) -> CliResult<Matrix> {
    let single = dir.join(MOTION_FILE);
    if single.exists() {
        return Ok(load_motion(&[single])?);
    }
    let list = dir.join(MOTION_LIST);
    if !list.exists() {
        return Err(CliError::invalid(
            format!("no {MOTION_FILE} or {MOTION_LIST} in {}", dir.display()),
            format!("list the gesture-phase files to concatenate in {MOTION_LIST}, one per line"),
        ));
    }
    let text = std::fs::read_to_string(&list).map_err(|e| Error::io(&list, e))?;
    let files: Vec<PathBuf> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| dir.join(l))
        .collect();
    Ok(load_motion(&files)?)
}

fn run_preset(cfg: &RunConfig) -> CliResult<Outcome> {
    let Input::Preset(p) = cfg.input else {
        unreachable!("validated")
    };
    let mut reports = Vec::new();
    for run in preset_pairs(p, cfg)? {
        let (params, pair) = run?;
        let opts = AnalysisOptions {
            k: cfg.k(),
            method: cfg.method,
            rank_tol: rank_tol_for(cfg, &pair.a),
            id: cfg.id_options(),
        };
        let report = analyze(p.as_str(), &pair, params, &opts)?;
        let dir = if p.tabulated() {
            cfg.out.join(format!("l{}", pair.provenance.params["lag"]))
        } else {
            cfg.out.clone()
        };
        report.write_all(&dir)?;
        write_json(&dir.join("provenance.json"), &pair.sidecar_json())?;
        reports.push(report);
    }
    if p.tabulated() {
        let path = cfg.out.join("table.csv");
        std::fs::write(&path, lag_table_csv(&reports)).map_err(|e| Error::io(&path, e))?;
    }
    let summary = match cfg.format {
        Format::Json if reports.len() == 1 => reports[0].to_json(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&reports).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = format!("{}\n", ExperimentReport::metrics_csv_header());
            for r in &reports {
                let _ = writeln!(s, "{}", r.metrics_csv_row());
            }
            s
        }
    };
    Ok(Outcome { summary, reports })
}

/// Fetches and unpacks a dataset archive with `curl` and `unzip`.
fn download(p: PresetName, dir: &Path) -> CliResult<()> {
    let url = match p {
        PresetName::Electricity | PresetName::ElectricityT => ELECTRICITY_URL,
        PresetName::Motion => MOTION_URL,
        _ => return Ok(()),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let archive = dir.join(url.rsplit('/').next().unwrap_or("download.zip"));
    let status = |prog: &str, args: &[&std::ffi::OsStr]| {
        std::process::Command::new(prog)
            .args(args)
            .status()
            .map_err(|e| CliError::invalid(format!("could not run {prog}: {e}"), format!("install {prog} or fetch {url} by hand")))
            .and_then(|s| {
                if s.success() {
                    Ok(())
                } else {
                    Err(CliError::invalid(format!("{prog} failed ({s})"), format!("fetch {url} by hand into {}", dir.display())))
                }
            })
    };
    status("curl", &["-fL".as_ref(), "-o".as_ref(), archive.as_os_str(), url.as_ref()])?;
    status("unzip", &["-o".as_ref(), archive.as_os_str(), "-d".as_ref(), dir.as_os_str()])?;
    if p == PresetName::Motion && !dir.join(MOTION_FILE).exists() && !dir.join(MOTION_LIST).exists() {
        return Err(CliError::invalid(
            "gesture-phase files downloaded, but the session to use is not chosen",
            format!("list the files to concatenate in {}", dir.join(MOTION_LIST).display()),
        ));
    }
    Ok(())
}
