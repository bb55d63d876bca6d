//! Command-line front end. Every artifact carries `"format": "lieball/1"` and the
//! fully resolved [`RunConfig`], so a run can be replayed from its own output.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::complex_geometry::ComplexPoint;
use crate::error::LieError;
use crate::harmonic_basis::{build_basis, ChainLabel, MAX_BASIS_DEGREE, MAX_BASIS_DIM};
use crate::holo_continuation::{grid_extend, GridRow};
use crate::lf_transform::{
    decay_estimate, expand_with, structural_check, DecayEstimate, ExpandOptions, ExpansionDoc, ExpansionMeta,
    FunctionSpec, LFExpansion, ProfileRow, StructuralReport, DEFAULT_M,
};
use crate::poly::MultiIndex;
use crate::verification::{run_suite, CheckReport, SUITES};

pub const FORMAT_VERSION: &str = "lieball/1";
/// Environment variable capping the worker threads; `0` or unset means one per core.
pub const THREADS_ENV: &str = "LIEBALL_THREADS";

const DEFAULT_RADIUS_K: usize = 30;

#[derive(Parser, Debug)]
#[command(name = "lieball", version, about = "Laplace-Fourier expansions and their continuation to the Lie ball")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Expand a function spec into radial profiles.
    Expand(ExpandArgs),
    /// Evaluate the continued series at complex points.
    Extend(ExtendArgs),
    /// Fit the coefficient decay rate ρ̂.
    EstimateRadius(EstimateArgs),
    /// Run a property suite.
    Verify(VerifyArgs),
    /// Dump the degree-K harmonic basis.
    Basis(BasisArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Args, Debug)]
pub struct ExpandArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long = "K", default_value_t = 10, value_parser = clap::value_parser!(u32).range(0..=MAX_BASIS_DEGREE as i64))]
    pub k: u32,
    #[arg(long = "M", default_value_t = DEFAULT_M as u32, value_parser = clap::value_parser!(u32).range(0..=200))]
    pub m: u32,
    /// Overrides the spec's dimension check.
    #[arg(long)]
    pub n: Option<usize>,
    /// Overrides the spec's radius.
    #[arg(long = "R")]
    pub radius: Option<f64>,
    #[arg(long)]
    pub quad_degree: Option<usize>,
    /// Also fit the decay rate at this τ.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Exact rational arithmetic for polynomial specs.
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub format: OutputFormat,
}

#[derive(Args, Debug)]
pub struct ExtendArgs {
    #[arg(long)]
    pub expansion: PathBuf,
    #[arg(long)]
    pub points: PathBuf,
    /// Attach tail bounds from the decay fit.
    #[arg(long)]
    pub decay: bool,
    /// τ for the decay fit when the expansion carries none.
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub format: OutputFormat,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    #[arg(long, conflicts_with = "expansion", required_unless_present = "expansion")]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub expansion: Option<PathBuf>,
    #[arg(long = "K", value_parser = clap::value_parser!(u32).range(8..=MAX_BASIS_DEGREE as i64))]
    pub k: Option<u32>,
    #[arg(long = "M", value_parser = clap::value_parser!(u32).range(0..=200))]
    pub m: Option<u32>,
    #[arg(long)]
    pub quad_degree: Option<usize>,
    /// Defaults to R/2.
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, default_value = "all", value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
    pub suite: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..=1_000_000))]
    pub trials: u64,
    /// Report path.
    #[arg(long, alias = "out")]
    pub json: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BasisArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..=MAX_BASIS_DIM as i64))]
    pub n: u32,
    #[arg(long = "K", value_parser = clap::value_parser!(u32).range(0..=MAX_BASIS_DEGREE as i64))]
    pub k: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: OutputFormat,
}

/// Fully resolved invocation, embedded in every artifact.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expansion: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "R", skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub m_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quad_degree: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    #[serde(default)]
    pub decay: bool,
    #[serde(default)]
    pub exact: bool,
    #[serde(default)]
    pub format: OutputFormat,
}

impl RunConfig {
    /// Command-line arguments that reproduce this run.
    pub fn to_args(&self) -> Vec<String> {
        let mut a = vec![self.command.clone()];
        let mut push = |flag: &str, v: Option<String>| {
            if let Some(v) = v {
                a.push(format!("--{flag}"));
                a.push(v);
            }
        };
        push("spec", self.spec.clone());
        push("expansion", self.expansion.clone());
        push("points", self.points.clone());
        push("n", self.n.map(|v| v.to_string()));
        push("R", self.radius.map(|v| format!("{v:?}")));
        push("K", self.k_max.map(|v| v.to_string()));
        push("M", self.m_max.map(|v| v.to_string()));
        push("quad-degree", self.quad_degree.map(|v| v.to_string()));
        push("tau", self.tau.map(|v| format!("{v:?}")));
        push("seed", self.seed.map(|v| v.to_string()));
        push("trials", self.trials.map(|v| v.to_string()));
        push("suite", self.suite.clone());
        if self.command == "verify" {
            push("json", self.out.clone());
        } else {
            push("out", self.out.clone());
        }
        if matches!(self.command.as_str(), "expand" | "extend" | "basis") {
            push("format", Some(format!("{:?}", self.format).to_lowercase()));
        }
        if self.decay {
            a.push("--decay".into());
        }
        if self.exact {
            a.push("--exact".into());
        }
        a
    }
}

/// Failure classes with their exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad input: exit 2.
    Validation(String),
    /// A property suite reported failures: exit 1.
    CheckFailed(String),
    /// I/O or numerical failure while producing output: exit 1.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::CheckFailed(_) | CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::CheckFailed(m) => write!(f, "check failed: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<LieError> for CliError {
    fn from(e: LieError) -> Self {
        match e {
            LieError::Evaluation { .. } => CliError::Runtime(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Serialize)]
struct Artifact<'a, T: Serialize> {
    format: &'static str,
    config: &'a RunConfig,
    #[serde(flatten)]
    body: T,
}

#[derive(Deserialize)]
struct StoredExpansion {
    format: Option<String>,
    metadata: ExpansionMeta,
    rows: Vec<ProfileRow>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PointsFile {
    List(Vec<ComplexPoint>),
    Wrapped { points: Vec<ComplexPoint> },
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("{e}");
        return e.exit_code();
    }
    match run(&cli.command) {
        Ok(summary) => {
            print!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Validation(format!("{THREADS_ENV}: expected a non-negative integer, got `{raw}`")))?;
    // a second initialisation in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// Runs one command; the returned text is the stdout summary.
pub fn run(cmd: &Command) -> CliResult<String> {
    match cmd {
        Command::Expand(a) => run_expand(a),
        Command::Extend(a) => run_extend(a),
        Command::EstimateRadius(a) => run_estimate(a),
        Command::Verify(a) => run_verify(a),
        Command::Basis(a) => run_basis(a),
    }
}

fn path_str(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn read_input(what: &str, path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{what}: cannot read {}: {e}", path.display())))
}

fn json_error(what: &str, path: &Path, e: serde_json::Error) -> CliError {
    let msg = strip_position(&e.to_string()).to_string();
    // semantic errors raised after parsing carry no position
    if e.line() == 0 {
        return CliError::Validation(format!("{what} {}: {msg}", path.display()));
    }
    CliError::Validation(format!(
        "{what} {}: {msg} (line {}, column {})",
        path.display(),
        e.line(),
        e.column()
    ))
}

fn strip_position(msg: &str) -> &str {
    msg.rfind(" at line ").map_or(msg, |i| &msg[..i])
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Runtime(format!("writing {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn to_json<T: Serialize>(config: &RunConfig, body: T) -> CliResult<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(&Artifact {
        format: FORMAT_VERSION,
        config,
        body,
    })
    .map_err(|e| CliError::Runtime(format!("serializing output: {e}")))?;
    s.push(b'\n');
    Ok(s)
}

fn csv_header(config: &RunConfig) -> CliResult<String> {
    let cfg = serde_json::to_string(config).map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(format!("# format: {FORMAT_VERSION}\n# config: {cfg}\n"))
}

fn check_tau(tau: f64, radius: f64) -> CliResult<()> {
    if tau > 0.0 && tau < radius {
        Ok(())
    } else {
        Err(CliError::Validation(format!("tau: need 0 < tau < R = {radius}, got {tau}")))
    }
}

fn load_spec(path: &Path, n: Option<usize>, radius: Option<f64>) -> CliResult<FunctionSpec> {
    let text = read_input("spec", path)?;
    let spec = FunctionSpec::from_json(&text).map_err(|e| json_error("spec", path, e))?;
    if let Some(n) = n {
        if n != spec.n() {
            return Err(CliError::Validation(format!("n: --n {n} disagrees with spec n = {}", spec.n())));
        }
    }
    match radius {
        Some(r) if r != spec.radius() => Ok(FunctionSpec::new(spec.n(), r, spec.kind().clone())?),
        _ => Ok(spec),
    }
}

fn load_expansion(path: &Path) -> CliResult<LFExpansion> {
    let text = read_input("expansion", path)?;
    let stored: StoredExpansion = serde_json::from_str(&text).map_err(|e| json_error("expansion", path, e))?;
    if let Some(f) = &stored.format {
        if f != FORMAT_VERSION {
            return Err(CliError::Validation(format!(
                "format: expansion {} has format `{f}`, expected `{FORMAT_VERSION}`",
                path.display()
            )));
        }
    }
    Ok(LFExpansion::from_document(ExpansionDoc {
        metadata: stored.metadata,
        rows: stored.rows,
    })?)
}

#[derive(Serialize)]
struct ExpandBody<'a> {
    #[serde(flatten)]
    doc: &'a ExpansionDoc,
    structural: &'a StructuralReport,
}

/// CSV rows `k,l,m,re,im,fit_residual,source`; floats use shortest round-trip form.
pub fn expansion_csv(doc: &ExpansionDoc) -> String {
    let mut s = String::from("k,l,m,re,im,fit_residual,source\n");
    for row in &doc.rows {
        let source = match row.source {
            crate::lf_transform::ProfileSource::Exact => "exact",
            crate::lf_transform::ProfileSource::Fitted => "fitted",
        };
        for (m, re) in row.coeffs.iter().enumerate() {
            let im = row.coeffs_im.as_ref().map_or(0.0, |v| v[m]);
            let _ = writeln!(s, "{},{},{m},{re:?},{im:?},{:?},{source}", row.k, row.l, row.fit_residual);
        }
    }
    s
}

fn run_expand(a: &ExpandArgs) -> CliResult<String> {
    let spec = load_spec(&a.spec, a.n, a.radius)?;
    let opts = ExpandOptions {
        k_max: a.k as usize,
        m_max: a.m as usize,
        quad_degree: a.quad_degree,
        exact_arithmetic: a.exact,
        ..ExpandOptions::default()
    };
    let config = RunConfig {
        command: "expand".into(),
        spec: Some(path_str(&a.spec)),
        out: Some(path_str(&a.out)),
        n: a.n,
        radius: a.radius,
        k_max: Some(opts.k_max),
        m_max: Some(opts.m_max),
        quad_degree: a.quad_degree,
        tau: a.tau,
        exact: a.exact,
        format: a.format,
        ..RunConfig::default()
    };
    let mut exp = expand_with(&spec, &opts)?;
    if let Some(tau) = a.tau {
        check_tau(tau, spec.radius())?;
        exp.set_decay(Some(decay_estimate(&exp, tau)?));
    }
    let structural = structural_check(&exp);
    let doc = exp.to_document();
    let bytes = match a.format {
        OutputFormat::Json => to_json(
            &config,
            ExpandBody {
                doc: &doc,
                structural: &structural,
            },
        )?,
        OutputFormat::Csv => (csv_header(&config)? + &expansion_csv(&doc)).into_bytes(),
    };
    write_atomic(&a.out, &bytes)?;
    let nonzero = doc.rows.iter().filter(|r| r.coeffs.iter().any(|c| *c != 0.0)).count();
    let d = exp.diagnostics();
    let mut s = format!(
        "expanded {} (n = {}, R = {}) with K = {}, M = {}: {} profiles, {} nonzero, method {}\n",
        spec.kind_name(),
        spec.n(),
        spec.radius(),
        exp.k_max(),
        exp.m_max(),
        doc.rows.len(),
        nonzero,
        d.method
    );
    let _ = writeln!(
        s,
        "structural: {} violations, max odd leakage {:e}",
        structural.violation_count, structural.max_odd_leakage
    );
    if let Some(dec) = exp.decay() {
        let _ = writeln!(s, "rho_hat = {}", fmt_rho(dec.rho_hat));
    }
    let _ = writeln!(s, "wrote {}", a.out.display());
    Ok(s)
}

fn fmt_rho(r: f64) -> String {
    if r.is_finite() {
        format!("{r:.6}")
    } else {
        "inf (band-limited)".into()
    }
}

fn run_extend(a: &ExtendArgs) -> CliResult<String> {
    let mut exp = load_expansion(&a.expansion)?;
    let text = read_input("points", &a.points)?;
    let points = match serde_json::from_str(&text).map_err(|e| json_error("points", &a.points, e))? {
        PointsFile::List(p) | PointsFile::Wrapped { points: p } => p,
    };
    for (i, p) in points.iter().enumerate() {
        p.validate()
            .map_err(|e| CliError::Validation(format!("points[{i}]: {e}")))?;
    }
    let mut tau_used = None;
    if a.decay && exp.decay().is_none() {
        let tau = a.tau.unwrap_or(0.5 * exp.radius());
        check_tau(tau, exp.radius())?;
        exp.set_decay(Some(decay_estimate(&exp, tau)?));
        tau_used = Some(tau);
    }
    let decay: Option<&DecayEstimate> = if a.decay { exp.decay() } else { None };
    let rows = grid_extend(&exp, &points, decay).map_err(|e| match e {
        LieError::DimensionMismatch { expected, got } => {
            CliError::Validation(format!("points: dimension {got}, expansion has n = {expected}"))
        }
        LieError::OutsideLieBall { index, .. } => CliError::Validation(format!("points[{index}]: {e}")),
        other => other.into(),
    })?;
    let config = RunConfig {
        command: "extend".into(),
        expansion: Some(path_str(&a.expansion)),
        points: Some(path_str(&a.points)),
        out: Some(path_str(&a.out)),
        tau: a.tau.or(tau_used),
        decay: a.decay,
        format: a.format,
        ..RunConfig::default()
    };
    let bytes = match a.format {
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                rows: &'a [GridRow],
            }
            to_json(&config, Body { rows: &rows })?
        }
        OutputFormat::Csv => (csv_header(&config)? + &values_csv(exp.n(), &rows)).into_bytes(),
    };
    write_atomic(&a.out, &bytes)?;
    let bounded = rows.iter().filter(|r| r.tail_bound.is_some()).count();
    Ok(format!(
        "evaluated {} points ({} with tail bounds)\nwrote {}\n",
        rows.len(),
        bounded,
        a.out.display()
    ))
}

/// CSV rows `re_1..re_n,im_1..im_n,value_re,value_im,tail_bound`.
pub fn values_csv(n: usize, rows: &[GridRow]) -> String {
    let mut s = String::new();
    let cols: Vec<String> = (1..=n)
        .map(|i| format!("re_{i}"))
        .chain((1..=n).map(|i| format!("im_{i}")))
        .chain(["value_re", "value_im", "tail_bound"].map(String::from))
        .collect();
    s.push_str(&cols.join(","));
    s.push('\n');
    for r in rows {
        for v in r.z.re.iter().chain(&r.z.im) {
            let _ = write!(s, "{v:?},");
        }
        let tb = r.tail_bound.map(|t| format!("{t:?}")).unwrap_or_default();
        let _ = writeln!(s, "{:?},{:?},{tb}", r.value.re, r.value.im);
    }
    s
}

fn run_estimate(a: &EstimateArgs) -> CliResult<String> {
    let mut config = RunConfig {
        command: "estimate-radius".into(),
        out: a.out.as_ref().map(|p| path_str(p)),
        ..RunConfig::default()
    };
    let exp = match (&a.spec, &a.expansion) {
        (Some(spec_path), _) => {
            let spec = load_spec(spec_path, None, None)?;
            let opts = ExpandOptions {
                k_max: a.k.map_or(DEFAULT_RADIUS_K, |k| k as usize),
                m_max: a.m.map_or(DEFAULT_M, |m| m as usize),
                quad_degree: a.quad_degree,
                ..ExpandOptions::default()
            };
            config.spec = Some(path_str(spec_path));
            config.k_max = Some(opts.k_max);
            config.m_max = Some(opts.m_max);
            config.quad_degree = a.quad_degree;
            expand_with(&spec, &opts)?
        }
        (None, Some(path)) => {
            if a.k.is_some() || a.m.is_some() || a.quad_degree.is_some() {
                return Err(CliError::Validation(
                    "K/M/quad-degree: only apply with --spec; the expansion fixes them".into(),
                ));
            }
            config.expansion = Some(path_str(path));
            load_expansion(path)?
        }
        (None, None) => return Err(CliError::Validation("spec: one of --spec or --expansion is required".into())),
    };
    let tau = a.tau.unwrap_or(0.5 * exp.radius());
    check_tau(tau, exp.radius())?;
    config.tau = Some(tau);
    let est = decay_estimate(&exp, tau)?;
    if let Some(out) = &a.out {
        #[derive(Serialize)]
        struct Body<'a> {
            decay: &'a DecayEstimate,
        }
        write_atomic(out, &to_json(&config, Body { decay: &est })?)?;
    }
    let mut s = format!("rho_hat = {}\n", fmt_rho(est.rho_hat));
    let _ = writeln!(
        s,
        "c_hat = {:e}, window = [{}, {}], r_squared = {:.6}, tau = {tau}",
        est.c_hat, est.window.0, est.window.1, est.r_squared_fit
    );
    if let Some(out) = &a.out {
        let _ = writeln!(s, "wrote {}", out.display());
    }
    Ok(s)
}

#[derive(Serialize)]
struct VerifyBody<'a> {
    passed: bool,
    checks: &'a [CheckReport],
}

fn run_verify(a: &VerifyArgs) -> CliResult<String> {
    let trials = a.trials as usize;
    let reports = run_suite(&a.suite, trials, a.seed)?;
    let passed = reports.iter().all(CheckReport::passed);
    let config = RunConfig {
        command: "verify".into(),
        out: a.json.as_ref().map(|p| path_str(p)),
        seed: Some(a.seed),
        trials: Some(trials),
        suite: Some(a.suite.clone()),
        ..RunConfig::default()
    };
    if let Some(path) = &a.json {
        write_atomic(path, &to_json(&config, VerifyBody { passed, checks: &reports })?)?;
    }
    let mut s = String::new();
    for r in &reports {
        let _ = writeln!(
            s,
            "{} {:<32} trials={:<8} failures={:<6} worst_margin={:.6e}",
            if r.passed() { "PASS" } else { "FAIL" },
            r.name,
            r.trials,
            r.failures,
            r.worst_margin
        );
    }
    if passed {
        if let Some(path) = &a.json {
            let _ = writeln!(s, "wrote {}", path.display());
        }
        Ok(s)
    } else {
        print!("{s}");
        let failed = reports.iter().filter(|r| !r.passed()).count();
        Err(CliError::CheckFailed(match &a.json {
            Some(p) => format!("{failed} checks failed; report: {}", p.display()),
            None => format!("{failed} checks failed; rerun with --json PATH for the report"),
        }))
    }
}

#[derive(Serialize)]
struct BasisTerm {
    alpha: MultiIndex,
    coeff: f64,
}

#[derive(Serialize)]
struct BasisMember<'a> {
    /// One-based.
    l: usize,
    label: &'a ChainLabel,
    terms: Vec<BasisTerm>,
}

fn run_basis(a: &BasisArgs) -> CliResult<String> {
    let (n, k) = (a.n as usize, a.k as usize);
    let basis = build_basis(n, k)?;
    let members: Vec<BasisMember> = basis
        .members()
        .iter()
        .zip(basis.labels())
        .enumerate()
        .map(|(i, (m, label))| BasisMember {
            l: i + 1,
            label,
            terms: m
                .terms()
                .iter()
                .map(|(alpha, &coeff)| BasisTerm {
                    alpha: alpha.clone(),
                    coeff,
                })
                .collect(),
        })
        .collect();
    let config = RunConfig {
        command: "basis".into(),
        out: a.out.as_ref().map(|p| path_str(p)),
        n: Some(n),
        k_max: Some(k),
        format: a.format,
        ..RunConfig::default()
    };
    let bytes = match a.format {
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                n: usize,
                k: usize,
                dim: usize,
                members: &'a [BasisMember<'a>],
            }
            to_json(
                &config,
                Body {
                    n,
                    k,
                    dim: members.len(),
                    members: &members,
                },
            )?
        }
        OutputFormat::Csv => {
            let mut s = csv_header(&config)? + "l,alpha,coeff\n";
            for m in &members {
                for t in &m.terms {
                    let alpha: Vec<String> = t.alpha.0.iter().map(u32::to_string).collect();
                    let _ = writeln!(s, "{},{},{:?}", m.l, alpha.join(" "), t.coeff);
                }
            }
            s.into_bytes()
        }
    };
    let summary = format!("degree {k} harmonics in {n} variables: dimension {}\n", members.len());
    match &a.out {
        Some(path) => {
            write_atomic(path, &bytes)?;
            Ok(summary + &format!("wrote {}\n", path.display()))
        }
        None => Ok(String::from_utf8(bytes).expect("utf-8 output")),
    }
}
