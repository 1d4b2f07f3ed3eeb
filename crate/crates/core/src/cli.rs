//! Command-line front end: configuration, the six subcommands, and output.
//!
//! Every command is a pure function of the effective [`RunConfig`], which is
//! echoed into each output document.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::Error;
use crate::expansion::{verify_expansion, ExpansionVerdict};
use crate::green::h00_ball;
use crate::identities::{representation_identity_2, representation_identity_4, IdentityReport, PaperConstants, IDENTITY_TOL};
use crate::quadrature::Estimate;
use crate::reduced::{psi_critical_point, psi_eval, CriticalPoint, HoleCoefficient, PsiModel};
use crate::scaling::{fit_scaling, ScalingFit};
use crate::solver::{continuation_in_eps, residual_certificate, ContinuationConfig, NewtonConfig, SolveReport};
use crate::{par, Dimension};

#[derive(Parser, Debug)]
#[command(name = "pierced", version, about = "Critical biharmonic problem on a ball with a shrinking hole")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Constants of the reduced energy and their quadrature estimates.
    Constants,
    /// Green representation identities.
    Identities,
    /// Critical point of the reduced energy.
    Psi,
    /// Nonlinear solves along the ε schedule.
    Solve,
    /// Continuation study of μ_ε against ε.
    Scaling,
    /// Remainder bounds and error-term slope.
    VerifyExpansion,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Constants => "constants",
            Command::Identities => "identities",
            Command::Psi => "psi",
            Command::Solve => "solve",
            Command::Scaling => "scaling",
            Command::VerifyExpansion => "verify-expansion",
        }
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct Flags {
    #[arg(long, global = true)]
    pub dim: Option<u32>,
    /// Explicit ε list, comma separated.
    #[arg(long, global = true, value_delimiter = ',', num_args = 1..)]
    pub eps: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub eps_start: Option<f64>,
    #[arg(long, global = true)]
    pub eps_ratio: Option<f64>,
    #[arg(long, global = true)]
    pub eps_count: Option<usize>,
    #[arg(long, global = true)]
    pub nodes: Option<usize>,
    /// Newton residual tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// TOML file with the same keys as the flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    dim: Option<u32>,
    eps: Option<Vec<f64>>,
    eps_start: Option<f64>,
    eps_ratio: Option<f64>,
    eps_count: Option<usize>,
    nodes: Option<usize>,
    tol: Option<f64>,
    threads: Option<usize>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    d_predict: Option<f64>,
    tolerances: Option<BTreeMap<String, f64>>,
}

pub const DEFAULT_DIM: u32 = 5;
pub const DEFAULT_NODES: usize = 2500;
pub const DEFAULT_EPS_START: f64 = 0.2;
pub const DEFAULT_EPS_RATIO: f64 = 0.7;
pub const DEFAULT_EPS_COUNT: usize = 16;
pub const MIN_NODES: usize = 64;

fn default_tolerances() -> BTreeMap<String, f64> {
    [
        ("newton", 1e-9),
        ("slope", 0.1),
        ("d_variation", 0.25),
        ("d_star", 0.25),
        ("identity", IDENTITY_TOL),
        ("k_n", 0.01),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// Effective configuration after merging flags, file, and defaults.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub dim: u32,
    pub eps_schedule: Vec<f64>,
    pub nodes: usize,
    pub tolerances: BTreeMap<String, f64>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub threads: Option<usize>,
    pub d_predict: Option<f64>,
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(_) => 1,
        }
    }

    pub fn record(&self) -> serde_json::Value {
        let (kind, message) = match self {
            CliError::Usage(m) => ("usage", m.clone()),
            CliError::Compute(e) => ("computation", e.to_string()),
        };
        serde_json::json!({ "error": { "kind": kind, "message": message } })
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Compute(e)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn geometric_schedule(start: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| start * ratio.powi(k as i32)).collect()
}

impl RunConfig {
    pub fn resolve(command: Command, flags: &Flags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| usage(format!("config {}: {e}", path.display())))?;
                toml::from_str::<FileConfig>(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let dim = flags.dim.or(file.dim).unwrap_or(DEFAULT_DIM);
        Dimension::new(dim).map_err(|e| usage(format!("dim: {e}")))?;

        let mut tolerances = default_tolerances();
        for (k, v) in file.tolerances.unwrap_or_default() {
            if !tolerances.contains_key(&k) {
                return Err(usage(format!("tolerances: unknown key `{k}`")));
            }
            tolerances.insert(k, v);
        }
        if let Some(t) = flags.tol.or(file.tol) {
            tolerances.insert("newton".into(), t);
        }
        if let Some((k, v)) = tolerances.iter().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(usage(format!("tolerances.{k}: must be positive, got {v}")));
        }

        let start = flags.eps_start.or(file.eps_start);
        let ratio = flags.eps_ratio.or(file.eps_ratio);
        let count = flags.eps_count.or(file.eps_count);
        let eps_schedule = match flags.eps.clone().or(file.eps) {
            Some(list) => list,
            None if start.is_some() || ratio.is_some() || count.is_some() => {
                let ratio = ratio.unwrap_or(DEFAULT_EPS_RATIO);
                if !(ratio > 0.0 && ratio < 1.0) {
                    return Err(usage(format!("eps_ratio: must lie in (0, 1), got {ratio}")));
                }
                geometric_schedule(start.unwrap_or(DEFAULT_EPS_START), ratio, count.unwrap_or(DEFAULT_EPS_COUNT))
            }
            None => default_schedule(command),
        };
        validate_schedule(command, &eps_schedule)?;

        let nodes = flags.nodes.or(file.nodes).unwrap_or(DEFAULT_NODES);
        if nodes < MIN_NODES {
            return Err(usage(format!("nodes: at least {MIN_NODES} required, got {nodes}")));
        }
        let threads = flags.threads.or(file.threads);
        if threads == Some(0) {
            return Err(usage("threads: must be at least 1"));
        }
        let d_predict = file.d_predict;
        if let Some(d) = d_predict {
            if !(d.is_finite() && d > 0.0) {
                return Err(usage(format!("d_predict: must be positive, got {d}")));
            }
        }
        Ok(RunConfig {
            command: command.name().to_string(),
            dim,
            eps_schedule,
            nodes,
            tolerances,
            output_dir: flags.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from(".")),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            threads,
            d_predict,
        })
    }

    pub fn dimension(&self) -> Dimension {
        Dimension::new(self.dim).expect("validated")
    }

    fn tol(&self, key: &str) -> f64 {
        self.tolerances[key]
    }
}

fn default_schedule(command: Command) -> Vec<f64> {
    match command {
        Command::VerifyExpansion => vec![1e-1, 10f64.powf(-1.5), 1e-2],
        Command::Solve => vec![0.1],
        _ => geometric_schedule(DEFAULT_EPS_START, DEFAULT_EPS_RATIO, DEFAULT_EPS_COUNT),
    }
}

fn validate_schedule(command: Command, eps: &[f64]) -> Result<(), CliError> {
    if eps.is_empty() {
        return Err(usage("eps: empty schedule"));
    }
    if let Some(e) = eps.iter().find(|e| !(e.is_finite() && **e > 0.0 && **e < 1.0)) {
        return Err(usage(format!("eps: entries must lie in (0, 1), got {e}")));
    }
    match command {
        Command::Scaling | Command::Solve => {
            if eps.windows(2).any(|w| !(w[1] < w[0])) {
                return Err(usage("eps: schedule must be strictly decreasing"));
            }
            if eps[0] > 0.2 {
                return Err(usage(format!("eps: first entry must be at most 0.2, got {}", eps[0])));
            }
        }
        Command::VerifyExpansion if eps.len() < 3 => {
            return Err(usage(format!("eps: at least 3 values required for a trend, got {}", eps.len())));
        }
        _ => {}
    }
    Ok(())
}

// ---- output ----

/// Pretty JSON with every float written to 17 significant digits.
struct Sig17<'a>(PrettyFormatter<'a>);

impl Formatter for Sig17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{}", fmt17(value))
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// `d.dddddddddddddddde±x`: 17 significant digits, valid as a JSON number.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17(PrettyFormatter::new()));
    value.serialize(&mut ser).map_err(|e| CliError::Compute(Error::Io(e.to_string())))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Compute(Error::Io(format!("{}: {e}", dir.display()))))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Compute(Error::Io(format!("{}: {e}", path.display()))))?;
    Ok(path)
}

fn csv_string(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let io_err = |e: csv::Error| CliError::Compute(Error::Io(e.to_string()));
    w.write_record(header).map_err(io_err)?;
    for row in rows {
        w.write_record(row).map_err(io_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Compute(Error::Io(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv of ASCII fields"))
}

/// Files written by a command and the JSON document echoed to stdout.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub files: Vec<PathBuf>,
    /// Set when partial results were written before a computation failure.
    pub failure: Option<Error>,
}

// ---- commands ----

#[derive(Serialize)]
struct ConstantsDoc<'a> {
    config: &'a RunConfig,
    n: u32,
    p: f64,
    p_exact: String,
    sigma: f64,
    sigma_exact: String,
    kappa: f64,
    kappa_exact: String,
    alpha_n: f64,
    sphere_measure: f64,
    k_n_measured: f64,
    k_n_closed_form: f64,
    a_n: Estimate,
    b_n: f64,
    b_n_effective: f64,
    c_n: Estimate,
    h00: f64,
    d_star: f64,
    d_star_printed_coefficient: f64,
}

pub fn cmd_constants(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let dim = cfg.dimension();
    let consts = PaperConstants::compute(dim)?;
    let a_n = crate::identities::constant_a_n(dim)?;
    let (_, c_n) = crate::identities::constant_b_n_c_n(dim)?;
    let model = PsiModel::with_constants(dim, consts, h00_ball(dim), HoleCoefficient::Consistent)?;
    let printed = PsiModel { hole: HoleCoefficient::Printed, ..model.clone() };
    let doc = ConstantsDoc {
        config: cfg,
        n: dim.n(),
        p: dim.p(),
        p_exact: dim.p_exact().to_string(),
        sigma: dim.sigma(),
        sigma_exact: dim.sigma_exact().to_string(),
        kappa: dim.kappa(),
        kappa_exact: dim.kappa_exact().to_string(),
        alpha_n: dim.alpha(),
        sphere_measure: dim.sphere_measure(),
        k_n_measured: consts.k_n,
        k_n_closed_form: dim.k_fundamental(),
        a_n,
        b_n: consts.b_n,
        b_n_effective: consts.b_n_effective,
        c_n,
        h00: model.h00,
        d_star: psi_critical_point(&model)?.d_star,
        d_star_printed_coefficient: psi_critical_point(&printed)?.d_star,
    };
    let json = to_json(&doc)?;
    let path = write_file(&cfg.output_dir, "constants.json", &json)?;
    Ok(Outcome { stdout: json, files: vec![path], failure: None })
}

#[derive(Serialize)]
struct IdentityEntry {
    identity: &'static str,
    tau: Vec<f64>,
    report: IdentityReport,
    pass: bool,
}

#[derive(Serialize)]
struct IdentitiesDoc<'a> {
    config: &'a RunConfig,
    entries: Vec<IdentityEntry>,
    k_n_measured: f64,
    k_n_closed_form: f64,
    k_n_relative_error: f64,
    k_n_pass: bool,
    pass: bool,
}

pub fn cmd_identities(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let dim = cfg.dimension();
    let n = dim.n() as usize;
    let taus: Vec<Vec<f64>> = [0.0, 0.3, 1.0]
        .iter()
        .map(|&t| {
            let mut v = vec![0.0; n];
            v[0] = t;
            v
        })
        .collect();
    let tol = cfg.tol("identity");
    let mut entries = Vec::new();
    for tau in &taus {
        for (name, f) in [
            ("representation_4", representation_identity_4 as fn(Dimension, &[f64]) -> crate::Result<IdentityReport>),
            ("representation_2", representation_identity_2),
        ] {
            let report = f(dim, tau)?;
            entries.push(IdentityEntry { identity: name, tau: tau.clone(), pass: report.relative_residual <= tol, report });
        }
    }
    let measured = PaperConstants::compute(dim)?.k_n;
    let closed = dim.k_fundamental();
    let rel = (measured - closed).abs() / closed;
    let k_n_pass = rel <= cfg.tol("k_n");
    let pass = k_n_pass && entries.iter().all(|e| e.pass);
    let doc = IdentitiesDoc { config: cfg, entries, k_n_measured: measured, k_n_closed_form: closed, k_n_relative_error: rel, k_n_pass, pass };
    let json = to_json(&doc)?;
    let path = write_file(&cfg.output_dir, "identities.json", &json)?;
    Ok(Outcome { stdout: json, files: vec![path], failure: None })
}

#[derive(Serialize)]
struct PsiEntry {
    hole_coefficient: HoleCoefficient,
    b: f64,
    critical_point: CriticalPoint,
    psi_at_critical_point: f64,
    /// The printed closed-form expression, which equals `d*^(2N−6)`.
    printed_expression: f64,
}

#[derive(Serialize)]
struct PsiDoc<'a> {
    config: &'a RunConfig,
    entries: Vec<PsiEntry>,
}

pub fn cmd_psi(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let dim = cfg.dimension();
    let nf = dim.nf();
    let mut entries = Vec::new();
    for hole in [HoleCoefficient::Consistent, HoleCoefficient::Printed] {
        let model = PsiModel::new(dim, hole)?;
        let cp = psi_critical_point(&model)?;
        let g0 = nf * (nf - 4.0) * dim.alpha().powi(2);
        entries.push(PsiEntry {
            hole_coefficient: hole,
            b: model.b(),
            psi_at_critical_point: psi_eval(&model, cp.d_star, &cp.tau_star)?,
            printed_expression: (nf - 2.0) * model.b() * g0 / ((nf - 4.0) * model.constants.c_n * model.h00),
            critical_point: cp,
        });
    }
    let json = to_json(&PsiDoc { config: cfg, entries })?;
    let path = write_file(&cfg.output_dir, "psi.json", &json)?;
    Ok(Outcome { stdout: json, files: vec![path], failure: None })
}

fn predicted_d(cfg: &RunConfig) -> Result<f64, CliError> {
    match cfg.d_predict {
        Some(d) => Ok(d),
        None => Ok(psi_critical_point(&PsiModel::new(cfg.dimension(), HoleCoefficient::Consistent)?)?.d_star),
    }
}

fn continuation(cfg: &RunConfig, d: f64) -> Result<crate::solver::ContinuationResult, CliError> {
    let ccfg = ContinuationConfig {
        nodes: cfg.nodes,
        newton: NewtonConfig { tol: cfg.tol("newton"), ..NewtonConfig::default() },
        ..ContinuationConfig::new(d)
    };
    continuation_in_eps(cfg.dimension(), &cfg.eps_schedule, &ccfg).map_err(|e| match e {
        Error::InvalidParam { .. } => usage(e.to_string()),
        other => CliError::Compute(other),
    })
}

fn energy_of(dim: Dimension, rep: &SolveReport) -> crate::Result<f64> {
    let field = rep.u.clone().with_laplacian(rep.w.values.clone())?;
    crate::reduced::energy_eval(dim, &field)
}

#[derive(Serialize)]
struct FailureRecord {
    index: Option<usize>,
    eps: Option<f64>,
    message: String,
}

fn failure_record(e: &Error) -> FailureRecord {
    match e {
        Error::Continuation { index, eps, reason } => FailureRecord { index: Some(*index), eps: Some(*eps), message: reason.clone() },
        other => FailureRecord { index: None, eps: None, message: other.to_string() },
    }
}

#[derive(Serialize)]
struct SolveEntry<'a> {
    #[serde(flatten)]
    report: &'a SolveReport,
    certificate: f64,
    energy: f64,
    d_eps: f64,
}

#[derive(Serialize)]
struct SolveDoc<'a> {
    config: &'a RunConfig,
    d_predict: f64,
    solves: Vec<SolveEntry<'a>>,
    failure: Option<FailureRecord>,
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let dim = cfg.dimension();
    let d = predicted_d(cfg)?;
    let res = continuation(cfg, d)?;
    let mut solves = Vec::new();
    for r in &res.reports {
        solves.push(SolveEntry {
            report: r,
            certificate: residual_certificate(dim, r),
            energy: energy_of(dim, r)?,
            d_eps: r.mu_estimate / r.eps.powf(dim.sigma()),
        });
    }
    let doc = SolveDoc { config: cfg, d_predict: d, solves, failure: res.failure.as_ref().map(failure_record) };
    let json = to_json(&doc)?;
    let mut files = vec![write_file(&cfg.output_dir, "solve.json", &json)?];
    if let Some(last) = res.reports.iter().rev().find(|r| r.converged) {
        let rows: Vec<Vec<String>> = last
            .u
            .grid
            .nodes()
            .iter()
            .zip(&last.u.values)
            .zip(&last.w.values)
            .map(|((r, u), w)| vec![fmt17(*r), fmt17(*u), fmt17(*w)])
            .collect();
        files.push(write_file(&cfg.output_dir, "profile.csv", &csv_string(&["r", "u", "laplacian_u"], &rows)?)?);
    }
    Ok(Outcome { stdout: json, files, failure: res.failure })
}

#[derive(Serialize)]
struct ScalingSummary<'a> {
    config: &'a RunConfig,
    sigma: f64,
    d_star: f64,
    d_predict: f64,
    converged_points: usize,
    all_converged: bool,
    all_positive: bool,
    fit: Option<ScalingFit>,
    slope: Option<f64>,
    relative_slope_error: Option<f64>,
    slope_pass: bool,
    d_eps_smallest: Option<f64>,
    d_star_relative_distance: Option<f64>,
    d_star_pass: bool,
    d_variation_pass: bool,
    pass: bool,
    failure: Option<FailureRecord>,
}

pub fn cmd_scaling(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let dim = cfg.dimension();
    let sigma = dim.sigma();
    let d_star = psi_critical_point(&PsiModel::new(dim, HoleCoefficient::Consistent)?)?.d_star;
    let d = cfg.d_predict.unwrap_or(d_star);
    let res = continuation(cfg, d)?;
    let mut rows = Vec::new();
    for r in &res.reports {
        rows.push(vec![
            fmt17(r.eps),
            fmt17(r.mu_estimate),
            fmt17(r.mu_estimate / r.eps.powf(sigma)),
            r.newton_iterations.to_string(),
            fmt17(r.final_residual),
            fmt17(energy_of(dim, r)?),
        ]);
    }
    let csv = csv_string(&["eps", "mu", "d_eps", "newton_iters", "residual", "energy"], &rows)?;
    let ok: Vec<&SolveReport> = res.reports.iter().filter(|r| r.converged).collect();
    let eps: Vec<f64> = ok.iter().map(|r| r.eps).collect();
    let mu: Vec<f64> = ok.iter().map(|r| r.mu_estimate).collect();
    let fit = fit_scaling(&eps, &mu, sigma).ok();
    let slope_pass = fit.as_ref().is_some_and(|f| f.slope_passes(cfg.tol("slope")));
    let d_eps_smallest = fit.as_ref().and_then(|f| f.d_eps.last().copied());
    let d_star_relative_distance = d_eps_smallest.map(|x| (x - d_star).abs() / d_star);
    let d_star_pass = d_star_relative_distance.is_some_and(|x| x <= cfg.tol("d_star"));
    let d_variation_pass = fit.as_ref().is_some_and(|f| f.d_variation_last_decade <= cfg.tol("d_variation"));
    let all_converged = res.failure.is_none() && res.reports.iter().all(|r| r.converged);
    let all_positive = res.reports.iter().all(|r| !r.positivity_violated);
    let summary = ScalingSummary {
        config: cfg,
        sigma,
        d_star,
        d_predict: d,
        converged_points: ok.len(),
        all_converged,
        all_positive,
        slope: fit.as_ref().map(|f| f.slope),
        relative_slope_error: fit.as_ref().map(|f| f.relative_slope_error),
        fit,
        slope_pass,
        d_eps_smallest,
        d_star_relative_distance,
        d_star_pass,
        d_variation_pass,
        pass: all_converged && all_positive && slope_pass && d_star_pass && d_variation_pass,
        failure: res.failure.as_ref().map(failure_record),
    };
    let json = to_json(&summary)?;
    let files = vec![
        write_file(&cfg.output_dir, "scaling.csv", &csv)?,
        write_file(&cfg.output_dir, "scaling_summary.json", &json)?,
    ];
    Ok(Outcome { stdout: json, files, failure: res.failure })
}

#[derive(Serialize)]
struct ExpansionDoc<'a> {
    config: &'a RunConfig,
    d: f64,
    verdict: ExpansionVerdict,
    pass: bool,
}

pub fn cmd_verify_expansion(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let d = predicted_d(cfg)?;
    let verdict = verify_expansion(cfg.dimension(), &cfg.eps_schedule, d, cfg.nodes)?;
    let pass = verdict.bounded && verdict.e_slope_within_tolerance;
    let json = to_json(&ExpansionDoc { config: cfg, d, verdict, pass })?;
    let path = write_file(&cfg.output_dir, "expansion.json", &json)?;
    Ok(Outcome { stdout: json, files: vec![path], failure: None })
}

pub fn execute(command: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    if let Some(t) = cfg.threads {
        par::set_threads(t);
    }
    match command {
        Command::Constants => cmd_constants(cfg),
        Command::Identities => cmd_identities(cfg),
        Command::Psi => cmd_psi(cfg),
        Command::Solve => cmd_solve(cfg),
        Command::Scaling => cmd_scaling(cfg),
        Command::VerifyExpansion => cmd_verify_expansion(cfg),
    }
}

/// Parses `args`, runs the command, and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                return 2;
            }
            let _ = write!(stdout, "{e}");
            return 0;
        }
    };
    let result = RunConfig::resolve(cli.command, &cli.flags).and_then(|cfg| execute(cli.command, &cfg));
    match result {
        Ok(out) => {
            let _ = stdout.write_all(out.stdout.as_bytes());
            match out.failure {
                Some(e) => {
                    let _ = writeln!(stderr, "{}", CliError::Compute(e).record());
                    1
                }
                None => 0,
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.record());
            e.exit_code()
        }
    }
}
