//! Command-line front end for `lpcs`.
//!
//! [`run`] parses an argument vector, performs one subcommand and returns the
//! process exit code: 0 on success, 1 for usage or input errors and 2 for a
//! numerical failure (non-convergence or infeasibility), in which case the
//! diagnostics are still written.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use lpcs::experiments::{
    emit_report, phase_transition, recovery_bound_experiment, recovery_crosscheck, rwp_probability_experiment,
    width_scaling_experiment, BoundConfig, CrosscheckConfig, ExperimentOutput, RwpProbabilityConfig,
    WidthScalingConfig,
};
use lpcs::format::{parse_config, read_matrix, read_text, read_vector, write_text, DataFile, ReportFormat, KIND_SIGNAL, KIND_VECTOR};
use lpcs::properties::{
    nsp_falsify, nsp_to_rwp, recovery_to_rwp_constants, rip_constants_to_rwp, rip_estimate, rwp_search,
    rwp_to_recovery_constants, traditional_to_general_nsp, RipMode, RipSearchConfig, RwpSearchConfig,
};
use lpcs::sensing::{apply, gen_compressible_signal, gen_gaussian_matrix, gen_noise, gen_sparse_signal, MagnitudeModel, NoiseModel, RngStream};
use lpcs::solver::{decode, SolverConfig};
use lpcs::{CsSpaceSparse, Error, NspConstants, PExponent, RecoveryConstants, RecoveryProblem, RwpParams, Signal};

#[derive(Parser, Debug)]
#[command(name = "lpcs", version, about = "Sparse recovery with an l_p residual constraint")]
struct Cli {
    /// Omit the creation timestamp so reruns give byte-identical files.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Cap on worker threads; results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write an m x N standard Gaussian matrix.
    GenMatrix(GenMatrix),
    /// Write a random s-sparse (or compressible) signal.
    GenSignal(GenSignal),
    /// Write y = Phi x + e with ||e||_p = eps.
    Measure(Measure),
    /// Decode min ||x||_1 s.t. ||Phi x - y||_p <= eps.
    Solve(Solve),
    /// Search for a robust width violation.
    Rwp(Rwp),
    /// Estimate RIP_{p,2} constants.
    Rip(Rip),
    /// Search for a robust null space violation.
    Nsp(Nsp),
    /// Map constants between properties and print them.
    Transfer(Transfer),
    /// Monte Carlo Gaussian width of t B_1 ∩ S^{N-1}.
    Width(Width),
    /// Run an experiment from a config file.
    Experiment(Experiment),
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct GenMatrix {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SignalModel {
    Unit,
    Gaussian,
    Compressible,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct GenSignal {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    s: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value = "gaussian")]
    model: SignalModel,
    /// Scale of the dense tail for the compressible model.
    #[arg(long, default_value_t = 0.05)]
    tail: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NoiseKind {
    Gaussian,
    Single,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct Measure {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    signal: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    #[arg(long, default_value = "2")]
    p: PExponent,
    #[arg(long, value_enum, default_value = "gaussian")]
    noise: NoiseKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct Solve {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    y: PathBuf,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    p: PExponent,
    #[arg(long)]
    out: PathBuf,
    /// Solver settings file; the flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    tol_feas: Option<f64>,
    #[arg(long)]
    max_iters: Option<u64>,
    /// Also write the solution as a signal file.
    #[arg(long)]
    solution: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct Rwp {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    p: PExponent,
    #[arg(long)]
    rho: f64,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 50)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct Rip {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    s: usize,
    #[arg(long)]
    p: PExponent,
    /// `enumerate` or `sample:K`.
    #[arg(long, default_value = "enumerate")]
    mode: RipMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct Nsp {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    s: usize,
    #[arg(long)]
    p: PExponent,
    #[arg(long)]
    psi: f64,
    #[arg(long)]
    tau: f64,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum Property {
    Nsp,
    Rip,
    Rwp,
    Recovery,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct Transfer {
    #[arg(long, value_enum)]
    from: Property,
    #[arg(long, value_enum)]
    to: Property,
    #[arg(long, default_value = "2")]
    p: PExponent,
    #[arg(long)]
    s: Option<usize>,
    /// Ambient dimension; defaults to `s`.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    psi: Option<f64>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    c0: Option<f64>,
    #[arg(long)]
    c1: Option<f64>,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct Width {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 2000)]
    draws: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum ExperimentKind {
    WidthScaling,
    Phase,
    Bound,
    RwpProb,
    Crosscheck,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
struct Experiment {
    #[arg(value_enum)]
    kind: ExperimentKind,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Defaults to the extension of `--out`.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numerical(String),
}

type Outcome = std::result::Result<(), Failure>;

/// Error about a specific flag or file.
fn at(what: impl std::fmt::Display) -> impl FnOnce(Error) -> Failure {
    move |e| match e {
        Error::Infeasible { .. } => Failure::Numerical(format!("{what}: {e}")),
        Error::Io { .. } => Failure::Usage(e.to_string()),
        _ => Failure::Usage(format!("{what}: {e}")),
    }
}

/// Error from parameter validation, reported against the flag of the same name.
fn flag_error(e: Error) -> Failure {
    match e {
        Error::InvalidArgument { name, reason } => {
            Failure::Usage(format!("invalid value for --{}: {reason}", name.to_ascii_lowercase()))
        }
        other => at("error")(other),
    }
}

fn file_ctx(flag: &str, path: &Path) -> String {
    format!("{flag} {}", path.display())
}

/// Output paths must have an existing parent directory.
fn check_output(flag: &str, path: &Path) -> Outcome {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
    match parent {
        Some(dir) if !dir.is_dir() => Err(Failure::Usage(format!(
            "{}: directory {} does not exist",
            file_ctx(flag, path),
            dir.display()
        ))),
        _ => Ok(()),
    }
}

fn check_input(flag: &str, path: &Path) -> Outcome {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("{}: no such file", file_ctx(flag, path))))
    }
}

struct Ctx {
    created_at_unix: Option<u64>,
}

impl Ctx {
    /// Pretty JSON object with an optional creation time appended.
    fn write_object(&self, flag: &str, path: &Path, value: impl Serialize) -> Outcome {
        let mut obj = match serde_json::to_value(value) {
            Ok(Value::Object(map)) => map,
            Ok(other) => {
                let mut map = Map::new();
                map.insert("value".into(), other);
                map
            }
            Err(e) => return Err(Failure::Usage(format!("{}: {e}", file_ctx(flag, path)))),
        };
        if let Some(t) = self.created_at_unix {
            obj.insert("createdAtUnix".into(), json!(t));
        }
        let text = serde_json::to_string_pretty(&Value::Object(obj)).expect("JSON values always serialize") + "\n";
        write_text(path, &text).map_err(at(file_ctx(flag, path)))
    }
}

fn gen_matrix(a: GenMatrix) -> Outcome {
    check_output("--out", &a.out)?;
    let phi = gen_gaussian_matrix(a.m, a.n, &RngStream::new(a.seed, 0)).map_err(flag_error)?;
    write_text(&a.out, &DataFile::from_matrix(&phi).to_json()).map_err(at(file_ctx("--out", &a.out)))
}

fn gen_signal(a: GenSignal) -> Outcome {
    check_output("--out", &a.out)?;
    let rng = RngStream::new(a.seed, 0);
    let x = match a.model {
        SignalModel::Unit => gen_sparse_signal(a.n, a.s, &rng, MagnitudeModel::UnitSigns),
        SignalModel::Gaussian => gen_sparse_signal(a.n, a.s, &rng, MagnitudeModel::GaussianAmplitudes),
        SignalModel::Compressible => gen_compressible_signal(a.n, a.s, a.tail, &rng),
    }
    .map_err(flag_error)?;
    let file = DataFile::from_vector(KIND_SIGNAL, x.as_slice(), Some(a.seed));
    write_text(&a.out, &file.to_json()).map_err(at(file_ctx("--out", &a.out)))
}

fn measure(a: Measure) -> Outcome {
    check_input("--matrix", &a.matrix)?;
    check_input("--signal", &a.signal)?;
    check_output("--out", &a.out)?;
    let phi = read_matrix(&a.matrix).map_err(at(file_ctx("--matrix", &a.matrix)))?;
    let x = read_vector(&a.signal)
        .and_then(Signal::new)
        .map_err(at(file_ctx("--signal", &a.signal)))?;
    let mut y = apply(&phi, &x).map_err(at(file_ctx("--signal", &a.signal)))?;
    let model = match a.noise {
        NoiseKind::Gaussian => NoiseModel::GaussianDirection,
        NoiseKind::Single => NoiseModel::SingleCoordinate,
    };
    let e = gen_noise(phi.rows(), a.p, a.eps, &RngStream::new(a.seed, 1), model).map_err(flag_error)?;
    y.iter_mut().zip(&e).for_each(|(yi, ei)| *yi += ei);
    let file = DataFile::from_vector(KIND_VECTOR, &y, Some(a.seed));
    write_text(&a.out, &file.to_json()).map_err(at(file_ctx("--out", &a.out)))
}

fn solve(a: Solve, ctx: &Ctx) -> Outcome {
    check_input("--matrix", &a.matrix)?;
    check_input("--y", &a.y)?;
    if let Some(c) = &a.config {
        check_input("--config", c)?;
    }
    check_output("--out", &a.out)?;
    if let Some(s) = &a.solution {
        check_output("--solution", s)?;
    }
    let phi = read_matrix(&a.matrix).map_err(at(file_ctx("--matrix", &a.matrix)))?;
    let y = read_vector(&a.y).map_err(at(file_ctx("--y", &a.y)))?;
    let mut cfg = match &a.config {
        Some(path) => read_text(path)
            .and_then(|t| parse_config::<SolverConfig>(&t))
            .map_err(at(file_ctx("--config", path)))?,
        None => SolverConfig::default(),
    };
    if let Some(t) = a.tol_feas {
        cfg.feasibility_tol = t;
    }
    if let Some(k) = a.max_iters {
        cfg.max_iterations = k;
    }
    cfg.validate().map_err(|e| match e {
        Error::InvalidArgument { name: "maxIterations", reason } => {
            Failure::Usage(format!("invalid value for --max-iters: {reason}"))
        }
        Error::InvalidArgument { name: "feasibilityTol", reason } => {
            Failure::Usage(format!("invalid value for --tol-feas: {reason}"))
        }
        other => at("solver settings")(other),
    })?;
    let problem = RecoveryProblem::new(phi, y, a.eps, a.p).map_err(|e| match e {
        Error::DimensionMismatch { .. } => at(file_ctx("--y", &a.y))(e),
        other => flag_error(other),
    })?;
    match decode(&problem, &cfg) {
        Ok(r) => {
            let status = if r.converged { "converged" } else { "notConverged" };
            let mut body = serde_json::to_value(&r).expect("results serialize");
            body["status"] = json!(status);
            body["eps"] = json!(a.eps);
            body["p"] = serde_json::to_value(a.p).expect("exponents serialize");
            ctx.write_object("--out", &a.out, body)?;
            if let Some(path) = &a.solution {
                let file = DataFile::from_vector(KIND_SIGNAL, r.solution.as_slice(), None);
                write_text(path, &file.to_json()).map_err(at(file_ctx("--solution", path)))?;
            }
            if r.converged {
                Ok(())
            } else {
                Err(Failure::Numerical(format!(
                    "solver did not converge in {} iterations (feasibility gap {:e})",
                    r.iterations, r.feasibility_gap
                )))
            }
        }
        Err(Error::Infeasible { min_residual, eps }) => {
            ctx.write_object(
                "--out",
                &a.out,
                json!({"status": "infeasible", "minResidual": min_residual, "eps": eps, "p": a.p}),
            )?;
            Err(Failure::Numerical(format!(
                "--eps {eps}: infeasible, smallest attainable residual is at least {min_residual:e}"
            )))
        }
        Err(e) => Err(flag_error(e)),
    }
}

fn rwp(a: Rwp, ctx: &Ctx) -> Outcome {
    check_input("--matrix", &a.matrix)?;
    check_output("--out", &a.out)?;
    let phi = read_matrix(&a.matrix).map_err(at(file_ctx("--matrix", &a.matrix)))?;
    let params = RwpParams::new(a.p, a.rho, a.alpha).map_err(flag_error)?;
    let mut search = RwpSearchConfig::default();
    if let Some(k) = a.iterations {
        search.iterations = k;
    }
    let v = rwp_search(&phi, &params, a.restarts, &RngStream::new(a.seed, 0), &search).map_err(flag_error)?;
    let mut body = json!({
        "p": a.p,
        "rho": a.rho,
        "alpha": a.alpha,
        "minFound": v.min_found,
        "violationCertified": v.violation_certified,
        "restartsUsed": v.restarts_used,
    });
    if v.violation_certified {
        body["witness"] = serde_json::to_value(&v.witness).expect("signals serialize");
    }
    ctx.write_object("--out", &a.out, body)
}

fn rip(a: Rip, ctx: &Ctx) -> Outcome {
    check_input("--matrix", &a.matrix)?;
    check_output("--out", &a.out)?;
    let phi = read_matrix(&a.matrix).map_err(at(file_ctx("--matrix", &a.matrix)))?;
    let est = rip_estimate(&phi, a.s, a.p, a.mode, &RngStream::new(a.seed, 0), &RipSearchConfig::default())
        .map_err(flag_error)?;
    ctx.write_object("--out", &a.out, est)
}

fn nsp(a: Nsp, ctx: &Ctx) -> Outcome {
    check_input("--matrix", &a.matrix)?;
    check_output("--out", &a.out)?;
    let phi = read_matrix(&a.matrix).map_err(at(file_ctx("--matrix", &a.matrix)))?;
    let v = nsp_falsify(&phi, a.s, a.p, a.psi, a.tau, a.trials, &RngStream::new(a.seed, 0)).map_err(flag_error)?;
    let mut body = serde_json::to_value(&v).expect("verdicts serialize");
    body["s"] = json!(a.s);
    body["p"] = json!(a.p);
    body["psi"] = json!(a.psi);
    body["tau"] = json!(a.tau);
    ctx.write_object("--out", &a.out, body)
}

fn need<T: Copy>(flag: &str, v: Option<T>) -> std::result::Result<T, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("missing {flag} for this transfer")))
}

fn to_rwp(a: &Transfer) -> std::result::Result<RwpParams, Failure> {
    match a.from {
        Property::Nsp => {
            let tau = need("--tau", a.tau)?;
            let c = match (a.phi, a.psi) {
                (Some(phi), None) => NspConstants::general(phi, tau),
                (None, Some(psi)) => traditional_to_general_nsp(psi, need("--s", a.s)?, tau),
                (Some(_), Some(_)) => return Err(Failure::Usage("give only one of --phi and --psi".into())),
                (None, None) => return Err(Failure::Usage("missing --psi (with --s) or --phi".into())),
            }
            .map_err(flag_error)?;
            nsp_to_rwp(&c, a.p).map_err(flag_error)
        }
        Property::Rip => rip_constants_to_rwp(need("--mu", a.mu)?, need("--delta", a.delta)?, need("--s", a.s)?, a.p)
            .map_err(flag_error),
        Property::Rwp => RwpParams::new(a.p, need("--rho", a.rho)?, need("--alpha", a.alpha)?).map_err(flag_error),
        Property::Recovery => {
            let c = RecoveryConstants::new(need("--c0", a.c0)?, need("--c1", a.c1)?).map_err(flag_error)?;
            recovery_to_rwp_constants(&c, a.p).map_err(flag_error)
        }
    }
}

fn transfer(a: Transfer) -> Outcome {
    let lines = match a.to {
        Property::Rwp => {
            let r = to_rwp(&a)?;
            vec![("rho", r.rho()), ("alpha", r.alpha())]
        }
        Property::Recovery if a.from == Property::Recovery => {
            let c = RecoveryConstants::new(need("--c0", a.c0)?, need("--c1", a.c1)?).map_err(flag_error)?;
            vec![("c0", c.c0()), ("c1", c.c1())]
        }
        Property::Recovery => {
            let r = to_rwp(&a)?;
            let s = need("--s", a.s)?;
            let space = CsSpaceSparse::new(a.n.unwrap_or(s), s).map_err(flag_error)?;
            let c = rwp_to_recovery_constants(&r, &space).map_err(flag_error)?;
            vec![("c0", c.c0()), ("c1", c.c1())]
        }
        other => {
            return Err(Failure::Usage(format!(
                "--to {}: only rwp and recovery are targets",
                other.to_possible_value().expect("no skipped variants").get_name()
            )))
        }
    };
    for (k, v) in lines {
        println!("{k}={v}");
    }
    Ok(())
}

fn width(a: Width, ctx: &Ctx) -> Outcome {
    check_output("--out", &a.out)?;
    let w = lpcs::experiments::estimate_width(a.n, a.t, a.draws, &RngStream::new(a.seed, 0)).map_err(flag_error)?;
    ctx.write_object("--out", &a.out, w)
}

/// `<stem>.<suffix>.<ext>` next to the primary output.
fn secondary_path(out: &Path, suffix: &str, format: ReportFormat) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}.{}", format.extension()))
}

fn experiment(a: Experiment, ctx: &Ctx) -> Outcome {
    check_input("--config", &a.config)?;
    check_output("--out", &a.out)?;
    let format = match a.format {
        Some(FormatArg::Csv) => ReportFormat::Csv,
        Some(FormatArg::Json) => ReportFormat::Json,
        None => ReportFormat::from_path(&a.out).map_err(at(file_ctx("--out", &a.out)))?,
    };
    let cfg_ctx = file_ctx("--config", &a.config);
    let text = read_text(&a.config).map_err(at(&cfg_ctx))?;
    let mut value: Value = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{cfg_ctx}: {e}")))?;
    if let Some(seed) = a.seed {
        let target = if a.kind == ExperimentKind::Bound { value.get_mut("grid") } else { Some(&mut value) };
        match target.and_then(Value::as_object_mut) {
            Some(obj) => {
                obj.insert("masterSeed".into(), json!(seed));
            }
            None => return Err(Failure::Usage(format!("{cfg_ctx}: expected an object"))),
        }
    }
    let text = value.to_string();
    let output: ExperimentOutput = match a.kind {
        ExperimentKind::WidthScaling => parse_config::<WidthScalingConfig>(&text)
            .and_then(|c| width_scaling_experiment(&c)),
        ExperimentKind::Phase => parse_config(&text).and_then(|c| phase_transition(&c)),
        ExperimentKind::Bound => parse_config::<BoundConfig>(&text).and_then(|c| recovery_bound_experiment(&c)),
        ExperimentKind::RwpProb => {
            parse_config::<RwpProbabilityConfig>(&text).and_then(|c| rwp_probability_experiment(&c))
        }
        ExperimentKind::Crosscheck => parse_config::<CrosscheckConfig>(&text).and_then(|c| recovery_crosscheck(&c)),
    }
    .map_err(at(&cfg_ctx))?;

    let primary = output.primary().experiment_name().to_string();
    for report in &output.reports {
        let name = report.experiment_name();
        let path = match name.strip_prefix(&primary).and_then(|s| s.strip_prefix('.')) {
            Some(suffix) => secondary_path(&a.out, suffix, format),
            None => a.out.clone(),
        };
        emit_report(report, &path, format, ctx.created_at_unix).map_err(at(file_ctx("--out", &path)))?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Outcome {
    let ctx = Ctx {
        created_at_unix: if cli.deterministic {
            None
        } else {
            SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs())
        },
    };
    match cli.command {
        Command::GenMatrix(a) => gen_matrix(a),
        Command::GenSignal(a) => gen_signal(a),
        Command::Measure(a) => measure(a),
        Command::Solve(a) => solve(a, &ctx),
        Command::Rwp(a) => rwp(a, &ctx),
        Command::Rip(a) => rip(a, &ctx),
        Command::Nsp(a) => nsp(a, &ctx),
        Command::Transfer(a) => transfer(a),
        Command::Width(a) => width(a, &ctx),
        Command::Experiment(a) => experiment(a, &ctx),
    }
}

/// Runs the command line `argv` (including the program name) and returns the
/// exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.threads {
        Some(0) => Err(Failure::Usage("invalid value for --threads: must be at least 1".into())),
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(|| dispatch(cli)),
            Err(e) => Err(Failure::Usage(format!("--threads {k}: {e}"))),
        },
        None => dispatch(cli),
    };
    match outcome {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            2
        }
    }
}
