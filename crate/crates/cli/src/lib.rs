//! Command implementations behind the `spd-eiv` binary.
//!
//! Exit codes: 0 success, 1 internal error, 2 no SPD solution (inconsistent
//! data), 3 invalid input.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use spd_eiv::bench::{
    compare_with_baseline, dolan_more_profile, profile_to_csv, records_from_csv, records_to_csv,
    run_suite_parallel, BaselineComparison, BenchProblem, ProfileMetric, RunRecord, SolverId,
    DEFAULT_REPETITIONS,
};
use spd_eiv::io::{read_matrix, write_matrix, IoError, MatrixFormat};
use spd_eiv::linalg::{default_rank_tol, numeric_rank, LinalgError};
use spd_eiv::model::gram_pair;
use spd_eiv::probgen::{derive_seed, gen_consistent_rankdef, gen_full_rank, GeneratorSpec};
use spd_eiv::solver_fullrank::{solve_qr_with, solve_spectral_with};
use spd_eiv::solver_rankdef::{
    check_consistency, default_delta, partition, solve_rankdef_with, CompletionChoice,
    ConsistencyReport, Route,
};
use spd_eiv::{DenseMatrix, Method, ProblemInstance};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INTERNAL: u8 = 1;
pub const EXIT_NO_SOLUTION: u8 = 2;
pub const EXIT_INVALID: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] spd_eiv::Error),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use spd_eiv::Error as E;
        match self {
            CliError::Core(E::NoSolution { .. })
            | CliError::Core(E::Linalg(LinalgError::NotPositiveDefinite { .. })) => {
                EXIT_NO_SOLUTION
            }
            CliError::Core(E::Linalg(LinalgError::SingularTriangular { .. }))
            | CliError::Internal(_) => EXIT_INTERNAL,
            CliError::File { source, .. } if source.kind() != std::io::ErrorKind::NotFound => {
                EXIT_INTERNAL
            }
            _ => EXIT_INVALID,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "spd-eiv",
    version,
    about = "SPD solutions of DX ≈ T under errors in variables"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the SPD matrix X and report its quality.
    Solve(SolveArgs),
    /// Write a seeded test instance (D, T and, for full rank, X0).
    Generate(GenerateArgs),
    /// Run the consistency test for rank-deficient data.
    Check(CheckArgs),
    /// Run solvers over a suite and write records and profiles.
    Bench(BenchArgs),
    /// Compute a performance profile from a records CSV.
    Profile(ProfileArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Data matrix D (.mtx or .csv).
    #[arg(long)]
    pub data: PathBuf,
    /// Target matrix T (.mtx or .csv).
    #[arg(long)]
    pub target: PathBuf,
    /// Matrix file format, overriding the extension.
    #[arg(long)]
    pub format: Option<MatrixFormat>,
    /// Relative singular-value threshold for the numeric rank of D.
    #[arg(long)]
    pub rank_tol: Option<f64>,
    /// Consistency threshold on ‖F‖_F (default 1e-8·max(1, ‖TᵀT‖_F)).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Basis for the rank-deficient partition.
    #[arg(long, value_enum, default_value_t = RouteArg::Spectral)]
    pub route: RouteArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    Spectral,
    Cod,
}

impl From<RouteArg> for Route {
    fn from(r: RouteArg) -> Self {
        match r {
            RouteArg::Spectral => Route::Spectral,
            RouteArg::Cod => Route::Cod,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolveMethod {
    /// QR route when D has full column rank, rank-deficient pipeline otherwise.
    Auto,
    Qr,
    Spectral,
    Rankdef,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = SolveMethod::Auto)]
    pub method: SolveMethod,
    /// Lower triangular free block of the completion (default identity).
    #[arg(long)]
    pub free_block: Option<PathBuf>,
    /// Where to write X.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where to write the JSON report (standard output when absent).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    /// Rank of D (defaults to n, a full-rank instance with planted X0).
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Relative Frobenius noise level.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Output directory for D, T and X0.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "mtx")]
    pub format: MatrixFormat,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Where to write the JSON report (standard output when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Directory of instance subdirectories, each holding D and T files.
    #[arg(long, conflicts_with_all = ["count", "m", "n", "rank", "noise"])]
    pub suite: Option<PathBuf>,
    /// Number of generated instances (when no suite directory is given).
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub noise: Option<f64>,
    /// Comma-separated solver ids (default: all).
    #[arg(long, value_delimiter = ',')]
    pub solvers: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_REPETITIONS)]
    pub repetitions: usize,
    /// Output directory for records.csv, profile_*.csv and baseline.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Time,
    Error,
}

impl From<MetricArg> for ProfileMetric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Time => ProfileMetric::Time,
            MetricArg::Error => ProfileMetric::Error,
        }
    }
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// Records CSV written by `bench`.
    #[arg(long)]
    pub records: PathBuf,
    #[arg(long, value_enum, default_value_t = MetricArg::Time)]
    pub metric: MetricArg,
    /// Profile CSV path (standard output when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Outcome of a command: exit code plus optional standard-output text.
#[derive(Debug)]
pub struct Outcome {
    pub code: u8,
    pub stdout: Option<String>,
}

impl Outcome {
    fn ok(stdout: Option<String>) -> Self {
        Self {
            code: EXIT_OK,
            stdout,
        }
    }
}

pub fn run(cli: Cli) -> CliResult<Outcome> {
    match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Generate(a) => cmd_generate(&a),
        Command::Check(a) => cmd_check(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Profile(a) => cmd_profile(&a),
    }
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|source| CliError::File {
        path: path.display().to_string(),
        source,
    })
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::File {
        path: path.display().to_string(),
        source,
    })
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Internal(e.to_string()))
}

/// Writes `text` to `path`, or hands it back for standard output.
fn emit(text: String, path: Option<&Path>) -> CliResult<Option<String>> {
    match path {
        Some(p) => write_text(p, &text).map(|_| None),
        None => Ok(Some(text)),
    }
}

fn positive(name: &str, value: Option<f64>) -> CliResult<Option<f64>> {
    match value {
        Some(v) if !(v > 0.0 && v.is_finite()) => Err(CliError::Invalid(format!(
            "--{name} must be positive, got {v}"
        ))),
        other => Ok(other),
    }
}

struct Loaded {
    problem: ProblemInstance,
    rank_tol: f64,
    delta: f64,
}

fn load(input: &InputArgs) -> CliResult<Loaded> {
    let d = read_matrix(&input.data, input.format)?;
    let t = read_matrix(&input.target, input.format)?;
    let problem = ProblemInstance::new(d, t)?;
    let rank_tol =
        positive("rank-tol", input.rank_tol)?.unwrap_or(default_rank_tol(problem.m(), problem.n()));
    let delta =
        positive("delta", input.delta)?.unwrap_or_else(|| default_delta(&gram_pair(&problem).b));
    Ok(Loaded {
        problem,
        rank_tol,
        delta,
    })
}

#[derive(Debug, Serialize)]
pub struct SolveReport {
    pub method: Option<Method>,
    #[serde(rename = "E")]
    pub error_value: Option<f64>,
    pub kkt_residual: Option<f64>,
    pub min_eigenvalue: Option<f64>,
    pub rank_r: usize,
    pub consistent: bool,
    pub f_norm: f64,
    pub delta: f64,
}

pub fn cmd_solve(args: &SolveArgs) -> CliResult<Outcome> {
    let Loaded {
        problem,
        rank_tol,
        delta,
    } = load(&args.input)?;
    let n = problem.n();
    let rank = numeric_rank(problem.d(), rank_tol);
    let full_rank = rank == n && args.method != SolveMethod::Rankdef;

    let mut report = SolveReport {
        method: None,
        error_value: None,
        kkt_residual: None,
        min_eigenvalue: None,
        rank_r: rank,
        consistent: true,
        f_norm: 0.0,
        delta,
    };
    let solution = if full_rank {
        match args.method {
            SolveMethod::Spectral => solve_spectral_with(&problem, rank_tol)?,
            _ => solve_qr_with(&problem, rank_tol)?,
        }
    } else {
        if matches!(args.method, SolveMethod::Qr | SolveMethod::Spectral) {
            return Err(spd_eiv::Error::RankDeficient { rank, n }.into());
        }
        let route = Route::from(args.input.route);
        let bp = partition(&problem, route, rank_tol)?;
        let consistency = check_consistency(&bp, &gram_pair(&problem).b, delta);
        report.f_norm = consistency.f_norm;
        report.consistent = consistency.consistent;
        if !consistency.consistent {
            eprintln!(
                "spd-eiv: no SPD solution: consistency residual {:e} ≥ δ = {:e}",
                consistency.f_norm, delta
            );
            let stdout = emit(to_json(&report)?, args.report.as_deref())?;
            return Ok(Outcome {
                code: EXIT_NO_SOLUTION,
                stdout,
            });
        }
        let choice = match &args.free_block {
            Some(path) => CompletionChoice::new(read_matrix(path, args.input.format)?)?,
            None => CompletionChoice::identity(n - rank),
        };
        solve_rankdef_with(&problem, route, &choice, delta, rank_tol)?.solution
    };

    report.method = Some(solution.method);
    report.error_value = Some(solution.error_value);
    report.kkt_residual = Some(solution.kkt_residual);
    report.min_eigenvalue = Some(solution.min_eigenvalue);
    if let Some(out) = &args.out {
        write_matrix(out, &solution.x, args.input.format)?;
    }
    Ok(Outcome::ok(emit(
        to_json(&report)?,
        args.report.as_deref(),
    )?))
}

fn extension(format: MatrixFormat) -> &'static str {
    match format {
        MatrixFormat::MatrixMarket => "mtx",
        MatrixFormat::Csv => "csv",
    }
}

fn generate_problem(spec: &GeneratorSpec) -> CliResult<(ProblemInstance, Option<DenseMatrix>)> {
    if spec.r == spec.n {
        let planted = gen_full_rank(spec)?;
        Ok((planted.problem, Some(planted.x0)))
    } else {
        Ok((gen_consistent_rankdef(spec)?, None))
    }
}

pub fn cmd_generate(args: &GenerateArgs) -> CliResult<Outcome> {
    let spec = GeneratorSpec::new(args.m, args.n, args.rank.unwrap_or(args.n), args.seed)
        .with_noise(args.noise);
    let (problem, x0) = generate_problem(&spec)?;
    fs::create_dir_all(&args.out).map_err(|source| CliError::File {
        path: args.out.display().to_string(),
        source,
    })?;
    let ext = extension(args.format);
    write_matrix(
        &args.out.join(format!("D.{ext}")),
        problem.d(),
        Some(args.format),
    )?;
    write_matrix(
        &args.out.join(format!("T.{ext}")),
        problem.t(),
        Some(args.format),
    )?;
    if let Some(x0) = x0 {
        write_matrix(&args.out.join(format!("X0.{ext}")), &x0, Some(args.format))?;
    }
    Ok(Outcome::ok(None))
}

#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub rank_r: usize,
    #[serde(flatten)]
    pub consistency: ConsistencyReport,
}

pub fn cmd_check(args: &CheckArgs) -> CliResult<Outcome> {
    let Loaded {
        problem,
        rank_tol,
        delta,
    } = load(&args.input)?;
    let bp = partition(&problem, args.input.route.into(), rank_tol)?;
    let consistency = check_consistency(&bp, &gram_pair(&problem).b, delta);
    let code = if consistency.consistent {
        EXIT_OK
    } else {
        EXIT_NO_SOLUTION
    };
    let report = CheckReport {
        rank_r: bp.rank,
        consistency,
    };
    Ok(Outcome {
        code,
        stdout: emit(to_json(&report)?, args.out.as_deref())?,
    })
}

/// Subdirectories of `dir` holding `D` and `T` files, in name order.
pub fn load_suite_dir(dir: &Path) -> CliResult<Vec<BenchProblem>> {
    let entries = fs::read_dir(dir).map_err(|source| CliError::File {
        path: dir.display().to_string(),
        source,
    })?;
    let mut dirs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    let mut problems = Vec::new();
    for sub in dirs {
        let find = |stem: &str| {
            ["mtx", "csv"]
                .iter()
                .map(|ext| sub.join(format!("{stem}.{ext}")))
                .find(|p| p.is_file())
        };
        let (Some(d), Some(t)) = (find("D"), find("T")) else {
            continue;
        };
        let id = sub
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let instance = ProblemInstance::new(read_matrix(&d, None)?, read_matrix(&t, None)?)?;
        problems.push(BenchProblem { id, instance });
    }
    Ok(problems)
}

/// `count` generated instances with per-instance seeds `derive_seed(seed, i)`.
pub fn generated_suite(
    count: usize,
    m: usize,
    n: usize,
    rank: usize,
    seed: u64,
    noise: f64,
) -> CliResult<Vec<BenchProblem>> {
    (0..count)
        .map(|i| {
            let spec =
                GeneratorSpec::new(m, n, rank, derive_seed(seed, i as u64)).with_noise(noise);
            let (instance, _) = generate_problem(&spec)?;
            Ok(BenchProblem {
                id: format!("g{i:04}"),
                instance,
            })
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct BaselineEntry {
    pub solver_id: String,
    #[serde(flatten)]
    pub comparison: BaselineComparison,
    pub std_win_rate: f64,
    pub rank_win_rate: f64,
}

/// Head-to-head tallies of every solver in the run against the OLS baseline.
pub fn baseline_report(records: &[RunRecord], solvers: &[SolverId]) -> Vec<BaselineEntry> {
    if !solvers.contains(&SolverId::OlsProjection) {
        return Vec::new();
    }
    solvers
        .iter()
        .filter(|s| **s != SolverId::OlsProjection)
        .map(|&s| {
            let comparison = compare_with_baseline(records, s);
            BaselineEntry {
                solver_id: s.as_str().to_string(),
                std_win_rate: comparison.std_win_rate(),
                rank_win_rate: comparison.rank_win_rate(),
                comparison,
            }
        })
        .collect()
}

pub fn cmd_bench(args: &BenchArgs) -> CliResult<Outcome> {
    let solvers: Vec<SolverId> = if args.solvers.is_empty() {
        SolverId::ALL.to_vec()
    } else {
        let mut ids = args
            .solvers
            .iter()
            .map(|s| s.trim().parse::<SolverId>().map_err(CliError::Invalid))
            .collect::<CliResult<Vec<_>>>()?;
        ids.sort();
        ids.dedup();
        ids
    };
    let problems = match &args.suite {
        Some(dir) => load_suite_dir(dir)?,
        None => {
            let (Some(m), Some(n)) = (args.m, args.n) else {
                return Err(CliError::Invalid(
                    "bench needs --suite or --m and --n".into(),
                ));
            };
            generated_suite(
                args.count.unwrap_or(10),
                m,
                n,
                args.rank.unwrap_or(n),
                args.seed,
                args.noise.unwrap_or(0.0),
            )?
        }
    };
    let records = run_suite_parallel(&problems, &solvers, args.repetitions)?;

    fs::create_dir_all(&args.out).map_err(|source| CliError::File {
        path: args.out.display().to_string(),
        source,
    })?;
    write_text(&args.out.join("records.csv"), &records_to_csv(&records))?;
    for (metric, name) in [
        (ProfileMetric::Time, "profile_time.csv"),
        (ProfileMetric::Error, "profile_error.csv"),
    ] {
        match dolan_more_profile(&records, metric) {
            Ok(profile) => write_text(&args.out.join(name), &profile_to_csv(&profile))?,
            Err(e) => eprintln!("spd-eiv: skipping {name}: {e}"),
        }
    }
    let baseline = baseline_report(&records, &solvers);
    if !baseline.is_empty() {
        write_text(&args.out.join("baseline.json"), &to_json(&baseline)?)?;
    }
    Ok(Outcome::ok(None))
}

pub fn cmd_profile(args: &ProfileArgs) -> CliResult<Outcome> {
    let records = records_from_csv(&read_text(&args.records)?)?;
    let profile = dolan_more_profile(&records, args.metric.into())?;
    Ok(Outcome::ok(emit(
        profile_to_csv(&profile),
        args.out.as_deref(),
    )?))
}
