//! Experiment runner, OLS comparison baseline and Dolan–Moré performance
//! profiles.
//!
//! Records CSV columns, in order:
//! `problem_id,solver_id,status,wall_time,error_value,kkt_residual,
//! min_eigenvalue,effective_rank,error_entry_std`. Failed runs leave the
//! metric cells empty. Profile CSV: a `tau` column followed by one `ρ_s(τ)`
//! column per solver.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::{format_value, IoError};
use crate::linalg::{
    cholesky, default_rank_tol, numeric_rank, spectral_decompose, symmetrize, DenseMatrix,
    SpectralFactors,
};
use crate::model::{gram_pair, Method, ProblemInstance, SpdSolution};
use crate::solver_fullrank::{solve_qr_with, solve_spectral_with};
use crate::solver_rankdef::{default_delta, solve_rankdef_with, CompletionChoice, Route};

/// Relative eigenvalue threshold for [`effective_rank`].
pub const EFFECTIVE_RANK_TOL: f64 = 1e-8;
/// Relative eigenvalue floor of the OLS baseline's SPD projection.
pub const BASELINE_CLIP: f64 = 1e-8;
/// Error values below this are treated as equal in error profiles.
pub const ERROR_METRIC_FLOOR: f64 = f64::EPSILON;
pub const DEFAULT_REPETITIONS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverId {
    Qr,
    Spectral,
    RankdefSpectral,
    RankdefCod,
    OlsProjection,
}

impl SolverId {
    pub const ALL: [SolverId; 5] = [
        SolverId::Qr,
        SolverId::Spectral,
        SolverId::RankdefSpectral,
        SolverId::RankdefCod,
        SolverId::OlsProjection,
    ];

    pub fn as_str(self) -> &'static str {
        self.method().as_str()
    }

    pub fn method(self) -> Method {
        match self {
            SolverId::Qr => Method::Qr,
            SolverId::Spectral => Method::Spectral,
            SolverId::RankdefSpectral => Method::RankdefSpectral,
            SolverId::RankdefCod => Method::RankdefCod,
            SolverId::OlsProjection => Method::OlsProjection,
        }
    }

    /// Runs the solver with default tolerances (identity free block for the
    /// rank-deficient routes).
    pub fn run(self, p: &ProblemInstance) -> Result<SpdSolution> {
        let tol = default_rank_tol(p.m(), p.n());
        match self {
            SolverId::Qr => solve_qr_with(p, tol),
            SolverId::Spectral => solve_spectral_with(p, tol),
            SolverId::RankdefSpectral | SolverId::RankdefCod => {
                let route = if self == SolverId::RankdefSpectral {
                    Route::Spectral
                } else {
                    Route::Cod
                };
                let rank = numeric_rank(p.d(), tol);
                let choice = CompletionChoice::identity(p.n() - rank);
                let delta = default_delta(&gram_pair(p).b);
                solve_rankdef_with(p, route, &choice, delta, tol).map(|s| s.solution)
            }
            SolverId::OlsProjection => baseline_ols_projection(p),
        }
    }
}

impl std::str::FromStr for SolverId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        SolverId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| format!("unknown solver {s:?}"))
    }
}

impl std::fmt::Display for SolverId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub problem_id: String,
    pub solver_id: String,
    /// Seconds, minimum over repetitions.
    pub wall_time: f64,
    pub error_value: Option<f64>,
    pub kkt_residual: Option<f64>,
    pub min_eigenvalue: Option<f64>,
    pub effective_rank: Option<usize>,
    pub error_entry_std: Option<f64>,
    pub status: RunStatus,
}

impl RunRecord {
    /// Every column except `wall_time`.
    pub fn metrics_eq(&self, other: &RunRecord) -> bool {
        RunRecord {
            wall_time: 0.0,
            ..self.clone()
        } == RunRecord {
            wall_time: 0.0,
            ..other.clone()
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchProblem {
    pub id: String,
    pub instance: ProblemInstance,
}

/// Number of eigenvalues of `x` above `EFFECTIVE_RANK_TOL·λ_max`.
pub fn effective_rank(x: &DenseMatrix) -> usize {
    let Ok(sf) = spectral_decompose(x) else {
        return 0;
    };
    let Some(&top) = sf.eigenvalues.iter().next() else {
        return 0;
    };
    if top <= 0.0 {
        return 0;
    }
    sf.eigenvalues
        .iter()
        .filter(|&&l| l > EFFECTIVE_RANK_TOL * top)
        .count()
}

/// Population standard deviation of the entries of `DX − T`.
pub fn error_entry_std(p: &ProblemInstance, x: &DenseMatrix) -> f64 {
    let residual = p.d() * x - p.t();
    let count = residual.len() as f64;
    let mean = residual.sum() / count;
    (residual.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / count).sqrt()
}

/// Unconstrained normal-equation solution `A·X = DᵀT`, symmetrized and
/// projected onto the SPD cone by raising eigenvalues to
/// `BASELINE_CLIP·λ_max`.
pub fn baseline_ols_projection(p: &ProblemInstance) -> Result<SpdSolution> {
    let a = gram_pair(p).a;
    let chol = cholesky(&a).map_err(|_| Error::RankDeficient {
        rank: numeric_rank(p.d(), default_rank_tol(p.m(), p.n())),
        n: p.n(),
    })?;
    let x_ols = symmetrize(&chol.solve(&p.d().tr_mul(p.t()))?);
    let sf = spectral_decompose(&x_ols)?;
    let scale = sf
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, l| acc.max(l.abs()));
    let floor = BASELINE_CLIP
        * if sf.eigenvalues[0] > 0.0 {
            sf.eigenvalues[0]
        } else if scale > 0.0 {
            scale
        } else {
            1.0
        };
    let clipped = SpectralFactors {
        eigenvalues: sf.eigenvalues.map(|l| l.max(floor)),
        u: sf.u,
    };
    SpdSolution::evaluate(p, clipped.reconstruct(), Method::OlsProjection)
}

fn run_one(problem: &BenchProblem, solver: SolverId, repetitions: usize) -> RunRecord {
    let mut best = f64::INFINITY;
    let mut outcome = None;
    for _ in 0..repetitions.max(1) {
        let start = Instant::now();
        let result = solver.run(&problem.instance);
        best = best.min(start.elapsed().as_secs_f64());
        outcome = Some(result);
    }
    let base = RunRecord {
        problem_id: problem.id.clone(),
        solver_id: solver.as_str().to_string(),
        wall_time: best,
        error_value: None,
        kkt_residual: None,
        min_eigenvalue: None,
        effective_rank: None,
        error_entry_std: None,
        status: RunStatus::Failed,
    };
    match outcome.expect("at least one repetition") {
        Ok(sol) => RunRecord {
            error_value: Some(sol.error_value),
            kkt_residual: Some(sol.kkt_residual),
            min_eigenvalue: Some(sol.min_eigenvalue),
            effective_rank: Some(effective_rank(&sol.x)),
            error_entry_std: Some(error_entry_std(&problem.instance, &sol.x)),
            status: RunStatus::Ok,
            ..base
        },
        Err(_) => base,
    }
}

fn check_suite(problems: &[BenchProblem], solvers: &[SolverId]) -> Result<()> {
    if problems.is_empty() {
        return Err(Error::Empty("problem suite"));
    }
    if solvers.is_empty() {
        return Err(Error::Empty("solver list"));
    }
    Ok(())
}

fn sort_records(records: &mut [RunRecord]) {
    records.sort_by(|a, b| (&a.problem_id, &a.solver_id).cmp(&(&b.problem_id, &b.solver_id)));
}

/// One record per `(problem, solver)`, sorted by ids. Solver failures are
/// recorded with status `failed`.
pub fn run_suite(
    problems: &[BenchProblem],
    solvers: &[SolverId],
    repetitions: usize,
) -> Result<Vec<RunRecord>> {
    check_suite(problems, solvers)?;
    let mut records: Vec<RunRecord> = problems
        .iter()
        .flat_map(|p| solvers.iter().map(move |&s| run_one(p, s, repetitions)))
        .collect();
    sort_records(&mut records);
    Ok(records)
}

/// [`run_suite`] with problems distributed over the rayon thread pool.
pub fn run_suite_parallel(
    problems: &[BenchProblem],
    solvers: &[SolverId],
    repetitions: usize,
) -> Result<Vec<RunRecord>> {
    check_suite(problems, solvers)?;
    let mut records: Vec<RunRecord> = problems
        .par_iter()
        .flat_map_iter(|p| solvers.iter().map(move |&s| run_one(p, s, repetitions)))
        .collect();
    sort_records(&mut records);
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileMetric {
    Time,
    Error,
}

impl std::str::FromStr for ProfileMetric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "time" => Ok(Self::Time),
            "error" => Ok(Self::Error),
            other => Err(format!("unknown metric {other:?} (expected time or error)")),
        }
    }
}

/// Dolan–Moré profile `ρ_s(τ) = |{p : r_{p,s} ≤ τ}| / n_p` with
/// `r_{p,s} = t_{p,s} / min_s t_{p,s}`; failures have `r = ∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceProfile {
    pub solver_ids: Vec<String>,
    pub problem_ids: Vec<String>,
    /// Breakpoints: the distinct finite ratios, ascending.
    pub taus: Vec<f64>,
    /// `rho[s][k] = ρ_s(taus[k])`.
    pub rho: Vec<Vec<f64>>,
    /// `ratios[s][p]`.
    pub ratios: Vec<Vec<f64>>,
}

impl PerformanceProfile {
    pub fn n_problems(&self) -> usize {
        self.problem_ids.len()
    }

    pub fn solver_index(&self, solver_id: &str) -> Option<usize> {
        self.solver_ids.iter().position(|s| s == solver_id)
    }

    /// Step function value at any `τ`.
    pub fn rho_at(&self, solver: usize, tau: f64) -> f64 {
        let hits = self.ratios[solver].iter().filter(|&&r| r <= tau).count();
        hits as f64 / self.n_problems() as f64
    }

    /// Fraction of problems the solver solved.
    pub fn solved_fraction(&self, solver: usize) -> f64 {
        let hits = self.ratios[solver].iter().filter(|r| r.is_finite()).count();
        hits as f64 / self.n_problems() as f64
    }
}

fn metric_value(record: &RunRecord, metric: ProfileMetric) -> f64 {
    if record.status != RunStatus::Ok {
        return f64::INFINITY;
    }
    match metric {
        ProfileMetric::Time => record.wall_time.max(f64::MIN_POSITIVE),
        ProfileMetric::Error => record
            .error_value
            .map_or(f64::INFINITY, |e| e.max(ERROR_METRIC_FLOOR)),
    }
}

pub fn dolan_more_profile(
    records: &[RunRecord],
    metric: ProfileMetric,
) -> Result<PerformanceProfile> {
    if records.is_empty() {
        return Err(Error::Empty("run records"));
    }
    let problem_ids: Vec<String> = records
        .iter()
        .map(|r| r.problem_id.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let solver_ids: Vec<String> = records
        .iter()
        .map(|r| r.solver_id.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let mut values: BTreeMap<(&str, &str), f64> = BTreeMap::new();
    for r in records {
        let v = metric_value(r, metric);
        values
            .entry((r.problem_id.as_str(), r.solver_id.as_str()))
            .and_modify(|old| *old = old.min(v))
            .or_insert(v);
    }
    let value = |p: &str, s: &str| values.get(&(p, s)).copied().unwrap_or(f64::INFINITY);

    let best: Vec<f64> = problem_ids
        .iter()
        .map(|p| {
            solver_ids
                .iter()
                .map(|s| value(p, s))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let ratios: Vec<Vec<f64>> = solver_ids
        .iter()
        .map(|s| {
            problem_ids
                .iter()
                .zip(&best)
                .map(|(p, &b)| {
                    let v = value(p, s);
                    if v.is_finite() && b.is_finite() {
                        v / b
                    } else {
                        f64::INFINITY
                    }
                })
                .collect()
        })
        .collect();

    let mut taus: Vec<f64> = ratios
        .iter()
        .flatten()
        .copied()
        .filter(|r| r.is_finite())
        .collect();
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    if taus.is_empty() {
        taus.push(1.0);
    }
    let np = problem_ids.len() as f64;
    let rho = ratios
        .iter()
        .map(|rs| {
            taus.iter()
                .map(|&tau| rs.iter().filter(|&&r| r <= tau).count() as f64 / np)
                .collect()
        })
        .collect();
    Ok(PerformanceProfile {
        solver_ids,
        problem_ids,
        taus,
        rho,
        ratios,
    })
}

const RECORD_HEADER: &str =
    "problem_id,solver_id,status,wall_time,error_value,kkt_residual,min_eigenvalue,effective_rank,error_entry_std";

pub fn records_to_csv(records: &[RunRecord]) -> String {
    let opt = |v: Option<f64>| v.map(format_value).unwrap_or_default();
    let mut out = String::from(RECORD_HEADER);
    out.push('\n');
    for r in records {
        let status = match r.status {
            RunStatus::Ok => "ok",
            RunStatus::Failed => "failed",
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.problem_id,
            r.solver_id,
            status,
            format_value(r.wall_time),
            opt(r.error_value),
            opt(r.kkt_residual),
            opt(r.min_eigenvalue),
            r.effective_rank.map(|k| k.to_string()).unwrap_or_default(),
            opt(r.error_entry_std),
        );
    }
    out
}

pub fn records_from_csv(text: &str) -> std::result::Result<Vec<RunRecord>, IoError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == RECORD_HEADER => {}
        _ => {
            return Err(IoError::Parse {
                line: 1,
                message: "missing or unexpected records header".into(),
            })
        }
    }
    let mut records = Vec::new();
    for (i, l) in lines {
        let line = i + 1;
        let bad = |message: String| IoError::Parse { line, message };
        let cells: Vec<&str> = l.split(',').collect();
        if cells.len() != 9 {
            return Err(bad(format!("expected 9 columns, found {}", cells.len())));
        }
        let float = |s: &str| -> std::result::Result<Option<f64>, IoError> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse()
                    .map(Some)
                    .map_err(|_| bad(format!("bad number {s:?}")))
            }
        };
        let status = match cells[2] {
            "ok" => RunStatus::Ok,
            "failed" => RunStatus::Failed,
            other => return Err(bad(format!("bad status {other:?}"))),
        };
        let effective_rank = if cells[7].is_empty() {
            None
        } else {
            Some(
                cells[7]
                    .parse()
                    .map_err(|_| bad(format!("bad rank {:?}", cells[7])))?,
            )
        };
        records.push(RunRecord {
            problem_id: cells[0].to_string(),
            solver_id: cells[1].to_string(),
            status,
            wall_time: float(cells[3])?.ok_or_else(|| bad("missing wall_time".into()))?,
            error_value: float(cells[4])?,
            kkt_residual: float(cells[5])?,
            min_eigenvalue: float(cells[6])?,
            effective_rank,
            error_entry_std: float(cells[8])?,
        });
    }
    Ok(records)
}

pub fn profile_to_csv(profile: &PerformanceProfile) -> String {
    let mut out = String::from("tau");
    for s in &profile.solver_ids {
        out.push(',');
        out.push_str(s);
    }
    out.push('\n');
    for (k, tau) in profile.taus.iter().enumerate() {
        out.push_str(&format_value(*tau));
        for rho in &profile.rho {
            out.push(',');
            out.push_str(&format_value(rho[k]));
        }
        out.push('\n');
    }
    out
}

/// Head-to-head tally of a solver against the OLS baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaselineComparison {
    /// Problems where both runs succeeded.
    pub trials: usize,
    /// Solver's `error_entry_std` strictly below the baseline's.
    pub std_wins: usize,
    /// Solver's `effective_rank` no larger than the baseline's.
    pub rank_wins: usize,
}

impl BaselineComparison {
    pub fn std_win_rate(&self) -> f64 {
        self.std_wins as f64 / self.trials.max(1) as f64
    }

    pub fn rank_win_rate(&self) -> f64 {
        self.rank_wins as f64 / self.trials.max(1) as f64
    }
}

/// Compares `solver` against [`SolverId::OlsProjection`] on the records of a
/// suite that ran both.
pub fn compare_with_baseline(records: &[RunRecord], solver: SolverId) -> BaselineComparison {
    let mut by_problem: BTreeMap<&str, (Option<&RunRecord>, Option<&RunRecord>)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.status == RunStatus::Ok) {
        let slot = by_problem.entry(r.problem_id.as_str()).or_default();
        if r.solver_id == solver.as_str() {
            slot.0 = Some(r);
        } else if r.solver_id == SolverId::OlsProjection.as_str() {
            slot.1 = Some(r);
        }
    }
    let mut out = BaselineComparison {
        trials: 0,
        std_wins: 0,
        rank_wins: 0,
    };
    for (ours, theirs) in by_problem.values() {
        let (Some(ours), Some(theirs)) = (ours, theirs) else {
            continue;
        };
        out.trials += 1;
        if ours.error_entry_std < theirs.error_entry_std {
            out.std_wins += 1;
        }
        if ours.effective_rank <= theirs.effective_rank {
            out.rank_wins += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn timed(problem: &str, solver: &str, t: f64) -> RunRecord {
        RunRecord {
            problem_id: problem.into(),
            solver_id: solver.into(),
            wall_time: t,
            error_value: Some(t),
            kkt_residual: Some(0.0),
            min_eigenvalue: Some(1.0),
            effective_rank: Some(1),
            error_entry_std: Some(0.0),
            status: RunStatus::Ok,
        }
    }

    fn failed(problem: &str, solver: &str) -> RunRecord {
        RunRecord {
            status: RunStatus::Failed,
            error_value: None,
            kkt_residual: None,
            min_eigenvalue: None,
            effective_rank: None,
            error_entry_std: None,
            ..timed(problem, solver, 1.0)
        }
    }

    fn hand_suite() -> Vec<RunRecord> {
        let times = [[1.0, 2.0], [2.0, 2.0], [4.0, 1.0]];
        times
            .iter()
            .enumerate()
            .flat_map(|(p, row)| {
                row.iter()
                    .enumerate()
                    .map(move |(s, &t)| timed(&format!("p{p}"), &format!("s{}", s + 1), t))
            })
            .collect()
    }

    #[test]
    fn hand_computed_profile() {
        let prof = dolan_more_profile(&hand_suite(), ProfileMetric::Time).unwrap();
        assert_eq!(prof.taus, vec![1.0, 2.0, 4.0]);
        assert_eq!(prof.rho[0], vec![2.0 / 3.0, 2.0 / 3.0, 1.0]);
        assert_eq!(prof.rho[1], vec![2.0 / 3.0, 1.0, 1.0]);
        assert_eq!(prof.rho_at(0, 1.0), 2.0 / 3.0);
        assert_eq!(prof.rho_at(1, 2.0), 1.0);
        assert_eq!(prof.rho_at(0, 4.0), 1.0);
        assert_eq!(prof.rho_at(0, 3.999), 2.0 / 3.0);
    }

    #[test]
    fn single_solver_profile_is_one() {
        let records: Vec<_> = (0..4)
            .map(|p| timed(&format!("p{p}"), "only", p as f64 + 0.5))
            .collect();
        let prof = dolan_more_profile(&records, ProfileMetric::Time).unwrap();
        assert_eq!(prof.taus, vec![1.0]);
        assert_eq!(prof.rho[0], vec![1.0]);
    }

    #[test]
    fn always_failing_solver_is_zero() {
        let mut records = Vec::new();
        for p in 0..3 {
            records.push(timed(&format!("p{p}"), "good", 1.0 + p as f64));
            records.push(failed(&format!("p{p}"), "bad"));
        }
        let prof = dolan_more_profile(&records, ProfileMetric::Error).unwrap();
        let bad = prof.solver_index("bad").unwrap();
        assert!(prof.rho[bad].iter().all(|&r| r == 0.0));
        assert_eq!(prof.rho_at(bad, 1e300), 0.0);
        assert_eq!(prof.solved_fraction(bad), 0.0);
    }

    #[test]
    fn empty_records_are_rejected() {
        assert!(matches!(
            dolan_more_profile(&[], ProfileMetric::Time),
            Err(Error::Empty(_))
        ));
        assert!(matches!(
            run_suite(&[], &[SolverId::Qr], 1),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn records_csv_round_trip() {
        let mut records = hand_suite();
        records.push(failed("p9", "s1"));
        let text = records_to_csv(&records);
        assert!(text.starts_with(RECORD_HEADER));
        assert_eq!(records_from_csv(&text).unwrap(), records);
        assert!(records_from_csv("nope\n").is_err());
    }

    #[test]
    fn profile_csv_layout() {
        let prof = dolan_more_profile(&hand_suite(), ProfileMetric::Time).unwrap();
        let text = profile_to_csv(&prof);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("tau,s1,s2"));
        assert_eq!(
            lines.next(),
            Some(format!("1,{0},{0}", format_value(2.0 / 3.0)).as_str())
        );
        assert_eq!(
            lines.next(),
            Some(format!("2,{},1", format_value(2.0 / 3.0)).as_str())
        );
        assert_eq!(lines.next(), Some("4,1,1"));
    }

    #[test]
    fn baseline_on_identity_data_projects_symmetric_part() {
        let t = dmatrix![2.0, 1.0; 0.0, -1.0];
        let p = ProblemInstance::new(DenseMatrix::identity(2, 2), t.clone()).unwrap();
        let sol = baseline_ols_projection(&p).unwrap();
        let sym = symmetrize(&t);
        let sf = spectral_decompose(&sym).unwrap();
        let floor = BASELINE_CLIP * sf.eigenvalues[0];
        let expected = SpectralFactors {
            eigenvalues: sf.eigenvalues.map(|l| l.max(floor)),
            u: sf.u,
        }
        .reconstruct();
        assert!((&sol.x - expected).norm() < 1e-14);
        assert!(sol.min_eigenvalue > 0.0);
    }

    #[test]
    fn baseline_rejects_singular_gram() {
        let p = ProblemInstance::new(dmatrix![1.0, 0.0; 0.0, 0.0], DenseMatrix::identity(2, 2))
            .unwrap();
        assert!(matches!(
            baseline_ols_projection(&p),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn effective_rank_and_entry_std() {
        assert_eq!(effective_rank(&DenseMatrix::identity(3, 3)), 3);
        assert_eq!(
            effective_rank(&DenseMatrix::from_diagonal(&nalgebra::dvector![
                1.0, 1e-9, 1e-7
            ])),
            2
        );
        let p = ProblemInstance::new(DenseMatrix::identity(2, 2), dmatrix![1.0, 0.0; 0.0, 3.0])
            .unwrap();
        // residual entries 0, 0, 0, −2: mean −½, variance ¾
        let s = error_entry_std(&p, &DenseMatrix::identity(2, 2));
        assert!((s - 0.75f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn solver_ids_parse() {
        for id in SolverId::ALL {
            assert_eq!(id.as_str().parse::<SolverId>().unwrap(), id);
        }
        assert!("nope".parse::<SolverId>().is_err());
    }
}
