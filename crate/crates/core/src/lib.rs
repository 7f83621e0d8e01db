//! Symmetric positive definite solutions of overdetermined systems `DX ≈ T`
//! where both the data matrix `D` and the target matrix `T` carry error.
//!
//! The error of a candidate SPD `X` is `E = tr((DX − T)ᵀ(D − TX⁻¹))`, which
//! reduces to minimizing `tr(AX + X⁻¹B)` with `A = DᵀD`, `B = TᵀT`. Its
//! minimizer is the SPD root of `XAX = B`.
//!
//! - [`solver_fullrank`]: QR and spectral routes for `rank(D) = n`.
//! - [`solver_rankdef`]: block reduction, consistency test and Cholesky
//!   completion for `rank(D) < n`.
//! - [`probgen`]: seeded full-rank and consistent rank-deficient instances.
//! - [`bench`]: suite runner, OLS baseline and Dolan–Moré profiles.

pub mod bench;
pub mod error;
pub mod io;
pub mod linalg;
pub mod model;
pub mod probgen;
pub mod solver_fullrank;
pub mod solver_rankdef;

pub use error::{Error, Result};
pub use linalg::DenseMatrix;
pub use model::{GramPair, Method, ProblemInstance, SpdSolution};

use linalg::{default_rank_tol, numeric_rank};
use solver_rankdef::{CompletionChoice, Route};

/// Solves with the QR route when `D` has full column rank and with the
/// spectral rank-deficient pipeline (identity free block, default `δ`)
/// otherwise.
pub fn solve_auto(p: &ProblemInstance) -> Result<SpdSolution> {
    let tol = default_rank_tol(p.m(), p.n());
    let rank = numeric_rank(p.d(), tol);
    if rank == p.n() {
        solver_fullrank::solve_qr_with(p, tol)
    } else {
        let delta = solver_rankdef::default_delta(&model::gram_pair(p).b);
        let choice = CompletionChoice::identity(p.n() - rank);
        solver_rankdef::solve_rankdef_with(p, Route::Spectral, &choice, delta, tol)
            .map(|s| s.solution)
    }
}
