//! Direct solvers for `min tr(AX + X⁻¹B)` over SPD `X` when `D` has full
//! column rank. Both routes compute the unique SPD root of `XAX = B`.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{
    cholesky, default_rank_tol, numeric_rank, qr_decompose, solve_triangular, spectral_decompose,
    symmetrize, DenseMatrix, LinalgError, Op, Side, SpectralFactors, Uplo,
};
use crate::model::{gram_pair, GramPair, Method, ProblemInstance, SpdSolution};

/// Rejects instances whose data or target matrix is not of full column rank.
fn require_full_rank(p: &ProblemInstance, rank_tol: f64) -> Result<()> {
    let n = p.n();
    let rank = numeric_rank(p.d(), rank_tol);
    if rank < n {
        return Err(Error::RankDeficient { rank, n });
    }
    let target_rank = numeric_rank(p.t(), rank_tol);
    if target_rank < n {
        return Err(LinalgError::NotPositiveDefinite {
            index: target_rank,
            pivot: 0.0,
        }
        .into());
    }
    Ok(())
}

/// Square roots of a spectrum that must be strictly positive.
fn positive_roots(sf: &SpectralFactors) -> Result<DVector<f64>> {
    if let Some((index, &pivot)) = sf.eigenvalues.iter().enumerate().find(|(_, &l)| l <= 0.0) {
        return Err(LinalgError::NotPositiveDefinite { index, pivot }.into());
    }
    Ok(sf.eigenvalues.map(f64::sqrt))
}

/// `X = R⁻¹·(R·B·Rᵀ)^½·R⁻ᵀ` for an upper triangular `R` with `A = RᵀR`.
fn care_root_with_factor(r: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    let core = symmetrize(&(r * b * r.transpose()));
    let sf = spectral_decompose(&core)?;
    let roots = positive_roots(&sf)?;
    let root = SpectralFactors {
        u: sf.u,
        eigenvalues: roots,
    }
    .reconstruct();
    let z = solve_triangular(r, &root, Side::Left, Uplo::Upper, Op::NoTrans)?;
    let x = solve_triangular(r, &z, Side::Right, Uplo::Upper, Op::Trans)?;
    Ok(symmetrize(&x))
}

/// Unique SPD root of `XAX = B` for SPD `A` and `B`, working on the Gram pair
/// directly (`A = RᵀR` from a Cholesky factorization).
pub fn solve_care_special(g: &GramPair) -> Result<DenseMatrix> {
    let r = cholesky(&g.a)?.l.transpose();
    cholesky(&g.b)?;
    care_root_with_factor(&r, &g.b)
}

/// QR route with the default rank tolerance.
pub fn solve_qr(p: &ProblemInstance) -> Result<SpdSolution> {
    solve_qr_with(p, default_rank_tol(p.m(), p.n()))
}

/// QR route: `D = QR`, `R·B·Rᵀ = U·S̃²·Uᵀ`, `X = R⁻¹·U·S̃·Uᵀ·R⁻ᵀ`.
pub fn solve_qr_with(p: &ProblemInstance, rank_tol: f64) -> Result<SpdSolution> {
    require_full_rank(p, rank_tol)?;
    let x = qr_root(p.d(), &gram_pair(p).b)?;
    SpdSolution::evaluate(p, x, Method::Qr)
}

/// QR route without the rank screening, shared with the rank-deficient
/// pipeline for its reduced problem.
pub(crate) fn qr_root(d: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    let r = qr_decompose(d)?.leading_block();
    care_root_with_factor(&r, b)
}

/// Spectral route with the default rank tolerance.
pub fn solve_spectral(p: &ProblemInstance) -> Result<SpdSolution> {
    solve_spectral_with(p, default_rank_tol(p.m(), p.n()))
}

/// Spectral route: `A = U·S²·Uᵀ`, `S·Uᵀ·B·U·S = Ū·S̄²·Ūᵀ`,
/// `X = U·S⁻¹·Ū·S̄·Ūᵀ·S⁻¹·Uᵀ`.
pub fn solve_spectral_with(p: &ProblemInstance, rank_tol: f64) -> Result<SpdSolution> {
    require_full_rank(p, rank_tol)?;
    let g = gram_pair(p);
    let outer = spectral_decompose(&g.a)?;
    let s = positive_roots(&outer)?;

    let mut us = outer.u.clone();
    for (j, sj) in s.iter().enumerate() {
        us.column_mut(j).scale_mut(*sj);
    }
    let core = symmetrize(&(us.transpose() * &g.b * &us));
    let inner = spectral_decompose(&core)?;
    let root = SpectralFactors {
        eigenvalues: positive_roots(&inner)?,
        u: inner.u,
    }
    .reconstruct();

    // U·S⁻¹·root·S⁻¹·Uᵀ
    let mut u_sinv = outer.u;
    for (j, sj) in s.iter().enumerate() {
        u_sinv.column_mut(j).unscale_mut(*sj);
    }
    let x = &u_sinv * root * u_sinv.transpose();
    SpdSolution::evaluate(p, symmetrize(&x), Method::Spectral)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::kkt_residual;
    use nalgebra::dmatrix;

    fn analytic_cases() -> Vec<(ProblemInstance, DenseMatrix, f64)> {
        vec![
            (
                ProblemInstance::new(DenseMatrix::identity(2, 2), dmatrix![2.0, 0.0; 0.0, 3.0])
                    .unwrap(),
                dmatrix![2.0, 0.0; 0.0, 3.0],
                0.0,
            ),
            (
                ProblemInstance::new(dmatrix![1.0; 1.0], dmatrix![1.0; 2.0]).unwrap(),
                dmatrix![2.5f64.sqrt()],
                2.0 * 10f64.sqrt() - 6.0,
            ),
            (
                ProblemInstance::new(DenseMatrix::identity(2, 2), dmatrix![1.0, 1.0; 0.0, 1.0])
                    .unwrap(),
                dmatrix![2.0, 1.0; 1.0, 3.0] / 5f64.sqrt(),
                2.0 * 5f64.sqrt() - 4.0,
            ),
        ]
    }

    #[test]
    fn qr_matches_closed_forms() {
        for (p, x, e) in analytic_cases() {
            let sol = solve_qr(&p).unwrap();
            assert!((&sol.x - &x).norm() < 1e-14, "{} vs {}", sol.x, x);
            assert!((sol.error_value - e).abs() < 1e-13);
            assert_eq!(sol.method, Method::Qr);
            assert!(sol.kkt_residual < 1e-14);
        }
    }

    #[test]
    fn spectral_matches_qr_on_closed_forms() {
        for (p, x, e) in analytic_cases() {
            let a = solve_qr(&p).unwrap();
            let b = solve_spectral(&p).unwrap();
            assert!((&a.x - &b.x).norm() < 1e-10);
            assert!((&b.x - &x).norm() < 1e-14);
            assert!((b.error_value - e).abs() < 1e-13);
        }
    }

    #[test]
    fn spectral_diagonal_data() {
        let p = ProblemInstance::new(dmatrix![1.0, 0.0; 0.0, 2.0], dmatrix![2.0, 0.0; 0.0, 2.0])
            .unwrap();
        let sol = solve_spectral(&p).unwrap();
        assert!((&sol.x - dmatrix![2.0, 0.0; 0.0, 1.0]).norm() < 1e-14);
        assert!(sol.error_value.abs() < 1e-14);
    }

    #[test]
    fn scale_symmetry() {
        for alpha in [1e-3, 0.5, 7.0, 1e4] {
            let m = DenseMatrix::identity(3, 3) * alpha;
            let p = ProblemInstance::new(m.clone(), m).unwrap();
            let sol = solve_spectral(&p).unwrap();
            assert!((&sol.x - DenseMatrix::identity(3, 3)).norm() < 1e-12);
        }
    }

    #[test]
    fn care_examples() {
        let id = DenseMatrix::identity(2, 2);
        let x = solve_care_special(&GramPair {
            a: id.clone(),
            b: id.clone(),
        })
        .unwrap();
        assert!((x - &id).norm() < 1e-15);

        let g = GramPair {
            a: dmatrix![1.0, 0.0; 0.0, 4.0],
            b: dmatrix![4.0, 0.0; 0.0, 4.0],
        };
        let x = solve_care_special(&g).unwrap();
        assert!((&x - dmatrix![2.0, 0.0; 0.0, 1.0]).norm() < 1e-14);
        assert_eq!(kkt_residual(&g, &x), 0.0);

        let bad = GramPair {
            a: dmatrix![1.0, 2.0; 2.0, 1.0],
            b: id,
        };
        assert!(matches!(
            solve_care_special(&bad),
            Err(Error::Linalg(LinalgError::NotPositiveDefinite { .. }))
        ));
    }

    #[test]
    fn rank_errors() {
        let p = ProblemInstance::new(
            dmatrix![1.0, 0.0; 0.0, 0.0; 0.0, 0.0],
            DenseMatrix::identity(3, 2),
        )
        .unwrap();
        assert!(matches!(
            solve_qr(&p),
            Err(Error::RankDeficient { rank: 1, n: 2 })
        ));
        assert!(matches!(
            solve_spectral(&p),
            Err(Error::RankDeficient { .. })
        ));

        let p = ProblemInstance::new(
            DenseMatrix::identity(3, 2),
            dmatrix![1.0, 0.0; 0.0, 0.0; 0.0, 0.0],
        )
        .unwrap();
        assert!(matches!(
            solve_qr(&p),
            Err(Error::Linalg(LinalgError::NotPositiveDefinite { .. }))
        ));
    }
}
