//! General solution of `XAX = B` when `rank(D) = r < n`.
//!
//! The data Gram matrix is brought into a basis `U = [U_r | U_{n−r}]` whose
//! first `r` columns span the row space of `D`. In that basis the equation
//! splits into three block equations:
//!
//! ```text
//! X̃_rr·Ā·X̃_rr       = B̃_rr        (reduced full-rank problem)
//! X̃_rr·Ā·X̃_{r,n−r}  = B̃_{r,n−r}   (linear, unique)
//! X̃_{n−r,r}·Ā·X̃_{r,n−r} = B̃_{n−r,n−r}  (consistency)
//! ```
//!
//! where `Ā = D̄ᵀD̄` is `S²` for the spectral route and `RᵀR` for the complete
//! orthogonal route. The trailing block `X̃_{n−r,n−r}` is free; it is fixed by
//! a block Cholesky completion with a caller-chosen lower triangular factor.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    cholesky, complete_orthogonal_decompose, default_rank_tol, numeric_rank, solve_triangular,
    spectral_decompose, symmetrize, DenseMatrix, LinalgError, Op, Side, Uplo,
};
use crate::model::{gram_pair, Method, ProblemInstance, SpdSolution};
use crate::solver_fullrank::qr_root;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Spectral,
    Cod,
}

impl Route {
    pub fn method(self) -> Method {
        match self {
            Route::Spectral => Method::RankdefSpectral,
            Route::Cod => Method::RankdefCod,
        }
    }
}

/// Block view of `B̃ = UᵀBU` split at the numeric rank of `D`.
#[derive(Debug, Clone)]
pub struct BlockPartition {
    pub route: Route,
    pub rank: usize,
    /// Singular values of the reduced data matrix, descending.
    pub s: DVector<f64>,
    /// Reduced `r×r` upper triangular data matrix: `diag(s)` or the COD factor.
    pub reduced_data: DenseMatrix,
    pub basis_u: DenseMatrix,
    pub b_rr: DenseMatrix,
    pub b_rn: DenseMatrix,
    pub b_nn: DenseMatrix,
}

impl BlockPartition {
    pub fn n(&self) -> usize {
        self.basis_u.nrows()
    }

    /// `B̃` reassembled from its blocks.
    pub fn b_tilde(&self) -> DenseMatrix {
        let (n, r) = (self.n(), self.rank);
        let mut out = DenseMatrix::zeros(n, n);
        out.view_mut((0, 0), (r, r)).copy_from(&self.b_rr);
        out.view_mut((0, r), (r, n - r)).copy_from(&self.b_rn);
        out.view_mut((r, 0), (n - r, r))
            .copy_from(&self.b_rn.transpose());
        out.view_mut((r, r), (n - r, n - r)).copy_from(&self.b_nn);
        out
    }

    /// `Ā = D̄ᵀD̄`.
    pub fn a_rr(&self) -> DenseMatrix {
        self.reduced_data.tr_mul(&self.reduced_data)
    }

    fn split(
        route: Route,
        rank: usize,
        s: DVector<f64>,
        reduced_data: DenseMatrix,
        basis_u: DenseMatrix,
        b: &DenseMatrix,
    ) -> Self {
        let n = basis_u.nrows();
        let bt = symmetrize(&(basis_u.transpose() * b * &basis_u));
        Self {
            route,
            rank,
            s,
            reduced_data,
            b_rr: bt.view((0, 0), (rank, rank)).into_owned(),
            b_rn: bt.view((0, rank), (rank, n - rank)).into_owned(),
            b_nn: bt.view((rank, rank), (n - rank, n - rank)).into_owned(),
            basis_u,
        }
    }
}

/// Outcome of the consistency test `‖U_{n−r}ᵀ(B·U_r·B̃_rr⁻¹·U_rᵀ·B − B)‖_F < δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub f_norm: f64,
    pub delta: f64,
    pub consistent: bool,
    pub b_rr_condition: f64,
}

/// The free lower triangular block `L_{n−r,n−r}` of the completion.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionChoice {
    l_free: DenseMatrix,
}

impl CompletionChoice {
    pub fn new(l_free: DenseMatrix) -> Result<Self> {
        if !l_free.is_square() {
            return Err(Error::InvalidInput("free block must be square".into()));
        }
        let k = l_free.nrows();
        for i in 0..k {
            if l_free[(i, i)] == 0.0 || !l_free[(i, i)].is_finite() {
                return Err(Error::InvalidInput(format!(
                    "free block has zero diagonal at {i}"
                )));
            }
            if (i + 1..k).any(|j| l_free[(i, j)] != 0.0) {
                return Err(Error::InvalidInput(
                    "free block must be lower triangular".into(),
                ));
            }
        }
        Ok(Self { l_free })
    }

    pub fn identity(size: usize) -> Self {
        Self {
            l_free: DenseMatrix::identity(size, size),
        }
    }

    pub fn l_free(&self) -> &DenseMatrix {
        &self.l_free
    }
}

/// Relative residuals of the three block equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockResiduals {
    /// `‖X̃_rr·Ā·X̃_rr − B̃_rr‖_F / ‖B̃_rr‖_F`
    pub leading: f64,
    /// `‖X̃_rr·Ā·X̃_{r,n−r} − B̃_{r,n−r}‖_F / ‖B̃‖_F`
    pub coupling: f64,
    /// `‖X̃_{n−r,r}·Ā·X̃_{r,n−r} − B̃_{n−r,n−r}‖_F / ‖B̃‖_F`
    pub trailing: f64,
}

#[derive(Debug, Clone)]
pub struct RankdefSolution {
    pub solution: SpdSolution,
    pub partition: BlockPartition,
    pub consistency: ConsistencyReport,
    /// `X̃ = UᵀXU`.
    pub x_tilde: DenseMatrix,
    pub residuals: BlockResiduals,
}

impl RankdefSolution {
    pub fn x_rr(&self) -> DenseMatrix {
        let r = self.partition.rank;
        self.x_tilde.view((0, 0), (r, r)).into_owned()
    }

    pub fn x_rn(&self) -> DenseMatrix {
        let (r, n) = (self.partition.rank, self.partition.n());
        self.x_tilde.view((0, r), (r, n - r)).into_owned()
    }
}

/// `δ = 1e-8·max(1, ‖B‖_F)`.
pub fn default_delta(b: &DenseMatrix) -> f64 {
    1e-8 * b.norm().max(1.0)
}

/// Partition from the spectral decomposition `A = U·diag(S², 0)·Uᵀ`.
pub fn partition_spectral(p: &ProblemInstance, rank_tol: f64) -> Result<BlockPartition> {
    let rank = numeric_rank(p.d(), rank_tol);
    let g = gram_pair(p);
    let sf = spectral_decompose(&g.a)?;
    let leading = sf.eigenvalues.rows(0, rank);
    if let Some((index, &pivot)) = leading.iter().enumerate().find(|(_, &l)| l <= 0.0) {
        // The rank tolerance is finer than the Gram spectrum can resolve.
        return Err(LinalgError::NotPositiveDefinite { index, pivot }.into());
    }
    let s = leading.map(f64::sqrt);
    let reduced = DenseMatrix::from_diagonal(&s);
    Ok(BlockPartition::split(
        Route::Spectral,
        rank,
        s,
        reduced,
        sf.u,
        &g.b,
    ))
}

/// Partition from the complete orthogonal decomposition
/// `D = U·[[R, 0], [0, 0]]·Vᵀ`, using `V` as the basis and `R` as reduced data.
pub fn partition_cod(p: &ProblemInstance, rank_tol: f64) -> Result<BlockPartition> {
    let cod = complete_orthogonal_decompose(p.d(), rank_tol);
    let g = gram_pair(p);
    let s = if cod.rank == 0 {
        DVector::zeros(0)
    } else {
        cod.r_block.clone().singular_values().sorted_desc()
    };
    Ok(BlockPartition::split(
        Route::Cod,
        cod.rank,
        s,
        cod.r_block,
        cod.v,
        &g.b,
    ))
}

trait SortedDesc {
    fn sorted_desc(self) -> Self;
}

impl SortedDesc for DVector<f64> {
    fn sorted_desc(self) -> Self {
        let mut v: Vec<f64> = self.iter().copied().collect();
        v.sort_by(|a, b| b.total_cmp(a));
        DVector::from_vec(v)
    }
}

pub fn partition(p: &ProblemInstance, route: Route, rank_tol: f64) -> Result<BlockPartition> {
    match route {
        Route::Spectral => partition_spectral(p, rank_tol),
        Route::Cod => partition_cod(p, rank_tol),
    }
}

/// Consistency test. A singular or indefinite `B̃_rr` is reported as
/// inconsistent with infinite `f_norm` and condition number.
pub fn check_consistency(bp: &BlockPartition, b: &DenseMatrix, delta: f64) -> ConsistencyReport {
    let (n, r) = (bp.n(), bp.rank);
    let u_r = bp.basis_u.columns(0, r);
    let u_n = bp.basis_u.columns(r, n - r);
    let b_rr = symmetrize(&(u_r.transpose() * b * u_r));

    let infinite = ConsistencyReport {
        f_norm: f64::INFINITY,
        delta,
        consistent: false,
        b_rr_condition: f64::INFINITY,
    };
    let b_rr_condition = if r == 0 {
        1.0
    } else {
        match spectral_decompose(&b_rr) {
            Ok(sf) => {
                let (hi, lo) = (sf.eigenvalues[0], sf.eigenvalues[r - 1]);
                if lo > 0.0 {
                    hi / lo
                } else {
                    return infinite;
                }
            }
            Err(_) => return infinite,
        }
    };
    let chol = match cholesky(&b_rr) {
        Ok(c) => c,
        Err(_) => return infinite,
    };
    let f_norm = if n == r {
        0.0
    } else {
        let ur_b = u_r.transpose() * b;
        let projected = match chol.solve(&ur_b) {
            Ok(m) => b * u_r * m,
            Err(_) => return infinite,
        };
        (u_n.transpose() * (projected - b)).norm()
    };
    ConsistencyReport {
        f_norm,
        delta,
        consistent: f_norm < delta,
        b_rr_condition,
    }
}

/// The reduced full-rank problem `(D̄, T̄)` with `T̄ᵀT̄ = B̃_rr` (upper
/// Cholesky factor).
pub fn reduced_problem(bp: &BlockPartition) -> Result<ProblemInstance> {
    if bp.rank == 0 {
        return Err(Error::InvalidInput(
            "reduced problem is empty for rank 0".into(),
        ));
    }
    let t_bar = cholesky(&bp.b_rr)?.l.transpose();
    ProblemInstance::new(bp.reduced_data.clone(), t_bar)
}

/// Rank-deficient solver with the default rank tolerance.
pub fn solve_rankdef(
    p: &ProblemInstance,
    route: Route,
    choice: &CompletionChoice,
    delta: f64,
) -> Result<RankdefSolution> {
    solve_rankdef_with(p, route, choice, delta, default_rank_tol(p.m(), p.n()))
}

pub fn solve_rankdef_with(
    p: &ProblemInstance,
    route: Route,
    choice: &CompletionChoice,
    delta: f64,
    rank_tol: f64,
) -> Result<RankdefSolution> {
    let bp = partition(p, route, rank_tol)?;
    let g = gram_pair(p);
    let consistency = check_consistency(&bp, &g.b, delta);
    if !consistency.consistent {
        return Err(Error::NoSolution {
            f_norm: consistency.f_norm,
            delta,
        });
    }
    let (n, r) = (bp.n(), bp.rank);
    if choice.l_free.nrows() != n - r {
        return Err(Error::InvalidInput(format!(
            "free block must be {k}×{k} for rank {r}, got {}×{}",
            choice.l_free.nrows(),
            choice.l_free.ncols(),
            k = n - r
        )));
    }

    let mut x_tilde = DenseMatrix::zeros(n, n);
    if r > 0 {
        let reduced = reduced_problem(&bp)?;
        let x_rr = qr_root(reduced.d(), &gram_pair(&reduced).b)?;

        // X̃_{r,n−r} = Ā⁻¹·X̃_rr⁻¹·B̃_{r,n−r} with Ā = D̄ᵀD̄, D̄ upper triangular.
        let chol_rr = cholesky(&x_rr)?;
        let y = chol_rr.solve(&bp.b_rn)?;
        let z = solve_triangular(&bp.reduced_data, &y, Side::Left, Uplo::Upper, Op::Trans)?;
        let x_rn = solve_triangular(&bp.reduced_data, &z, Side::Left, Uplo::Upper, Op::NoTrans)?;

        // X̃_{r,n−r} = L_rr·L_{n−r,r}ᵀ
        let l_nr_t = solve_triangular(&chol_rr.l, &x_rn, Side::Left, Uplo::Lower, Op::NoTrans)?;
        let x_nn = l_nr_t.tr_mul(&l_nr_t) + &choice.l_free * choice.l_free.transpose();

        x_tilde.view_mut((0, 0), (r, r)).copy_from(&x_rr);
        x_tilde.view_mut((0, r), (r, n - r)).copy_from(&x_rn);
        x_tilde
            .view_mut((r, 0), (n - r, r))
            .copy_from(&x_rn.transpose());
        x_tilde.view_mut((r, r), (n - r, n - r)).copy_from(&x_nn);
    } else {
        x_tilde.copy_from(&(&choice.l_free * choice.l_free.transpose()));
    }
    let x_tilde = symmetrize(&x_tilde);

    let residuals = block_residuals(&bp, &x_tilde);
    let x = &bp.basis_u * &x_tilde * bp.basis_u.transpose();
    let solution = SpdSolution::evaluate(p, x, route.method())?;
    Ok(RankdefSolution {
        solution,
        partition: bp,
        consistency,
        x_tilde,
        residuals,
    })
}

pub fn block_residuals(bp: &BlockPartition, x_tilde: &DenseMatrix) -> BlockResiduals {
    let (n, r) = (bp.n(), bp.rank);
    let a_rr = bp.a_rr();
    let x_rr = x_tilde.view((0, 0), (r, r));
    let x_rn = x_tilde.view((0, r), (r, n - r));
    let b_norm = bp.b_tilde().norm().max(f64::MIN_POSITIVE);
    let rel = |num: f64, den: f64| {
        if num == 0.0 {
            0.0
        } else {
            num / den.max(f64::MIN_POSITIVE)
        }
    };
    BlockResiduals {
        leading: rel((x_rr * &a_rr * x_rr - &bp.b_rr).norm(), bp.b_rr.norm()),
        coupling: rel((x_rr * &a_rr * x_rn - &bp.b_rn).norm(), b_norm),
        trailing: rel((x_rn.transpose() * &a_rr * x_rn - &bp.b_nn).norm(), b_norm),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn diag_instance(t22: f64) -> ProblemInstance {
        ProblemInstance::new(dmatrix![1.0, 0.0; 0.0, 0.0], dmatrix![2.0, 0.0; 0.0, t22]).unwrap()
    }

    #[test]
    fn spectral_partition_of_diagonal_instance() {
        let bp = partition_spectral(&diag_instance(0.0), 1e-10).unwrap();
        assert_eq!(bp.rank, 1);
        assert_eq!(bp.s.as_slice(), &[1.0]);
        assert!((bp.b_rr[(0, 0)] - 4.0).abs() < 1e-15);
        assert!(bp.b_rn[(0, 0)].abs() < 1e-15);
        assert!(bp.b_nn[(0, 0)].abs() < 1e-15);
    }

    #[test]
    fn cod_partition_of_diagonal_instance() {
        let bp = partition_cod(&diag_instance(0.0), 1e-10).unwrap();
        assert_eq!(bp.rank, 1);
        assert!((bp.s[0] - 1.0).abs() < 1e-15);
        assert!((bp.b_rr[(0, 0)] - 4.0).abs() < 1e-15);
        assert!(bp.b_nn[(0, 0)].abs() < 1e-15);
    }

    #[test]
    fn full_rank_partition_is_degenerate() {
        let p = ProblemInstance::new(
            dmatrix![2.0, 1.0; 0.0, 1.0; 1.0, 0.0],
            DenseMatrix::identity(3, 2),
        )
        .unwrap();
        for route in [Route::Spectral, Route::Cod] {
            let bp = partition(&p, route, 1e-10).unwrap();
            assert_eq!(bp.rank, 2);
            assert_eq!(bp.b_nn.shape(), (0, 0));
            assert_eq!(bp.b_rn.shape(), (2, 0));
            let report = check_consistency(&bp, &gram_pair(&p).b, 1e-8);
            assert_eq!(report.f_norm, 0.0);
            assert!(report.consistent);
        }
    }

    #[test]
    fn zero_data_puts_everything_in_trailing_block() {
        let p =
            ProblemInstance::new(DenseMatrix::zeros(3, 2), DenseMatrix::identity(3, 2)).unwrap();
        let bp = partition_cod(&p, 1e-10).unwrap();
        assert_eq!(bp.rank, 0);
        assert_eq!(bp.b_nn.shape(), (2, 2));
        let report = check_consistency(&bp, &gram_pair(&p).b, 1e-8);
        assert!(!report.consistent);
        assert!((report.f_norm - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn consistency_of_diagonal_instances() {
        let p = diag_instance(0.0);
        let bp = partition_spectral(&p, 1e-10).unwrap();
        let report = check_consistency(&bp, &gram_pair(&p).b, 1e-8);
        assert_eq!(report.f_norm, 0.0);
        assert!(report.consistent);

        let p = diag_instance(1.0);
        let bp = partition_spectral(&p, 1e-10).unwrap();
        let report = check_consistency(&bp, &gram_pair(&p).b, 1e-8);
        assert!((report.f_norm - 1.0).abs() < 1e-15);
        assert!(!report.consistent);
    }

    #[test]
    fn singular_b_rr_reports_infinite_condition() {
        let p = ProblemInstance::new(dmatrix![1.0, 0.0; 0.0, 0.0], dmatrix![0.0, 0.0; 0.0, 1.0])
            .unwrap();
        let bp = partition_spectral(&p, 1e-10).unwrap();
        let report = check_consistency(&bp, &gram_pair(&p).b, 1e-8);
        assert!(!report.consistent);
        assert!(report.b_rr_condition.is_infinite());
    }

    #[test]
    fn diagonal_solutions_follow_free_block() {
        for route in [Route::Spectral, Route::Cod] {
            let sol = solve_rankdef(
                &diag_instance(0.0),
                route,
                &CompletionChoice::identity(1),
                1e-8,
            )
            .unwrap();
            assert!((&sol.solution.x - dmatrix![2.0, 0.0; 0.0, 1.0]).norm() < 1e-14);

            let choice = CompletionChoice::new(dmatrix![3.0]).unwrap();
            let sol = solve_rankdef(&diag_instance(0.0), route, &choice, 1e-8).unwrap();
            assert!((&sol.solution.x - dmatrix![2.0, 0.0; 0.0, 9.0]).norm() < 1e-13);
            assert_eq!(sol.solution.method, route.method());
        }
    }

    #[test]
    fn inconsistent_instance_has_no_solution() {
        let err = solve_rankdef(
            &diag_instance(1.0),
            Route::Spectral,
            &CompletionChoice::identity(1),
            1e-8,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NoSolution { .. }));
    }

    #[test]
    fn free_block_size_is_checked() {
        let err = solve_rankdef(
            &diag_instance(0.0),
            Route::Cod,
            &CompletionChoice::identity(2),
            1e-8,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn completion_choice_validation() {
        assert!(CompletionChoice::new(dmatrix![1.0, 1.0; 0.0, 1.0]).is_err());
        assert!(CompletionChoice::new(dmatrix![1.0, 0.0; 5.0, 0.0]).is_err());
        assert!(CompletionChoice::new(dmatrix![1.0, 0.0; 5.0, -2.0]).is_ok());
    }

    #[test]
    fn reduced_problem_examples() {
        let bp = partition_spectral(&diag_instance(0.0), 1e-10).unwrap();
        let rp = reduced_problem(&bp).unwrap();
        assert_eq!(rp.d(), &dmatrix![1.0]);
        assert!((rp.t()[(0, 0)] - 2.0).abs() < 1e-15);

        let mut bp = bp;
        bp.b_rr = dmatrix![1.0];
        assert_eq!(reduced_problem(&bp).unwrap().t(), &dmatrix![1.0]);

        bp.b_rr = dmatrix![-1.0];
        assert!(reduced_problem(&bp).is_err());
    }
}
