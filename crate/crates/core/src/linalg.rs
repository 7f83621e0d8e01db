//! Dense real-matrix kernels shared by every solver.
//!
//! Householder QR (optionally column pivoted), Cholesky and triangular solves
//! are implemented here directly; the symmetric eigensolver and the singular
//! values used for rank decisions come from `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

/// Dense `f64` matrix used throughout the crate.
pub type DenseMatrix = DMatrix<f64>;

/// Relative asymmetry accepted by [`spectral_decompose`].
pub const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not symmetric: ‖A−Aᵀ‖_F = {asymmetry:e} exceeds {tolerance:e}")]
    NotSymmetric { asymmetry: f64, tolerance: f64 },
    #[error("matrix is not positive definite (pivot {index} = {pivot:e})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("triangular matrix is singular (zero diagonal at {index})")]
    SingularTriangular { index: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// `A = Q·R` with `Q` square orthonormal and `R` upper trapezoidal.
#[derive(Debug, Clone)]
pub struct QrFactors {
    pub q: DenseMatrix,
    pub r: DenseMatrix,
}

impl QrFactors {
    /// Top `n×n` block of `r`.
    pub fn leading_block(&self) -> DenseMatrix {
        let n = self.r.ncols().min(self.r.nrows());
        self.r.view((0, 0), (n, n)).into_owned()
    }
}

/// `A = U·diag(λ)·Uᵀ`, eigenvalues sorted in descending order.
#[derive(Debug, Clone)]
pub struct SpectralFactors {
    pub u: DenseMatrix,
    pub eigenvalues: DVector<f64>,
}

impl SpectralFactors {
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut scaled = self.u.clone();
        for (j, lambda) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*lambda);
        }
        &scaled * self.u.transpose()
    }
}

/// Lower triangular `L` with positive diagonal and `A = L·Lᵀ`.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    pub l: DenseMatrix,
}

impl CholeskyFactor {
    /// Solves `A·X = rhs` with two triangular solves.
    pub fn solve(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        let y = solve_triangular(&self.l, rhs, Side::Left, Uplo::Lower, Op::NoTrans)?;
        solve_triangular(&self.l, &y, Side::Left, Uplo::Lower, Op::Trans)
    }
}

/// Complete orthogonal decomposition `A = U·[[R, 0], [0, 0]]·Vᵀ`.
#[derive(Debug, Clone)]
pub struct CodFactors {
    pub u: DenseMatrix,
    /// `rank×rank` upper triangular, nonsingular.
    pub r_block: DenseMatrix,
    pub v: DenseMatrix,
    pub rank: usize,
}

impl CodFactors {
    pub fn reconstruct(&self) -> DenseMatrix {
        let (m, n) = (self.u.nrows(), self.v.nrows());
        let mut middle = DenseMatrix::zeros(m, n);
        middle
            .view_mut((0, 0), (self.rank, self.rank))
            .copy_from(&self.r_block);
        &self.u * middle * self.v.transpose()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Solve `op(T)·X = B`.
    Left,
    /// Solve `X·op(T) = B`.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Uplo {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    NoTrans,
    Trans,
}

pub fn frobenius(a: &DenseMatrix) -> f64 {
    a.norm()
}

pub fn symmetrize(a: &DenseMatrix) -> DenseMatrix {
    (a + a.transpose()) * 0.5
}

pub fn ensure_finite(a: &DenseMatrix) -> Result<()> {
    if a.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(LinalgError::NonFinite)
    }
}

/// Default relative tolerance for [`numeric_rank`]: `1e-10·max(m, n)`.
pub fn default_rank_tol(rows: usize, cols: usize) -> f64 {
    1e-10 * rows.max(cols).max(1) as f64
}

/// Householder QR of `a`. When `pivot` is set, columns are greedily permuted
/// so the largest remaining column norm is eliminated first; `perm[j]` is the
/// original index of column `j` of `R`.
fn householder_qr(a: &DenseMatrix, pivot: bool) -> (DenseMatrix, DenseMatrix, Vec<usize>) {
    let (m, n) = a.shape();
    let mut r = a.clone();
    let mut q = DenseMatrix::identity(m, m);
    let mut perm: Vec<usize> = (0..n).collect();
    let steps = m.min(n);

    for k in 0..steps {
        if pivot {
            let best = (k..n)
                .map(|j| (j, r.view((k, j), (m - k, 1)).norm_squared()))
                .fold((k, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc })
                .0;
            if best != k {
                r.swap_columns(k, best);
                perm.swap(k, best);
            }
        }

        let x = r.view((k, k), (m - k, 1)).into_owned();
        let alpha = x.norm();
        if alpha == 0.0 || m - k == 1 {
            continue;
        }
        let mut v = x;
        let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
        v[0] += sign * alpha;
        let vtv = v.norm_squared();
        let beta = 2.0 / vtv;

        // R[k.., k..] -= beta·v·(vᵀ·R[k.., k..])
        {
            let mut block = r.view_mut((k, k), (m - k, n - k));
            let w = block.tr_mul(&v);
            block.gemm(-beta, &v, &w.transpose(), 1.0);
        }
        // Q[:, k..] -= beta·(Q[:, k..]·v)·vᵀ
        {
            let mut block = q.view_mut((0, k), (m, m - k));
            let w = &block * &v;
            block.gemm(-beta, &w, &v.transpose(), 1.0);
        }
        r[(k, k)] = -sign * alpha;
        for i in k + 1..m {
            r[(i, k)] = 0.0;
        }
    }

    for i in 0..steps {
        if r[(i, i)] < 0.0 {
            r.row_mut(i).neg_mut();
            q.column_mut(i).neg_mut();
        }
    }
    (q, r, perm)
}

/// QR factorization with a full `m×m` orthonormal `q` and nonnegative
/// diagonal on `r`.
pub fn qr_decompose(a: &DenseMatrix) -> Result<QrFactors> {
    if a.nrows() < a.ncols() {
        return Err(LinalgError::Dimension(format!(
            "QR requires rows ≥ cols, got {}×{}",
            a.nrows(),
            a.ncols()
        )));
    }
    ensure_finite(a)?;
    let (q, r, _) = householder_qr(a, false);
    Ok(QrFactors { q, r })
}

/// Symmetric eigendecomposition with eigenvalues in descending order.
///
/// The input is symmetrized first; an asymmetry above
/// `SYMMETRY_TOL·‖a‖_F` is rejected.
pub fn spectral_decompose(a: &DenseMatrix) -> Result<SpectralFactors> {
    if !a.is_square() {
        return Err(LinalgError::Dimension(format!(
            "spectral decomposition needs a square matrix, got {}×{}",
            a.nrows(),
            a.ncols()
        )));
    }
    ensure_finite(a)?;
    let n = a.nrows();
    let asymmetry = (a - a.transpose()).norm();
    let tolerance = SYMMETRY_TOL * a.norm();
    if asymmetry > tolerance {
        return Err(LinalgError::NotSymmetric {
            asymmetry,
            tolerance,
        });
    }
    if n == 0 {
        return Ok(SpectralFactors {
            u: DenseMatrix::zeros(0, 0),
            eigenvalues: DVector::zeros(0),
        });
    }
    let eig = SymmetricEigen::new(symmetrize(a));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .total_cmp(&eig.eigenvalues[i])
            .then(i.cmp(&j))
    });
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let u = DenseMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    Ok(SpectralFactors { u, eigenvalues })
}

/// Cholesky factor of a symmetric positive definite matrix. Only the lower
/// triangle of `a` is read.
pub fn cholesky(a: &DenseMatrix) -> Result<CholeskyFactor> {
    if !a.is_square() {
        return Err(LinalgError::Dimension(format!(
            "Cholesky needs a square matrix, got {}×{}",
            a.nrows(),
            a.ncols()
        )));
    }
    ensure_finite(a)?;
    let n = a.nrows();
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut pivot = a[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if pivot.is_nan() || pivot <= 0.0 || pivot.is_infinite() {
            return Err(LinalgError::NotPositiveDefinite { index: j, pivot });
        }
        let diag = pivot.sqrt();
        l[(j, j)] = diag;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / diag;
        }
    }
    Ok(CholeskyFactor { l })
}

/// Number of singular values above `rank_tol·σ_max`.
pub fn numeric_rank(a: &DenseMatrix, rank_tol: f64) -> usize {
    assert!(rank_tol > 0.0, "rank tolerance must be positive");
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let sv = a.clone().singular_values();
    let smax = sv.max();
    if smax <= 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rank_tol * smax).count()
}

/// Complete orthogonal decomposition via column-pivoted QR followed by an
/// orthogonal reduction of the leading `rank` rows. The rank is decided by
/// [`numeric_rank`] so both agree for the same tolerance.
pub fn complete_orthogonal_decompose(a: &DenseMatrix, rank_tol: f64) -> CodFactors {
    let (m, n) = a.shape();
    let rank = numeric_rank(a, rank_tol);
    let (q, r, perm) = householder_qr(a, true);
    if rank == 0 {
        return CodFactors {
            u: q,
            r_block: DenseMatrix::zeros(0, 0),
            v: DenseMatrix::identity(n, n),
            rank,
        };
    }

    // top = [R 0]·Zᵀ, obtained from a QR of topᵀ with its columns reversed:
    // topᵀ·J = Qw·[Rw; 0]  ⇒  topᵀ = Qw·diag(J, I)·[J·Rw·J; 0].
    let top = r.view((0, 0), (rank, n)).into_owned();
    let mut w = top.transpose();
    for j in 0..rank / 2 {
        w.swap_columns(j, rank - 1 - j);
    }
    let (mut z, rw, _) = householder_qr(&w, false);
    for j in 0..rank / 2 {
        z.swap_columns(j, rank - 1 - j);
    }
    let r_block = DenseMatrix::from_fn(rank, rank, |i, j| rw[(rank - 1 - j, rank - 1 - i)]);

    // a·P = q·[top; ·]  ⇒  V = P·Z.
    let mut v = DenseMatrix::zeros(n, n);
    for (j, &orig) in perm.iter().enumerate() {
        v.row_mut(orig).copy_from(&z.row(j));
    }
    debug_assert_eq!(q.nrows(), m);
    CodFactors {
        u: q,
        r_block,
        v,
        rank,
    }
}

/// Solves a triangular system. Only the indicated triangle of `t` is read.
pub fn solve_triangular(
    t: &DenseMatrix,
    rhs: &DenseMatrix,
    side: Side,
    uplo: Uplo,
    op: Op,
) -> Result<DenseMatrix> {
    if !t.is_square() {
        return Err(LinalgError::Dimension(format!(
            "triangular factor must be square, got {}×{}",
            t.nrows(),
            t.ncols()
        )));
    }
    match side {
        Side::Left => solve_left(t, rhs, uplo, op),
        Side::Right => {
            let flipped = match op {
                Op::NoTrans => Op::Trans,
                Op::Trans => Op::NoTrans,
            };
            Ok(solve_left(t, &rhs.transpose(), uplo, flipped)?.transpose())
        }
    }
}

fn solve_left(t: &DenseMatrix, rhs: &DenseMatrix, uplo: Uplo, op: Op) -> Result<DenseMatrix> {
    let n = t.nrows();
    if rhs.nrows() != n {
        return Err(LinalgError::Dimension(format!(
            "triangular factor is {n}×{n} but right-hand side has {} rows",
            rhs.nrows()
        )));
    }
    if let Some(index) = (0..n).find(|&i| t[(i, i)] == 0.0) {
        return Err(LinalgError::SingularTriangular { index });
    }
    // Entry (i, j) of op(T) restricted to its triangle.
    let entry = |i: usize, j: usize| match op {
        Op::NoTrans => t[(i, j)],
        Op::Trans => t[(j, i)],
    };
    let forward = matches!(
        (uplo, op),
        (Uplo::Lower, Op::NoTrans) | (Uplo::Upper, Op::Trans)
    );
    let mut x = rhs.clone();
    for c in 0..rhs.ncols() {
        if forward {
            for i in 0..n {
                let mut s = x[(i, c)];
                for k in 0..i {
                    s -= entry(i, k) * x[(k, c)];
                }
                x[(i, c)] = s / t[(i, i)];
            }
        } else {
            for i in (0..n).rev() {
                let mut s = x[(i, c)];
                for k in i + 1..n {
                    s -= entry(i, k) * x[(k, c)];
                }
                x[(i, c)] = s / t[(i, i)];
            }
        }
    }
    Ok(x)
}

/// `‖MᵀM − I‖_F`.
pub fn orthonormality_defect(m: &DenseMatrix) -> f64 {
    let k = m.ncols();
    (m.tr_mul(m) - DenseMatrix::identity(k, k)).norm()
}

/// Square root of a symmetric positive definite matrix by eigendecomposition.
pub fn spd_sqrt(a: &DenseMatrix) -> Result<DenseMatrix> {
    let sf = spectral_decompose(a)?;
    if let Some((index, &pivot)) = sf.eigenvalues.iter().enumerate().find(|(_, &l)| l <= 0.0) {
        return Err(LinalgError::NotPositiveDefinite { index, pivot });
    }
    let roots = SpectralFactors {
        u: sf.u,
        eigenvalues: sf.eigenvalues.map(f64::sqrt),
    };
    Ok(symmetrize(&roots.reconstruct()))
}
