//! Problem/solution data model, the two error functionals and the
//! stationarity residual `‖XAX − B‖`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    cholesky, ensure_finite, solve_triangular, spectral_decompose, symmetrize, DenseMatrix, Op,
    Side, Uplo,
};

/// The pair `(D, T)` of `m×n` data and target matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    d: DenseMatrix,
    t: DenseMatrix,
    declared_rank: Option<usize>,
}

impl ProblemInstance {
    pub fn new(d: DenseMatrix, t: DenseMatrix) -> Result<Self> {
        if d.shape() != t.shape() {
            return Err(Error::InvalidInput(format!(
                "data is {}×{} but target is {}×{}",
                d.nrows(),
                d.ncols(),
                t.nrows(),
                t.ncols()
            )));
        }
        if d.nrows() < d.ncols() {
            return Err(Error::InvalidInput(format!(
                "system must be overdetermined (m ≥ n), got {}×{}",
                d.nrows(),
                d.ncols()
            )));
        }
        if d.ncols() == 0 {
            return Err(Error::InvalidInput("matrices have no columns".into()));
        }
        if ensure_finite(&d).is_err() || ensure_finite(&t).is_err() {
            return Err(Error::InvalidInput("matrices contain NaN or Inf".into()));
        }
        Ok(Self {
            d,
            t,
            declared_rank: None,
        })
    }

    pub fn with_declared_rank(mut self, rank: usize) -> Self {
        self.declared_rank = Some(rank);
        self
    }

    pub fn d(&self) -> &DenseMatrix {
        &self.d
    }

    pub fn t(&self) -> &DenseMatrix {
        &self.t
    }

    pub fn m(&self) -> usize {
        self.d.nrows()
    }

    pub fn n(&self) -> usize {
        self.d.ncols()
    }

    pub fn declared_rank(&self) -> Option<usize> {
        self.declared_rank
    }

    pub fn into_parts(self) -> (DenseMatrix, DenseMatrix) {
        (self.d, self.t)
    }
}

/// `A = DᵀD`, `B = TᵀT`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramPair {
    pub a: DenseMatrix,
    pub b: DenseMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Qr,
    Spectral,
    RankdefSpectral,
    RankdefCod,
    /// Comparison baseline, see [`crate::bench::baseline_ols_projection`].
    OlsProjection,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Qr => "qr",
            Method::Spectral => "spectral",
            Method::RankdefSpectral => "rankdef_spectral",
            Method::RankdefCod => "rankdef_cod",
            Method::OlsProjection => "ols_projection",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A computed SPD solution together with its diagnostics.
#[derive(Debug, Clone)]
pub struct SpdSolution {
    pub x: DenseMatrix,
    /// Error functional `E` at `x`.
    pub error_value: f64,
    /// `‖XAX − B‖_F / max(1, ‖B‖_F)`.
    pub kkt_residual: f64,
    pub min_eigenvalue: f64,
    pub method: Method,
}

impl SpdSolution {
    /// Symmetrizes `x`, checks it is SPD and evaluates all diagnostics.
    pub fn evaluate(p: &ProblemInstance, x: DenseMatrix, method: Method) -> Result<Self> {
        let x = symmetrize(&x);
        let error_value = error_trace(p, &x)?;
        let kkt = kkt_residual(&gram_pair(p), &x);
        let spectrum = spectral_decompose(&x)?;
        let min_eigenvalue = spectrum
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        Ok(Self {
            x,
            error_value,
            kkt_residual: kkt,
            min_eigenvalue,
            method,
        })
    }
}

pub fn gram_pair(p: &ProblemInstance) -> GramPair {
    GramPair {
        a: symmetrize(&p.d.tr_mul(&p.d)),
        b: symmetrize(&p.t.tr_mul(&p.t)),
    }
}

fn check_square(p: &ProblemInstance, x: &DenseMatrix) -> Result<()> {
    if x.nrows() != p.n() || x.ncols() != p.n() {
        return Err(Error::InvalidInput(format!(
            "solution must be {n}×{n}, got {}×{}",
            x.nrows(),
            x.ncols(),
            n = p.n()
        )));
    }
    Ok(())
}

/// `E = tr((DX − T)ᵀ(D − TX⁻¹))`, with `X⁻¹` applied through its Cholesky
/// factor.
pub fn error_trace(p: &ProblemInstance, x: &DenseMatrix) -> Result<f64> {
    check_square(p, x)?;
    let chol = cholesky(x)?;
    let fit = &p.d * x - &p.t;
    // (T·X⁻¹)ᵀ = X⁻¹·Tᵀ
    let t_xinv = chol.solve(&p.t.transpose())?.transpose();
    let back = &p.d - t_xinv;
    Ok(fit.dot(&back))
}

/// `E = ‖DY − TY⁻ᵀ‖_F²` with `Y` the lower Cholesky factor of `X`.
pub fn error_frobenius(p: &ProblemInstance, x: &DenseMatrix) -> Result<f64> {
    check_square(p, x)?;
    let y = cholesky(x)?.l;
    // T·Y⁻ᵀ solves Z·Yᵀ = T.
    let t_yinvt = solve_triangular(&y, &p.t, Side::Right, Uplo::Lower, Op::Trans)?;
    Ok((&p.d * &y - t_yinvt).norm_squared())
}

pub fn kkt_residual(g: &GramPair, x: &DenseMatrix) -> f64 {
    let residual = x * &g.a * x - &g.b;
    residual.norm() / g.b.norm().max(1.0)
}
