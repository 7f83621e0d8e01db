//! Seeded test-problem generation.
//!
//! All randomness comes from a `ChaCha8Rng` seeded with `GeneratorSpec::seed`,
//! so identical specs produce bit-identical matrices on every platform.
//! Suites derive per-instance seeds with [`derive_seed`] (SplitMix64 of
//! `base + index·φ`).

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{qr_decompose, DenseMatrix};
use crate::model::ProblemInstance;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub seed: u64,
    pub noise_level: f64,
    /// Nonzero eigenvalues of `A = DᵀD`, descending.
    pub spectrum_a: Vec<f64>,
    /// Nonzero eigenvalues of `B = TᵀT` (rank-deficient mode) or of the
    /// planted solution `x₀` (full-rank mode), descending.
    pub spectrum_b: Vec<f64>,
}

impl GeneratorSpec {
    /// Spec with geometrically spaced default spectra in `[0.1, 1]` for `A`
    /// and `[0.5, 2]` for `B`.
    pub fn new(m: usize, n: usize, r: usize, seed: u64) -> Self {
        Self {
            m,
            n,
            r,
            seed,
            noise_level: 0.0,
            spectrum_a: geometric_spectrum(r, 1.0, 0.1),
            spectrum_b: geometric_spectrum(r, 2.0, 0.5),
        }
    }

    pub fn with_noise(mut self, noise_level: f64) -> Self {
        self.noise_level = noise_level;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if !(self.m >= self.n && self.n >= self.r && self.r >= 1) {
            return bad(format!(
                "need m ≥ n ≥ r ≥ 1, got m={}, n={}, r={}",
                self.m, self.n, self.r
            ));
        }
        if !(self.noise_level >= 0.0 && self.noise_level.is_finite()) {
            return bad(format!(
                "noise level must be finite and ≥ 0, got {}",
                self.noise_level
            ));
        }
        for (name, spectrum) in [
            ("spectrum_a", &self.spectrum_a),
            ("spectrum_b", &self.spectrum_b),
        ] {
            if spectrum.len() != self.r {
                return bad(format!(
                    "{name} has {} entries, expected {}",
                    spectrum.len(),
                    self.r
                ));
            }
            if spectrum.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return bad(format!("{name} must be strictly positive"));
            }
            if spectrum.windows(2).any(|w| w[0] < w[1]) {
                return bad(format!("{name} must be descending"));
            }
        }
        Ok(())
    }
}

/// `k` values from `hi` down to `lo`, geometrically spaced.
pub fn geometric_spectrum(k: usize, hi: f64, lo: f64) -> Vec<f64> {
    match k {
        0 => Vec::new(),
        1 => vec![hi],
        _ => (0..k)
            .map(|i| hi * (lo / hi).powf(i as f64 / (k - 1) as f64))
            .collect(),
    }
}

/// Full-rank instance with its planted solution.
#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub problem: ProblemInstance,
    pub x0: DenseMatrix,
}

/// SplitMix64 finalizer applied to `base + (index + 1)·0x9E37_79B9_7F4A_7C15`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    // Column-major fill keeps the draw order independent of storage tricks.
    let mut m = DenseMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = rng.sample(StandardNormal);
        }
    }
    m
}

/// `rows×cols` matrix with orthonormal columns: the `Q` factor of a Gaussian
/// matrix under the nonnegative-diagonal convention.
pub fn random_orthonormal(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    assert!(rows >= cols);
    let g = gaussian(rows, cols, rng);
    let q = qr_decompose(&g)
        .expect("Gaussian sample is finite and tall")
        .q;
    q.columns(0, cols).into_owned()
}

/// Random `k×k` rotation (orthonormal with determinant +1).
pub fn random_rotation(k: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rotation_from(k, &mut rng)
}

fn rotation_from(k: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let mut q = random_orthonormal(k, k, rng);
    if k > 0 && q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

/// `Ū·diag(values)·Vᵀ` with `Ū` `m×k` and `V` `n×k` orthonormal columns.
fn with_singular_values(left: &DenseMatrix, values: &[f64], right: &DenseMatrix) -> DenseMatrix {
    let mut scaled = left.clone();
    for (j, v) in values.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*v);
    }
    scaled * right.transpose()
}

/// Full-rank instance `t = d·x₀ + noise`. `d` has `DᵀD` eigenvalues
/// `spectrum_a`; `x₀` is SPD with eigenvalues `spectrum_b`. Noise is added to
/// `t` only, at relative Frobenius size `noise_level`.
pub fn gen_full_rank(spec: &GeneratorSpec) -> Result<PlantedInstance> {
    spec.validate()?;
    if spec.r != spec.n {
        return Err(Error::InvalidInput(format!(
            "full-rank generation needs r = n, got r={} n={}",
            spec.r, spec.n
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n;
    let left = random_orthonormal(spec.m, n, &mut rng);
    let right = random_orthonormal(n, n, &mut rng);
    let sv: Vec<f64> = spec.spectrum_a.iter().map(|v| v.sqrt()).collect();
    let d = with_singular_values(&left, &sv, &right);

    let basis = random_orthonormal(n, n, &mut rng);
    let x0 = crate::linalg::symmetrize(&with_singular_values(&basis, &spec.spectrum_b, &basis));

    let mut t = &d * &x0;
    if spec.noise_level > 0.0 {
        let noise = gaussian(spec.m, n, &mut rng);
        let scale = spec.noise_level * t.norm() / noise_norm(&noise);
        t += noise * scale;
    }
    let problem = ProblemInstance::new(d, t)?.with_declared_rank(n);
    Ok(PlantedInstance { problem, x0 })
}

fn noise_norm(noise: &DenseMatrix) -> f64 {
    noise.norm().max(f64::MIN_POSITIVE)
}

/// Consistent rank-deficient instance built from the sufficient condition
/// `V = U·diag(Q, P)`:
///
/// - `D = Ū_d·[[diag(√spectrum_a), 0], [0, 0]]·Uᵀ`
/// - `T = Ū·[[Σ, 0], [0, 0]]·Vᵀ`, `Σ = diag(√spectrum_b)`
///
/// with `U`, `Ū_d`, `Ū` random orthonormal and `Q`, `P` random rotations.
/// A positive `noise_level` is applied afterwards to both matrices through
/// [`inject_noise`].
pub fn gen_consistent_rankdef(spec: &GeneratorSpec) -> Result<ProblemInstance> {
    spec.validate()?;
    if spec.r >= spec.n {
        return Err(Error::InvalidInput(format!(
            "rank-deficient generation needs r < n, got r={} n={}",
            spec.r, spec.n
        )));
    }
    let (m, n, r) = (spec.m, spec.n, spec.r);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let u = random_orthonormal(n, n, &mut rng);
    let q = rotation_from(r, &mut rng);
    let p = rotation_from(n - r, &mut rng);
    let mut v = u.clone();
    v.columns_mut(0, r).copy_from(&(u.columns(0, r) * &q));
    v.columns_mut(r, n - r)
        .copy_from(&(u.columns(r, n - r) * &p));

    let left_d = random_orthonormal(m, r, &mut rng);
    let left_t = random_orthonormal(m, r, &mut rng);
    let sv_d: Vec<f64> = spec.spectrum_a.iter().map(|v| v.sqrt()).collect();
    let sv_t: Vec<f64> = spec.spectrum_b.iter().map(|v| v.sqrt()).collect();
    let d = with_singular_values(&left_d, &sv_d, &u.columns(0, r).into_owned());
    let t = with_singular_values(&left_t, &sv_t, &v.columns(0, r).into_owned());

    let problem = ProblemInstance::new(d, t)?.with_declared_rank(r);
    if spec.noise_level > 0.0 {
        Ok(inject_noise(
            &problem,
            spec.noise_level,
            derive_seed(spec.seed, u64::MAX),
        ))
    } else {
        Ok(problem)
    }
}

/// `d' = d + ε·‖d‖_F·N_d/‖N_d‖_F` and likewise for `t`, with Gaussian `N`.
pub fn inject_noise(p: &ProblemInstance, eps: f64, seed: u64) -> ProblemInstance {
    assert!(eps >= 0.0, "noise level must be nonnegative");
    if eps == 0.0 {
        return p.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (m, n) = (p.m(), p.n());
    let nd = gaussian(m, n, &mut rng);
    let nt = gaussian(m, n, &mut rng);
    let d = p.d() + nd.clone() * (eps * p.d().norm() / noise_norm(&nd));
    let t = p.t() + nt.clone() * (eps * p.t().norm() / noise_norm(&nt));
    let out = ProblemInstance::new(d, t).expect("shape and finiteness are preserved");
    match p.declared_rank() {
        Some(r) => out.with_declared_rank(r),
        None => out,
    }
}

/// Singular values of a matrix, descending. Handy for rank diagnostics.
pub fn singular_values(a: &DenseMatrix) -> DVector<f64> {
    let mut v: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    DVector::from_vec(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{default_rank_tol, numeric_rank, orthonormality_defect};
    use crate::model::gram_pair;
    use crate::solver_fullrank::{solve_qr, solve_spectral};
    use crate::solver_rankdef::{check_consistency, default_delta, partition_spectral};

    #[test]
    fn full_rank_round_trip() {
        let spec = GeneratorSpec::new(8, 3, 3, 42);
        let inst = gen_full_rank(&spec).unwrap();
        for sol in [
            solve_qr(&inst.problem).unwrap(),
            solve_spectral(&inst.problem).unwrap(),
        ] {
            assert!((&sol.x - &inst.x0).norm() <= 1e-8 * inst.x0.norm());
        }
    }

    #[test]
    fn unit_spectrum_gives_orthonormal_columns() {
        let mut spec = GeneratorSpec::new(7, 4, 4, 3);
        spec.spectrum_a = vec![1.0; 4];
        let inst = gen_full_rank(&spec).unwrap();
        assert!(orthonormality_defect(inst.problem.d()) < 1e-13);
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = GeneratorSpec::new(9, 5, 5, 11).with_noise(1e-3);
        let a = gen_full_rank(&spec).unwrap();
        let b = gen_full_rank(&spec).unwrap();
        assert_eq!(a.problem, b.problem);
        assert_eq!(a.x0, b.x0);

        let spec = GeneratorSpec::new(9, 5, 2, 11);
        assert_eq!(
            gen_consistent_rankdef(&spec).unwrap(),
            gen_consistent_rankdef(&spec).unwrap()
        );
    }

    #[test]
    fn rotations() {
        assert_eq!(random_rotation(1, 5), DenseMatrix::identity(1, 1));
        let q = random_rotation(2, 5);
        assert!(orthonormality_defect(&q) < 1e-12);
        assert!((q.determinant() - 1.0).abs() < 1e-10);
        // [[c, −s], [s, c]]
        assert!((q[(0, 0)] - q[(1, 1)]).abs() < 1e-12);
        assert!((q[(0, 1)] + q[(1, 0)]).abs() < 1e-12);
        for seed in 0..20 {
            let q = random_rotation(5, seed);
            assert!(orthonormality_defect(&q) < 1e-12);
            assert!((&q * q.transpose() - DenseMatrix::identity(5, 5)).norm() < 1e-12);
            assert!((q.determinant() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn rankdef_generator_is_consistent_and_rank_honest() {
        for (n, r) in [(2, 1), (5, 3), (9, 4)] {
            let p = gen_consistent_rankdef(&GeneratorSpec::new(n + 3, n, r, 17)).unwrap();
            let tol = default_rank_tol(p.m(), p.n());
            assert_eq!(numeric_rank(p.d(), tol), r);
            assert_eq!(numeric_rank(p.t(), tol), r);
            let bp = partition_spectral(&p, tol).unwrap();
            let b = gram_pair(&p).b;
            let report = check_consistency(&bp, &b, default_delta(&b));
            assert!(report.f_norm <= 1e-10, "n={n} r={r} f={}", report.f_norm);
        }
    }

    #[test]
    fn spec_validation() {
        assert!(GeneratorSpec::new(3, 4, 2, 0).validate().is_err());
        assert!(GeneratorSpec::new(4, 3, 0, 0).validate().is_err());
        assert!(GeneratorSpec::new(4, 3, 2, 0)
            .with_noise(-1.0)
            .validate()
            .is_err());
        let mut spec = GeneratorSpec::new(4, 3, 2, 0);
        spec.spectrum_a = vec![1.0, 2.0];
        assert!(spec.validate().is_err());
        assert!(gen_full_rank(&GeneratorSpec::new(4, 3, 2, 0)).is_err());
        assert!(gen_consistent_rankdef(&GeneratorSpec::new(4, 3, 3, 0)).is_err());
    }

    #[test]
    fn noise_has_requested_relative_size() {
        let p = gen_full_rank(&GeneratorSpec::new(10, 4, 4, 1))
            .unwrap()
            .problem;
        assert_eq!(inject_noise(&p, 0.0, 9), p);
        let q = inject_noise(&p, 1e-6, 9);
        let rel_d = (q.d() - p.d()).norm() / p.d().norm();
        let rel_t = (q.t() - p.t()).norm() / p.t().norm();
        assert!((rel_d - 1e-6).abs() < 1e-12);
        assert!((rel_t - 1e-6).abs() < 1e-12);
    }

    #[test]
    fn derived_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| derive_seed(7, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
    }
}
