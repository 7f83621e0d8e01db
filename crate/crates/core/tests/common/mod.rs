#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use spd_eiv::linalg::DenseMatrix;
use spd_eiv::probgen::{derive_seed, gen_consistent_rankdef, gen_full_rank, GeneratorSpec};
use spd_eiv::ProblemInstance;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let g = gaussian(n, n, rng);
    &g * g.transpose() / n as f64 + DenseMatrix::identity(n, n) * 0.5
}

/// Plain Gaussian `D`, `T` with `n ≤ max_n`, `m ≤ max_m`.
pub fn random_instance(index: u64, max_m: usize, max_n: usize) -> ProblemInstance {
    let mut r = rng(derive_seed(0xACE, index));
    let n = r.random_range(1..=max_n);
    let m = r.random_range(n..=max_m.max(n));
    ProblemInstance::new(gaussian(m, n, &mut r), gaussian(m, n, &mut r)).unwrap()
}

/// Seeded consistent rank-deficient instance with `n ≤ max_n`, `r < n`.
pub fn rankdef_instance(index: u64, max_n: usize) -> ProblemInstance {
    let mut r = rng(derive_seed(0xBEEF, index));
    let n = r.random_range(2..=max_n);
    let rank = r.random_range(1..n);
    let m = n + r.random_range(0..=10);
    gen_consistent_rankdef(&GeneratorSpec::new(m, n, rank, derive_seed(0xF00D, index))).unwrap()
}

pub fn planted_instance(index: u64, max_n: usize) -> (ProblemInstance, DenseMatrix) {
    let mut r = rng(derive_seed(0xC0DE, index));
    let n = r.random_range(1..=max_n);
    let m = n + r.random_range(0..=20);
    let inst = gen_full_rank(&GeneratorSpec::new(m, n, n, derive_seed(0xD1CE, index))).unwrap();
    (inst.problem, inst.x0)
}
