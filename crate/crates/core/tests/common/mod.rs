#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xyqmc::linalg::{Mat2, C64};
use xyqmc::state::{ProductObservable, ProductTerm};
use xyqmc::tree::{ball, Vertex};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_c64(rng: &mut impl Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_mat2(rng: &mut impl Rng) -> Mat2 {
    Mat2::from_fn(|_, _| random_c64(rng))
}

pub fn random_hermitian2(rng: &mut impl Rng) -> Mat2 {
    let m = random_mat2(rng);
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// A single product term with a random factor on each vertex of `Λ_n`
/// chosen with probability `density`.
pub fn random_product(rng: &mut impl Rng, n: usize, density: f64) -> ProductObservable {
    let mut factors: Vec<(Vertex, Mat2)> = Vec::new();
    for x in ball(n, 2) {
        if rng.gen_bool(density) {
            factors.push((x, random_mat2(rng)));
        }
    }
    ProductObservable::product(random_c64(rng), factors)
}

/// A Hermitian product observable: Hermitian factors, real coefficient.
pub fn random_hermitian_product(rng: &mut impl Rng, n: usize) -> ProductObservable {
    let mut factors: Vec<(Vertex, Mat2)> = Vec::new();
    for x in ball(n, 2) {
        if rng.gen_bool(0.6) {
            factors.push((x, random_hermitian2(rng)));
        }
    }
    ProductObservable::product(C64::new(rng.gen_range(-1.0..1.0), 0.0), factors)
}

/// Two random terms on `Λ_n`.
pub fn random_sum(rng: &mut impl Rng, n: usize) -> ProductObservable {
    let mut obs = random_product(rng, n, 0.6);
    for t in random_product(rng, n, 0.6).terms() {
        obs.push(ProductTerm::clone(t));
    }
    obs
}
