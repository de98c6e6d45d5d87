#![allow(dead_code)]

use bivirus::{BivirusSystem, ContactMatrix, Matrix, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random irreducible nonnegative matrix: a directed cycle through a random
/// permutation guarantees strong connectivity; other entries are present with
/// probability `density`. Scaled so that its spectral radius is `rho`.
pub fn random_irreducible(n: usize, density: f64, rho: f64, rng: &mut impl Rng) -> ContactMatrix<f64> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    let mut m = Matrix::from_fn(n, n, |_, _| if rng.gen::<f64>() < density { rng.gen_range(0.05..1.0) } else { 0.0 });
    for w in 0..n {
        let (from, to) = (perm[w], perm[(w + 1) % n]);
        if m[(from, to)] == 0.0 {
            m[(from, to)] = rng.gen_range(0.05..1.0);
        }
    }
    if n == 1 {
        m[(0, 0)] = 1.0;
    }
    let cm = ContactMatrix::new(m).unwrap();
    let r = cm.spectral_radius().unwrap();
    cm.scale_rows(&vec![rho / r; n]).unwrap()
}

pub fn random_system(n: usize, gamma: f64, rng: &mut impl Rng) -> BivirusSystem<f64> {
    let ra = rng.gen_range(1.2..4.0);
    let rb = rng.gen_range(1.2..4.0);
    let a = random_irreducible(n, 0.5, ra, rng);
    let b = random_irreducible(n, 0.5, rb, rng);
    BivirusSystem::new(a, b, gamma).unwrap()
}

pub fn two_node_system(gamma: f64) -> BivirusSystem<f64> {
    BivirusSystem::from_f64_rows(&[[3.2, 2.0], [2.0, 3.2]], &[[4.2, 0.312], [6.1318, 2.2]], gamma).unwrap()
}

pub fn two_node_a() -> ContactMatrix<f64> {
    ContactMatrix::from_f64_rows(&[[3.2, 2.0], [2.0, 3.2]]).unwrap()
}

/// Uniform interior state, kept `margin` away from every face.
pub fn interior_state(n: usize, margin: f64, rng: &mut impl Rng) -> StateVector<f64> {
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let (mut u, mut v): (f64, f64) = (rng.gen(), rng.gen());
        if u + v >= 1.0 {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        let s = 1.0 - 3.0 * margin;
        x.push(margin + s * u);
        y.push(margin + s * v);
    }
    StateVector::new(x, y).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}
