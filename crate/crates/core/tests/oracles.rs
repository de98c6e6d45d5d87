//! Cross-checks against independent implementations: nalgebra for dense
//! linear algebra, scalar bisection for two-node equilibria.

mod common;

use bivirus::analysis::{check_survival_stability, default_seeds, find_coexistence, AnalysisConfig};
use bivirus::dynamics::jacobian;
use bivirus::linalg::{spectral_abscissa, spectral_radius, spectrum, EigenConfig};
use bivirus::sis::{endemic_equilibrium, EndemicConfig};
use bivirus::{BivirusSystem32, ContactMatrix, Matrix};
use nalgebra::DMatrix;
use rand::Rng;

use common::*;

fn to_na(m: &Matrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn na_spectrum(m: &Matrix<f64>) -> Vec<(f64, f64)> {
    let mut ev: Vec<(f64, f64)> = to_na(m).complex_eigenvalues().iter().map(|c| (c.re, c.im)).collect();
    ev.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(b.1.partial_cmp(&a.1).unwrap()));
    ev
}

/// Greedy matching of two spectra; returns the largest pairing distance.
fn spectrum_distance(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for p in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, q)| (k, ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt()))
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

#[test]
fn spectrum_matches_nalgebra_on_random_matrices() {
    let mut r = rng(11);
    for _ in 0..50 {
        let n = r.gen_range(1..=12);
        let m = Matrix::from_fn(n, n, |_, _| r.gen_range(-3.0..3.0));
        let ours: Vec<(f64, f64)> = spectrum(&m).unwrap().iter().map(|c| (c.re, c.im)).collect();
        let scale = m.max_abs().max(1.0);
        assert!(spectrum_distance(&ours, &na_spectrum(&m)) < 1e-8 * scale * n as f64);
    }
}

#[test]
fn spectral_radius_and_abscissa_match_nalgebra() {
    let mut r = rng(12);
    for _ in 0..40 {
        let n = r.gen_range(2..=15);
        let a = random_irreducible(n, 0.3, r.gen_range(0.5..5.0), &mut r);
        let ev = na_spectrum(a.matrix());
        let rho = ev.iter().map(|(re, im)| re.hypot(*im)).fold(0.0, f64::max);
        let ours = spectral_radius(a.matrix(), &EigenConfig::default()).unwrap();
        assert!((ours - rho).abs() < 1e-9 * rho.max(1.0), "{ours} vs {rho}");
        let metzler = a.matrix().sub(&Matrix::identity(n).map(|v| 3.0 * v));
        let absc = spectral_abscissa(&metzler).unwrap();
        assert!((absc - na_spectrum(&metzler)[0].0).abs() < 1e-9);
    }
}

#[test]
fn perron_vectors_are_eigenvectors() {
    let mut r = rng(13);
    for _ in 0..30 {
        let n = r.gen_range(2..=20);
        let a = random_irreducible(n, 0.2, 2.0, &mut r);
        let p = a.perron(&EigenConfig::default()).unwrap();
        let na = to_na(a.matrix());
        let right = nalgebra::DVector::from_vec(p.right.clone());
        let left = nalgebra::DVector::from_vec(p.left.clone());
        assert!((&na * &right - &right * p.eigenvalue).amax() < 1e-9);
        assert!((na.transpose() * &left - &left * p.eigenvalue).amax() < 1e-9);
        assert!(p.right.iter().chain(&p.left).all(|&v| v > 0.0));
        assert!((left.dot(&right) - 1.0).abs() < 1e-10);
    }
}

#[test]
fn linear_solve_matches_nalgebra() {
    let mut r = rng(14);
    for _ in 0..30 {
        let n = r.gen_range(1..=25);
        let m = Matrix::from_fn(n, n, |i, j| r.gen_range(-1.0..1.0) + if i == j { n as f64 } else { 0.0 });
        let b: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let ours = m.solve(&b).unwrap();
        let theirs = to_na(&m).lu().solve(&nalgebra::DVector::from_vec(b)).unwrap();
        assert!(max_abs_diff(&ours, theirs.as_slice()) < 1e-12);
        let inv = m.inverse().unwrap();
        let id = to_na(&m) * to_na(&inv);
        assert!((id - DMatrix::identity(n, n)).amax() < 1e-12);
    }
}

/// Two-node endemic equilibrium by eliminating the second coordinate and
/// bisecting on the first.
fn two_node_endemic_by_bisection(m: [[f64; 2]; 2]) -> [f64; 2] {
    let y2 = |y1: f64| (y1 / (1.0 - y1) - m[0][0] * y1) / m[0][1];
    let g = |y1: f64| {
        let v = y2(y1);
        -v + (1.0 - v) * (m[1][0] * y1 + m[1][1] * v)
    };
    // Bracket on the branch where y2 is positive.
    let (mut lo, mut hi) = (1e-9, 1.0 - 1e-9);
    let steps = 100_000;
    let mut prev = (lo, g(lo));
    for k in 1..=steps {
        let t = lo + (hi - lo) * k as f64 / steps as f64;
        let gt = g(t);
        if y2(t) > 0.0 && y2(prev.0) > 0.0 && prev.1.signum() != gt.signum() {
            lo = prev.0;
            hi = t;
            break;
        }
        prev = (t, gt);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(lo).signum() == g(mid).signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let y1 = 0.5 * (lo + hi);
    [y1, y2(y1)]
}

#[test]
fn two_node_equilibria_match_independent_elimination() {
    let cfg = EndemicConfig::default();
    let a = two_node_a();
    let x = endemic_equilibrium(&a, &cfg).unwrap().x_bar;
    // Symmetric rows summing to s give xbar = 1 - 1/s.
    assert!(max_abs_diff(&x, &[1.0 - 1.0 / 5.2; 2]) < 1e-12);

    let sys = two_node_system(1.0);
    let y = endemic_equilibrium(sys.b(), &cfg).unwrap().x_bar;
    let oracle = two_node_endemic_by_bisection([[4.2, 0.312], [6.1318, 2.2]]);
    assert!(max_abs_diff(&y, &oracle) < 1e-10, "{y:?} vs {oracle:?}");
}

#[test]
fn survival_radii_match_nalgebra() {
    let sys = two_node_system(1.0);
    let s = check_survival_stability(&sys, &AnalysisConfig::default()).unwrap();
    let damped = |m: &Matrix<f64>, d: &[f64]| {
        let ev = na_spectrum(&m.scale_rows(&d.iter().map(|v| 1.0 - v).collect::<Vec<_>>()));
        ev.iter().map(|(re, im)| re.hypot(*im)).fold(0.0, f64::max)
    };
    // Power iteration stops at a 1e-10 eigenvector residual; the Rayleigh
    // quotient of a nonnormal matrix is accurate to about that level.
    assert!((s.rho_ybar_a - damped(sys.a().matrix(), &s.y_bar)).abs() < 1e-9);
    assert!((s.rho_xbar_b - damped(sys.b().matrix(), &s.x_bar)).abs() < 1e-9);
}

#[test]
fn coexistence_jacobian_spectrum_matches_nalgebra() {
    let sys = two_node_system(1.0);
    let cfg = AnalysisConfig::default();
    let s = check_survival_stability(&sys, &cfg).unwrap();
    let found = find_coexistence(&sys, &default_seeds(&s.x_bar, &s.y_bar, &cfg), &cfg).unwrap();
    let root = &found.roots[0];
    let jac = jacobian(&sys, &root.point).unwrap();
    let ours: Vec<(f64, f64)> = root.spectrum.iter().map(|c| (c.re, c.im)).collect();
    assert!(spectrum_distance(&ours, &na_spectrum(&jac)) < 1e-10);
    let trace: f64 = (0..4).map(|i| jac[(i, i)]).sum();
    let sum: f64 = ours.iter().map(|p| p.0).sum();
    assert!((trace - sum).abs() < 1e-10);
}

#[test]
fn single_precision_agrees_with_double() {
    let sys32 = BivirusSystem32::from_f64_rows(&[[3.2, 2.0], [2.0, 3.2]], &[[4.2, 0.312], [6.1318, 2.2]], 1.0).unwrap();
    let s32 = check_survival_stability(&sys32, &AnalysisConfig::default()).unwrap();
    let s64 = check_survival_stability(&two_node_system(1.0), &AnalysisConfig::default()).unwrap();
    assert!((s32.rho_ybar_a as f64 - s64.rho_ybar_a).abs() < 1e-4);
    assert!((s32.rho_xbar_b as f64 - s64.rho_xbar_b).abs() < 1e-4);
    let y32: Vec<f64> = s32.y_bar.iter().map(|&v| v as f64).collect();
    assert!(max_abs_diff(&y32, &s64.y_bar) < 1e-4);
    assert!(s32.both_stable);
}

#[test]
fn reducible_contact_matrix_flagged() {
    let c = ContactMatrix::<f64>::from_f64_rows(&[[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [1.0, 0.0, 2.0]]).unwrap();
    assert!(!c.is_irreducible());
    assert!(c.require_irreducible().is_err());
}
