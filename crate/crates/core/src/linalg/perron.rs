//! Perron-Frobenius eigenpairs of nonnegative matrices.

use serde::{Deserialize, Serialize};

use super::{eigen, EigenConfig};
use crate::error::{Error, Result};
use crate::matrix::{dot, norm_inf, Matrix};
use crate::scalar::Scalar;

/// Dominant eigenvalue with left and right eigenvectors.
///
/// After construction the vectors satisfy `left . right = 1` and `right` has
/// unit infinity norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct PerronData<T> {
    pub eigenvalue: T,
    pub left: Vec<T>,
    pub right: Vec<T>,
    /// `||M^T l - lambda l||_inf` with `l` scaled to unit infinity norm.
    pub left_residual: T,
    /// `||M r - lambda r||_inf` with `r` scaled to unit infinity norm.
    pub right_residual: T,
}

impl<T: Scalar> PerronData<T> {
    /// Rescales `left` so that `left . reference = 1`.
    pub fn normalize_left_to(&mut self, reference: &[T]) -> Result<()> {
        let d = dot(&self.left, reference);
        if !(d > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "reference vector has non-positive inner product {d} with the left eigenvector"
            )));
        }
        self.left.iter_mut().for_each(|v| *v = *v / d);
        Ok(())
    }

    /// Rescales `right` so that `right . reference = 1`.
    pub fn normalize_right_to(&mut self, reference: &[T]) -> Result<()> {
        let d = dot(&self.right, reference);
        if !(d > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "reference vector has non-positive inner product {d} with the right eigenvector"
            )));
        }
        self.right.iter_mut().for_each(|v| *v = *v / d);
        Ok(())
    }

    pub fn is_positive(&self, margin: T) -> bool {
        let l_scale = norm_inf(&self.left);
        let r_scale = norm_inf(&self.right);
        self.left.iter().all(|&v| v > margin * l_scale) && self.right.iter().all(|&v| v > margin * r_scale)
    }
}

pub(crate) struct Eigenpair<T> {
    pub value: T,
    pub vector: Vec<T>,
    pub residual: T,
}

fn residual<T: Scalar>(m: &Matrix<T>, v: &[T], lambda: T) -> T {
    m.mul_vec(v)
        .iter()
        .zip(v)
        .fold(T::zero(), |acc, (&mv, &vi)| acc.max((mv - lambda * vi).abs()))
}

fn normalize<T: Scalar>(v: &mut [T]) -> T {
    let s = norm_inf(v);
    if s > T::zero() {
        v.iter_mut().for_each(|x| *x = *x / s);
    }
    s
}

/// Shifted power iteration on `M + cI`; returns `None` when `max_iter` is
/// exhausted.
fn power_iteration<T: Scalar>(m: &Matrix<T>, cfg: &EigenConfig<T>) -> Option<Eigenpair<T>> {
    let n = m.nrows();
    // A positive shift separates the Perron root from the rest of the
    // peripheral spectrum of periodic matrices.
    let shift = m.norm_inf() * T::lit(0.25) + T::min_positive_value();
    let mut v = vec![T::one(); n];
    let mut lambda = T::zero();
    for _ in 0..cfg.max_iter {
        let mv = m.mul_vec(&v);
        // Rayleigh quotient.
        lambda = dot(&mv, &v) / dot(&v, &v);
        let res = mv
            .iter()
            .zip(&v)
            .fold(T::zero(), |acc, (&a, &b)| acc.max((a - lambda * b).abs()));
        if res <= cfg.tol {
            return Some(Eigenpair {
                value: lambda,
                vector: v,
                residual: res,
            });
        }
        let mut next: Vec<T> = mv.iter().zip(&v).map(|(&a, &b)| a + shift * b).collect();
        if normalize(&mut next) == T::zero() {
            return None;
        }
        v = next;
    }
    let res = residual(m, &v, lambda);
    (res <= cfg.tol).then_some(Eigenpair {
        value: lambda,
        vector: v,
        residual: res,
    })
}

/// Dense fallback: dominant real eigenvalue from QR, vector by inverse
/// iteration.
fn dense_fallback<T: Scalar>(m: &Matrix<T>, cfg: &EigenConfig<T>) -> Result<Eigenpair<T>> {
    let n = m.nrows();
    let ev = eigen::eigenvalues(m)?;
    let lambda = ev[0].re;
    let scale = lambda.abs().max(T::one());
    let mut shifted = m.clone();
    let mut last_res = T::infinity();
    for perturb in [T::epsilon() * T::lit(16.0), T::epsilon().sqrt()] {
        let mu = lambda + scale * perturb;
        for i in 0..n {
            shifted[(i, i)] = m[(i, i)] - mu;
        }
        let lu = match shifted.lu() {
            Ok(lu) => lu,
            Err(_) => continue,
        };
        let mut v = vec![T::one(); n];
        for _ in 0..50 {
            let mut w = lu.solve(&v);
            // Orient the vector to be nonnegative-dominant.
            if w.iter().copied().sum::<T>() < T::zero() {
                w.iter_mut().for_each(|x| *x = -*x);
            }
            normalize(&mut w);
            v = w;
            let mv = m.mul_vec(&v);
            let lam = dot(&mv, &v) / dot(&v, &v);
            last_res = residual(m, &v, lam);
            if last_res <= cfg.tol {
                return Ok(Eigenpair {
                    value: lam,
                    vector: v,
                    residual: last_res,
                });
            }
        }
    }
    Err(Error::NoConvergence {
        what: "Perron inverse iteration",
        iterations: 100,
        residual: last_res.as_f64(),
    })
}

pub(crate) fn dominant_pair<T: Scalar>(m: &Matrix<T>, cfg: &EigenConfig<T>) -> Result<Eigenpair<T>> {
    if let Some(p) = power_iteration(m, cfg) {
        return Ok(p);
    }
    if m.nrows() <= cfg.dense_fallback_limit {
        return dense_fallback(m, cfg);
    }
    Err(Error::NoConvergence {
        what: "Perron power iteration",
        iterations: cfg.max_iter,
        residual: f64::NAN,
    })
}

pub(crate) fn perron_pair<T: Scalar>(m: &Matrix<T>, cfg: &EigenConfig<T>) -> Result<PerronData<T>> {
    let right = dominant_pair(m, cfg)?;
    let left = dominant_pair(&m.transpose(), cfg)?;
    let mut data = PerronData {
        eigenvalue: right.value,
        left: left.vector,
        right: right.vector,
        left_residual: left.residual,
        right_residual: right.residual,
    };
    let d = dot(&data.left, &data.right);
    if d > T::zero() {
        data.left.iter_mut().for_each(|v| *v = *v / d);
    }
    Ok(data)
}
