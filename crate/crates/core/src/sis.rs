//! Endemic equilibrium of the single-virus SIS network model
//! `x' = -x + (I - X) A x`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ContactMatrix, EigenConfig};
use crate::matrix::{norm_inf, Matrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct EndemicConfig<T> {
    /// Target residual `||-x + (I - X) A x||_inf`.
    pub tol: T,
    pub max_iter: usize,
    /// Finish with damped Newton once the fixed-point residual drops below
    /// `polish_switch`.
    pub polish: bool,
    pub polish_switch: T,
}

impl<T: Scalar> Default for EndemicConfig<T> {
    fn default() -> Self {
        Self {
            tol: T::SOLVER_TOL,
            max_iter: 100_000,
            polish: true,
            polish_switch: T::lit(1e-4),
        }
    }
}

/// Nonzero equilibrium `xbar` of the single-virus system, `0 < xbar < 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct EndemicEquilibrium<T> {
    pub x_bar: Vec<T>,
    pub residual: T,
    /// Fixed-point sweeps performed.
    pub iterations: usize,
    /// Newton steps taken during polishing.
    pub newton_iterations: usize,
}

/// `-x + (I - diag(x)) A x`, the single-virus vector field.
pub fn single_virus_rhs<T: Scalar>(a: &Matrix<T>, x: &[T]) -> Vec<T> {
    a.mul_vec(x)
        .iter()
        .zip(x)
        .map(|(&ax, &xi)| -xi + (T::one() - xi) * ax)
        .collect()
}

/// One sweep of `x_i <- (Ax)_i / (1 + (Ax)_i)`.
pub fn fixed_point_step<T: Scalar>(a: &Matrix<T>, x: &[T]) -> Vec<T> {
    a.mul_vec(x).into_iter().map(|ax| ax / (T::one() + ax)).collect()
}

/// Residual `||[-I + (I - diag(x)) A] x||_inf`.
pub fn verify_equilibrium<T: Scalar>(a: &ContactMatrix<T>, x: &[T]) -> Result<T> {
    if x.len() != a.n() {
        return Err(Error::Dimension(format!(
            "state has length {}, matrix is {}x{}",
            x.len(),
            a.n(),
            a.n()
        )));
    }
    Ok(norm_inf(&single_virus_rhs(a.matrix(), x)))
}

fn newton_polish<T: Scalar>(a: &Matrix<T>, x0: &[T], cfg: &EndemicConfig<T>) -> Option<(Vec<T>, T, usize)> {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut f = single_virus_rhs(a, &x);
    let mut res = norm_inf(&f);
    for it in 0..50 {
        if res < cfg.tol {
            return Some((x, res, it));
        }
        let ax = a.mul_vec(&x);
        let mut jac = a.scale_rows(&x.iter().map(|&v| T::one() - v).collect::<Vec<_>>());
        for i in 0..n {
            jac[(i, i)] = jac[(i, i)] - T::one() - ax[i];
        }
        let step = jac.solve(&f.iter().map(|&v| -v).collect::<Vec<_>>()).ok()?;
        let mut lambda = T::one();
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<T> = x.iter().zip(&step).map(|(&xi, &d)| xi + lambda * d).collect();
            if trial.iter().all(|&v| v > T::zero() && v < T::one()) {
                let tf = single_virus_rhs(a, &trial);
                let tr = norm_inf(&tf);
                if tr < res {
                    x = trial;
                    f = tf;
                    res = tr;
                    accepted = true;
                    break;
                }
            }
            lambda = lambda * T::lit(0.5);
        }
        if !accepted {
            break;
        }
    }
    (res < cfg.tol).then_some((x, res, 50))
}

/// Endemic equilibrium of `A` by the monotone fixed-point iteration started
/// at the all-ones vector, optionally finished with damped Newton.
pub fn endemic_equilibrium<T: Scalar>(
    a: &ContactMatrix<T>,
    cfg: &EndemicConfig<T>,
) -> Result<EndemicEquilibrium<T>> {
    a.require_irreducible()?;
    let rho = crate::linalg::spectral_radius(a.matrix(), &EigenConfig::default())?;
    if rho <= T::one() {
        return Err(Error::Subthreshold { rho: rho.as_f64() });
    }
    let m = a.matrix();
    let mut x = vec![T::one(); a.n()];
    let mut res = norm_inf(&single_virus_rhs(m, &x));
    let switch = if cfg.polish { cfg.polish_switch.max(cfg.tol) } else { cfg.tol };
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        if res < cfg.tol {
            break;
        }
        if cfg.polish && res < switch {
            if let Some((xp, rp, steps)) = newton_polish(m, &x, cfg) {
                return Ok(EndemicEquilibrium {
                    x_bar: xp,
                    residual: rp,
                    iterations,
                    newton_iterations: steps,
                });
            }
        }
        x = fixed_point_step(m, &x);
        res = norm_inf(&single_virus_rhs(m, &x));
        iterations += 1;
    }
    if res < cfg.tol {
        return Ok(EndemicEquilibrium {
            x_bar: x,
            residual: res,
            iterations,
            newton_iterations: 0,
        });
    }
    if cfg.polish {
        if let Some((xp, rp, steps)) = newton_polish(m, &x, cfg) {
            return Ok(EndemicEquilibrium {
                x_bar: xp,
                residual: rp,
                iterations,
                newton_iterations: steps,
            });
        }
    }
    Err(Error::NoConvergence {
        what: "endemic equilibrium",
        iterations,
        residual: res.as_f64(),
    })
}
