//! Spectral and structural primitives for nonnegative, Metzler and
//! M-matrices.

mod eigen;
mod graph;
mod perron;

use std::sync::OnceLock;

use num_complex::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use eigen::eigenvalues;
pub use graph::{is_irreducible, strongly_connected_components};
pub use perron::PerronData;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Controls for the iterative eigen-solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct EigenConfig<T> {
    /// Absolute infinity-norm residual on unit-norm eigenvectors.
    pub tol: T,
    pub max_iter: usize,
    /// Largest dimension for which the dense QR fallback is attempted.
    pub dense_fallback_limit: usize,
}

impl<T: Scalar> Default for EigenConfig<T> {
    fn default() -> Self {
        Self {
            tol: T::SOLVER_TOL,
            max_iter: 10_000,
            dense_fallback_limit: 512,
        }
    }
}

/// Nonnegative square matrix of infection rates.
///
/// Irreducibility is computed once at construction; the spectral radius is
/// computed on first use and cached.
#[derive(Clone)]
pub struct ContactMatrix<T> {
    entries: Matrix<T>,
    irreducible: bool,
    rho: OnceLock<T>,
}

impl<T: Scalar> ContactMatrix<T> {
    pub fn new(entries: Matrix<T>) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "contact matrix must be square with n >= 1, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let n = entries.nrows();
        for i in 0..n {
            for j in 0..n {
                let v = entries[(i, j)];
                if !v.is_finite() || v < T::zero() {
                    return Err(Error::NegativeEntry {
                        row: i,
                        col: j,
                        value: v.as_f64(),
                    });
                }
            }
        }
        let irreducible = is_irreducible(&entries);
        Ok(Self {
            entries,
            irreducible,
            rho: OnceLock::new(),
        })
    }

    pub fn from_f64_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::new(Matrix::from_f64_rows(rows))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    #[inline]
    pub fn matrix(&self) -> &Matrix<T> {
        &self.entries
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.entries
    }

    #[inline]
    pub fn is_irreducible(&self) -> bool {
        self.irreducible
    }

    /// Errors with the component listing if the matrix is reducible.
    pub fn require_irreducible(&self) -> Result<()> {
        if self.irreducible {
            Ok(())
        } else {
            Err(Error::Reducible {
                components: strongly_connected_components(&self.entries),
            })
        }
    }

    pub fn is_positive(&self) -> bool {
        self.entries.as_slice().iter().all(|&v| v > T::zero())
    }

    /// Cached spectral radius with default solver settings.
    pub fn spectral_radius(&self) -> Result<T> {
        if let Some(&r) = self.rho.get() {
            return Ok(r);
        }
        let r = spectral_radius(&self.entries, &EigenConfig::default())?;
        Ok(*self.rho.get_or_init(|| r))
    }

    pub fn perron(&self, cfg: &EigenConfig<T>) -> Result<PerronData<T>> {
        perron_vectors(self, true, cfg)
    }

    /// `diag(d) * self`, which stays nonnegative for nonnegative `d`.
    pub fn scale_rows(&self, d: &[T]) -> Result<Self> {
        Self::new(self.entries.scale_rows(d))
    }
}

impl<T: std::fmt::Debug> std::fmt::Debug for ContactMatrix<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ContactMatrix")
            .field("entries", &self.entries)
            .field("irreducible", &self.irreducible)
            .finish()
    }
}

impl<T: PartialEq> PartialEq for ContactMatrix<T> {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl<T: Scalar> Serialize for ContactMatrix<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.entries.serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for ContactMatrix<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = Matrix::<T>::deserialize(d)?;
        ContactMatrix::new(m).map_err(serde::de::Error::custom)
    }
}

fn require_square<T: Scalar>(m: &Matrix<T>) -> Result<()> {
    if m.is_square() && m.nrows() > 0 {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "expected a nonempty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )))
    }
}

/// Largest eigenvalue modulus.
///
/// Nonnegative irreducible input goes through the Perron power iteration;
/// anything else through the dense QR solver.
pub fn spectral_radius<T: Scalar>(m: &Matrix<T>, cfg: &EigenConfig<T>) -> Result<T> {
    require_square(m)?;
    let nonnegative = m.as_slice().iter().all(|&v| v >= T::zero());
    if nonnegative && is_irreducible(m) {
        return Ok(perron::dominant_pair(m, cfg)?.value);
    }
    Ok(eigenvalues(m)?
        .iter()
        .fold(T::zero(), |acc, c| acc.max(c.norm())))
}

/// Largest real part over the spectrum.
pub fn spectral_abscissa<T: Scalar>(m: &Matrix<T>) -> Result<T> {
    require_square(m)?;
    Ok(eigenvalues(m)?[0].re)
}

/// Full spectrum, sorted by descending real part.
pub fn spectrum<T: Scalar>(m: &Matrix<T>) -> Result<Vec<Complex<T>>> {
    require_square(m)?;
    eigenvalues(m)
}

/// Perron-Frobenius eigenvalue with left/right eigenvectors normalized so
/// that `left . right = 1`.
pub fn perron_vectors<T: Scalar>(
    m: &ContactMatrix<T>,
    require_irreducible: bool,
    cfg: &EigenConfig<T>,
) -> Result<PerronData<T>> {
    if require_irreducible {
        m.require_irreducible()?;
    }
    let data = perron::perron_pair(m.matrix(), cfg)?;
    if m.is_irreducible() && !data.is_positive(T::POSITIVITY_MARGIN) {
        return Err(Error::NoConvergence {
            what: "Perron eigenvector positivity",
            iterations: cfg.max_iter,
            residual: data.right_residual.max(data.left_residual).as_f64(),
        });
    }
    Ok(data)
}

/// True iff `-f` is Metzler and every eigenvalue of `f` has strictly
/// positive real part.
pub fn is_nonsingular_m_matrix<T: Scalar>(f: &Matrix<T>) -> bool {
    if !f.is_square() || f.nrows() == 0 {
        return false;
    }
    let n = f.nrows();
    for i in 0..n {
        for j in 0..n {
            if i != j && f[(i, j)] > T::zero() {
                return false;
            }
        }
    }
    match eigenvalues(f) {
        Ok(ev) => ev.iter().all(|c| c.re > T::zero()),
        Err(_) => false,
    }
}

/// Checks that `m` is Metzler (nonnegative off-diagonal).
pub fn is_metzler<T: Scalar>(m: &Matrix<T>) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] >= T::zero()))
}
