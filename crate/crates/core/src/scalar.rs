//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real floating-point type the model is computed in.
///
/// The associated tolerances are the defaults used when no explicit
/// configuration is given; they are tuned per precision.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + FromStr
    + Debug
    + Display
    + LowerExp
    + Default
    + Sum
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Residual tolerance for eigen-solvers and equilibrium solvers.
    const SOLVER_TOL: Self;
    /// Band around strict stability thresholds reported as marginal.
    const MARGINAL_BAND: Self;
    /// Allowed excursion outside the state set before integration aborts.
    const DRIFT_TOL: Self;
    /// Margin used when asserting that an eigenvector is entrywise positive.
    const POSITIVITY_MARGIN: Self;
    /// Tolerance on exact identities such as `z^T x = 0`.
    const IDENTITY_TOL: Self;

    /// Converts an `f64` literal. Panics only for non-representable input,
    /// which cannot happen for the finite literals used in this crate.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }

    #[inline]
    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize fits in a float")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const SOLVER_TOL: Self = 1e-10;
    const MARGINAL_BAND: Self = 1e-7;
    const DRIFT_TOL: Self = 1e-8;
    const POSITIVITY_MARGIN: Self = 1e-12;
    const IDENTITY_TOL: Self = 1e-12;
}

impl Scalar for f32 {
    const SOLVER_TOL: Self = 1e-5;
    const MARGINAL_BAND: Self = 1e-4;
    const DRIFT_TOL: Self = 1e-5;
    const POSITIVITY_MARGIN: Self = 1e-7;
    const IDENTITY_TOL: Self = 1e-5;
}
