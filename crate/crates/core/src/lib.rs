//! Deterministic bivirus SIS dynamics on two-layer networks.
//!
//! Two competing viruses spread over the same node set through contact
//! layers `A` and `B`:
//!
//! ```text
//! dx/dt = gamma * (-x + (I - X - Y) A x)
//! dy/dt =          -y + (I - X - Y) B y
//! ```
//!
//! The crate computes single-virus endemic equilibria, stability verdicts for
//! the survival equilibria `(xbar, 0)` and `(0, ybar)`, coexistence
//! equilibria, trajectories, and constructs a layer `B` for a given `A` so
//! that both survival equilibria are locally exponentially stable.
//!
//! All numerics are generic over [`Scalar`] (`f32`, `f64`); the `*64`
//! aliases below fix `f64`.
//!
//! ```
//! use bivirus::{check_survival_stability, AnalysisConfig, BivirusSystem64};
//!
//! let sys = BivirusSystem64::from_f64_rows(
//!     &[[3.2, 2.0], [2.0, 3.2]],
//!     &[[4.2, 0.312], [6.1318, 2.2]],
//!     1.0,
//! )
//! .unwrap();
//! let s = check_survival_stability(&sys, &AnalysisConfig::default()).unwrap();
//! assert!(s.both_stable);
//! ```

pub mod analysis;
pub mod construction;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod matrix;
pub mod network_io;
pub mod scalar;
pub mod sis;

pub use analysis::{
    boundary_reports, check_survival_stability, default_seeds, find_coexistence, full_report, AnalysisConfig,
    CoexistenceSearch, EquilibriumKind, EquilibriumReport, KeyRadii, SurvivalStability, Verdict,
};
pub use construction::{
    construct_b, construct_once, default_z, make_b_prime, predict_y_bar, AlphaRule, ConstructionConfig,
    ConstructionRecord, ZSpec,
};
pub use dynamics::{
    classify_limit, integrate, jacobian, rhs, BivirusSystem, Classification, IntegratorControls, Outcome,
    Recording, StateVector, Trajectory,
};
pub use error::{Error, Result};
pub use experiments::{basin_sweep, random_initial_conditions, run_case_study, CaseStudy, SweepResult, SweepSpec};
pub use linalg::{ContactMatrix, EigenConfig};
pub use matrix::Matrix;
pub use network_io::{load_matrix, save_matrix, threshold_and_normalize, MatrixFormat, NormalizeOptions, RawNetwork};
pub use scalar::Scalar;
pub use sis::{endemic_equilibrium, EndemicConfig, EndemicEquilibrium};

pub type Matrix64 = Matrix<f64>;
pub type ContactMatrix64 = ContactMatrix<f64>;
pub type StateVector64 = StateVector<f64>;
pub type BivirusSystem64 = BivirusSystem<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type EquilibriumReport64 = EquilibriumReport<f64>;
pub type ConstructionConfig64 = ConstructionConfig<f64>;
pub type ConstructionRecord64 = ConstructionRecord<f64>;
pub type AnalysisConfig64 = AnalysisConfig<f64>;

pub type Matrix32 = Matrix<f32>;
pub type ContactMatrix32 = ContactMatrix<f32>;
pub type StateVector32 = StateVector<f32>;
pub type BivirusSystem32 = BivirusSystem<f32>;
