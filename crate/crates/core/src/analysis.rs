//! Equilibrium census and local stability verdicts.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{jacobian_unchecked, BivirusSystem, StateVector};
use crate::error::Result;
use crate::linalg::{spectral_radius, spectrum, EigenConfig};
use crate::matrix::{norm_inf, Matrix};
use crate::scalar::Scalar;
use crate::sis::{endemic_equilibrium, EndemicConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumKind {
    Healthy,
    #[serde(rename = "virus1_survival")]
    Virus1Survival,
    #[serde(rename = "virus2_survival")]
    Virus2Survival,
    Coexistence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Stable,
    Unstable,
    Marginal,
}

impl Verdict {
    /// Stable iff `value < threshold - band`, unstable iff above
    /// `threshold + band`.
    pub fn from_threshold<T: Scalar>(value: T, threshold: T, band: T) -> Self {
        if value < threshold - band {
            Verdict::Stable
        } else if value > threshold + band {
            Verdict::Unstable
        } else {
            Verdict::Marginal
        }
    }
}

/// Spectral radii that decide the survival equilibria's stability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct KeyRadii<T> {
    /// `rho((I - Xbar) B)`; below one iff `(xbar, 0)` is stable.
    pub rho_xbar_b: Option<T>,
    /// `rho((I - Ybar) A)`; below one iff `(0, ybar)` is stable.
    pub rho_ybar_a: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct EquilibriumReport<T> {
    pub kind: EquilibriumKind,
    pub point: StateVector<T>,
    /// Jacobian eigenvalues, sorted by descending real part.
    pub spectrum: Vec<Complex<T>>,
    pub abscissa: T,
    pub verdict: Verdict,
    pub key_radii: KeyRadii<T>,
    pub rhs_norm: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct AnalysisConfig<T> {
    pub endemic: EndemicConfig<T>,
    pub eigen: EigenConfig<T>,
    /// Band around strict inequalities reported as marginal.
    pub marginal_band: T,
    /// Newton stops once `||rhs||_inf` falls below this.
    pub newton_tol: T,
    pub max_newton_iter: usize,
    pub max_halvings: usize,
    /// Roots closer than this (infinity norm) are merged.
    pub dedup_tol: T,
    /// Seed multipliers `c` applied to `xbar` and `ybar` on the tensor grid.
    pub grid: Vec<T>,
    pub random_seeds: usize,
    pub rng_seed: u64,
}

impl<T: Scalar> Default for AnalysisConfig<T> {
    fn default() -> Self {
        Self {
            endemic: EndemicConfig::default(),
            eigen: EigenConfig::default(),
            marginal_band: T::MARGINAL_BAND,
            newton_tol: T::lit(1e-12).max(T::epsilon() * T::lit(64.0)),
            max_newton_iter: 200,
            max_halvings: 60,
            dedup_tol: T::lit(1e-6).max(T::epsilon() * T::lit(1e3)),
            grid: [0.2, 0.4, 0.6, 0.8].iter().map(|&v| T::lit(v)).collect(),
            random_seeds: 20,
            rng_seed: 0x5eed_b1f1,
        }
    }
}

/// Result of evaluating both survival-of-the-fittest stability conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct SurvivalStability<T> {
    pub x_bar: Vec<T>,
    pub y_bar: Vec<T>,
    /// `rho((I - Ybar) A)`, governing `(0, ybar)`.
    pub rho_ybar_a: T,
    /// `rho((I - Xbar) B)`, governing `(xbar, 0)`.
    pub rho_xbar_b: T,
    pub virus1_verdict: Verdict,
    pub virus2_verdict: Verdict,
    pub both_stable: bool,
}

/// `rho((I - diag(d)) M)`.
pub fn damped_radius<T: Scalar>(m: &Matrix<T>, d: &[T], cfg: &EigenConfig<T>) -> Result<T> {
    let keep: Vec<T> = d.iter().map(|&v| T::one() - v).collect();
    spectral_radius(&m.scale_rows(&keep), cfg)
}

pub fn check_survival_stability<T: Scalar>(
    sys: &BivirusSystem<T>,
    cfg: &AnalysisConfig<T>,
) -> Result<SurvivalStability<T>> {
    let x_bar = endemic_equilibrium(sys.a(), &cfg.endemic)?.x_bar;
    let y_bar = endemic_equilibrium(sys.b(), &cfg.endemic)?.x_bar;
    survival_stability_from(sys, x_bar, y_bar, cfg)
}

pub(crate) fn survival_stability_from<T: Scalar>(
    sys: &BivirusSystem<T>,
    x_bar: Vec<T>,
    y_bar: Vec<T>,
    cfg: &AnalysisConfig<T>,
) -> Result<SurvivalStability<T>> {
    let rho_ybar_a = damped_radius(sys.a().matrix(), &y_bar, &cfg.eigen)?;
    let rho_xbar_b = damped_radius(sys.b().matrix(), &x_bar, &cfg.eigen)?;
    let virus1_verdict = Verdict::from_threshold(rho_xbar_b, T::one(), cfg.marginal_band);
    let virus2_verdict = Verdict::from_threshold(rho_ybar_a, T::one(), cfg.marginal_band);
    Ok(SurvivalStability {
        x_bar,
        y_bar,
        rho_ybar_a,
        rho_xbar_b,
        virus1_verdict,
        virus2_verdict,
        both_stable: virus1_verdict == Verdict::Stable && virus2_verdict == Verdict::Stable,
    })
}

/// Builds a report for a known equilibrium point, classifying it by the
/// spectral abscissa of the full Jacobian.
pub fn report_at<T: Scalar>(
    sys: &BivirusSystem<T>,
    kind: EquilibriumKind,
    point: StateVector<T>,
    key_radii: KeyRadii<T>,
    cfg: &AnalysisConfig<T>,
) -> Result<EquilibriumReport<T>> {
    let jac = jacobian_unchecked(sys, &point);
    let spec = spectrum(&jac)?;
    let abscissa = spec[0].re;
    let mut f = vec![T::zero(); 2 * sys.n()];
    sys.field(&point.to_flat(), &mut f);
    Ok(EquilibriumReport {
        kind,
        point,
        spectrum: spec,
        abscissa,
        verdict: Verdict::from_threshold(abscissa, T::zero(), cfg.marginal_band),
        key_radii,
        rhs_norm: norm_inf(&f),
    })
}

/// Outcome of a seeded coexistence search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct CoexistenceSearch<T> {
    pub roots: Vec<EquilibriumReport<T>>,
    /// Seeds whose Newton iteration did not converge.
    pub non_convergent: usize,
    /// Seeds that converged to a point outside the interior of the state set.
    pub boundary: usize,
}

fn newton_equilibrium<T: Scalar>(sys: &BivirusSystem<T>, seed: &StateVector<T>, cfg: &AnalysisConfig<T>) -> Option<Vec<T>> {
    let dim = 2 * sys.n();
    let mut z = seed.to_flat();
    let mut f = vec![T::zero(); dim];
    sys.field(&z, &mut f);
    let mut res = norm_inf(&f);
    for _ in 0..cfg.max_newton_iter {
        if res < cfg.newton_tol {
            return Some(z);
        }
        let jac = jacobian_unchecked(sys, &StateVector::from_flat(&z));
        let neg_f: Vec<T> = f.iter().map(|&v| -v).collect();
        let step = match jac.solve(&neg_f) {
            Ok(s) if s.iter().all(|v| v.is_finite()) => s,
            _ => regularized_step(&jac, &neg_f)?,
        };
        let mut lambda = T::one();
        let mut improved = false;
        for _ in 0..=cfg.max_halvings {
            let trial: Vec<T> = z.iter().zip(&step).map(|(&a, &d)| a + lambda * d).collect();
            let mut tf = vec![T::zero(); dim];
            sys.field(&trial, &mut tf);
            let tr = norm_inf(&tf);
            if tr < res {
                z = trial;
                f = tf;
                res = tr;
                improved = true;
                break;
            }
            lambda = lambda * T::lit(0.5);
        }
        if !improved {
            break;
        }
    }
    (res < cfg.newton_tol).then_some(z)
}

/// Levenberg-Marquardt step `(J^T J + mu I) d = J^T r` for singular `J`.
fn regularized_step<T: Scalar>(jac: &Matrix<T>, rhs: &[T]) -> Option<Vec<T>> {
    let jt = jac.transpose();
    let mut normal = jt.matmul(jac);
    let mu = normal.max_abs().max(T::one()) * T::lit(1e-10);
    for i in 0..normal.nrows() {
        normal[(i, i)] = normal[(i, i)] + mu;
    }
    normal.solve(&jt.mul_vec(rhs)).ok()
}

fn interior_with_margin<T: Scalar>(z: &[T], margin: T) -> bool {
    let n = z.len() / 2;
    (0..n).all(|i| z[i] > margin && z[n + i] > margin && z[i] + z[n + i] < T::one() - margin)
}

fn lexicographic<T: Scalar>(a: &[T], b: &[T]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// Damped Newton from each seed on `rhs = 0` (with `gamma = 1`), keeping
/// interior roots, merged and sorted by coordinates.
pub fn find_coexistence<T: Scalar>(
    sys: &BivirusSystem<T>,
    seeds: &[StateVector<T>],
    cfg: &AnalysisConfig<T>,
) -> Result<CoexistenceSearch<T>> {
    let unit = sys.with_gamma(T::one())?;
    let outcomes: Vec<Option<Vec<T>>> = seeds
        .par_iter()
        .map(|s| newton_equilibrium(&unit, s, cfg))
        .collect();
    let non_convergent = outcomes.iter().filter(|o| o.is_none()).count();
    // Newton runs that slide onto a face stop a hair inside it; anything
    // that close to the boundary is a boundary equilibrium.
    let margin = cfg.dedup_tol;
    let mut converged: Vec<Vec<T>> = outcomes.into_iter().flatten().collect();
    let before = converged.len();
    converged.retain(|z| interior_with_margin(z, margin));
    let boundary = before - converged.len();

    converged.sort_by(|a, b| lexicographic(a, b));
    let mut unique: Vec<Vec<T>> = Vec::new();
    for z in converged {
        if unique
            .iter()
            .all(|u| crate::matrix::dist_inf(u, &z) >= cfg.dedup_tol)
        {
            unique.push(z);
        }
    }
    let roots = unique
        .into_iter()
        .map(|z| {
            report_at(
                sys,
                EquilibriumKind::Coexistence,
                StateVector::from_flat(&z),
                KeyRadii {
                    rho_xbar_b: None,
                    rho_ybar_a: None,
                },
                cfg,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CoexistenceSearch {
        roots,
        non_convergent,
        boundary,
    })
}

/// Uniform sample from the interior of the state set, node by node.
pub fn random_interior_state<T: Scalar, R: Rng>(n: usize, rng: &mut R) -> StateVector<T> {
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let (mut u, mut v): (f64, f64) = (rng.gen(), rng.gen());
        if u + v >= 1.0 {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        // Keep away from the faces.
        let shrink = |w: f64| 1e-6 + (1.0 - 3e-6) * w;
        x.push(T::lit(shrink(u)));
        y.push(T::lit(shrink(v)));
    }
    StateVector { x, y }
}

/// Tensor grid `(c1 xbar, c2 ybar)` inside the state set plus seeded random
/// interior points.
pub fn default_seeds<T: Scalar>(x_bar: &[T], y_bar: &[T], cfg: &AnalysisConfig<T>) -> Vec<StateVector<T>> {
    let mut seeds = Vec::new();
    for &c1 in &cfg.grid {
        for &c2 in &cfg.grid {
            let s = StateVector {
                x: x_bar.iter().map(|&v| c1 * v).collect(),
                y: y_bar.iter().map(|&v| c2 * v).collect(),
            };
            if s.is_interior() {
                seeds.push(s);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    for _ in 0..cfg.random_seeds {
        seeds.push(random_interior_state(x_bar.len(), &mut rng));
    }
    seeds
}

/// Healthy and both survival equilibria with their verdicts.
pub fn boundary_reports<T: Scalar>(
    sys: &BivirusSystem<T>,
    cfg: &AnalysisConfig<T>,
) -> Result<(SurvivalStability<T>, Vec<EquilibriumReport<T>>)> {
    let n = sys.n();
    let surv = check_survival_stability(sys, cfg)?;
    let none = KeyRadii {
        rho_xbar_b: None,
        rho_ybar_a: None,
    };
    let reports = vec![
        report_at(sys, EquilibriumKind::Healthy, StateVector::zeros(n), none, cfg)?,
        report_at(
            sys,
            EquilibriumKind::Virus1Survival,
            StateVector {
                x: surv.x_bar.clone(),
                y: vec![T::zero(); n],
            },
            KeyRadii {
                rho_xbar_b: Some(surv.rho_xbar_b),
                rho_ybar_a: None,
            },
            cfg,
        )?,
        report_at(
            sys,
            EquilibriumKind::Virus2Survival,
            StateVector {
                x: vec![T::zero(); n],
                y: surv.y_bar.clone(),
            },
            KeyRadii {
                rho_xbar_b: None,
                rho_ybar_a: Some(surv.rho_ybar_a),
            },
            cfg,
        )?,
    ];
    Ok((surv, reports))
}

/// Healthy, both survival, and every coexistence equilibrium found from the
/// default seeds, in that order.
pub fn full_report<T: Scalar>(sys: &BivirusSystem<T>, cfg: &AnalysisConfig<T>) -> Result<Vec<EquilibriumReport<T>>> {
    let (surv, mut reports) = boundary_reports(sys, cfg)?;
    let seeds = default_seeds(&surv.x_bar, &surv.y_bar, cfg);
    reports.extend(find_coexistence(sys, &seeds, cfg)?.roots);
    Ok(reports)
}
