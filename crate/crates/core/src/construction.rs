//! Synthesis of a second contact layer `B` for which both survival
//! equilibria of the bivirus system are locally exponentially stable.
//!
//! The procedure:
//!
//! 1. `B' = A + eps * e_i z^T` with `z^T xbar = 0`, so `A` and `B'` share the
//!    endemic equilibrium `xbar` while their left Perron vectors `u`, `v`
//!    (of `(I - Xbar) A` and `(I - Xbar) B'`) differ.
//! 2. `F = (I - Xbar)^-2 - B'`, `u~ = F^-T Xbar (I - Xbar)^-1 u` and likewise
//!    `v~`. Pick `j`, `k` with `u~_j / u~_k > v~_j / v~_k`, `alpha` between
//!    the two ratios, columns `p`, `q` with `b'_jp, b'_kq > 0`, and
//!    `beta < b'_kq xbar_q`. Then `s = alpha beta e_j - beta e_k` and
//!    `delta_x = F^-1 s`.
//! 3. `delta_B` has two nonzeros, `-beta / xbar_q` at `(k, q)` and
//!    `alpha beta / xbar_p` at `(j, p)`, so that `delta_B xbar = s = F delta_x`.
//! 4. Verify both spectral-radius conditions; shrink and retry if needed.

use serde::{Deserialize, Serialize};

use crate::analysis::{survival_stability_from, AnalysisConfig, SurvivalStability};
use crate::dynamics::BivirusSystem;
use crate::error::{AttemptSummary, Error, Result};
use crate::linalg::{is_nonsingular_m_matrix, perron_vectors, ContactMatrix};
use crate::matrix::{dot, norm_inf, Matrix};
use crate::scalar::Scalar;
use crate::sis::endemic_equilibrium;

/// How the orthogonal direction `z` is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub enum ZSpec<T> {
    /// Used as given; must satisfy `z^T xbar = 0`.
    Explicit(Vec<T>),
    /// `z_positive = 1`, `z_negative = -xbar_positive / xbar_negative`.
    Pattern { positive: usize, negative: usize },
    /// `Pattern` with `positive = i` and `negative` the column maximizing the
    /// nonnegativity bound `a_ij xbar_j / xbar_i`.
    Auto,
}

/// Placement of `alpha` inside its open feasible interval `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub enum AlphaRule<T> {
    GeometricMean,
    /// `lo * (hi / lo)^t` for `t` in `(0, 1)`.
    LogFraction(T),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct ConstructionConfig<T> {
    /// Row `i` receiving the rank-one perturbation. Defaults to the row
    /// admitting the largest `eps` under `ZSpec::Auto`, else 0.
    pub row: Option<usize>,
    pub z: ZSpec<T>,
    /// Initial `eps`; defaults to half the nonnegativity bound.
    pub epsilon: Option<T>,
    /// `beta` as a fraction of its upper bound `b'_kq xbar_q`.
    pub beta_fraction: T,
    pub alpha_rule: AlphaRule<T>,
    pub retune_limit: usize,
    /// Multiplies `beta` after a failed verification.
    pub shrink_factor: T,
    /// Multiplies `eps` after a failed verification.
    pub epsilon_shrink_factor: T,
    /// Minimum relative separation `(u~_j v~_k) / (u~_k v~_j) - 1`.
    pub min_separation: T,
    pub analysis: AnalysisConfig<T>,
}

impl<T: Scalar> Default for ConstructionConfig<T> {
    fn default() -> Self {
        Self {
            row: None,
            z: ZSpec::Auto,
            epsilon: None,
            beta_fraction: T::lit(0.1),
            alpha_rule: AlphaRule::GeometricMean,
            retune_limit: 20,
            shrink_factor: T::lit(0.5),
            epsilon_shrink_factor: T::one(),
            min_separation: T::lit(1e-9),
            analysis: AnalysisConfig::default(),
        }
    }
}

impl<T: Scalar> ConstructionConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if let Some(eps) = self.epsilon {
            if !(eps > T::zero()) {
                return Err(Error::InvalidArgument(format!("epsilon must be positive, got {eps}")));
            }
        }
        let unit = |v: T| v > T::zero() && v < T::one();
        if !unit(self.beta_fraction) {
            return Err(Error::InvalidArgument(format!(
                "beta_fraction must lie in (0, 1), got {}",
                self.beta_fraction
            )));
        }
        if !unit(self.shrink_factor) {
            return Err(Error::InvalidArgument(format!(
                "shrink_factor must lie in (0, 1), got {}",
                self.shrink_factor
            )));
        }
        if !(self.epsilon_shrink_factor > T::zero() && self.epsilon_shrink_factor <= T::one()) {
            return Err(Error::InvalidArgument(format!(
                "epsilon_shrink_factor must lie in (0, 1], got {}",
                self.epsilon_shrink_factor
            )));
        }
        if let AlphaRule::LogFraction(t) = self.alpha_rule {
            if !unit(t) {
                return Err(Error::InvalidArgument(format!("alpha fraction must lie in (0, 1), got {t}")));
            }
        }
        if self.retune_limit == 0 {
            return Err(Error::InvalidArgument("retune_limit must be at least 1".into()));
        }
        Ok(())
    }
}

/// `z` with `z_positive = 1` and `z_negative = -xbar_positive / xbar_negative`,
/// so `z^T xbar = 0`. The negative entry must sit on a positive `a[row][negative]`.
pub fn default_z<T: Scalar>(
    a: &ContactMatrix<T>,
    x_bar: &[T],
    row: usize,
    positive: usize,
    negative: usize,
) -> Result<Vec<T>> {
    let n = a.n();
    if positive >= n || negative >= n || row >= n {
        return Err(Error::InvalidArgument(format!(
            "indices (row {row}, positive {positive}, negative {negative}) out of range for n = {n}"
        )));
    }
    if positive == negative {
        return Err(Error::InvalidArgument(
            "z needs distinct positive and negative positions".into(),
        ));
    }
    if !(a.matrix()[(row, negative)] > T::zero()) {
        return Err(Error::Placement { row, col: negative });
    }
    let mut z = vec![T::zero(); n];
    z[positive] = T::one();
    z[negative] = -x_bar[positive] / x_bar[negative];
    Ok(z)
}

/// Largest `eps` keeping `A + eps e_row z^T` nonnegative:
/// `min { a[row][j] / |z_j| : z_j < 0 }` with the minimizing column.
pub fn epsilon_bound<T: Scalar>(a: &ContactMatrix<T>, row: usize, z: &[T]) -> Option<(T, usize)> {
    z.iter()
        .enumerate()
        .filter(|(_, &zj)| zj < T::zero())
        .map(|(j, &zj)| (a.matrix()[(row, j)] / zj.abs(), j))
        .fold(None, |best: Option<(T, usize)>, cand| match best {
            Some(b) if b.0 <= cand.0 => Some(b),
            _ => Some(cand),
        })
}

/// `B' = A + eps e_row z^T`, checked nonnegative, irreducible, with
/// `(I - Xbar) B' xbar = xbar` and `rho(B') > 1`.
pub fn make_b_prime<T: Scalar>(
    a: &ContactMatrix<T>,
    x_bar: &[T],
    row: usize,
    z: &[T],
    epsilon: T,
) -> Result<ContactMatrix<T>> {
    let n = a.n();
    if z.len() != n || x_bar.len() != n || row >= n {
        return Err(Error::Dimension(format!(
            "z has length {}, xbar has length {}, row {row}, n = {n}",
            z.len(),
            x_bar.len()
        )));
    }
    if z.iter().all(|&v| v == T::zero()) {
        return Err(Error::InvalidArgument("z must be nonzero".into()));
    }
    if !(epsilon > T::zero()) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let zx = dot(z, x_bar);
    let scale = z.iter().zip(x_bar).map(|(&p, &q)| (p * q).abs()).sum::<T>().max(T::one());
    if zx.abs() > T::IDENTITY_TOL * scale {
        return Err(Error::NotOrthogonal(zx.as_f64()));
    }
    for (j, &zj) in z.iter().enumerate() {
        if zj < T::zero() && !(a.matrix()[(row, j)] > T::zero()) {
            return Err(Error::Placement { row, col: j });
        }
    }
    if let Some((bound, col)) = epsilon_bound(a, row, z) {
        if epsilon >= bound {
            return Err(Error::EpsilonTooLarge {
                epsilon: epsilon.as_f64(),
                bound: bound.as_f64(),
                row,
                col,
            });
        }
    }
    let mut m = a.matrix().clone();
    for (j, &zj) in z.iter().enumerate() {
        m[(row, j)] = m[(row, j)] + epsilon * zj;
    }
    let b_prime = ContactMatrix::new(m)?;
    b_prime.require_irreducible()?;
    let rho = b_prime.spectral_radius()?;
    if rho <= T::one() {
        return Err(Error::Subthreshold { rho: rho.as_f64() });
    }
    Ok(b_prime)
}

/// `||(I - Xbar) M xbar - xbar||_inf`.
pub fn shared_equilibrium_residual<T: Scalar>(m: &Matrix<T>, x_bar: &[T]) -> T {
    m.mul_vec(x_bar)
        .iter()
        .zip(x_bar)
        .fold(T::zero(), |acc, (&mx, &x)| acc.max(((T::one() - x) * mx - x).abs()))
}

/// Quantities fixed by Step 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Step2Selection<T> {
    /// Left Perron vector of `(I - Xbar) A`, `u . xbar = 1`.
    pub u: Vec<T>,
    /// Left Perron vector of `(I - Xbar) B'`, `v . xbar = 1`.
    pub v: Vec<T>,
    pub f: Matrix<T>,
    pub u_tilde: Vec<T>,
    pub v_tilde: Vec<T>,
    pub j: usize,
    pub k: usize,
    /// `(u~_j v~_k) / (u~_k v~_j) - 1`.
    pub separation: T,
    pub alpha: T,
    /// Open interval `(u~_k / u~_j, v~_k / v~_j)`.
    pub alpha_interval: (T, T),
    pub p: usize,
    pub q: usize,
    pub beta: T,
}

fn left_perron_normalized<T: Scalar>(m: &Matrix<T>, x_bar: &[T], cfg: &AnalysisConfig<T>) -> Result<Vec<T>> {
    let cm = ContactMatrix::new(m.clone())?;
    let mut data = perron_vectors(&cm, true, &cfg.eigen)?;
    data.normalize_left_to(x_bar)?;
    Ok(data.left)
}

fn argmax_lowest<T: Scalar>(v: impl Iterator<Item = T>) -> usize {
    let mut best = 0;
    let mut best_val = T::neg_infinity();
    for (i, x) in v.enumerate() {
        if x > best_val {
            best = i;
            best_val = x;
        }
    }
    best
}

/// `F = (I - Xbar)^-2 - B'`.
pub fn f_matrix<T: Scalar>(b_prime: &ContactMatrix<T>, x_bar: &[T]) -> Matrix<T> {
    let mut f = b_prime.matrix().map(|v| -v);
    for (i, &x) in x_bar.iter().enumerate() {
        let w = T::one() / (T::one() - x);
        f[(i, i)] = f[(i, i)] + w * w;
    }
    f
}

pub fn step2_select<T: Scalar>(
    a: &ContactMatrix<T>,
    b_prime: &ContactMatrix<T>,
    x_bar: &[T],
    beta_fraction: T,
    cfg: &ConstructionConfig<T>,
) -> Result<Step2Selection<T>> {
    let n = a.n();
    let keep: Vec<T> = x_bar.iter().map(|&v| T::one() - v).collect();
    let u = left_perron_normalized(&a.matrix().scale_rows(&keep), x_bar, &cfg.analysis)?;
    let v = left_perron_normalized(&b_prime.matrix().scale_rows(&keep), x_bar, &cfg.analysis)?;

    let f = f_matrix(b_prime, x_bar);
    if !is_nonsingular_m_matrix(&f) {
        return Err(Error::NotMMatrix("F = (I - Xbar)^-2 - B' failed the certificate".into()));
    }
    let ft = f.transpose().lu()?;
    let weight: Vec<T> = x_bar.iter().map(|&x| x / (T::one() - x)).collect();
    let u_tilde = ft.solve(&u.iter().zip(&weight).map(|(&a, &w)| a * w).collect::<Vec<_>>());
    let v_tilde = ft.solve(&v.iter().zip(&weight).map(|(&a, &w)| a * w).collect::<Vec<_>>());
    if u_tilde.iter().chain(&v_tilde).any(|&t| !(t > T::zero())) {
        return Err(Error::NotMMatrix("F^-1 produced a non-positive weighted vector".into()));
    }

    let ratio: Vec<T> = u_tilde.iter().zip(&v_tilde).map(|(&p, &q)| p / q).collect();
    let j = argmax_lowest(ratio.iter().copied());
    let k = argmax_lowest(ratio.iter().map(|&r| -r));
    let separation = ratio[j] / ratio[k] - T::one();
    if j == k || !(separation > cfg.min_separation) {
        return Err(Error::ParallelEigenvectors(separation.as_f64()));
    }
    let lo = u_tilde[k] / u_tilde[j];
    let hi = v_tilde[k] / v_tilde[j];
    let alpha = match cfg.alpha_rule {
        AlphaRule::GeometricMean => (lo * hi).sqrt(),
        AlphaRule::LogFraction(t) => lo * (hi / lo).powf(t),
    };
    if !(alpha > lo && alpha < hi) {
        return Err(Error::ParallelEigenvectors(separation.as_f64()));
    }

    let bp = b_prime.matrix();
    let p = argmax_lowest((0..n).map(|c| bp[(j, c)]));
    let q = argmax_lowest((0..n).map(|c| bp[(k, c)]));
    let beta = beta_fraction * bp[(k, q)] * x_bar[q];

    Ok(Step2Selection {
        u,
        v,
        f,
        u_tilde,
        v_tilde,
        j,
        k,
        separation,
        alpha,
        alpha_interval: (lo, hi),
        p,
        q,
        beta,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Delta<T> {
    pub s: Vec<T>,
    pub delta_x: Vec<T>,
    /// `u~ . s`, required positive.
    pub u_margin: T,
    /// `v~ . s`, required negative.
    pub v_margin: T,
}

/// `s = alpha beta e_j - beta e_k` and `delta_x = F^-1 s`, asserting
/// `u~ . s > 0 > v~ . s`.
pub fn compute_delta<T: Scalar>(
    f: &Matrix<T>,
    sel: &Step2Selection<T>,
) -> Result<Delta<T>> {
    if !(sel.beta > T::zero()) {
        return Err(Error::InvalidArgument(format!("beta must be positive, got {}", sel.beta)));
    }
    let n = f.nrows();
    let mut s = vec![T::zero(); n];
    s[sel.k] = -sel.beta;
    s[sel.j] = sel.alpha * sel.beta;
    let delta_x = f.solve(&s)?;
    let u_margin = dot(&sel.u_tilde, &s);
    let v_margin = dot(&sel.v_tilde, &s);
    if !(u_margin > T::zero() && v_margin < T::zero()) {
        return Err(Error::SignCondition {
            u_margin: u_margin.as_f64(),
            v_margin: v_margin.as_f64(),
        });
    }
    Ok(Delta {
        s,
        delta_x,
        u_margin,
        v_margin,
    })
}

/// The two-entry `delta_B` of Step 3.
pub fn delta_b<T: Scalar>(n: usize, x_bar: &[T], sel: &Step2Selection<T>) -> Matrix<T> {
    let mut d = Matrix::zeros(n, n);
    d[(sel.k, sel.q)] = -sel.beta / x_bar[sel.q];
    d[(sel.j, sel.p)] = d[(sel.j, sel.p)] + sel.alpha * sel.beta / x_bar[sel.p];
    d
}

/// First-order estimate `xbar + delta_x` of the virus-2 endemic equilibrium.
pub fn predict_y_bar<T: Scalar>(x_bar: &[T], delta_x: &[T]) -> Vec<T> {
    x_bar.iter().zip(delta_x).map(|(&a, &b)| a + b).collect()
}

/// Every intermediate of one successful construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct ConstructionRecord<T> {
    pub a: ContactMatrix<T>,
    pub x_bar: Vec<T>,
    /// Perturbed row `i`.
    pub row: usize,
    pub z: Vec<T>,
    pub epsilon: T,
    pub epsilon_bound: T,
    pub b_prime: ContactMatrix<T>,
    pub beta_fraction: T,
    #[serde(flatten)]
    pub selection: Step2Selection<T>,
    #[serde(flatten)]
    pub delta: Delta<T>,
    pub delta_b: Matrix<T>,
    pub b: ContactMatrix<T>,
    pub predicted_y_bar: Vec<T>,
    /// `||delta_B xbar - s||_inf`.
    pub delta_b_residual: T,
    /// `||F delta_x - s||_inf`.
    pub f_residual: T,
    /// Final verification; `None` for a bare single attempt.
    pub checks: Option<SurvivalStability<T>>,
    /// Zero-based index of the successful attempt.
    pub attempt: usize,
    /// Failed attempts preceding the successful one.
    pub failed_attempts: Vec<AttemptSummary>,
}

/// Resolved design choices for one pass of Steps 1 to 3.
#[derive(Debug, Clone, PartialEq)]
pub struct AttemptParams<T> {
    pub row: usize,
    pub z: Vec<T>,
    pub epsilon: T,
    pub beta_fraction: T,
}

/// Steps 1 to 3 for fixed design choices, without stability verification.
pub fn construct_once<T: Scalar>(
    a: &ContactMatrix<T>,
    x_bar: &[T],
    params: &AttemptParams<T>,
    cfg: &ConstructionConfig<T>,
) -> Result<ConstructionRecord<T>> {
    let n = a.n();
    let b_prime = make_b_prime(a, x_bar, params.row, &params.z, params.epsilon)?;
    let sel = step2_select(a, &b_prime, x_bar, params.beta_fraction, cfg)?;
    let delta = compute_delta(&sel.f, &sel)?;
    let db = delta_b(n, x_bar, &sel);
    let b = ContactMatrix::new(b_prime.matrix().add(&db))?;
    b.require_irreducible()?;
    let rho_b = b.spectral_radius()?;
    if rho_b <= T::one() {
        return Err(Error::Subthreshold { rho: rho_b.as_f64() });
    }
    let db_x = db.mul_vec(x_bar);
    let f_dx = sel.f.mul_vec(&delta.delta_x);
    let delta_b_residual = crate::matrix::dist_inf(&db_x, &delta.s);
    let f_residual = crate::matrix::dist_inf(&f_dx, &delta.s);
    let predicted_y_bar = predict_y_bar(x_bar, &delta.delta_x);
    let epsilon_bound = epsilon_bound(a, params.row, &params.z).map_or(T::infinity(), |b| b.0);
    Ok(ConstructionRecord {
        a: a.clone(),
        x_bar: x_bar.to_vec(),
        row: params.row,
        z: params.z.clone(),
        epsilon: params.epsilon,
        epsilon_bound,
        b_prime,
        beta_fraction: params.beta_fraction,
        selection: sel,
        delta,
        delta_b: db,
        b,
        predicted_y_bar,
        delta_b_residual,
        f_residual,
        checks: None,
        attempt: 0,
        failed_attempts: Vec::new(),
    })
}

/// Resolves row, `z` and the initial `eps` from the configuration.
pub fn resolve_design<T: Scalar>(
    a: &ContactMatrix<T>,
    x_bar: &[T],
    cfg: &ConstructionConfig<T>,
) -> Result<AttemptParams<T>> {
    let n = a.n();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "construction needs at least two nodes (z^T xbar = 0 forces z = 0 for n = 1)".into(),
        ));
    }
    let m = a.matrix();
    // Column with the largest bound a[row][j] xbar_j / xbar_row, if any.
    let best_negative = |row: usize| {
        (0..n)
            .filter(|&j| j != row && m[(row, j)] > T::zero())
            .fold(None, |best: Option<(usize, T)>, j| {
                let bound = m[(row, j)] * x_bar[j] / x_bar[row];
                match best {
                    Some(b) if b.1 >= bound => Some(b),
                    _ => Some((j, bound)),
                }
            })
    };
    let row = match (cfg.row, &cfg.z) {
        (Some(r), _) => r,
        (None, ZSpec::Auto) => (0..n)
            .filter_map(|r| best_negative(r).map(|(_, b)| (r, b)))
            .fold(None, |best: Option<(usize, T)>, cand| match best {
                Some(b) if b.1 >= cand.1 => Some(b),
                _ => Some(cand),
            })
            .map_or(0, |(r, _)| r),
        (None, _) => 0,
    };
    if row >= n {
        return Err(Error::InvalidArgument(format!("row {row} out of range for n = {n}")));
    }
    let z = match &cfg.z {
        ZSpec::Explicit(z) => z.clone(),
        ZSpec::Pattern { positive, negative } => default_z(a, x_bar, row, *positive, *negative)?,
        ZSpec::Auto => {
            let (negative, _) = best_negative(row).ok_or(Error::Placement { row, col: row })?;
            default_z(a, x_bar, row, row, negative)?
        }
    };
    let epsilon = match cfg.epsilon {
        Some(e) => e,
        None => {
            let (bound, _) = epsilon_bound(a, row, &z)
                .ok_or_else(|| Error::InvalidArgument("z has no negative entry".into()))?;
            bound * T::lit(0.5)
        }
    };
    Ok(AttemptParams {
        row,
        z,
        epsilon,
        beta_fraction: cfg.beta_fraction,
    })
}

/// Full procedure: Steps 1 to 3, verification, and retuning.
pub fn construct_b<T: Scalar>(
    a: &ContactMatrix<T>,
    cfg: &ConstructionConfig<T>,
) -> Result<(ContactMatrix<T>, ConstructionRecord<T>)> {
    cfg.validate()?;
    a.require_irreducible()?;
    let x_bar = endemic_equilibrium(a, &cfg.analysis.endemic)?.x_bar;
    let mut params = resolve_design(a, &x_bar, cfg)?;
    let mut failed: Vec<AttemptSummary> = Vec::new();

    for attempt in 0..cfg.retune_limit {
        let summary = |failure: String, radii: Option<(T, T)>| AttemptSummary {
            attempt,
            epsilon: params.epsilon.as_f64(),
            beta: f64::NAN,
            rho_virus1: radii.map(|r| r.0.as_f64()),
            rho_virus2: radii.map(|r| r.1.as_f64()),
            failure,
        };
        match construct_once(a, &x_bar, &params, cfg) {
            Ok(mut record) => {
                let checked = verify(a, &record, cfg);
                match checked {
                    Ok(stab) if stab.both_stable => {
                        record.checks = Some(stab);
                        record.attempt = attempt;
                        record.failed_attempts = failed;
                        return Ok((record.b.clone(), record));
                    }
                    Ok(stab) => {
                        let mut s = summary(
                            "verification failed: a spectral radius is not below 1".into(),
                            Some((stab.rho_ybar_a, stab.rho_xbar_b)),
                        );
                        s.beta = record.selection.beta.as_f64();
                        failed.push(s);
                    }
                    Err(e) => {
                        let mut s = summary(e.to_string(), None);
                        s.beta = record.selection.beta.as_f64();
                        failed.push(s);
                    }
                }
            }
            Err(e @ (Error::Placement { .. } | Error::NotOrthogonal(_) | Error::InvalidArgument(_))) => {
                return Err(e);
            }
            Err(e) => failed.push(summary(e.to_string(), None)),
        }
        params.epsilon = params.epsilon * cfg.epsilon_shrink_factor;
        params.beta_fraction = params.beta_fraction * cfg.shrink_factor;
    }
    Err(Error::RetuneExhausted { attempts: failed })
}

fn verify<T: Scalar>(
    a: &ContactMatrix<T>,
    record: &ConstructionRecord<T>,
    cfg: &ConstructionConfig<T>,
) -> Result<SurvivalStability<T>> {
    let sys = BivirusSystem::new(a.clone(), record.b.clone(), T::one())?;
    let y_bar = endemic_equilibrium(&record.b, &cfg.analysis.endemic)?.x_bar;
    survival_stability_from(&sys, record.x_bar.clone(), y_bar, &cfg.analysis)
}

/// `||delta_B xbar - s||_inf` and `||F delta_x - s||_inf` recomputed from a
/// record, for audits of deserialized records.
pub fn identity_residuals<T: Scalar>(record: &ConstructionRecord<T>) -> (T, T) {
    let db_x = record.delta_b.mul_vec(&record.x_bar);
    let f_dx = record.selection.f.mul_vec(&record.delta.delta_x);
    (
        crate::matrix::dist_inf(&db_x, &record.delta.s),
        crate::matrix::dist_inf(&f_dx, &record.delta.s),
    )
}

/// Largest entry of `|delta_x|`.
pub fn delta_norm<T: Scalar>(record: &ConstructionRecord<T>) -> T {
    norm_inf(&record.delta.delta_x)
}
