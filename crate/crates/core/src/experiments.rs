//! Experiment drivers: basin sweeps on two-node systems and end-to-end case
//! studies.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{boundary_reports, full_report, AnalysisConfig, EquilibriumReport, SurvivalStability};
use crate::construction::{construct_b, ConstructionConfig, ConstructionRecord};
use crate::dynamics::{
    classify_limit, integrate, BivirusSystem, Classification, IntegratorControls, Outcome, Recording, StateVector,
    Trajectory,
};
use crate::error::{Error, Result};
use crate::linalg::ContactMatrix;
use crate::matrix::Matrix;
use crate::network_io::{save_matrix, threshold_and_normalize, IngestReport, MatrixFormat, NormalizeOptions, RawNetwork};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct SweepSpec<T> {
    /// Grid points per axis, endpoints included.
    pub resolution: usize,
    /// `x_i(0) + y_i(0) = budget` at every node.
    pub budget: T,
    pub gamma: T,
    pub t_end: T,
    /// Distance within which the final state is attributed to an equilibrium.
    pub tol: T,
    pub controls: IntegratorControls<T>,
}

impl<T: Scalar> Default for SweepSpec<T> {
    fn default() -> Self {
        Self {
            resolution: 150,
            budget: T::lit(0.01),
            gamma: T::one(),
            t_end: T::lit(1e4),
            tol: T::lit(1e-3),
            controls: IntegratorControls {
                recording: Recording::Endpoints,
                ..IntegratorControls::default()
            },
        }
    }
}

impl<T: Scalar> SweepSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.resolution < 2 {
            return Err(Error::InvalidArgument(format!(
                "resolution must be at least 2, got {}",
                self.resolution
            )));
        }
        if !(self.budget > T::zero() && self.budget < T::one()) {
            return Err(Error::InvalidArgument(format!("budget must lie in (0, 1), got {}", self.budget)));
        }
        if !(self.gamma > T::zero()) {
            return Err(Error::InvalidArgument(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !(self.t_end > T::zero() && self.tol > T::zero()) {
            return Err(Error::InvalidArgument("t_end and tol must be positive".into()));
        }
        Ok(())
    }

    /// Initial state of cell `(a, b)`: `x = budget * (a, b) / (resolution - 1)`,
    /// `y = budget - x`.
    pub fn cell_state(&self, a: usize, b: usize) -> StateVector<T> {
        let step = self.budget / T::from_usize_lossy(self.resolution - 1);
        let coord = |k: usize| {
            if k == self.resolution - 1 {
                self.budget
            } else {
                step * T::from_usize_lossy(k)
            }
        };
        let x = vec![coord(a), coord(b)];
        let y = x.iter().map(|&v| self.budget - v).collect();
        StateVector { x, y }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct SweepCell<T> {
    pub x1_0: T,
    pub x2_0: T,
    pub label: Outcome,
    pub final_time: T,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct SweepResult<T> {
    pub spec: SweepSpec<T>,
    /// Row-major over `(x1_0, x2_0)`.
    pub cells: Vec<SweepCell<T>>,
    pub counts: BTreeMap<Outcome, usize>,
    pub wall_time_secs: f64,
}

impl<T: Scalar> SweepResult<T> {
    pub fn count(&self, label: Outcome) -> usize {
        self.counts.get(&label).copied().unwrap_or(0)
    }

    pub fn labels(&self) -> Vec<Outcome> {
        self.cells.iter().map(|c| c.label).collect()
    }

    /// `x1_0,x2_0,label` per cell.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x1_0,x2_0,label")?;
        for c in &self.cells {
            writeln!(w, "{},{},{}", c.x1_0, c.x2_0, c.label)?;
        }
        Ok(())
    }

    pub fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "resolution": self.spec.resolution,
            "budget": self.spec.budget.as_f64(),
            "gamma": self.spec.gamma.as_f64(),
            "t_end": self.spec.t_end.as_f64(),
            "tol": self.spec.tol.as_f64(),
            "cells": self.cells.len(),
            "counts": self.counts.iter().map(|(k, v)| (k.as_str().to_owned(), *v)).collect::<BTreeMap<_, _>>(),
            "wall_time_secs": self.wall_time_secs,
        })
    }
}

/// Maps a healthy limit to undecided; sweeps only report the four labels.
fn sweep_label(o: Outcome) -> Outcome {
    match o {
        Outcome::Healthy => Outcome::Undecided,
        other => other,
    }
}

/// Integrates every grid cell of a two-node system and labels its limit.
pub fn basin_sweep<T: Scalar>(
    sys: &BivirusSystem<T>,
    spec: &SweepSpec<T>,
    analysis: &AnalysisConfig<T>,
) -> Result<SweepResult<T>> {
    spec.validate()?;
    if sys.n() != 2 {
        return Err(Error::InvalidArgument(format!(
            "basin sweeps need a two-node system, got n = {}",
            sys.n()
        )));
    }
    let start = Instant::now();
    let sys = sys.with_gamma(spec.gamma)?;
    let equilibria = full_report(&sys, analysis)?;
    let r = spec.resolution;
    let cells: Vec<SweepCell<T>> = (0..r * r)
        .into_par_iter()
        .map(|idx| {
            let s0 = spec.cell_state(idx / r, idx % r);
            let (x1_0, x2_0) = (s0.x[0], s0.x[1]);
            match integrate(&sys, &s0, spec.t_end, &spec.controls) {
                Ok(traj) => SweepCell {
                    x1_0,
                    x2_0,
                    label: sweep_label(classify_limit(&traj, &equilibria, spec.tol).outcome),
                    final_time: traj.final_time(),
                    error: None,
                },
                Err(e) => SweepCell {
                    x1_0,
                    x2_0,
                    label: Outcome::Undecided,
                    final_time: T::zero(),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let mut counts = BTreeMap::new();
    for c in &cells {
        *counts.entry(c.label).or_insert(0) += 1;
    }
    Ok(SweepResult {
        spec: spec.clone(),
        cells,
        counts,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

/// `x_i = p_i / (p_i + q_i)`, `y_i = c q_i / (p_i + q_i)` with `p`, `q`
/// i.i.d. uniform on (0, 1).
pub fn random_initial_conditions<T: Scalar>(n: usize, c: T, seed: u64) -> Result<StateVector<T>> {
    if !(c > T::zero() && c <= T::one()) {
        return Err(Error::InvalidArgument(format!("c must lie in (0, 1], got {c}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let (p, q) = loop {
            let p: f64 = rng.gen();
            let q: f64 = rng.gen();
            if p > 0.0 && q > 0.0 {
                break (p, q);
            }
        };
        x.push(T::lit(p / (p + q)));
        y.push(c * T::lit(q / (p + q)));
    }
    Ok(StateVector { x, y })
}

/// A family of random initial states built by [`random_initial_conditions`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct InitialSet<T> {
    /// Scale `c` of the minority virus.
    pub scale: T,
    /// Swap the roles of `x` and `y`, so virus 2 is the majority.
    pub mirrored: bool,
}

impl<T: Scalar> InitialSet<T> {
    pub fn draw(&self, n: usize, seed: u64) -> Result<StateVector<T>> {
        let s = random_initial_conditions(n, self.scale, seed)?;
        Ok(if self.mirrored { StateVector { x: s.y, y: s.x } } else { s })
    }

    pub fn tag(&self) -> String {
        let side = if self.mirrored { "y" } else { "x" };
        format!("{side}_major_c_{}", self.scale)
    }
}

/// Dense, complete, heavy-tailed mobility-like weights: i.i.d. log-normal
/// flows, self-loops included, spanning several orders of magnitude.
pub fn synthetic_mobility<T: Scalar>(n: usize, seed: u64) -> Result<RawNetwork<T>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("synthetic network needs n >= 2, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flows = LogNormal::new(0.0, 2.0).expect("valid log-normal parameters");
    let m = Matrix::from_fn(n, n, |_, _| T::lit(flows.sample(&mut rng)));
    let labels = (1..=n).map(|i| format!("node_{i}")).collect();
    RawNetwork::new(m, Some(labels))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct SimulationRun<T> {
    pub label: String,
    pub gamma: T,
    pub initial: StateVector<T>,
    pub trajectory: Trajectory<T>,
    pub classification: Classification<T>,
}

/// Integrates from `s0` and classifies against `equilibria`.
pub fn simulate_and_classify<T: Scalar>(
    sys: &BivirusSystem<T>,
    label: &str,
    s0: &StateVector<T>,
    t_end: T,
    tol: T,
    controls: &IntegratorControls<T>,
    equilibria: &[EquilibriumReport<T>],
) -> Result<SimulationRun<T>> {
    let trajectory = integrate(sys, s0, t_end, controls)?;
    let classification = classify_limit(&trajectory, equilibria, tol);
    Ok(SimulationRun {
        label: label.to_owned(),
        gamma: sys.gamma(),
        initial: s0.clone(),
        trajectory,
        classification,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum CaseStudy<T> {
    TwoNode,
    LargeSynthetic,
    UserSupplied(RawNetwork<T>),
}

impl<T> CaseStudy<T> {
    pub fn name(&self) -> &'static str {
        match self {
            CaseStudy::TwoNode => "two_node",
            CaseStudy::LargeSynthetic => "large_synthetic",
            CaseStudy::UserSupplied(_) => "user_supplied",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct CaseParams<T> {
    pub seed: u64,
    /// Node count of the synthetic network.
    pub n: usize,
    pub normalize: NormalizeOptions<T>,
    pub construction: ConstructionConfig<T>,
    pub analysis: AnalysisConfig<T>,
    pub t_end: T,
    pub tol: T,
    pub controls: IntegratorControls<T>,
    /// Random initial-condition sets, all drawn from the same `p`, `q`.
    pub initial_sets: Vec<InitialSet<T>>,
    /// Two-node sweeps, one per entry of `sweep_gammas`.
    pub sweep_resolution: Option<usize>,
    pub sweep_gammas: Vec<T>,
}

impl<T: Scalar> Default for CaseParams<T> {
    fn default() -> Self {
        Self {
            seed: 2024,
            n: 107,
            normalize: NormalizeOptions::new(T::lit(5e-5), T::lit(2.0)),
            construction: ConstructionConfig::default(),
            analysis: AnalysisConfig::default(),
            t_end: T::lit(1e4),
            tol: T::lit(1e-3),
            controls: IntegratorControls::default(),
            initial_sets: vec![
                InitialSet {
                    scale: T::lit(0.1),
                    mirrored: false,
                },
                InitialSet {
                    scale: T::lit(0.1),
                    mirrored: true,
                },
            ],
            sweep_resolution: None,
            sweep_gammas: vec![T::one(), T::lit(1.2)],
        }
    }
}

impl<T: Scalar> CaseParams<T> {
    /// Defaults for a case. Constructed layers on large networks have
    /// stability margins near `1e-5`, so the losing virus decays on a
    /// timescale of `1e5`; network cases integrate to `1e6` (runs stop early
    /// once converged).
    pub fn for_case(case: &CaseStudy<T>) -> Self {
        match case {
            CaseStudy::TwoNode => Self::default(),
            _ => Self {
                t_end: T::lit(1e6),
                ..Self::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct CaseBundle<T> {
    pub name: String,
    pub a: ContactMatrix<T>,
    pub b: ContactMatrix<T>,
    pub labels: Option<Vec<String>>,
    pub ingest: Option<IngestReport<T>>,
    /// Construction run on `a`; for the two-node study this is independent of
    /// the published `b`.
    pub construction: Option<ConstructionRecord<T>>,
    pub stability: SurvivalStability<T>,
    pub equilibria: Vec<EquilibriumReport<T>>,
    pub simulations: Vec<SimulationRun<T>>,
    pub sweeps: Vec<SweepResult<T>>,
}

pub fn two_node_a<T: Scalar>() -> ContactMatrix<T> {
    ContactMatrix::from_f64_rows(&[[3.2, 2.0], [2.0, 3.2]]).expect("valid two-node A")
}

pub fn two_node_b<T: Scalar>() -> ContactMatrix<T> {
    ContactMatrix::from_f64_rows(&[[4.2, 0.312], [6.1318, 2.2]]).expect("valid two-node B")
}

/// Named initial states of the two-node study.
pub fn two_node_initial_states<T: Scalar>() -> Vec<(&'static str, StateVector<T>)> {
    let s = |x: f64, y: f64| StateVector::from_f64(&[x, x], &[y, y]).expect("valid initial state");
    vec![
        ("initial_state_1", s(0.1, 0.05)),
        ("initial_state_2", s(0.09, 0.06)),
        ("initial_state_3", s(0.05, 0.2)),
    ]
}

pub fn run_case_study<T: Scalar>(case: &CaseStudy<T>, params: &CaseParams<T>) -> Result<CaseBundle<T>> {
    match case {
        CaseStudy::TwoNode => run_two_node(params),
        CaseStudy::LargeSynthetic => {
            let raw = synthetic_mobility(params.n, params.seed)?;
            run_network(case.name(), &raw, params)
        }
        CaseStudy::UserSupplied(raw) => run_network(case.name(), raw, params),
    }
    .map_err(|e| match e {
        Error::InvalidArgument(m) => Error::InvalidArgument(format!("{}: {m}", case.name())),
        other => other,
    })
}

fn run_two_node<T: Scalar>(params: &CaseParams<T>) -> Result<CaseBundle<T>> {
    let a = two_node_a::<T>();
    let b = two_node_b::<T>();
    let (_, record) = construct_b(&a, &params.construction)?;
    let sys = BivirusSystem::new(a.clone(), b.clone(), T::one())?;
    let (stability, _) = boundary_reports(&sys, &params.analysis)?;
    let equilibria = full_report(&sys, &params.analysis)?;

    let mut jobs = Vec::new();
    for &g in &params.sweep_gammas {
        for (label, s0) in two_node_initial_states::<T>() {
            jobs.push((format!("{label}_gamma_{g}"), g, s0));
        }
    }
    let simulations = jobs
        .par_iter()
        .map(|(label, g, s0)| {
            simulate_and_classify(
                &sys.with_gamma(*g)?,
                label,
                s0,
                params.t_end,
                params.tol,
                &params.controls,
                &equilibria,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let mut sweeps = Vec::new();
    if let Some(resolution) = params.sweep_resolution {
        for &gamma in &params.sweep_gammas {
            let spec = SweepSpec {
                resolution,
                gamma,
                t_end: params.t_end,
                tol: params.tol,
                ..SweepSpec::default()
            };
            sweeps.push(basin_sweep(&sys, &spec, &params.analysis)?);
        }
    }
    Ok(CaseBundle {
        name: "two_node".into(),
        a,
        b,
        labels: None,
        ingest: None,
        construction: Some(record),
        stability,
        equilibria,
        simulations,
        sweeps,
    })
}

fn run_network<T: Scalar>(name: &str, raw: &RawNetwork<T>, params: &CaseParams<T>) -> Result<CaseBundle<T>> {
    let (a, ingest) = threshold_and_normalize(raw, &params.normalize)?;
    let (b, record) = construct_b(&a, &params.construction)?;
    let sys = BivirusSystem::new(a.clone(), b.clone(), T::one())?;
    let (stability, equilibria) = boundary_reports(&sys, &params.analysis)?;

    let simulations = params
        .initial_sets
        .par_iter()
        .enumerate()
        .map(|(idx, set)| {
            let s0 = set.draw(a.n(), params.seed.wrapping_add(1))?;
            simulate_and_classify(
                &sys,
                &format!("initial_set_{}_{}", idx + 1, set.tag()),
                &s0,
                params.t_end,
                params.tol,
                &params.controls,
                &equilibria,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CaseBundle {
        name: name.into(),
        a,
        b,
        labels: raw.labels.clone(),
        ingest: Some(ingest),
        construction: Some(record),
        stability,
        equilibria,
        simulations,
        sweeps: Vec::new(),
    })
}

fn write_json_file<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.flush()?;
    Ok(())
}

/// Writes every artifact of a bundle into `dir` and returns the paths.
pub fn write_bundle<T: Scalar>(bundle: &CaseBundle<T>, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let labels = bundle.labels.as_deref();
    for (file, m) in [("A.json", &bundle.a), ("B.json", &bundle.b)] {
        let p = dir.join(file);
        save_matrix(m.matrix(), labels, &p, MatrixFormat::Json)?;
        written.push(p);
    }
    if let Some(ingest) = &bundle.ingest {
        let p = dir.join("ingest_report.json");
        write_json_file(&p, ingest)?;
        written.push(p);
    }
    if let Some(record) = &bundle.construction {
        let p = dir.join("construction_record.json");
        write_json_file(&p, record)?;
        written.push(p);
    }
    let p = dir.join("stability.json");
    write_json_file(&p, &bundle.stability)?;
    written.push(p);
    let p = dir.join("equilibria.json");
    write_json_file(&p, &bundle.equilibria)?;
    written.push(p);

    let mut outcomes = BTreeMap::new();
    for run in &bundle.simulations {
        let p = dir.join(format!("trajectory_{}.csv", run.label));
        run.trajectory.write_csv(BufWriter::new(fs::File::create(&p)?))?;
        written.push(p);
        outcomes.insert(run.label.clone(), run.classification.outcome.as_str());
    }
    let p = dir.join("outcomes.json");
    write_json_file(&p, &outcomes)?;
    written.push(p);

    for sweep in &bundle.sweeps {
        let stem = format!("sweep_gamma_{}", sweep.spec.gamma);
        let p = dir.join(format!("{stem}.csv"));
        sweep.write_csv(BufWriter::new(fs::File::create(&p)?))?;
        written.push(p);
        let p = dir.join(format!("{stem}.json"));
        write_json_file(&p, &sweep.summary())?;
        written.push(p);
    }
    Ok(written)
}
