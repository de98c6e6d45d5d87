use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use bivirus::analysis::boundary_reports;
use bivirus::experiments::{
    basin_sweep, run_case_study, simulate_and_classify, write_bundle, CaseParams, CaseStudy, InitialSet, SweepSpec,
};
use bivirus::network_io::threshold_and_normalize_unchecked;
use bivirus::{
    construct_b, find_coexistence, full_report, load_matrix, save_matrix, AlphaRule, AnalysisConfig,
    BivirusSystem, ConstructionConfig, ContactMatrix, Error, IntegratorControls, MatrixFormat, NormalizeOptions,
    RawNetwork, Recording, StateVector, Verdict, ZSpec,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

const OUT_ENV: &str = "BIVIRUS_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "bivirus", version, about = "Bivirus SIS network model: construction, analysis, simulation")]
struct Cli {
    /// Seed for every random choice made by the run.
    #[arg(long, global = true, default_value_t = 2024)]
    seed: u64,

    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output directory for machine-readable artifacts.
    #[arg(long, global = true, env = OUT_ENV, default_value = "bivirus-out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build B from A so that both survival equilibria are stable.
    Construct(ConstructArgs),
    /// Equilibria and stability verdicts of a layer pair.
    Analyze(AnalyzeArgs),
    /// Integrate one trajectory and classify its limit.
    Simulate(SimulateArgs),
    /// Basin-of-attraction sweep over a two-node system.
    Sweep(SweepArgs),
    /// Normalize, threshold and renormalize a raw weight matrix.
    Ingest(IngestArgs),
    /// Run a bundled scenario end to end.
    CaseStudy(CaseStudyArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Args, Debug)]
struct ConstructArgs {
    /// Virus-1 layer (.csv or .json).
    #[arg(long = "a-matrix", alias = "a")]
    a_matrix: PathBuf,
    /// Construction configuration as JSON; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Row i of the rank-one perturbation (0-based).
    #[arg(long)]
    row: Option<usize>,
    /// Position of the +1 entry of z (0-based); requires --z-negative.
    #[arg(long, requires = "z_negative")]
    z_positive: Option<usize>,
    /// Position of the negative entry of z (0-based); requires --z-positive.
    #[arg(long, requires = "z_positive")]
    z_negative: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    beta_fraction: Option<f64>,
    /// Place alpha at this fraction of its interval on a log scale instead of
    /// the geometric mean.
    #[arg(long)]
    alpha_fraction: Option<f64>,
    #[arg(long)]
    retune_limit: Option<usize>,
    #[arg(long)]
    shrink_factor: Option<f64>,
    #[arg(long)]
    epsilon_shrink_factor: Option<f64>,
}

#[derive(Args, Debug)]
struct PairArgs {
    /// Virus-1 layer.
    #[arg(long)]
    a: PathBuf,
    /// Virus-2 layer.
    #[arg(long)]
    b: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    pair: PairArgs,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    pair: PairArgs,
    /// Comma-separated x(0).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    x0: Vec<f64>,
    /// Comma-separated y(0).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    y0: Vec<f64>,
    #[arg(long, default_value_t = 1e4)]
    t_end: f64,
    /// Classification distance to an equilibrium.
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    #[arg(long, default_value_t = 1e-9)]
    rtol: f64,
    #[arg(long, default_value_t = 1e-9)]
    atol: f64,
    /// Search for coexistence equilibria to classify against (default: only
    /// for n <= 20).
    #[arg(long)]
    coexistence: Option<bool>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    pair: PairArgs,
    #[arg(long, default_value_t = 150)]
    resolution: usize,
    /// Per-node budget x_i(0) + y_i(0).
    #[arg(long, default_value_t = 0.01)]
    budget: f64,
    #[arg(long, default_value_t = 1e4)]
    t_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
}

#[derive(Args, Debug)]
struct IngestArgs {
    #[arg(long)]
    raw: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    kappa: f64,
    #[arg(long, default_value_t = 2.0)]
    row_sum: f64,
    /// Zero the diagonal before normalizing.
    #[arg(long)]
    drop_diagonal: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum CaseName {
    TwoNode,
    LargeSynthetic,
    UserSupplied,
}

#[derive(Args, Debug)]
struct CaseStudyArgs {
    #[arg(long, value_enum)]
    name: CaseName,
    /// Raw matrix for user_supplied.
    #[arg(long, required_if_eq("name", "user-supplied"))]
    raw: Option<PathBuf>,
    /// Node count for large_synthetic.
    #[arg(long, default_value_t = 107)]
    n: usize,
    #[arg(long, default_value_t = 5e-5)]
    kappa: f64,
    #[arg(long, default_value_t = 2.0)]
    row_sum: f64,
    #[arg(long)]
    t_end: Option<f64>,
    /// Two-node sweeps at gamma 1 and 1.2 with this resolution.
    #[arg(long)]
    sweep_resolution: Option<usize>,
    /// Minority scales of the virus-1-major initial sets.
    #[arg(long, value_delimiter = ',')]
    x_major: Option<Vec<f64>>,
    /// Minority scales of the virus-2-major initial sets.
    #[arg(long, value_delimiter = ',')]
    y_major: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
struct ReplayArgs {
    #[arg(long)]
    manifest: PathBuf,
}

/// A failure with its exit code: 1 for input errors, 2 for procedure failures.
#[derive(Debug)]
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn input(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: 1,
            error: error.into(),
        }
    }

    fn procedure(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: 2,
            error: error.into(),
        }
    }
}

type CmdResult = Result<(), Failure>;

/// Library errors triggered by bad input map to exit 1, the rest to 2.
fn classify(e: Error) -> Failure {
    match e {
        Error::Io(_)
        | Error::Json(_)
        | Error::Csv(_)
        | Error::Parse(_)
        | Error::Dimension(_)
        | Error::NegativeEntry { .. }
        | Error::Reducible { .. }
        | Error::Subthreshold { .. }
        | Error::InvalidArgument(_)
        | Error::OutsideState { .. }
        | Error::Placement { .. }
        | Error::EpsilonTooLarge { .. }
        | Error::NotOrthogonal(_) => Failure::input(e),
        _ => Failure::procedure(e),
    }
}

trait OrFail<T> {
    fn or_input(self) -> Result<T, Failure>;
    fn or_procedure(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> OrFail<T> for Result<T, E> {
    fn or_input(self) -> Result<T, Failure> {
        self.map_err(Failure::input)
    }

    fn or_procedure(self) -> Result<T, Failure> {
        self.map_err(Failure::procedure)
    }
}

#[derive(Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    tool: &'static str,
    version: &'static str,
    subcommand: &'static str,
    argv: Vec<String>,
    seed: u64,
    threads: Option<usize>,
    config: serde_json::Value,
    inputs: Vec<InputDigest>,
    artifacts: Vec<&'a str>,
}

fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

struct Run {
    out: PathBuf,
}

impl Run {
    /// Creates the output directory and writes the manifest before any
    /// computation.
    fn start(
        cli: &Cli,
        argv: &[String],
        subcommand: &'static str,
        config: serde_json::Value,
        inputs: &[&Path],
        artifacts: &[&str],
    ) -> Result<Self, Failure> {
        let digests = inputs
            .iter()
            .map(|p| {
                Ok(InputDigest {
                    path: p.display().to_string(),
                    sha256: sha256_file(p)?,
                })
            })
            .collect::<anyhow::Result<Vec<_>>>()
            .map_err(Failure::input)?;
        fs::create_dir_all(&cli.out)
            .with_context(|| format!("creating {}", cli.out.display()))
            .or_input()?;
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            argv: argv.to_vec(),
            seed: cli.seed,
            threads: cli.threads,
            config,
            inputs: digests,
            artifacts: artifacts.to_vec(),
        };
        let run = Run { out: cli.out.clone() };
        run.write_json("manifest.json", &manifest).or_input()?;
        eprintln!("[{subcommand}] manifest written to {}", run.path("manifest.json").display());
        Ok(run)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write_json<S: Serialize + ?Sized>(&self, name: &str, value: &S) -> anyhow::Result<()> {
        let p = self.path(name);
        let mut w = BufWriter::new(fs::File::create(&p).with_context(|| format!("creating {}", p.display()))?);
        serde_json::to_writer_pretty(&mut w, value)?;
        w.flush()?;
        Ok(())
    }
}

fn load_contact(path: &Path) -> Result<(ContactMatrix<f64>, Option<Vec<String>>), Failure> {
    let raw = load_raw(path)?;
    let labels = raw.labels.clone();
    let m = raw
        .into_contact()
        .map_err(classify)
        .map_err(|f| Failure {
            code: f.code,
            error: f.error.context(format!("loading {}", path.display())),
        })?;
    Ok((m, labels))
}

fn load_raw(path: &Path) -> Result<RawNetwork<f64>, Failure> {
    let format = MatrixFormat::from_path(path).map_err(classify)?;
    load_matrix(path, format)
        .map_err(classify)
        .map_err(|f| Failure {
            code: f.code,
            error: f.error.context(format!("loading {}", path.display())),
        })
}

fn load_system(pair: &PairArgs) -> Result<BivirusSystem<f64>, Failure> {
    let (a, _) = load_contact(&pair.a)?;
    let (b, _) = load_contact(&pair.b)?;
    BivirusSystem::new(a, b, pair.gamma).map_err(classify)
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Stable => "stable",
        Verdict::Unstable => "unstable",
        Verdict::Marginal => "marginal",
    }
}

fn construction_config(args: &ConstructArgs) -> Result<ConstructionConfig<f64>, Failure> {
    let mut cfg: ConstructionConfig<f64> = match &args.config {
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("reading {}", p.display()))
                .or_input()?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", p.display()))
                .or_input()?
        }
        None => ConstructionConfig::default(),
    };
    if args.row.is_some() {
        cfg.row = args.row;
    }
    if let (Some(positive), Some(negative)) = (args.z_positive, args.z_negative) {
        cfg.z = ZSpec::Pattern { positive, negative };
    }
    if args.epsilon.is_some() {
        cfg.epsilon = args.epsilon;
    }
    if let Some(v) = args.beta_fraction {
        cfg.beta_fraction = v;
    }
    if let Some(v) = args.alpha_fraction {
        cfg.alpha_rule = AlphaRule::LogFraction(v);
    }
    if let Some(v) = args.retune_limit {
        cfg.retune_limit = v;
    }
    if let Some(v) = args.shrink_factor {
        cfg.shrink_factor = v;
    }
    if let Some(v) = args.epsilon_shrink_factor {
        cfg.epsilon_shrink_factor = v;
    }
    cfg.validate().map_err(classify)?;
    Ok(cfg)
}

fn cmd_construct(cli: &Cli, argv: &[String], args: &ConstructArgs) -> CmdResult {
    let cfg = construction_config(args)?;
    let run = Run::start(
        cli,
        argv,
        "construct",
        serde_json::to_value(&cfg).or_input()?,
        &[&args.a_matrix],
        &["B.json", "B.csv", "construction_record.json", "stability.json", "failure.json"],
    )?;
    let (a, labels) = load_contact(&args.a_matrix)?;
    eprintln!("[construct] n = {}, rho(A) = {}", a.n(), a.spectral_radius().map_err(classify)?);
    match construct_b(&a, &cfg) {
        Ok((b, record)) => {
            save_matrix(b.matrix(), labels.as_deref(), &run.path("B.json"), MatrixFormat::Json).or_procedure()?;
            save_matrix(b.matrix(), labels.as_deref(), &run.path("B.csv"), MatrixFormat::Csv).or_procedure()?;
            run.write_json("construction_record.json", &record).or_procedure()?;
            let checks = record.checks.as_ref().expect("successful construction carries its checks");
            run.write_json("stability.json", checks).or_procedure()?;
            println!("construction succeeded on attempt {}", record.attempt + 1);
            println!("  row i = {}, epsilon = {}, beta = {}", record.row, record.epsilon, record.selection.beta);
            println!(
                "  j = {}, k = {}, p = {}, q = {}, alpha = {}",
                record.selection.j, record.selection.k, record.selection.p, record.selection.q, record.selection.alpha
            );
            println!("  rho((I - Ybar) A) = {}", checks.rho_ybar_a);
            println!("  rho((I - Xbar) B) = {}", checks.rho_xbar_b);
            Ok(())
        }
        Err(e @ Error::RetuneExhausted { .. }) => {
            if let Error::RetuneExhausted { attempts } = &e {
                run.write_json("failure.json", attempts).or_procedure()?;
            }
            Err(Failure::procedure(e))
        }
        Err(e) => {
            let f = classify(e);
            if f.code == 2 {
                run.write_json("failure.json", &f.error.to_string()).or_procedure()?;
            }
            Err(f)
        }
    }
}

fn cmd_analyze(cli: &Cli, argv: &[String], args: &AnalyzeArgs) -> CmdResult {
    let cfg = AnalysisConfig::<f64> {
        rng_seed: cli.seed,
        ..AnalysisConfig::default()
    };
    let run = Run::start(
        cli,
        argv,
        "analyze",
        serde_json::json!({ "gamma": args.pair.gamma, "analysis": cfg }),
        &[&args.pair.a, &args.pair.b],
        &["equilibria.json", "stability.json"],
    )?;
    let sys = load_system(&args.pair)?;
    let reports = full_report(&sys, &cfg).map_err(classify)?;
    let (stability, _) = boundary_reports(&sys, &cfg).map_err(classify)?;
    run.write_json("equilibria.json", &reports).or_procedure()?;
    run.write_json("stability.json", &stability).or_procedure()?;
    println!("rho((I - Ybar) A) = {} [{}]", stability.rho_ybar_a, verdict_str(stability.virus2_verdict));
    println!("rho((I - Xbar) B) = {} [{}]", stability.rho_xbar_b, verdict_str(stability.virus1_verdict));
    for r in &reports {
        println!(
            "{:?}: verdict {}, abscissa {:.6e}, x = {:?}, y = {:?}",
            r.kind,
            verdict_str(r.verdict),
            r.abscissa,
            r.point.x,
            r.point.y
        );
    }
    if stability.both_stable {
        Ok(())
    } else {
        Err(Failure::procedure(anyhow!("survival equilibria are not both stable")))
    }
}

fn cmd_simulate(cli: &Cli, argv: &[String], args: &SimulateArgs) -> CmdResult {
    let controls = IntegratorControls {
        rtol: args.rtol,
        atol: args.atol,
        ..IntegratorControls::default()
    };
    let run = Run::start(
        cli,
        argv,
        "simulate",
        serde_json::json!({
            "gamma": args.pair.gamma, "x0": args.x0, "y0": args.y0, "t_end": args.t_end,
            "tol": args.tol, "controls": controls, "coexistence": args.coexistence,
        }),
        &[&args.pair.a, &args.pair.b],
        &["trajectory.csv", "outcome.json"],
    )?;
    let sys = load_system(&args.pair)?;
    let s0 = StateVector::new(args.x0.clone(), args.y0.clone()).map_err(classify)?;
    if s0.n() != sys.n() {
        return Err(Failure::input(anyhow!(
            "initial state has {} nodes, system has {}",
            s0.n(),
            sys.n()
        )));
    }
    s0.check_membership(0.0).map_err(classify)?;
    let cfg = AnalysisConfig::<f64> {
        rng_seed: cli.seed,
        ..AnalysisConfig::default()
    };
    let (stability, mut equilibria) = boundary_reports(&sys, &cfg).map_err(classify)?;
    if args.coexistence.unwrap_or(sys.n() <= 20) {
        let seeds = bivirus::default_seeds(&stability.x_bar, &stability.y_bar, &cfg);
        equilibria.extend(find_coexistence(&sys, &seeds, &cfg).map_err(classify)?.roots);
    }
    let sim = simulate_and_classify(&sys, "simulation", &s0, args.t_end, args.tol, &controls, &equilibria)
        .map_err(classify)?;
    let f = fs::File::create(run.path("trajectory.csv")).or_procedure()?;
    sim.trajectory.write_csv(BufWriter::new(f)).or_procedure()?;
    run.write_json(
        "outcome.json",
        &serde_json::json!({
            "outcome": sim.classification.outcome.as_str(),
            "final_time": sim.trajectory.final_time(),
            "final_state": sim.trajectory.final_state(),
            "distances": sim.classification.distances,
            "diagnostics": sim.trajectory.diagnostics,
        }),
    )
    .or_procedure()?;
    println!("outcome: {}", sim.classification.outcome);
    println!(
        "final time {} after {} accepted steps",
        sim.trajectory.final_time(),
        sim.trajectory.diagnostics.accepted
    );
    Ok(())
}

fn cmd_sweep(cli: &Cli, argv: &[String], args: &SweepArgs) -> CmdResult {
    let spec = SweepSpec {
        resolution: args.resolution,
        budget: args.budget,
        gamma: args.pair.gamma,
        t_end: args.t_end,
        tol: args.tol,
        ..SweepSpec::default()
    };
    spec.validate().map_err(classify)?;
    let run = Run::start(
        cli,
        argv,
        "sweep",
        serde_json::to_value(&spec).or_input()?,
        &[&args.pair.a, &args.pair.b],
        &["sweep.csv", "sweep_summary.json"],
    )?;
    let sys = load_system(&args.pair)?;
    if sys.n() != 2 {
        return Err(Failure::input(anyhow!("sweeps need a two-node system, got n = {}", sys.n())));
    }
    let cfg = AnalysisConfig::<f64> {
        rng_seed: cli.seed,
        ..AnalysisConfig::default()
    };
    let result = basin_sweep(&sys, &spec, &cfg).map_err(classify)?;
    let f = fs::File::create(run.path("sweep.csv")).or_procedure()?;
    result.write_csv(BufWriter::new(f)).or_procedure()?;
    run.write_json("sweep_summary.json", &result.summary()).or_procedure()?;
    println!("{} cells in {:.2} s", result.cells.len(), result.wall_time_secs);
    for (label, count) in &result.counts {
        println!("  {label}: {count}");
    }
    Ok(())
}

fn cmd_ingest(cli: &Cli, argv: &[String], args: &IngestArgs) -> CmdResult {
    let opts = NormalizeOptions {
        kappa: args.kappa,
        row_sum: args.row_sum,
        retain_diagonal: !args.drop_diagonal,
    };
    let run = Run::start(
        cli,
        argv,
        "ingest",
        serde_json::to_value(opts).or_input()?,
        &[&args.raw],
        &["A.json", "A.csv", "ingest_report.json"],
    )?;
    let raw = load_raw(&args.raw)?;
    let (m, report) = threshold_and_normalize_unchecked(&raw, &opts).map_err(|e| match e {
        Error::InvalidArgument(msg) if msg.contains("is zero") => Failure::procedure(Error::InvalidArgument(msg)),
        other => classify(other),
    })?;
    run.write_json("ingest_report.json", &report).or_procedure()?;
    println!(
        "n = {}, entries zeroed = {}, nonzero = {}, irreducible = {}, positive = {}",
        report.n, report.entries_zeroed, report.nonzero_entries, report.irreducible, report.positive
    );
    if !report.irreducible {
        return Err(Failure::procedure(Error::Reducible {
            components: report.components,
        }));
    }
    let labels = raw.labels.as_deref();
    save_matrix(&m, labels, &run.path("A.json"), MatrixFormat::Json).or_procedure()?;
    save_matrix(&m, labels, &run.path("A.csv"), MatrixFormat::Csv).or_procedure()?;
    Ok(())
}

fn cmd_case_study(cli: &Cli, argv: &[String], args: &CaseStudyArgs) -> CmdResult {
    let case = match args.name {
        CaseName::TwoNode => CaseStudy::TwoNode,
        CaseName::LargeSynthetic => CaseStudy::LargeSynthetic,
        CaseName::UserSupplied => {
            let path = args.raw.as_ref().expect("clap enforces --raw for user_supplied");
            CaseStudy::UserSupplied(load_raw(path)?)
        }
    };
    let mut params = CaseParams::<f64>::for_case(&case);
    params.seed = cli.seed;
    params.n = args.n;
    params.normalize = NormalizeOptions::new(args.kappa, args.row_sum);
    params.analysis.rng_seed = cli.seed;
    params.sweep_resolution = args.sweep_resolution;
    params.controls.recording = Recording::All;
    if let Some(t) = args.t_end {
        params.t_end = t;
    }
    if args.x_major.is_some() || args.y_major.is_some() {
        let sets = |scales: &Option<Vec<f64>>, mirrored: bool| {
            scales
                .iter()
                .flatten()
                .map(move |&scale| InitialSet { scale, mirrored })
                .collect::<Vec<_>>()
        };
        params.initial_sets = sets(&args.x_major, false);
        params.initial_sets.extend(sets(&args.y_major, true));
    }
    let inputs: Vec<&Path> = args.raw.iter().map(PathBuf::as_path).collect();
    let run = Run::start(
        cli,
        argv,
        "case-study",
        serde_json::json!({ "name": args.name, "params": params }),
        &inputs,
        &["bundle directory"],
    )?;
    let bundle = run_case_study(&case, &params).map_err(classify)?;
    let written = write_bundle(&bundle, &run.out).or_procedure()?;
    println!("case study {}: {} artifacts", bundle.name, written.len());
    println!("  rho((I - Ybar) A) = {}", bundle.stability.rho_ybar_a);
    println!("  rho((I - Xbar) B) = {}", bundle.stability.rho_xbar_b);
    for sim in &bundle.simulations {
        println!("  {}: {}", sim.label, sim.classification.outcome);
    }
    for sweep in &bundle.sweeps {
        println!("  sweep gamma = {}: {:?}", sweep.spec.gamma, sweep.summary()["counts"]);
    }
    Ok(())
}

fn cmd_replay(args: &ReplayArgs) -> CmdResult {
    let text = fs::read_to_string(&args.manifest)
        .with_context(|| format!("reading {}", args.manifest.display()))
        .or_input()?;
    let manifest: serde_json::Value = serde_json::from_str(&text).or_input()?;
    for input in manifest["inputs"].as_array().into_iter().flatten() {
        let path = Path::new(input["path"].as_str().unwrap_or_default());
        let want = input["sha256"].as_str().unwrap_or_default();
        let got = sha256_file(path).or_input()?;
        if got != want {
            return Err(Failure::input(anyhow!("input {} changed since the recorded run", path.display())));
        }
    }
    let argv: Vec<String> = serde_json::from_value(manifest["argv"].clone())
        .context("manifest has no argv")
        .or_input()?;
    if argv.get(1).map(String::as_str) == Some("replay") {
        return Err(Failure::input(anyhow!("refusing to replay a replay")));
    }
    dispatch(argv)
}

/// Pins `--seed`, `--threads` and `--out` into the recorded argv.
fn resolved_argv(cli: &Cli, raw: &[String]) -> Vec<String> {
    let mut argv = raw.to_vec();
    let has = |flag: &str| raw.iter().any(|a| a == flag || a.starts_with(&format!("{flag}=")));
    if !has("--seed") {
        argv.push(format!("--seed={}", cli.seed));
    }
    if !has("--out") {
        argv.push(format!("--out={}", cli.out.display()));
    }
    if let (false, Some(t)) = (has("--threads"), cli.threads) {
        argv.push(format!("--threads={t}"));
    }
    argv
}

fn dispatch(raw: Vec<String>) -> CmdResult {
    let cli = match Cli::try_parse_from(&raw) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return if code == 0 {
                Ok(())
            } else {
                Err(Failure {
                    code,
                    error: anyhow!("invalid arguments"),
                })
            };
        }
    };
    if let Some(t) = cli.threads {
        // A second initialization (after a replay) keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let argv = resolved_argv(&cli, &raw);
    match &cli.command {
        Command::Construct(a) => cmd_construct(&cli, &argv, a),
        Command::Analyze(a) => cmd_analyze(&cli, &argv, a),
        Command::Simulate(a) => cmd_simulate(&cli, &argv, a),
        Command::Sweep(a) => cmd_sweep(&cli, &argv, a),
        Command::Ingest(a) => cmd_ingest(&cli, &argv, a),
        Command::CaseStudy(a) => cmd_case_study(&cli, &argv, a),
        Command::Replay(a) => cmd_replay(a),
    }
}

fn main() -> ExitCode {
    match dispatch(std::env::args().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if f.error.to_string() != "invalid arguments" {
                eprintln!("error: {:#}", f.error);
            }
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_errors_map_to_exit_codes() {
        assert_eq!(classify(Error::Subthreshold { rho: 0.7 }).code, 1);
        assert_eq!(classify(Error::Reducible { components: vec![] }).code, 1);
        assert_eq!(classify(Error::RetuneExhausted { attempts: vec![] }).code, 2);
        assert_eq!(classify(Error::ParallelEigenvectors(0.0)).code, 2);
    }

    #[test]
    fn argv_resolution_pins_defaults() {
        let raw: Vec<String> = ["bivirus", "analyze", "--a", "a.csv", "--b", "b.csv"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let cli = Cli::try_parse_from(&raw).unwrap();
        let argv = resolved_argv(&cli, &raw);
        assert!(argv.contains(&"--seed=2024".to_string()));
        assert!(argv.iter().any(|a| a.starts_with("--out=")));
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
