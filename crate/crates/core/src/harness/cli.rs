//! Command-line front end.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::error::NavError;
use crate::harness::config::{ConfigError, ConfigLayer, OutputFormat, RunConfig};
use crate::harness::output::{self, fmt_f64};
use crate::harness::validate::{run_validate, synthetic_h, synthetic_iprime, Fixtures};
use crate::nav::{simulate_path, Horizon, Sampler};
use crate::ratefn::{
    dependent_ldp_rate, ldp_rate, mdp_rate, rho_closed_form, segment_cgf_mc, CgfGrid, RateValue, StepCgf,
};
use crate::renewal::{collect_segments, kappa_from_segments, rho_from_segments, tau_tail};

/// Paths simulated per parallel batch before writing.
const WRITE_BATCH: usize = 1024;

#[derive(Debug, Parser)]
#[command(name = "poisson-nav", version, about = "Directed cone navigation on planar Poisson processes")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// TOML or JSON file with the same keys as the flags
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// Cone half-angle in radians
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Half-angle as a fraction of π, `p/q`
    #[arg(long, global = true)]
    pub theta_frac: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub paths: Option<usize>,
    #[arg(long, global = true)]
    pub segments: Option<usize>,
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Horizontal time horizon (overrides --steps for simulate)
    #[arg(long, global = true)]
    pub t: Option<f64>,
    /// inversion | points
    #[arg(long, global = true)]
    pub sampler: Option<String>,
    /// csv | jsonl
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate trajectories
    Simulate,
    /// Estimate ρ from iid segments
    Rho,
    /// Estimate κ from iid segments
    Kappa,
    /// Empirical tail of the first renewal time
    TauTail,
    /// Rate-function tables
    Rate {
        #[command(subcommand)]
        kind: RateKind,
    },
    /// Step CGF on a γ grid
    Cgf(CgfArgs),
    /// Run the validation suite
    Validate {
        /// Run only the named checks
        #[arg(long = "check")]
        checks: Vec<String>,
        /// Override the bundled fixtures file
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum RateKind {
    /// ρ x²
    Mdp {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x: Vec<f64>,
    },
    /// Large-deviation rate for 0 < θ ≤ π/4
    Ldp {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x: Vec<f64>,
    },
    /// Dependent-case optimizer on the synthetic quadratic fixture
    Dependent {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        a: Vec<f64>,
    },
}

#[derive(Debug, Args)]
pub struct CgfArgs {
    /// γ₁ grid as `lo,hi,n`
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-2.0, 2.0, 5.0])]
    pub g1: Vec<f64>,
    /// γ₂ grid as `lo,hi,n`
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-2.0, 2.0, 5.0])]
    pub g2: Vec<f64>,
    /// Also estimate the segment CGF from `--segments` simulated segments
    #[arg(long)]
    pub empirical: bool,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "{m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<NavError> for CliError {
    fn from(e: NavError) -> Self {
        match e {
            NavError::InvalidParameter(_) => CliError::Config(format!("invalid configuration: {e}")),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn layer_from_flags(c: &CommonArgs) -> Result<ConfigLayer, ConfigError> {
    Ok(ConfigLayer {
        lambda: c.lambda,
        theta: c.theta,
        theta_frac: c.theta_frac.clone(),
        seed: c.seed,
        paths: c.paths,
        segments: c.segments,
        steps: c.steps,
        t: c.t,
        sampler: c
            .sampler
            .as_deref()
            .map(|s| s.parse::<Sampler>().map_err(|e| ConfigError(e.to_string())))
            .transpose()?,
        format: c.format.as_deref().map(str::parse::<OutputFormat>).transpose()?,
        out: c.out.clone(),
        threads: c.threads,
    })
}

/// Resolve the effective configuration for parsed arguments.
pub fn resolve_config(common: &CommonArgs, env_threads: Option<&str>) -> Result<RunConfig, ConfigError> {
    let flags = layer_from_flags(common)?;
    let file = match &common.config {
        Some(p) => ConfigLayer::from_file(p)?,
        None => ConfigLayer::default(),
    };
    RunConfig::resolve(flags.over(file), env_threads)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    let p = dir.join(name);
    let f = File::create(&p).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", p.display())))?;
    Ok(BufWriter::new(f))
}

/// Parse arguments, run and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let env = std::env::var("NAV_THREADS").ok();
    match execute(&cli, env.as_deref()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

/// Run parsed arguments; `Ok` carries the exit code (validation failures
/// are reported as 1 without being errors).
pub fn execute(cli: &Cli, env_threads: Option<&str>) -> Result<i32, CliError> {
    let cfg = resolve_config(&cli.common, env_threads)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    pool.install(|| dispatch(&cli.command, &cfg))
}

fn dispatch(cmd: &Command, cfg: &RunConfig) -> Result<i32, CliError> {
    match cmd {
        Command::Simulate => run_simulate(cfg).map(|_| 0),
        Command::Rho => run_rho(cfg).map(|_| 0),
        Command::Kappa => run_kappa(cfg).map(|_| 0),
        Command::TauTail => run_tau_tail(cfg).map(|_| 0),
        Command::Rate { kind } => run_rate(cfg, kind).map(|_| 0),
        Command::Cgf(a) => run_cgf(cfg, a).map(|_| 0),
        Command::Validate { checks, fixtures } => {
            let fx = match fixtures {
                Some(p) => {
                    let text = std::fs::read_to_string(p)
                        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                    Fixtures::parse(&text)?
                }
                None => Fixtures::bundled(),
            };
            let report = run_validate(checks, &fx)?;
            let mut w = create(&cfg.out, "validation.csv")?;
            output::header(&mut w, "validation")?;
            writeln!(w, "check,status,statistic,threshold,seed")?;
            for c in &report.checks {
                println!("{}", c.line());
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    c.name,
                    c.status(),
                    fmt_f64(c.statistic),
                    fmt_f64(c.threshold),
                    c.seed
                )?;
            }
            w.flush()?;
            println!("overall: {}", if report.overall { "pass" } else { "fail" });
            Ok(if report.overall { 0 } else { 1 })
        }
    }
}

pub fn run_simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let params = cfg.params();
    let horizon = match cfg.t {
        Some(t) => Horizon::Time(t),
        None => Horizon::Steps(cfg.steps),
    };
    let (traj_name, traj_schema) = match cfg.format {
        OutputFormat::Jsonl => ("trajectories.jsonl", "trajectories"),
        OutputFormat::Csv => ("trajectories.csv", "trajectories"),
    };
    let mut traj = create(&cfg.out, traj_name)?;
    let mut summary = create(&cfg.out, "summary.csv")?;
    output::header(&mut traj, traj_schema)?;
    if cfg.format == OutputFormat::Csv {
        writeln!(traj, "{}", output::TRAJECTORY_CSV_COLUMNS)?;
    }
    output::header(&mut summary, "summary")?;
    writeln!(summary, "{}", output::SUMMARY_COLUMNS)?;
    let mut renewals = 0usize;
    let mut steps = 0usize;
    for start in (0..cfg.paths).step_by(WRITE_BATCH) {
        let end = (start + WRITE_BATCH).min(cfg.paths);
        let batch: Vec<_> = (start as u64..end as u64)
            .into_par_iter()
            .map(|id| simulate_path(params, horizon, cfg.seed, id, cfg.sampler))
            .collect::<Result<_, _>>()?;
        for p in &batch {
            match cfg.format {
                OutputFormat::Jsonl => output::write_trajectory_jsonl(&mut traj, p)?,
                OutputFormat::Csv => output::write_trajectory_csv(&mut traj, p)?,
            }
            output::write_summary_row(&mut summary, p)?;
            renewals += p.renewal_indices.len();
            steps += p.len();
        }
    }
    traj.flush()?;
    summary.flush()?;
    println!(
        "simulate: {} paths, {steps} steps, {renewals} renewals (λ={}, θ={}, seed={})",
        cfg.paths, cfg.lambda, cfg.theta, cfg.seed
    );
    Ok(())
}

fn segments_for(cfg: &RunConfig) -> Result<Vec<crate::renewal::SegmentRecord>, CliError> {
    if cfg.segments < 1000 {
        return Err(CliError::Config(format!(
            "invalid configuration: at least 1000 segments are required, got {}",
            cfg.segments
        )));
    }
    let segs = collect_segments(cfg.params(), cfg.segments, cfg.seed, cfg.sampler)?;
    let mut w = create(&cfg.out, "segments.csv")?;
    output::write_segments_csv(&mut w, &segs)?;
    w.flush()?;
    Ok(segs)
}

pub fn run_rho(cfg: &RunConfig) -> Result<(), CliError> {
    let segs = segments_for(cfg)?;
    let est = rho_from_segments(&segs, cfg.seed);
    let reference = rho_closed_form(&cfg.params()).ok();
    let mut w = create(&cfg.out, "rho.csv")?;
    output::write_estimate_csv(&mut w, "rho", &est, reference)?;
    w.flush()?;
    let cmp = match reference {
        Some(r) => format!(", closed form {r:.6} ({:.2} stderr away)", (est.value - r).abs() / est.stderr),
        None => String::new(),
    };
    println!(
        "rho: {:.6} ± {:.6} (99% CI [{:.6}, {:.6}], n={}){cmp}",
        est.value, est.stderr, est.ci_low, est.ci_high, est.n
    );
    Ok(())
}

pub fn run_kappa(cfg: &RunConfig) -> Result<(), CliError> {
    let segs = segments_for(cfg)?;
    let est = kappa_from_segments(&segs, cfg.seed);
    let mut w = create(&cfg.out, "kappa.csv")?;
    output::write_estimate_csv(&mut w, "kappa", &est, None)?;
    w.flush()?;
    println!(
        "kappa: {:.6} ± {:.6} (99% CI [{:.6}, {:.6}], n={})",
        est.value, est.stderr, est.ci_low, est.ci_high, est.n
    );
    Ok(())
}

pub fn run_tau_tail(cfg: &RunConfig) -> Result<(), CliError> {
    let params = cfg.params();
    let tail = tau_tail(params, cfg.paths, cfg.seed, cfg.sampler)?;
    let mut w = create(&cfg.out, "tail.csv")?;
    output::write_tail_csv(&mut w, &tail)?;
    w.flush()?;
    let bound = if params.is_wide() {
        let q = (4.0 * params.theta - std::f64::consts::PI) / (4.0 * params.theta);
        let ok = (1..tail.levels.len().min(7)).all(|n| tail.survival[n] >= q.powi(n as i32) - 3.0 * tail.stderr(n));
        format!(", lower bound ({q:.4})^n respected for n ≤ 6: {ok}")
    } else {
        String::new()
    };
    println!(
        "tau-tail: {} paths, max τ={}, fitted rate {}, R² {}{bound}",
        tail.n_samples,
        tail.levels.len().saturating_sub(1),
        tail.fitted_rate.map_or("none".into(), |r| format!("{r:.5}")),
        tail.fit_r2.map_or("none".into(), |r| format!("{r:.5}")),
    );
    Ok(())
}

pub fn run_rate(cfg: &RunConfig, kind: &RateKind) -> Result<(), CliError> {
    let params = cfg.params();
    let (file, xname, witness, rows): (&str, &str, Vec<&str>, Vec<(f64, RateValue)>) = match kind {
        RateKind::Mdp { x } => {
            let rho = if params.is_wide() {
                let segs = segments_for(cfg)?;
                rho_from_segments(&segs, cfg.seed).value
            } else {
                rho_closed_form(&params)?
            };
            let rows = x
                .iter()
                .map(|&x| {
                    (
                        x,
                        RateValue {
                            value: mdp_rate(x, rho),
                            infinite: false,
                            witness: vec![rho],
                            converged: true,
                        },
                    )
                })
                .collect();
            ("rate_mdp.csv", "x", vec!["rho"], rows)
        }
        RateKind::Ldp { x } => {
            let rows = x
                .iter()
                .map(|&x| ldp_rate(x, &params).map(|r| (x, r)))
                .collect::<Result<Vec<_>, _>>()?;
            ("rate_ldp.csv", "x", vec!["beta"], rows)
        }
        RateKind::Dependent { a } => {
            let rows = a
                .par_iter()
                .map(|&a| (a, dependent_ldp_rate(a, synthetic_iprime, synthetic_h)))
                .collect();
            ("rate_dependent.csv", "a", vec!["b", "c", "beta", "d"], rows)
        }
    };
    let mut w = create(&cfg.out, file)?;
    output::write_rate_csv(&mut w, xname, &witness, &rows)?;
    w.flush()?;
    for (x, r) in &rows {
        println!(
            "rate: {xname}={x} value={} converged={}",
            fmt_f64(r.value),
            r.converged
        );
    }
    if rows.iter().any(|(_, r)| !r.converged) {
        return Err(CliError::Runtime("rate optimizer did not converge".into()));
    }
    Ok(())
}

fn axis(bounds: &[f64]) -> Result<Vec<f64>, CliError> {
    let &[lo, hi, n] = bounds else {
        return Err(CliError::Config(format!(
            "invalid configuration: a grid needs exactly `lo,hi,n`, got {} values",
            bounds.len()
        )));
    };
    if !(n >= 1.0 && n.fract() == 0.0) || !(lo <= hi) {
        return Err(CliError::Config(format!(
            "invalid configuration: grid `{lo},{hi},{n}` needs lo ≤ hi and an integer count ≥ 1"
        )));
    }
    let n = n as usize;
    Ok((0..n)
        .map(|i| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect())
}

pub fn run_cgf(cfg: &RunConfig, args: &CgfArgs) -> Result<(), CliError> {
    let g1 = axis(&args.g1)?;
    let g2 = axis(&args.g2)?;
    let gamma: Vec<[f64; 2]> = g1.iter().flat_map(|&a| g2.iter().map(move |&b| [a, b])).collect();
    let grid = CgfGrid::evaluate(&StepCgf::new(cfg.params()), gamma);
    let mc = if args.empirical {
        let segs = segments_for(cfg)?;
        Some(
            grid.gamma
                .iter()
                .map(|&g| segment_cgf_mc(g, &segs, cfg.seed))
                .collect::<Result<Vec<_>, _>>()?,
        )
    } else {
        None
    };
    let mut w = create(&cfg.out, "cgf.csv")?;
    output::write_cgf_csv(&mut w, &grid, mc.as_deref())?;
    w.flush()?;
    println!("cgf: {} grid points", grid.gamma.len());
    Ok(())
}
