//! The validation suite: every statistical and numerical acceptance check
//! at pinned seeds, sizes and thresholds.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{NavError, Result};
use crate::geom::{HistorySet, Point};
use crate::harness::config::parse_theta_frac;
use crate::nav::{
    displacement_at, narrow_cone_is_free, sample_step_inversion, sample_step_points, simulate_path, Horizon,
    ModelParams, Navigator, Sampler,
};
use crate::ratefn::{cgf_step, dependent_ldp_rate, ldp_rate, legendre, rho_closed_form, Cgf, StepCgf};
use crate::renewal::{estimate_kappa, estimate_rho, kprime, markov_majorant, tau_tail};
use crate::rng::RandomStream;
use crate::stats::{dkw_epsilon, ks_one_sample, ks_two_sample, normal_cdf, Z99};

pub const DEFAULT_FIXTURES: &str = include_str!("../../fixtures/validation.toml");

/// Check names in suite order.
pub const CHECKS: [&str; 13] = [
    "rho",
    "scaling",
    "sampler",
    "dual",
    "renewal",
    "tau_tail",
    "sandwich",
    "narrow_cone",
    "majorant",
    "rate",
    "clt",
    "dependent",
    "kprime",
];

#[derive(Clone, Debug, Deserialize)]
pub struct RhoFx {
    pub seed: u64,
    pub segments: usize,
    pub theta_fracs: Vec<String>,
    pub max_z: f64,
}

#[derive(Clone, Debug, Deserialize)]
pub struct ScalingFx {
    pub seed: u64,
    pub segments: usize,
    pub theta_frac: String,
    pub closed_form_tol: f64,
    pub ldp_tol: f64,
    pub ldp_x: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct SamplerFx {
    pub seed: u64,
    pub draws: usize,
    pub theta_frac: String,
    pub min_p: f64,
}

#[derive(Clone, Debug, Deserialize)]
pub struct DualFx {
    pub seed_inversion: u64,
    pub seed_points: u64,
    pub paths: usize,
    pub steps: usize,
    pub theta_frac: String,
    pub min_p: f64,
}

#[derive(Clone, Debug, Deserialize)]
pub struct RenewalFx {
    pub seed: u64,
    pub paths: usize,
    pub steps: usize,
}

#[derive(Clone, Debug, Deserialize)]
pub struct TauTailFx {
    pub seed: u64,
    pub paths: usize,
    pub theta_frac: String,
    pub max_level: usize,
    pub z: f64,
    pub min_r2: f64,
}

#[derive(Clone, Debug, Deserialize)]
pub struct SandwichFx {
    pub seed: u64,
    pub paths: usize,
    pub steps: usize,
    pub theta_frac: String,
    pub confidence: f64,
}

#[derive(Clone, Debug, Deserialize)]
pub struct NarrowFx {
    pub seed: u64,
    pub paths: usize,
    pub steps: usize,
    pub theta_frac: String,
}

#[derive(Clone, Debug, Deserialize)]
pub struct MajorantFx {
    pub seed: u64,
    pub paths: usize,
    pub max_steps: usize,
    pub theta_frac: String,
    pub fit_seed: u64,
    pub fit_paths: usize,
    pub fit_max_steps: usize,
    pub fit_lambda: f64,
    pub fit_theta_frac: String,
    pub min_r2: f64,
}

#[derive(Clone, Debug, Deserialize)]
pub struct RateFx {
    pub seed: u64,
    pub gradient_points: usize,
    pub tol: f64,
    pub legendre_oracle: f64,
    pub legendre_oracle_tol: f64,
}

#[derive(Clone, Debug, Deserialize)]
pub struct CltFx {
    pub seed: u64,
    pub rho_seed: u64,
    pub paths: usize,
    pub t: f64,
    pub rho_segments: usize,
    pub theta_frac: String,
    pub min_p: f64,
}

#[derive(Clone, Debug, Deserialize)]
pub struct DependentFx {
    pub target: f64,
    pub grid_oracle: f64,
    pub tol: f64,
}

#[derive(Clone, Debug, Deserialize)]
pub struct KprimeFx {
    pub seed: u64,
    pub kappa_seed: u64,
    pub paths: usize,
    pub t: f64,
    pub kappa_segments: usize,
    pub theta_fracs: Vec<String>,
    pub tol: f64,
    pub min_fraction: f64,
}

#[derive(Clone, Debug, Deserialize)]
pub struct Fixtures {
    pub rho: RhoFx,
    pub scaling: ScalingFx,
    pub sampler: SamplerFx,
    pub dual: DualFx,
    pub renewal: RenewalFx,
    pub tau_tail: TauTailFx,
    pub sandwich: SandwichFx,
    pub narrow_cone: NarrowFx,
    pub majorant: MajorantFx,
    pub rate: RateFx,
    pub clt: CltFx,
    pub dependent: DependentFx,
    pub kprime: KprimeFx,
}

impl Fixtures {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| NavError::InvalidParameter(format!("fixtures: {e}")))
    }

    pub fn bundled() -> Self {
        Self::parse(DEFAULT_FIXTURES).expect("bundled fixtures parse")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub statistic: f64,
    pub threshold: f64,
    pub seed: u64,
    pub detail: String,
}

impl CheckResult {
    pub fn status(&self) -> &'static str {
        if self.passed {
            "pass"
        } else {
            "fail"
        }
    }

    /// `[pass] name: statistic=… threshold=… seed=… (detail)`
    pub fn line(&self) -> String {
        format!(
            "[{}] {}: statistic={} threshold={} seed={} ({})",
            self.status(),
            self.name,
            self.statistic,
            self.threshold,
            self.seed,
            self.detail
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
    pub overall: bool,
}

impl ValidationReport {
    pub fn from_checks(checks: Vec<CheckResult>) -> Self {
        let overall = checks.iter().all(|c| c.passed);
        Self { checks, overall }
    }
}

fn params_frac(lambda: f64, frac: &str) -> Result<ModelParams> {
    let theta = parse_theta_frac(frac).map_err(|e| NavError::InvalidParameter(e.0))?;
    ModelParams::new(lambda, theta)
}

fn check(name: &str, passed: bool, statistic: f64, threshold: f64, seed: u64, detail: String) -> CheckResult {
    CheckResult {
        name: name.into(),
        passed,
        statistic,
        threshold,
        seed,
        detail,
    }
}

/// Run one named check.
pub fn run_check(name: &str, fx: &Fixtures) -> Result<CheckResult> {
    match name {
        "rho" => check_rho(&fx.rho),
        "scaling" => check_scaling(&fx.scaling),
        "sampler" => check_sampler(&fx.sampler),
        "dual" => check_dual(&fx.dual),
        "renewal" => check_renewal(&fx.renewal),
        "tau_tail" => check_tau_tail(&fx.tau_tail),
        "sandwich" => check_sandwich(&fx.sandwich),
        "narrow_cone" => check_narrow_cone(&fx.narrow_cone),
        "majorant" => check_majorant(&fx.majorant),
        "rate" => check_rate(&fx.rate),
        "clt" => check_clt(&fx.clt),
        "dependent" => Ok(check_dependent(&fx.dependent)),
        "kprime" => check_kprime(&fx.kprime),
        other => Err(NavError::InvalidParameter(format!(
            "unknown check `{other}` (known: {})",
            CHECKS.join(", ")
        ))),
    }
}

/// Run the named checks (all when `names` is empty) in suite order.
pub fn run_validate(names: &[String], fx: &Fixtures) -> Result<ValidationReport> {
    for n in names {
        if !CHECKS.contains(&n.as_str()) {
            return Err(NavError::InvalidParameter(format!(
                "unknown check `{n}` (known: {})",
                CHECKS.join(", ")
            )));
        }
    }
    let mut out = Vec::new();
    for c in CHECKS {
        if names.is_empty() || names.iter().any(|n| n == c) {
            out.push(run_check(c, fx)?);
        }
    }
    Ok(ValidationReport::from_checks(out))
}

pub fn check_rho(fx: &RhoFx) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for frac in &fx.theta_fracs {
        let p = params_frac(1.0, frac)?;
        let reference = rho_closed_form(&p)?;
        let est = estimate_rho(p, fx.segments, fx.seed, Sampler::Points)?;
        let z = (est.value - reference).abs() / est.stderr;
        worst = worst.max(z);
        detail.push(format!(
            "θ=π·{frac}: ρ̂={:.6}±{:.6} vs {:.6}, z={z:.3}",
            est.value, est.stderr, reference
        ));
    }
    Ok(check("rho", worst <= fx.max_z, worst, fx.max_z, fx.seed, detail.join("; ")))
}

pub fn check_scaling(fx: &ScalingFx) -> Result<CheckResult> {
    let mut closed_err: f64 = 0.0;
    for theta in [FRAC_PI_4, FRAC_PI_6, 0.1] {
        let r1 = rho_closed_form(&ModelParams::new(1.0, theta)?)?;
        let r4 = rho_closed_form(&ModelParams::new(4.0, theta)?)?;
        closed_err = closed_err.max((r4 - 2.0 * r1).abs());
    }
    let mut ldp_err: f64 = 0.0;
    for &x in &fx.ldp_x {
        let a = ldp_rate(x, &ModelParams::new(1.0, FRAC_PI_4)?)?;
        let b = ldp_rate(x, &ModelParams::new(4.0, FRAC_PI_4)?)?;
        if !(a.converged && b.converged) || a.infinite || b.infinite {
            ldp_err = f64::INFINITY;
        } else {
            ldp_err = ldp_err.max((b.value - 2.0 * a.value).abs());
        }
    }
    let p1 = params_frac(1.0, &fx.theta_frac)?;
    let p4 = params_frac(4.0, &fx.theta_frac)?;
    let e1 = estimate_rho(p1, fx.segments, fx.seed, Sampler::Points)?;
    let e4 = estimate_rho(p4, fx.segments, fx.seed + 1, Sampler::Points)?;
    let ratio = e4.value / e1.value;
    let se = ratio * ((e1.stderr / e1.value).powi(2) + (e4.stderr / e4.value).powi(2)).sqrt();
    let z = (ratio - 2.0).abs() / se;
    let passed = closed_err <= fx.closed_form_tol && ldp_err <= fx.ldp_tol && z <= Z99;
    Ok(check(
        "scaling",
        passed,
        z,
        Z99,
        fx.seed,
        format!(
            "MC ratio ρ̂(4)/ρ̂(1)={ratio:.5}±{se:.5} at θ=π·{}; closed-form err={closed_err:.2e} (tol {:.0e}); ldp err={ldp_err:.2e} (tol {:.0e})",
            fx.theta_frac, fx.closed_form_tol, fx.ldp_tol
        ),
    ))
}

pub fn check_sampler(fx: &SamplerFx) -> Result<CheckResult> {
    let p = params_frac(1.0, &fx.theta_frac)?;
    let empty = HistorySet::empty(Point::ORIGIN);
    let mut detail = Vec::new();
    let mut min_p: f64 = 1.0;
    for sampler in [Sampler::Inversion, Sampler::Points] {
        let draws: Vec<(f64, f64)> = (0..fx.draws as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = RandomStream::new(fx.seed, i);
                let s = match sampler {
                    Sampler::Inversion => sample_step_inversion(Point::ORIGIN, &empty, &p, &mut rng)?,
                    Sampler::Points => sample_step_points(Point::ORIGIN, &empty, &p, &mut rng)?.0,
                };
                Ok((s.polar.r, s.polar.phi))
            })
            .collect::<Result<_>>()?;
        let rs: Vec<f64> = draws.iter().map(|d| d.0).collect();
        let phis: Vec<f64> = draws.iter().map(|d| d.1).collect();
        let a = p.lambda * p.theta;
        let kr = ks_one_sample(&rs, |r| 1.0 - (-a * r * r).exp());
        let kp = ks_one_sample(&phis, |f| ((f + p.theta) / (2.0 * p.theta)).clamp(0.0, 1.0));
        min_p = min_p.min(kr.p_value).min(kp.p_value);
        detail.push(format!("{sampler:?}: p_R={:.4} p_Φ={:.4}", kr.p_value, kp.p_value));
    }
    Ok(check("sampler", min_p > fx.min_p, min_p, fx.min_p, fx.seed, detail.join("; ")))
}

fn first_steps(p: ModelParams, seed: u64, paths: usize, steps: usize, sampler: Sampler) -> Result<Vec<Vec<(f64, f64)>>> {
    (0..paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut nav = Navigator::new(p, seed, i, sampler);
            (0..steps).map(|_| nav.step().map(|s| (s.polar.r, s.polar.phi))).collect()
        })
        .collect()
}

pub fn check_dual(fx: &DualFx) -> Result<CheckResult> {
    let p = params_frac(1.0, &fx.theta_frac)?;
    let a = first_steps(p, fx.seed_inversion, fx.paths, fx.steps, Sampler::Inversion)?;
    let b = first_steps(p, fx.seed_points, fx.paths, fx.steps, Sampler::Points)?;
    let mut min_p: f64 = 1.0;
    let mut detail = Vec::new();
    let column = |d: &[Vec<(f64, f64)>], n: usize, radial: bool| -> Vec<f64> {
        d.iter().map(|s| if radial { s[n].0 } else { s[n].1 }).collect()
    };
    let endpoint = |d: &[Vec<(f64, f64)>], coord: usize| -> Vec<f64> {
        d.iter()
            .map(|s| {
                s.iter()
                    .map(|&(r, f)| if coord == 0 { r * f.cos() } else { r * f.sin() })
                    .sum()
            })
            .collect()
    };
    for n in 0..fx.steps {
        let kr = ks_two_sample(&column(&a, n, true), &column(&b, n, true));
        let kp = ks_two_sample(&column(&a, n, false), &column(&b, n, false));
        min_p = min_p.min(kr.p_value).min(kp.p_value);
        detail.push(format!("n={}: p_R={:.4} p_Φ={:.4}", n + 1, kr.p_value, kp.p_value));
    }
    for (c, label) in [(0, "X"), (1, "Y")] {
        let k = ks_two_sample(&endpoint(&a, c), &endpoint(&b, c));
        min_p = min_p.min(k.p_value);
        detail.push(format!("V_{} {label}: p={:.4}", fx.steps, k.p_value));
    }
    Ok(check("dual", min_p > fx.min_p, min_p, fx.min_p, fx.seed_inversion, detail.join("; ")))
}

pub fn check_renewal(fx: &RenewalFx) -> Result<CheckResult> {
    let p = ModelParams::new(1.0, FRAC_PI_4)?;
    let exceptions: usize = (0..fx.paths as u64)
        .into_par_iter()
        .map(|i| {
            let path = simulate_path(p, Horizon::Steps(fx.steps), fx.seed, i, Sampler::Points)?;
            Ok(path.steps.iter().filter(|s| !s.history_empty_after).count())
        })
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .sum();
    Ok(check(
        "renewal",
        exceptions == 0,
        exceptions as f64,
        0.0,
        fx.seed,
        format!("{} paths × {} steps at θ=π/4", fx.paths, fx.steps),
    ))
}

pub fn check_tau_tail(fx: &TauTailFx) -> Result<CheckResult> {
    let p = params_frac(1.0, &fx.theta_frac)?;
    let tail = tau_tail(p, fx.paths, fx.seed, Sampler::Points)?;
    let q = (4.0 * p.theta - std::f64::consts::PI) / (4.0 * p.theta);
    let mut worst = f64::INFINITY;
    for n in 1..=fx.max_level {
        let (s, se) = if n < tail.levels.len() {
            (tail.survival[n], tail.stderr(n))
        } else {
            (0.0, 0.0)
        };
        worst = worst.min((s - q.powi(n as i32) + fx.z * se) / q.powi(n as i32));
    }
    let r2 = tail.fit_r2.unwrap_or(f64::NAN);
    let passed = worst >= 0.0 && r2 >= fx.min_r2;
    Ok(check(
        "tau_tail",
        passed,
        r2,
        fx.min_r2,
        fx.seed,
        format!(
            "min relative margin over (q^n − {}σ), n ≤ {}: {worst:.4}; q={q:.6}; fitted rate {:?}",
            fx.z, fx.max_level, tail.fitted_rate
        ),
    ))
}

/// `sup_r` distance by which an empirical CDF leaves `[lower, upper]`.
fn envelope_excess<L: Fn(f64) -> f64, U: Fn(f64) -> f64>(sample: &mut [f64], lower: L, upper: U) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    let mut excess = f64::NEG_INFINITY;
    for (i, &x) in sample.iter().enumerate() {
        let below = i as f64 / n;
        let at = (i as f64 + 1.0) / n;
        excess = excess.max(lower(x) - below).max(at - upper(x));
    }
    excess
}

pub fn check_sandwich(fx: &SandwichFx) -> Result<CheckResult> {
    let p = params_frac(1.0, &fx.theta_frac)?;
    let per_path: Vec<(usize, Vec<f64>)> = (0..fx.paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut nav = Navigator::new(p, fx.seed, i, Sampler::Points);
            let mut bad = 0;
            let mut rs = Vec::with_capacity(fx.steps);
            for _ in 0..fx.steps {
                let (rec, c) = nav.step_coupled()?;
                if !(c.under.r <= rec.polar.r && rec.polar.r <= c.over.r) {
                    bad += 1;
                }
                rs.push(rec.polar.r);
            }
            Ok((bad, rs))
        })
        .collect::<Result<_>>()?;
    let violations: usize = per_path.iter().map(|p| p.0).sum();
    let eps = dkw_epsilon(fx.paths, 1.0 - fx.confidence);
    let wide = p.lambda * p.theta;
    let narrow = p.lambda * (FRAC_PI_2 - p.theta);
    // CDF envelopes: the narrow-cone law is the stochastically larger one
    let (lo_rate, hi_rate) = if narrow < wide { (narrow, wide) } else { (wide, narrow) };
    let mut worst = f64::NEG_INFINITY;
    for n in 0..fx.steps {
        let mut col: Vec<f64> = per_path.iter().map(|p| p.1[n]).collect();
        let e = envelope_excess(
            &mut col,
            |r| 1.0 - (-lo_rate * r * r).exp(),
            |r| 1.0 - (-hi_rate * r * r).exp(),
        );
        worst = worst.max(e);
    }
    let passed = violations == 0 && worst <= eps;
    Ok(check(
        "sandwich",
        passed,
        worst,
        eps,
        fx.seed,
        format!(
            "pathwise violations {violations} over {} coupled steps; max envelope excess per step index vs DKW ε",
            fx.paths * fx.steps
        ),
    ))
}

pub fn check_narrow_cone(fx: &NarrowFx) -> Result<CheckResult> {
    let p = params_frac(1.0, &fx.theta_frac)?;
    let violations: usize = (0..fx.paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut nav = Navigator::new(p, fx.seed, i, Sampler::Points);
            let mut bad = 0;
            for _ in 0..fx.steps {
                nav.step()?;
                if !narrow_cone_is_free(nav.history(), &p) {
                    bad += 1;
                }
            }
            Ok(bad)
        })
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .sum();
    Ok(check(
        "narrow_cone",
        violations == 0,
        violations as f64,
        0.0,
        fx.seed,
        format!("{} paths × {} steps at θ=π·{}", fx.paths, fx.steps, fx.theta_frac),
    ))
}

pub fn check_majorant(fx: &MajorantFx) -> Result<CheckResult> {
    let p = params_frac(1.0, &fx.theta_frac)?;
    let main = markov_majorant(p, fx.paths, fx.seed, fx.max_steps)?;
    let pf = params_frac(fx.fit_lambda, &fx.fit_theta_frac)?;
    let fit = markov_majorant(pf, fx.fit_paths, fx.fit_seed, fx.fit_max_steps)?;
    let r2 = fit.tau_m_tail.fit_r2.unwrap_or(f64::NAN);
    let violations = main.violations + fit.violations;
    let passed = violations == 0 && r2 >= fx.min_r2;
    Ok(check(
        "majorant",
        passed,
        r2,
        fx.min_r2,
        fx.seed,
        format!(
            "violations {violations} (θ=π·{}: {} steps; θ=π·{}, λ={}: {} steps); τ^M tail rate {:?}, censored {}",
            fx.theta_frac,
            main.steps_checked,
            fx.fit_theta_frac,
            fx.fit_lambda,
            fit.steps_checked,
            fit.tau_m_tail.fitted_rate,
            fit.tau_m_tail.censored
        ),
    ))
}

pub fn check_rate(fx: &RateFx) -> Result<CheckResult> {
    let p = ModelParams::new(1.0, FRAC_PI_4)?;
    let cgf = StepCgf::new(p);
    let mut failures = Vec::new();
    if cgf_step([0.0, 0.0], &p) != 0.0 {
        failures.push("J(0) ≠ 0".to_string());
    }
    let at_mean = legendre([p.mean_step_x(), 0.0], &cgf);
    if !(at_mean.converged && at_mean.value <= fx.tol) {
        failures.push(format!("legendre(mean)={}", at_mean.value));
    }
    if !legendre([1.0, 1.5], &cgf).infinite {
        failures.push("legendre outside the cone is finite".into());
    }
    let fixture = legendre([1.2, 0.0], &cgf);
    if !(fixture.converged && (fixture.value - fx.legendre_oracle).abs() <= fx.legendre_oracle_tol) {
        failures.push(format!("legendre(1.2,0)={} vs oracle {}", fixture.value, fx.legendre_oracle));
    }
    let mut rng = RandomStream::new(fx.seed, 0);
    let mut grad_err: f64 = 0.0;
    for _ in 0..fx.gradient_points {
        let g = [4.0 * rng.uniform() - 2.0, 4.0 * rng.uniform() - 2.0];
        let exact = cgf.gradient(g);
        for k in 0..2 {
            let h = 1e-5;
            let mut a = g;
            let mut b = g;
            a[k] += h;
            b[k] -= h;
            let fd = (cgf.value(a) - cgf.value(b)) / (2.0 * h);
            grad_err = grad_err.max((fd - exact[k]).abs());
        }
    }
    if grad_err > fx.tol {
        failures.push(format!("gradient error {grad_err:.2e}"));
    }
    let zero = ldp_rate(0.0, &p)?;
    if !(zero.converged && zero.value <= fx.tol) {
        failures.push(format!("ldp(0)={}", zero.value));
    }
    let mut even_err: f64 = 0.0;
    for x in [0.2, 0.5, 1.0] {
        let a = ldp_rate(x, &p)?;
        let b = ldp_rate(-x, &p)?;
        if a.infinite != b.infinite {
            even_err = f64::INFINITY;
        } else if !a.infinite {
            even_err = even_err.max((a.value - b.value).abs());
        }
    }
    if even_err > fx.tol {
        failures.push(format!("ldp parity error {even_err:.2e}"));
    }
    let detail = if failures.is_empty() {
        format!("grad err {grad_err:.2e}, ldp parity err {even_err:.2e}, legendre(1.2,0)={:.7}", fixture.value)
    } else {
        failures.join("; ")
    };
    Ok(check("rate", failures.is_empty(), grad_err, fx.tol, fx.seed, detail))
}

pub fn check_clt(fx: &CltFx) -> Result<CheckResult> {
    let p = params_frac(1.0, &fx.theta_frac)?;
    let rho = estimate_rho(p, fx.rho_segments, fx.rho_seed, Sampler::Points)?;
    let ys: Vec<f64> = (0..fx.paths as u64)
        .into_par_iter()
        .map(|i| displacement_at(p, fx.t, fx.seed, i, Sampler::Points).map(|y| y / fx.t.sqrt()))
        .collect::<Result<_>>()?;
    let sd = (1.0 / (2.0 * rho.value)).sqrt();
    let ks = ks_one_sample(&ys, |y| normal_cdf(y / sd));
    Ok(check(
        "clt",
        ks.p_value > fx.min_p,
        ks.p_value,
        fx.min_p,
        fx.seed,
        format!("ρ̂={:.5}±{:.5}, D={:.5}, n={}", rho.value, rho.stderr, ks.statistic, ys.len()),
    ))
}

/// Objective pieces of the synthetic dependent-case fixture.
pub fn synthetic_iprime(u: f64, v: f64) -> f64 {
    (u - 1.0).powi(2) + v * v
}

pub fn synthetic_h(x: f64, y: f64) -> f64 {
    1.0 + x * x + y * y
}

pub fn check_dependent(fx: &DependentFx) -> CheckResult {
    let r = dependent_ldp_rate(1.0, synthetic_iprime, synthetic_h);
    let err = (r.value - fx.target).abs();
    let oracle_err = (r.value - fx.grid_oracle).abs();
    check(
        "dependent",
        !r.infinite && err <= fx.tol && oracle_err <= fx.tol,
        err,
        fx.tol,
        0,
        format!("value {:.9}, grid oracle {}, witness {:?}", r.value, fx.grid_oracle, r.witness),
    )
}

pub fn check_kprime(fx: &KprimeFx) -> Result<CheckResult> {
    let mut worst: f64 = 1.0;
    let mut detail = Vec::new();
    for frac in &fx.theta_fracs {
        let p = params_frac(1.0, frac)?;
        let kappa = estimate_kappa(p, fx.kappa_segments, fx.kappa_seed, Sampler::Points)?;
        let ratios: Vec<f64> = (0..fx.paths as u64)
            .into_par_iter()
            .map(|i| {
                let path = simulate_path(p, Horizon::Time(fx.t), fx.seed, i, Sampler::Points)?;
                Ok(kprime(&path, fx.t)? as f64 / fx.t)
            })
            .collect::<Result<_>>()?;
        let within = ratios.iter().filter(|r| (*r - kappa.value).abs() <= fx.tol).count();
        let frac_within = within as f64 / ratios.len() as f64;
        worst = worst.min(frac_within);
        detail.push(format!("θ=π·{frac}: κ̂={:.5}, within {within}/{}", kappa.value, ratios.len()));
    }
    Ok(check(
        "kprime",
        worst >= fx.min_fraction,
        worst,
        fx.min_fraction,
        fx.seed,
        detail.join("; "),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_fixtures_parse_and_filter() {
        let fx = Fixtures::bundled();
        assert_eq!(fx.rho.segments, 100_000);
        assert!(run_validate(&["nope".into()], &fx).is_err());
        let r = run_validate(&["dependent".into()], &fx).unwrap();
        assert_eq!(r.checks.len(), 1);
        assert!(r.overall, "{:?}", r.checks[0]);
    }
}
