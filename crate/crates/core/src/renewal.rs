//! Renewal structure of the navigation and Monte Carlo estimators built on
//! it.
//!
//! A renewal is a step after which the history set is empty. The progress
//! accumulated between consecutive renewals forms a segment; segments are
//! iid. The estimators below draw one segment per random stream (the first
//! segment of path `(seed, i)`), which gives an iid sample without running
//! one long path sequentially.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{NavError, Result};
use crate::geom::{history_width, Point};
use crate::nav::{steps_before, ModelParams, Navigator, PathSample, Sampler};
use crate::stats::{covariance, linear_fit, mean_var, wilson_interval, Z99};

/// Steps allowed before a single segment is declared runaway.
pub const SEGMENT_STEP_CAP: usize = 1_000_000;

/// Minimum number of exceedances for a level to enter a tail fit.
pub const TAIL_FIT_MIN_HITS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SegmentRecord {
    /// Summed horizontal progress `X′`.
    pub xp: f64,
    /// Summed vertical progress `Y′`.
    pub yp: f64,
    /// Number of steps in the segment.
    pub gap: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EstimateWithCI {
    pub value: f64,
    pub stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
    pub seed: u64,
}

impl EstimateWithCI {
    pub fn new(value: f64, stderr: f64, n: usize, seed: u64) -> Self {
        Self {
            value,
            stderr,
            ci_low: value - Z99 * stderr,
            ci_high: value + Z99 * stderr,
            n,
            seed,
        }
    }

    /// `|a − b|` measured in combined standard errors.
    pub fn z_distance(&self, other: &EstimateWithCI) -> f64 {
        (self.value - other.value).abs() / self.stderr.hypot(other.stderr)
    }
}

/// Empirical survival `P(T > n)` with Wilson bands and a log-linear fit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailCurve {
    pub levels: Vec<usize>,
    pub survival: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    /// Number of samples exceeding each level.
    pub hits: Vec<usize>,
    /// Negative slope of `log P(T > n)` over well-populated levels.
    pub fitted_rate: Option<f64>,
    pub fit_r2: Option<f64>,
    pub n_samples: usize,
    /// Samples only known to exceed the largest level.
    pub censored: usize,
}

impl TailCurve {
    /// Build from samples `T_i ≥ 1`; `None` marks a censored sample known
    /// only to exceed `cap`. Levels run from 0 to the largest observed value
    /// (or `cap`).
    pub fn from_samples(samples: &[Option<usize>], cap: usize) -> Self {
        let n = samples.len();
        let censored = samples.iter().filter(|s| s.is_none()).count();
        let max_level = samples
            .iter()
            .map(|s| s.unwrap_or(cap))
            .max()
            .unwrap_or(0);
        let mut counts = vec![0usize; max_level + 2];
        for s in samples {
            let v = s.unwrap_or(cap + 1).min(max_level + 1);
            counts[v] += 1;
        }
        // hits[k] = #{T > k}
        let mut hits = vec![0usize; max_level + 1];
        let mut above = n;
        for k in 0..=max_level {
            above -= counts[k];
            hits[k] = above;
        }
        let levels: Vec<usize> = (0..=max_level).collect();
        let survival: Vec<f64> = hits.iter().map(|&h| h as f64 / n.max(1) as f64).collect();
        let (ci_low, ci_high): (Vec<f64>, Vec<f64>) =
            hits.iter().map(|&h| wilson_interval(h, n, Z99)).unzip();
        let (xs, ys): (Vec<f64>, Vec<f64>) = levels
            .iter()
            .zip(&hits)
            .filter(|(&l, &h)| l >= 1 && h >= TAIL_FIT_MIN_HITS)
            .map(|(&l, &h)| (l as f64, (h as f64 / n as f64).ln()))
            .unzip();
        let fit = if xs.len() >= 3 { linear_fit(&xs, &ys) } else { None };
        // a flat log-survival has no exponential rate to report
        let fit = fit.filter(|f| ys.iter().any(|&y| y != ys[0]) && f.r2.is_finite());
        Self {
            levels,
            survival,
            ci_low,
            ci_high,
            hits,
            fitted_rate: fit.map(|f| -f.slope),
            fit_r2: fit.map(|f| f.r2),
            n_samples: n,
            censored,
        }
    }

    /// Standard error of the survival estimate at a level.
    pub fn stderr(&self, level: usize) -> f64 {
        let p = self.survival[level];
        (p * (1.0 - p) / self.n_samples as f64).sqrt()
    }
}

/// Split a path at its renewal indices, dropping the trailing incomplete
/// segment.
pub fn segments(path: &PathSample) -> Vec<SegmentRecord> {
    let mut out = Vec::with_capacity(path.renewal_indices.len());
    let mut start = 0usize;
    for &tau in &path.renewal_indices {
        let (mut x, mut y) = (0.0, 0.0);
        for s in &path.steps[start..tau] {
            x += s.progress.x;
            y += s.progress.y;
        }
        out.push(SegmentRecord {
            xp: x,
            yp: y,
            gap: tau - start,
        });
        start = tau;
    }
    out
}

/// `K′_t = sup{n > 0 : τ_n ≤ K_t}` with `sup ∅ = 0`.
pub fn kprime(path: &PathSample, t: f64) -> Result<usize> {
    let k = steps_before(path, t)?;
    Ok(path.renewal_indices.partition_point(|&tau| tau <= k))
}

/// First segment of the path with stream `(seed, stream)`.
pub fn first_segment(params: ModelParams, seed: u64, stream: u64, sampler: Sampler) -> Result<SegmentRecord> {
    let mut nav = Navigator::new(params, seed, stream, sampler);
    for _ in 0..SEGMENT_STEP_CAP {
        let s = nav.step()?;
        if s.history_empty_after {
            let v = nav.position();
            return Ok(SegmentRecord {
                xp: v.x,
                yp: v.y,
                gap: nav.steps_taken(),
            });
        }
    }
    Err(NavError::StepCap(SEGMENT_STEP_CAP))
}

/// `n` iid segments, one per stream `0..n`.
pub fn collect_segments(params: ModelParams, n: usize, seed: u64, sampler: Sampler) -> Result<Vec<SegmentRecord>> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| first_segment(params, seed, i, sampler))
        .collect()
}

fn check_count(n: usize) -> Result<()> {
    if n < 1000 {
        return Err(NavError::InvalidParameter(format!(
            "at least 1000 segments are required, got {n}"
        )));
    }
    Ok(())
}

/// `ρ̂ = mean(X′) / (2 mean(Y′²))` with a delta-method standard error.
pub fn rho_from_segments(segs: &[SegmentRecord], seed: u64) -> EstimateWithCI {
    let xs: Vec<f64> = segs.iter().map(|s| s.xp).collect();
    let y2: Vec<f64> = segs.iter().map(|s| s.yp * s.yp).collect();
    let n = segs.len() as f64;
    let (a, va) = mean_var(&xs);
    let (b, vb) = mean_var(&y2);
    let cab = covariance(&xs, &y2);
    let value = a / (2.0 * b);
    let ga = 1.0 / (2.0 * b);
    let gb = -a / (2.0 * b * b);
    let var = (ga * ga * va + gb * gb * vb + 2.0 * ga * gb * cab) / n;
    EstimateWithCI::new(value, var.max(0.0).sqrt(), segs.len(), seed)
}

/// `κ̂ = 1 / mean(X′)`.
pub fn kappa_from_segments(segs: &[SegmentRecord], seed: u64) -> EstimateWithCI {
    let xs: Vec<f64> = segs.iter().map(|s| s.xp).collect();
    let (m, v) = mean_var(&xs);
    let se = v.sqrt() / (xs.len() as f64).sqrt() / (m * m);
    EstimateWithCI::new(1.0 / m, se, xs.len(), seed)
}

pub fn estimate_rho(params: ModelParams, n_segments: usize, seed: u64, sampler: Sampler) -> Result<EstimateWithCI> {
    check_count(n_segments)?;
    let segs = collect_segments(params, n_segments, seed, sampler)?;
    Ok(rho_from_segments(&segs, seed))
}

pub fn estimate_kappa(params: ModelParams, n_segments: usize, seed: u64, sampler: Sampler) -> Result<EstimateWithCI> {
    check_count(n_segments)?;
    let segs = collect_segments(params, n_segments, seed, sampler)?;
    Ok(kappa_from_segments(&segs, seed))
}

/// Empirical tail of the first renewal time `τ_1` over `n_paths` paths.
pub fn tau_tail(params: ModelParams, n_paths: usize, seed: u64, sampler: Sampler) -> Result<TailCurve> {
    let taus: Vec<usize> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| first_segment(params, seed, i, sampler).map(|s| s.gap))
        .collect::<Result<_>>()?;
    let samples: Vec<Option<usize>> = taus.into_iter().map(Some).collect();
    Ok(TailCurve::from_samples(&samples, 0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MajorantReport {
    /// Steps with `M_n < L_n`.
    pub width_violations: usize,
    /// Paths with `τ^M < τ`.
    pub tau_violations: usize,
    pub violations: usize,
    pub tau_m_tail: TailCurve,
    pub n_paths: usize,
    pub steps_checked: usize,
}

#[derive(Clone, Copy, Debug, Default)]
struct MajorantPath {
    width_violations: usize,
    tau_violation: bool,
    tau_m: Option<usize>,
    steps: usize,
}

/// One step of the integer majorant chain.
pub fn majorant_step(
    m: u64,
    params: &ModelParams,
    under_r: f64,
    under_phi: f64,
    over_r: f64,
) -> u64 {
    if params.in_t_theta(under_phi) {
        m.saturating_sub((under_r * params.theta.cos()).floor() as u64)
    } else {
        m.max(over_r.ceil() as u64)
    }
}

fn majorant_path(params: ModelParams, seed: u64, id: u64, max_steps: usize) -> Result<MajorantPath> {
    let mut nav = Navigator::new(params, seed, id, Sampler::Points);
    let mut m: u64 = 0;
    let mut out = MajorantPath::default();
    let mut tau: Option<usize> = None;
    for n in 1..=max_steps {
        let (rec, c) = nav.step_coupled()?;
        m = majorant_step(m, &params, c.under.r, c.under.phi, c.over.r);
        let width = history_width(nav.history(), params.theta);
        if (m as f64) < width {
            out.width_violations += 1;
        }
        if tau.is_none() && rec.history_empty_after {
            tau = Some(n);
        }
        out.steps = n;
        if m == 0 {
            out.tau_m = Some(n);
            // at τ^M the history must already have emptied
            out.tau_violation = tau.is_none();
            break;
        }
    }
    Ok(out)
}

/// Drive the majorant chain along `n_paths` coupled navigations of at most
/// `max_steps` steps, checking `M_n ≥ L_n` and `τ^M ≥ τ` pathwise.
pub fn markov_majorant(params: ModelParams, n_paths: usize, seed: u64, max_steps: usize) -> Result<MajorantReport> {
    if !params.is_wide() {
        return Err(NavError::InvalidParameter(
            "the Markov majorant needs θ in (π/4, π/2)".into(),
        ));
    }
    let paths: Vec<MajorantPath> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| majorant_path(params, seed, i, max_steps))
        .collect::<Result<_>>()?;
    let width_violations = paths.iter().map(|p| p.width_violations).sum();
    let tau_violations = paths.iter().filter(|p| p.tau_violation).count();
    let samples: Vec<Option<usize>> = paths.iter().map(|p| p.tau_m).collect();
    Ok(MajorantReport {
        width_violations,
        tau_violations,
        violations: width_violations + tau_violations,
        tau_m_tail: TailCurve::from_samples(&samples, max_steps),
        n_paths,
        steps_checked: paths.iter().map(|p| p.steps).sum(),
    })
}

/// Segment-sum reconstruction: cumulative progress at the last renewal.
pub fn progress_at_last_renewal(path: &PathSample) -> Point {
    match path.renewal_indices.last() {
        None => Point::ORIGIN,
        Some(&k) => path.steps[..k].iter().fold(Point::ORIGIN, |v, s| v + s.progress),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::PolarStep;
    use crate::nav::{simulate_path, Horizon, StepRecord};
    use std::f64::consts::FRAC_PI_4;

    fn unit_path(n: usize, renewals: &[usize]) -> PathSample {
        let params = ModelParams::new(1.0, 1.2).unwrap();
        let steps = (0..n)
            .map(|i| StepRecord::from_polar(PolarStep { r: 1.0, phi: 0.0 }, renewals.contains(&(i + 1))))
            .collect();
        PathSample::from_steps(params, 0, 0, steps)
    }

    #[test]
    fn segment_examples() {
        let p = ModelParams::new(1.0, FRAC_PI_4).unwrap();
        let path = simulate_path(p, Horizon::Steps(100), 1, 0, Sampler::Points).unwrap();
        let segs = segments(&path);
        assert_eq!(segs.len(), 100);
        for (s, st) in segs.iter().zip(&path.steps) {
            assert_eq!(s.gap, 1);
            assert_eq!((s.xp, s.yp), (st.progress.x, st.progress.y));
        }
        let path = unit_path(6, &[3, 5]);
        let segs = segments(&path);
        assert_eq!(segs.iter().map(|s| s.gap).collect::<Vec<_>>(), vec![3, 2]);
        assert_eq!(segs[0].xp, 3.0);
    }

    #[test]
    fn kprime_examples() {
        let path = unit_path(6, &[3, 5]);
        assert_eq!(kprime(&path, 4.5).unwrap(), 1);
        assert_eq!(kprime(&path, 0.5).unwrap(), 0);
        assert!(kprime(&path, 0.0).is_err());
        let p = ModelParams::new(1.0, FRAC_PI_4).unwrap();
        let path = simulate_path(p, Horizon::Time(30.0), 2, 0, Sampler::Points).unwrap();
        for t in [0.5, 3.0, 10.0, 29.0] {
            assert_eq!(kprime(&path, t).unwrap(), steps_before(&path, t).unwrap());
        }
    }

    #[test]
    fn estimators_need_enough_segments() {
        let p = ModelParams::new(1.0, FRAC_PI_4).unwrap();
        assert!(estimate_rho(p, 10, 1, Sampler::Points).is_err());
        assert!(estimate_kappa(p, 999, 1, Sampler::Points).is_err());
    }

    #[test]
    fn quarter_cone_tau_is_one() {
        let p = ModelParams::new(1.0, FRAC_PI_4).unwrap();
        let t = tau_tail(p, 1000, 3, Sampler::Points).unwrap();
        assert_eq!(t.survival, vec![1.0, 0.0]);
        assert!(t.fitted_rate.is_none());
    }

    #[test]
    fn majorant_first_step() {
        let p = ModelParams::with_theta_frac(1.0, 9, 20).unwrap();
        assert_eq!(majorant_step(0, &p, 3.0, 0.0, 5.0), 0);
        assert_eq!(majorant_step(0, &p, 3.0, 1.3, 4.2), 5);
        assert_eq!(majorant_step(7, &p, 3.0, 1.3, 4.2), 7);
    }

    #[test]
    fn tail_curve_from_known_samples() {
        let s: Vec<Option<usize>> = vec![Some(1), Some(1), Some(2), Some(4), None];
        let t = TailCurve::from_samples(&s, 5);
        assert_eq!(t.hits, vec![5, 3, 2, 2, 1, 1]);
        assert_eq!(t.censored, 1);
    }
}
