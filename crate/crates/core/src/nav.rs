//! Sequential simulation of directed cone navigations.
//!
//! The navigation starts at the origin with an empty history. Each step is
//! drawn conditionally on the history region, which is known to contain no
//! process points; everything outside it is a fresh Poisson process. Two
//! samplers implement that conditional law independently:
//!
//! * [`Sampler::Inversion`] inverts the void probability
//!   `P(R > r) = exp(−λ A(r))`, where `A` is the explored area, and then
//!   draws the angle uniformly on the free arcs at the solved radius.
//! * [`Sampler::Points`] realizes a fresh process on the cone annulus by
//!   annulus and discards points falling in the history. It also reports
//!   the nearest fresh points in the full cone and in the narrow cone
//!   `C_{π/2−θ}`, which give the coupled lower and upper step radii.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{NavError, Result};
use crate::geom::{
    cone_ball_is_empty, explored_area_unchecked, free_angles_unchecked, HistorySet, Point,
    PolarStep,
};
use crate::rng::RandomStream;

/// Intensity `λ` and cone half-angle `θ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub lambda: f64,
    pub theta: f64,
}

impl ModelParams {
    pub fn new(lambda: f64, theta: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(NavError::InvalidParameter(format!(
                "intensity lambda must be a positive finite number, got {lambda}"
            )));
        }
        if (theta - FRAC_PI_2).abs() < 1e-12 {
            return Err(NavError::InvalidParameter(format!(
                "theta = π/2 ({theta}) is not supported: with a half-plane cone the history set \
                 never empties, so the navigation has no renewal structure; use theta in (0, π/2)"
            )));
        }
        if !(theta > 0.0 && theta < FRAC_PI_2) {
            return Err(NavError::InvalidParameter(format!(
                "theta must lie in the open interval (0, π/2), got {theta}"
            )));
        }
        Ok(Self { lambda, theta })
    }

    /// `θ = π·p/q`.
    pub fn with_theta_frac(lambda: f64, p: u32, q: u32) -> Result<Self> {
        if q == 0 {
            return Err(NavError::InvalidParameter("theta fraction has zero denominator".into()));
        }
        Self::new(lambda, PI * p as f64 / q as f64)
    }

    /// Half-angle `π/2 − θ` of the narrow cone.
    #[inline]
    pub fn narrow_angle(&self) -> f64 {
        FRAC_PI_2 - self.theta
    }

    /// True in the regime `θ > π/4` where histories can persist.
    #[inline]
    pub fn is_wide(&self) -> bool {
        self.theta > FRAC_PI_4
    }

    /// `Φ ∈ T_θ = [θ − π/2, π/2 − θ]`.
    #[inline]
    pub fn in_t_theta(&self, phi: f64) -> bool {
        phi.abs() <= self.narrow_angle()
    }

    /// `E[X_1] = E[R] E[cos Φ]` for a step from an empty history.
    pub fn mean_step_x(&self) -> f64 {
        0.5 * (PI / (self.lambda * self.theta)).sqrt() * self.theta.sin() / self.theta
    }
}

/// One navigation step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Cartesian progress `U_n = (X_n, Y_n)`.
    pub progress: Point,
    pub polar: PolarStep,
    pub history_empty_after: bool,
}

impl StepRecord {
    pub fn from_polar(polar: PolarStep, history_empty_after: bool) -> Self {
        Self {
            progress: polar.to_point(),
            polar,
            history_empty_after,
        }
    }
}

/// A simulated trajectory. Renewal indices are 1-based step numbers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub params: ModelParams,
    pub seed: u64,
    pub path_id: u64,
    pub steps: Vec<StepRecord>,
    pub renewal_indices: Vec<usize>,
}

impl PathSample {
    /// Assemble from steps, deriving the renewal indices.
    pub fn from_steps(params: ModelParams, seed: u64, path_id: u64, steps: Vec<StepRecord>) -> Self {
        let renewal_indices = steps
            .iter()
            .enumerate()
            .filter(|(_, s)| s.history_empty_after)
            .map(|(i, _)| i + 1)
            .collect();
        Self {
            params,
            seed,
            path_id,
            steps,
            renewal_indices,
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Waypoints `V_1, …, V_n`.
    pub fn waypoints(&self) -> Vec<Point> {
        let mut v = Point::ORIGIN;
        self.steps
            .iter()
            .map(|s| {
                v = v + s.progress;
                v
            })
            .collect()
    }

    pub fn final_point(&self) -> Point {
        self.steps.iter().fold(Point::ORIGIN, |v, s| v + s.progress)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Horizon {
    Steps(usize),
    Time(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Sampler {
    Inversion,
    #[default]
    Points,
}

impl std::str::FromStr for Sampler {
    type Err = NavError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inversion" => Ok(Sampler::Inversion),
            "points" => Ok(Sampler::Points),
            other => Err(NavError::InvalidParameter(format!("unknown sampler `{other}`"))),
        }
    }
}

/// A step together with the coupled under/over steps of the points sampler.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoupledStep {
    pub step: PolarStep,
    /// Nearest fresh point in `C_θ(v)`.
    pub under: PolarStep,
    /// Nearest fresh point in `C_{π/2−θ}(v)`.
    pub over: PolarStep,
}

/// `H_n` from `H_{n−1}` (anchored at `v_prev`) and the step `U_n`.
pub fn update_history(
    history: &HistorySet,
    v_prev: Point,
    step: &StepRecord,
    params: &ModelParams,
) -> HistorySet {
    debug_assert_eq!(history.reference_vertex(), v_prev);
    history.advanced(v_prev + step.progress, step.polar.r, params.theta)
}

pub fn is_history_empty(history: &HistorySet) -> bool {
    history.is_empty()
}

/// True iff the narrow cone `C_{π/2−θ}(V_n)` misses every term of `H_n`.
///
/// All term cones are `C_θ(V_n)` once re-apexed, and the narrow cone lies
/// inside it, so the check reduces to narrow cone versus each ball.
pub fn narrow_cone_is_free(history: &HistorySet, params: &ModelParams) -> bool {
    let v = history.reference_vertex();
    let alpha = params.narrow_angle();
    history
        .terms()
        .iter()
        .all(|t| cone_ball_is_empty(v, alpha, t.ball_center, t.ball_radius))
}

fn uniform_angle(theta: f64, u: f64) -> f64 {
    theta * (2.0 * u - 1.0)
}

fn draw_inversion(
    v: Point,
    history: &HistorySet,
    params: &ModelParams,
    rng: &mut RandomStream,
) -> Result<PolarStep> {
    let theta = params.theta;
    let a = rng.exp1() / params.lambda;
    let u = rng.uniform();

    if history.is_empty() {
        return Ok(PolarStep {
            r: (a / theta).sqrt(),
            phi: uniform_angle(theta, u),
        });
    }
    let r_near = history.near_radius();
    if a <= theta * r_near * r_near {
        return Ok(PolarStep {
            r: (a / theta).sqrt(),
            phi: uniform_angle(theta, u),
        });
    }
    let r_far = history.far_radius();
    let a_far = explored_area_unchecked(v, r_far, history, theta);
    if a >= a_far {
        return Ok(PolarStep {
            r: (r_far * r_far + (a - a_far) / theta).sqrt(),
            phi: uniform_angle(theta, u),
        });
    }

    // A(r) ≤ θ r², so the root is at least √(a/θ)
    let mut lo = r_near.max((a / theta).sqrt()).min(r_far);
    let mut hi = r_far;
    let mut r = lo;
    for _ in 0..200 {
        let g = explored_area_unchecked(v, r, history, theta) - a;
        if g < 0.0 {
            lo = r;
        } else {
            hi = r;
        }
        if g == 0.0 || hi - lo <= 1e-12 {
            break;
        }
        let m = free_angles_unchecked(v, r, history, theta).measure();
        let slope = r * m;
        let newton = if slope > 0.0 { r - g / slope } else { f64::NAN };
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - r).abs() <= 1e-13 {
            r = next;
            break;
        }
        r = next;
    }

    let free = free_angles_unchecked(v, r, history, theta);
    let phi = match free.quantile(u) {
        Some(p) => p,
        None => {
            // the root sits on a fully covered circle only through rounding
            let nudged = r * (1.0 + 1e-12) + 1e-15;
            free_angles_unchecked(v, nudged, history, theta)
                .quantile(u)
                .ok_or_else(|| {
                    NavError::Geometry(format!("free angular set empty at solved radius {r}"))
                })?
        }
    };
    Ok(PolarStep { r, phi })
}

#[inline]
fn lex_less(a: (f64, f64), b: Option<(f64, f64)>) -> bool {
    match b {
        None => true,
        Some(b) => a.0 < b.0 || (a.0 == b.0 && a.1 < b.1),
    }
}

fn draw_points(
    v: Point,
    history: &HistorySet,
    params: &ModelParams,
    rng: &mut RandomStream,
    coupled: bool,
) -> Result<CoupledStep> {
    let theta = params.theta;
    let wide = coupled && params.is_wide();
    let narrow = params.narrow_angle();
    let scale = 1.0 / params.lambda.sqrt();
    let r_far = history.far_radius();
    let cap_angle = if wide { narrow } else { theta };

    let mut step: Option<(f64, f64)> = None;
    let mut under: Option<(f64, f64)> = None;
    let mut over: Option<(f64, f64)> = None;
    let mut k: u64 = 1;
    loop {
        let r1 = (k - 1) as f64 * scale;
        let r2 = k as f64 * scale;
        let n = rng.poisson(theta * (2 * k - 1) as f64);
        for _ in 0..n {
            let u = rng.uniform();
            let r = (r1 * r1 + u * (r2 * r2 - r1 * r1)).sqrt();
            let phi = uniform_angle(theta, rng.uniform());
            let cand = (r, phi);
            if wide {
                if lex_less(cand, under) {
                    under = Some(cand);
                }
                if phi.abs() <= narrow && lex_less(cand, over) {
                    over = Some(cand);
                }
            }
            if lex_less(cand, step) && !history.contains(v + Point::from_polar(r, phi), theta) {
                step = Some(cand);
            }
        }
        if step.is_some() && (!wide || (under.is_some() && over.is_some())) {
            break;
        }
        if r1 > r_far && params.lambda * cap_angle * (r1 * r1 - r_far * r_far) > 700.0 {
            return Err(NavError::SamplerExhausted { radius: r1 });
        }
        k += 1;
    }
    let to_polar = |c: (f64, f64)| PolarStep { r: c.0, phi: c.1 };
    let s = to_polar(step.expect("loop exits with a step"));
    Ok(if wide {
        CoupledStep {
            step: s,
            under: to_polar(under.expect("coupled minimum")),
            over: to_polar(over.expect("coupled minimum")),
        }
    } else {
        CoupledStep {
            step: s,
            under: s,
            over: s,
        }
    })
}

/// One step by inversion of the conditional void probability.
pub fn sample_step_inversion(
    v: Point,
    history: &HistorySet,
    params: &ModelParams,
    rng: &mut RandomStream,
) -> Result<StepRecord> {
    let polar = draw_inversion(v, history, params, rng)?;
    let rec = StepRecord::from_polar(polar, false);
    let empty = update_history(history, v, &rec, params).is_empty();
    Ok(StepRecord::from_polar(polar, empty))
}

/// One step by lazy realization of a fresh process on `C_θ(v)`, together
/// with the coupled under/over steps. For `θ ≤ π/4` both coincide with the
/// step.
pub fn sample_step_points(
    v: Point,
    history: &HistorySet,
    params: &ModelParams,
    rng: &mut RandomStream,
) -> Result<(StepRecord, PolarStep, PolarStep)> {
    let c = draw_points(v, history, params, rng, true)?;
    let rec = StepRecord::from_polar(c.step, false);
    let empty = update_history(history, v, &rec, params).is_empty();
    Ok((StepRecord::from_polar(c.step, empty), c.under, c.over))
}

/// Streaming navigation state: position, history and random stream.
#[derive(Clone, Debug)]
pub struct Navigator {
    params: ModelParams,
    sampler: Sampler,
    rng: RandomStream,
    position: Point,
    history: HistorySet,
    steps: usize,
}

impl Navigator {
    pub fn new(params: ModelParams, seed: u64, path_id: u64, sampler: Sampler) -> Self {
        Self {
            params,
            sampler,
            rng: RandomStream::new(seed, path_id),
            position: Point::ORIGIN,
            history: HistorySet::empty(Point::ORIGIN),
            steps: 0,
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn position(&self) -> Point {
        self.position
    }

    pub fn history(&self) -> &HistorySet {
        &self.history
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    fn advance(&mut self, polar: PolarStep) -> StepRecord {
        let progress = polar.to_point();
        let next = self.position + progress;
        self.history = self.history.advanced(next, polar.r, self.params.theta);
        self.position = next;
        self.steps += 1;
        StepRecord {
            progress,
            polar,
            history_empty_after: self.history.is_empty(),
        }
    }

    pub fn step(&mut self) -> Result<StepRecord> {
        let polar = match self.sampler {
            Sampler::Inversion => draw_inversion(self.position, &self.history, &self.params, &mut self.rng)?,
            Sampler::Points => draw_points(self.position, &self.history, &self.params, &mut self.rng, false)?.step,
        };
        Ok(self.advance(polar))
    }

    /// Step with the points sampler and report the coupled bounds.
    pub fn step_coupled(&mut self) -> Result<(StepRecord, CoupledStep)> {
        let c = draw_points(self.position, &self.history, &self.params, &mut self.rng, true)?;
        Ok((self.advance(c.step), c))
    }
}

pub fn simulate_path(
    params: ModelParams,
    horizon: Horizon,
    seed: u64,
    path_id: u64,
    sampler: Sampler,
) -> Result<PathSample> {
    let mut nav = Navigator::new(params, seed, path_id, sampler);
    let mut steps = Vec::new();
    match horizon {
        Horizon::Steps(n) => {
            if n == 0 {
                return Err(NavError::InvalidParameter("step horizon must be ≥ 1".into()));
            }
            steps.reserve(n);
            for _ in 0..n {
                steps.push(nav.step()?);
            }
        }
        Horizon::Time(t) => {
            if !(t > 0.0 && t.is_finite()) {
                return Err(NavError::InvalidParameter(format!("time horizon must be > 0, got {t}")));
            }
            while nav.position().x < t {
                steps.push(nav.step()?);
            }
        }
    }
    Ok(PathSample::from_steps(params, seed, path_id, steps))
}

/// Paths `0..n_paths` of one seed, simulated in parallel.
pub fn simulate_paths(
    params: ModelParams,
    horizon: Horizon,
    seed: u64,
    n_paths: usize,
    sampler: Sampler,
) -> Result<Vec<PathSample>> {
    (0..n_paths as u64)
        .into_par_iter()
        .map(|id| simulate_path(params, horizon, seed, id, sampler))
        .collect()
}

/// `Y_t`: the trajectory's height at horizontal position `t`, interpolating
/// linearly inside the crossing step.
pub fn vertical_displacement(path: &PathSample, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(NavError::InvalidParameter(format!("t must be ≥ 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let mut v = Point::ORIGIN;
    for s in &path.steps {
        let next = v + s.progress;
        if next.x >= t {
            return Ok(v.y + s.progress.y * (t - v.x) / s.progress.x);
        }
        v = next;
    }
    Err(NavError::OutOfHorizon(format!(
        "t = {t} exceeds the simulated horizontal extent {}",
        v.x
    )))
}

/// `K_t = sup{n > 0 : X_1 + … + X_n < t}` with `sup ∅ = 0`.
pub fn steps_before(path: &PathSample, t: f64) -> Result<usize> {
    if !(t > 0.0) {
        return Err(NavError::InvalidParameter(format!("t must be > 0, got {t}")));
    }
    let mut x = 0.0;
    for (i, s) in path.steps.iter().enumerate() {
        x += s.progress.x;
        if x >= t {
            return Ok(i);
        }
    }
    Err(NavError::OutOfHorizon(format!(
        "t = {t} exceeds the simulated horizontal extent {x}"
    )))
}

/// `Y_t` of path `(seed, path_id)` without storing the trajectory.
pub fn displacement_at(params: ModelParams, t: f64, seed: u64, path_id: u64, sampler: Sampler) -> Result<f64> {
    if !(t > 0.0) {
        return Err(NavError::InvalidParameter(format!("t must be > 0, got {t}")));
    }
    let mut nav = Navigator::new(params, seed, path_id, sampler);
    loop {
        let before = nav.position();
        let s = nav.step()?;
        if before.x + s.progress.x >= t {
            return Ok(before.y + s.progress.y * (t - before.x) / s.progress.x);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_from(progress: &[(f64, f64)], renewals: &[usize]) -> PathSample {
        let params = ModelParams::new(1.0, 1.0).unwrap();
        let steps = progress
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| StepRecord {
                progress: Point::new(x, y),
                polar: PolarStep { r: x.hypot(y), phi: y.atan2(x) },
                history_empty_after: renewals.contains(&(i + 1)),
            })
            .collect();
        PathSample::from_steps(params, 0, 0, steps)
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(1.0, 0.5).is_ok());
        assert!(ModelParams::new(0.0, 0.5).is_err());
        assert!(ModelParams::new(1.0, 0.0).is_err());
        let e = ModelParams::new(1.0, FRAC_PI_2).unwrap_err().to_string();
        assert!(e.contains("π/2"), "{e}");
        assert!(ModelParams::new(1.0, 2.0).is_err());
        let p = ModelParams::with_theta_frac(1.0, 3, 8).unwrap();
        assert_eq!(p.theta, 3.0 * PI / 8.0);
        assert!((ModelParams::new(1.0, FRAC_PI_4).unwrap().mean_step_x() - 0.900316).abs() < 1e-6);
    }

    #[test]
    fn history_update_examples() {
        let p = ModelParams::new(1.0, FRAC_PI_4).unwrap();
        let h0 = HistorySet::empty(Point::ORIGIN);
        assert!(is_history_empty(&h0));
        for phi in [-FRAC_PI_4, -0.3, 0.0, 0.7] {
            let s = StepRecord::from_polar(PolarStep { r: 1.3, phi }, false);
            assert!(update_history(&h0, Point::ORIGIN, &s, &p).is_empty());
        }

        let p = ModelParams::with_theta_frac(1.0, 3, 8).unwrap();
        let s = StepRecord::from_polar(PolarStep { r: 1.0, phi: 0.0 }, false);
        assert!(update_history(&h0, Point::ORIGIN, &s, &p).is_empty());
        let s = StepRecord::from_polar(PolarStep { r: 1.0, phi: p.theta - 0.01 }, false);
        let h1 = update_history(&h0, Point::ORIGIN, &s, &p);
        assert_eq!(h1.len(), 1);
        assert!(!is_history_empty(&h1));
        // a point of C_θ(V_1) ∩ B(o, 1): just right of V_1 and slightly below
        let v1 = s.progress;
        let probe = v1 + Point::from_polar(0.05, -p.theta + 0.05);
        assert!(probe.norm() < 1.0);
        assert!(h1.contains(probe, p.theta));
    }

    #[test]
    fn interpolation_examples() {
        let path = path_from(&[(2.0, 1.0)], &[1]);
        assert!((vertical_displacement(&path, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(vertical_displacement(&path, 0.0).unwrap(), 0.0);
        let path = path_from(&[(1.0, 1.0), (1.0, -1.0)], &[1, 2]);
        assert!((vertical_displacement(&path, 1.5).unwrap() - 0.5).abs() < 1e-15);
        assert!(vertical_displacement(&path, 2.5).is_err());
    }

    #[test]
    fn steps_before_examples() {
        let path = path_from(&[(1.0, 0.0), (1.0, 0.0), (1.0, 0.0)], &[]);
        assert_eq!(steps_before(&path, 2.5).unwrap(), 2);
        assert_eq!(steps_before(&path, 1.0).unwrap(), 0);
        let path = path_from(&[(0.5, 0.0), (0.5, 0.0)], &[]);
        assert_eq!(steps_before(&path, 0.9).unwrap(), 1);
        assert!(steps_before(&path, 0.0).is_err());
    }

    #[test]
    fn quarter_cone_renews_every_step() {
        let p = ModelParams::new(1.0, FRAC_PI_4).unwrap();
        for sampler in [Sampler::Inversion, Sampler::Points] {
            let path = simulate_path(p, Horizon::Steps(100), 3, 0, sampler).unwrap();
            assert_eq!(path.renewal_indices, (1..=100).collect::<Vec<_>>());
        }
    }

    #[test]
    fn paths_are_reproducible() {
        let p = ModelParams::new(1.0, 1.3).unwrap();
        for sampler in [Sampler::Inversion, Sampler::Points] {
            let a = simulate_path(p, Horizon::Steps(50), 11, 4, sampler).unwrap();
            let b = simulate_path(p, Horizon::Steps(50), 11, 4, sampler).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn time_horizon_keeps_crossing_step() {
        let p = ModelParams::new(1.0, 1.2).unwrap();
        let path = simulate_path(p, Horizon::Time(20.0), 5, 1, Sampler::Points).unwrap();
        let xs: Vec<f64> = path.waypoints().iter().map(|v| v.x).collect();
        assert!(*xs.last().unwrap() >= 20.0);
        assert!(xs[xs.len() - 2] < 20.0);
        let y = displacement_at(p, 20.0, 5, 1, Sampler::Points).unwrap();
        assert_eq!(y, vertical_displacement(&path, 20.0).unwrap());
    }
}
