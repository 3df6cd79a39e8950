//! Rate-function numerics.
//!
//! The step CGF `J(γ) = log E[exp⟨γ, U_1⟩]` of a step from an empty history
//! has an explicit radial part: with `a = λθ`, `g(φ) = γ₁ cos φ + γ₂ sin φ`
//! and `h = g/√a`,
//!
//! ```text
//! λ ∫_0^∞ r e^{−a r² + g r} dr = (λ/a) I₁(h),   I_k(h) = ∫_0^∞ s^k e^{−s² + h s} ds,
//! ```
//!
//! so only the angle needs quadrature (Gauss–Legendre, 64 nodes). The `I_k`
//! follow from `I₀(h) = e^{h²/4} (√π/2) erfc(−h/2)` by the recurrence
//! `2 I_{k+1} = h I_k + k I_{k−1}` (with `2 I₁ = h I₀ + 1`). For `h < −4`
//! that recurrence cancels badly and the moments are taken from a
//! Gauss–Laguerre rule in `x = −h s` instead. Everything is carried in log
//! space, so `J` stays finite for `|γ|` up to the divergence cap.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::Serialize;

use crate::error::{NavError, Result};
use crate::nav::{ModelParams, Sampler};
use crate::optim::{golden_section, log_scan_golden, pattern_search};
use crate::quad::{gauss_laguerre_32, gauss_legendre_64};
use crate::renewal::{collect_segments, EstimateWithCI, SegmentRecord, TailCurve};
use crate::rng::RandomStream;
use crate::stats::{wilson_interval, Z99};

/// Value reported for infinite rates.
pub const INFINITE_RATE: f64 = f64::INFINITY;

/// Iterate norm beyond which a still-increasing Legendre objective is
/// declared divergent.
pub const DIVERGENCE_NORM: f64 = 1e6;

/// Objective values at or above this cap count as infinite in the
/// dependent-case optimizer.
pub const RATE_CAP: f64 = 1e6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateValue {
    pub value: f64,
    pub infinite: bool,
    /// Optimizer coordinates at the optimum (empty when infinite).
    pub witness: Vec<f64>,
    pub converged: bool,
}

impl RateValue {
    fn finite(value: f64, witness: Vec<f64>, converged: bool) -> Self {
        Self {
            value,
            infinite: false,
            witness,
            converged,
        }
    }

    fn infinite() -> Self {
        Self {
            value: INFINITE_RATE,
            infinite: true,
            witness: Vec::new(),
            converged: true,
        }
    }
}

/// `ρ(λ, θ) = √(πλθ) sin θ / (2θ − sin 2θ)`, valid for `0 < θ ≤ π/4`.
pub fn rho_closed_form(params: &ModelParams) -> Result<f64> {
    let t = params.theta;
    if t > FRAC_PI_4 + 1e-15 {
        return Err(NavError::InvalidParameter(format!(
            "closed form for rho needs theta ≤ π/4, got {t}"
        )));
    }
    Ok((PI * params.lambda * t).sqrt() * t.sin() / (2.0 * t - (2.0 * t).sin()))
}

pub fn mdp_rate(x: f64, rho: f64) -> f64 {
    rho * x * x
}

/// A convex cumulant generating function on the plane.
pub trait Cgf {
    fn value(&self, gamma: [f64; 2]) -> f64;

    fn gradient(&self, gamma: [f64; 2]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for k in 0..2 {
            let h = 1e-5 * gamma[k].abs().max(1.0);
            let mut p = gamma;
            let mut m = gamma;
            p[k] += h;
            m[k] -= h;
            g[k] = (self.value(p) - self.value(m)) / (2.0 * h);
        }
        g
    }

    fn hessian(&self, gamma: [f64; 2]) -> [[f64; 2]; 2] {
        let mut hm = [[0.0; 2]; 2];
        for k in 0..2 {
            let h = 1e-4 * gamma[k].abs().max(1.0);
            let mut p = gamma;
            let mut m = gamma;
            p[k] += h;
            m[k] -= h;
            let gp = self.gradient(p);
            let gm = self.gradient(m);
            for j in 0..2 {
                hm[j][k] = (gp[j] - gm[j]) / (2.0 * h);
            }
        }
        let off = 0.5 * (hm[0][1] + hm[1][0]);
        hm[0][1] = off;
        hm[1][0] = off;
        hm
    }
}

/// Wrap a closure as a [`Cgf`] with finite-difference derivatives.
pub struct FnCgf<F: Fn([f64; 2]) -> f64>(pub F);

impl<F: Fn([f64; 2]) -> f64> Cgf for FnCgf<F> {
    fn value(&self, gamma: [f64; 2]) -> f64 {
        (self.0)(gamma)
    }
}

/// `(ln I₁, I₂/I₁, I₃/I₁)` at `h`.
fn radial_moments(h: f64) -> (f64, f64, f64) {
    if h >= -4.0 {
        let ln_i0 = 0.25 * h * h + (0.5 * PI.sqrt()).ln() + libm::erfc(-0.5 * h).ln();
        let inv_i0 = (-ln_i0).exp();
        let q1 = 0.5 * (h + inv_i0);
        let r2 = 0.5 * (h + 1.0 / q1);
        let r3 = 0.5 * (h * r2 + 2.0);
        (ln_i0 + q1.ln(), r2, r3)
    } else {
        let rule = gauss_laguerre_32();
        let mh = -h;
        let (mut l1, mut l2, mut l3) = (0.0, 0.0, 0.0);
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let wx = w * x * (-(x / mh) * (x / mh)).exp();
            l1 += wx;
            l2 += wx * x;
            l3 += wx * x * x;
        }
        (l1.ln() - 2.0 * mh.ln(), l2 / (l1 * mh), l3 / (l1 * mh * mh))
    }
}

/// Step CGF with analytic gradient and Hessian.
#[derive(Clone, Debug)]
pub struct StepCgf {
    params: ModelParams,
    cos: Vec<f64>,
    sin: Vec<f64>,
    ln_w: Vec<f64>,
    sqrt_a: f64,
}

impl StepCgf {
    pub fn new(params: ModelParams) -> Self {
        let rule = gauss_legendre_64();
        let th = params.theta;
        let phis: Vec<f64> = rule.nodes.iter().map(|x| th * x).collect();
        Self {
            params,
            cos: phis.iter().map(|p| p.cos()).collect(),
            sin: phis.iter().map(|p| p.sin()).collect(),
            // (1/θ)·(θ w_j) = w_j
            ln_w: rule.weights.iter().map(|w| w.ln()).collect(),
            sqrt_a: (params.lambda * th).sqrt(),
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// `J`, the tilted mean and the tilted second-moment matrix.
    pub fn evaluate(&self, gamma: [f64; 2]) -> (f64, [f64; 2], [[f64; 2]; 2]) {
        let n = self.cos.len();
        let mut ln_m = Vec::with_capacity(n);
        let mut r1 = Vec::with_capacity(n);
        let mut r2 = Vec::with_capacity(n);
        let mut top = f64::NEG_INFINITY;
        for j in 0..n {
            let g = gamma[0] * self.cos[j] + gamma[1] * self.sin[j];
            let (l1, q2, q3) = radial_moments(g / self.sqrt_a);
            let lm = self.ln_w[j] + l1;
            top = top.max(lm);
            ln_m.push(lm);
            r1.push(q2 / self.sqrt_a);
            r2.push(q3 / (self.sqrt_a * self.sqrt_a));
        }
        let mut total = 0.0;
        let mut mean = [0.0; 2];
        let mut second = [[0.0; 2]; 2];
        for j in 0..n {
            let p = (ln_m[j] - top).exp();
            total += p;
            let e = [self.cos[j], self.sin[j]];
            for a in 0..2 {
                mean[a] += p * r1[j] * e[a];
                for b in 0..2 {
                    second[a][b] += p * r2[j] * e[a] * e[b];
                }
            }
        }
        // Σ w_j I₁(0) = 2 · ½, so J(0) is ln 1 up to rounding
        let j = if gamma == [0.0, 0.0] { 0.0 } else { top + total.ln() };
        for a in 0..2 {
            mean[a] /= total;
            for b in 0..2 {
                second[a][b] /= total;
            }
        }
        (j, mean, second)
    }
}

impl Cgf for StepCgf {
    fn value(&self, gamma: [f64; 2]) -> f64 {
        self.evaluate(gamma).0
    }

    fn gradient(&self, gamma: [f64; 2]) -> [f64; 2] {
        self.evaluate(gamma).1
    }

    fn hessian(&self, gamma: [f64; 2]) -> [[f64; 2]; 2] {
        let (_, m, s) = self.evaluate(gamma);
        [
            [s[0][0] - m[0] * m[0], s[0][1] - m[0] * m[1]],
            [s[1][0] - m[1] * m[0], s[1][1] - m[1] * m[1]],
        ]
    }
}

/// CGF values on a list of `γ` points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CgfGrid {
    pub gamma: Vec<[f64; 2]>,
    pub values: Vec<f64>,
    pub finite_mask: Vec<bool>,
}

impl CgfGrid {
    pub fn evaluate<C: Cgf + Sync + ?Sized>(cgf: &C, gamma: Vec<[f64; 2]>) -> Self {
        use rayon::prelude::*;
        let values: Vec<f64> = gamma.par_iter().map(|&g| cgf.value(g)).collect();
        let finite_mask = values.iter().map(|v| v.is_finite()).collect();
        Self {
            gamma,
            values,
            finite_mask,
        }
    }
}

/// `J(γ)` for a step from an empty history.
pub fn cgf_step(gamma: [f64; 2], params: &ModelParams) -> f64 {
    StepCgf::new(*params).value(gamma)
}

/// `sup_γ ⟨γ, u⟩ − J(γ)` by damped Newton ascent from `γ = 0`, stopping
/// when `|u − ∇J(γ)| < 1e−8 · max(1, |u|)`.
pub fn legendre<C: Cgf + ?Sized>(u: [f64; 2], cgf: &C) -> RateValue {
    let obj = |g: [f64; 2]| g[0] * u[0] + g[1] * u[1] - cgf.value(g);
    let mut g = [0.0, 0.0];
    let mut f = obj(g);
    // ∇J carries rounding proportional to |u|
    let scale = u[0].hypot(u[1]).max(1.0);
    for _ in 0..500 {
        let jg = cgf.gradient(g);
        let grad = [u[0] - jg[0], u[1] - jg[1]];
        let gnorm = grad[0].hypot(grad[1]);
        if gnorm < 1e-8 * scale {
            return RateValue::finite(f.max(0.0), g.to_vec(), true);
        }
        let h = cgf.hessian(g);
        // ascent direction d solves (H + μI) d = grad
        let mut mu = 0.0;
        let mut dir = [grad[0], grad[1]];
        for _ in 0..60 {
            let a = h[0][0] + mu;
            let d = h[1][1] + mu;
            let b = h[0][1];
            let det = a * d - b * b;
            if a > 0.0 && det > 0.0 {
                dir = [(d * grad[0] - b * grad[1]) / det, (a * grad[1] - b * grad[0]) / det];
                if dir[0].is_finite() && dir[1].is_finite() {
                    break;
                }
            }
            mu = if mu == 0.0 { 1e-10 * (h[0][0].abs() + h[1][1].abs()).max(1e-300) } else { mu * 10.0 };
        }
        if gnorm < 1e-6 * scale {
            // f is flat to rounding here; judge full Newton steps by the residual
            let trial = [g[0] + dir[0], g[1] + dir[1]];
            let jt = cgf.gradient(trial);
            let gt = (u[0] - jt[0]).hypot(u[1] - jt[1]);
            if gt < gnorm {
                g = trial;
                f = obj(g);
                continue;
            }
            return RateValue::finite(f.max(0.0), g.to_vec(), true);
        }
        let slope = grad[0] * dir[0] + grad[1] * dir[1];
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..80 {
            let trial = [g[0] + t * dir[0], g[1] + t * dir[1]];
            let ft = obj(trial);
            if ft.is_finite() && ft >= f + 1e-4 * t * slope {
                let increased = ft > f;
                g = trial;
                f = ft;
                accepted = increased || t * (dir[0].hypot(dir[1])) < 1e-15 * g[0].hypot(g[1]).max(1.0);
                break;
            }
            t *= 0.5;
        }
        if g[0].hypot(g[1]) > DIVERGENCE_NORM {
            return RateValue::infinite();
        }
        if !accepted {
            // no ascent left to make: stationary up to rounding
            let jg = cgf.gradient(g);
            let gn = (u[0] - jg[0]).hypot(u[1] - jg[1]);
            return RateValue::finite(f.max(0.0), g.to_vec(), gn < 1e-6 * scale);
        }
    }
    RateValue::finite(f.max(0.0), g.to_vec(), false)
}

/// `I_{λ,θ}(x) = inf_{β>0} β I(1/β, x/β)` for `0 < θ ≤ π/4`.
pub fn ldp_rate(x: f64, params: &ModelParams) -> Result<RateValue> {
    if params.theta > FRAC_PI_4 + 1e-15 {
        return Err(NavError::InvalidParameter(format!(
            "ldp_rate needs theta ≤ π/4, got {}",
            params.theta
        )));
    }
    if x.abs() >= params.theta.tan() {
        return Ok(RateValue::infinite());
    }
    let cgf = StepCgf::new(*params);
    let kappa = 1.0 / params.mean_step_x();
    let mut failed = false;
    let mut eval = |beta: f64| {
        let r = legendre([1.0 / beta, x / beta], &cgf);
        if !r.converged {
            failed = true;
        }
        if r.infinite {
            f64::INFINITY
        } else {
            beta * r.value
        }
    };
    let m = log_scan_golden(&mut eval, 1e-3 * kappa, 1e3 * kappa, 61, 1e-12);
    if !m.value.is_finite() {
        return Ok(RateValue::infinite());
    }
    Ok(RateValue::finite(m.value.max(0.0), vec![m.x], !failed))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SegmentCgfEstimate {
    pub estimate: EstimateWithCI,
    /// Share of the sum carried by the largest 1% of summands.
    pub top_share: f64,
    pub unstable: bool,
}

/// `log mean exp⟨γ, U′⟩` over segments, with a log-scale delta-method error
/// and a heavy-tail diagnostic.
pub fn segment_cgf_mc(gamma: [f64; 2], segments: &[SegmentRecord], seed: u64) -> Result<SegmentCgfEstimate> {
    if segments.is_empty() {
        return Err(NavError::InvalidParameter("no segments".into()));
    }
    let n = segments.len();
    if gamma == [0.0, 0.0] {
        return Ok(SegmentCgfEstimate {
            estimate: EstimateWithCI::new(0.0, 0.0, n, seed),
            top_share: 1.0 / n as f64,
            unstable: false,
        });
    }
    let z: Vec<f64> = segments.iter().map(|s| gamma[0] * s.xp + gamma[1] * s.yp).collect();
    let zmax = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = z.iter().map(|v| (v - zmax).exp()).collect();
    let sum: f64 = w.iter().sum();
    let mean = sum / n as f64;
    let var = w.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n.max(2) - 1) as f64;
    let se = var.sqrt() / (n as f64).sqrt() / mean;
    w.sort_by(|a, b| b.total_cmp(a));
    let top = n.div_ceil(100);
    let top_share = w[..top].iter().sum::<f64>() / sum;
    Ok(SegmentCgfEstimate {
        estimate: EstimateWithCI::new(zmax + mean.ln(), se, n, seed),
        top_share,
        unstable: top_share > 0.5,
    })
}

/// Empirical segment CGF from `n` fresh segments.
pub fn segment_cgf_from_sim(
    gamma: [f64; 2],
    params: ModelParams,
    n: usize,
    seed: u64,
    sampler: Sampler,
) -> Result<SegmentCgfEstimate> {
    let segs = collect_segments(params, n, seed, sampler)?;
    segment_cgf_mc(gamma, &segs, seed)
}

fn perspective_inf<F: Fn(f64, f64) -> f64>(f: &F, p: f64, q: f64) -> (f64, f64) {
    // inf_{s>0} s f(p/s, q/s)
    let m = log_scan_golden(
        |s| {
            let v = s * f(p / s, q / s);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        },
        1e-9,
        1e6,
        61,
        1e-10,
    );
    (m.value, m.x)
}

/// `inf_{b, c∈(0,1)} [inf_β β I′(c/β, b/β) + inf_d d H((1−c)/d, (a−b)/d)]`.
///
/// Coarse 101×99 grid over `b ∈ [a − 5|a| − 5, a + 5|a| + 5]`,
/// `c ∈ (0.01, 0.99)`, then pattern search with `c` clamped to
/// `[1e−12, 1 − 1e−12]`. Witness is `(b, c, β, d)`.
pub fn dependent_ldp_rate<I, H>(a: f64, iprime: I, h: H) -> RateValue
where
    I: Fn(f64, f64) -> f64,
    H: Fn(f64, f64) -> f64,
{
    let objective = |b: f64, c: f64| -> (f64, f64, f64) {
        let (vi, beta) = perspective_inf(&iprime, c, b);
        let (vh, d) = perspective_inf(&h, 1.0 - c, a - b);
        let v = vi + vh;
        (if v.is_nan() { f64::INFINITY } else { v }, beta, d)
    };
    let b_lo = a - 5.0 * a.abs() - 5.0;
    let b_hi = a + 5.0 * a.abs() + 5.0;
    let mut best = (f64::INFINITY, 0.0, 0.5);
    for i in 0..101 {
        let b = b_lo + (b_hi - b_lo) * i as f64 / 100.0;
        for k in 0..99 {
            let c = 0.01 + 0.98 * k as f64 / 98.0;
            let (v, _, _) = objective(b, c);
            if v < best.0 {
                best = (v, b, c);
            }
        }
    }
    if best.0 >= RATE_CAP {
        return RateValue::infinite();
    }
    let db = (b_hi - b_lo) / 100.0;
    let refined = pattern_search(
        |x| objective(x[0], x[1]).0,
        &[best.1, best.2],
        &[db, 0.01],
        &[b_lo, 1e-12],
        &[b_hi, 1.0 - 1e-12],
        1e-10,
        200_000,
    );
    let (v, beta, d) = objective(refined.x[0], refined.x[1]);
    if v >= RATE_CAP {
        return RateValue::infinite();
    }
    RateValue::finite(v.max(0.0), vec![refined.x[0], refined.x[1], beta, d], true)
}

/// Objective of [`dependent_ldp_rate`] at an explicit feasible point.
pub fn dependent_objective<I, H>(a: f64, iprime: I, h: H, b: f64, c: f64, beta: f64, d: f64) -> f64
where
    I: Fn(f64, f64) -> f64,
    H: Fn(f64, f64) -> f64,
{
    beta * iprime(c / beta, b / beta) + d * h((1.0 - c) / d, (a - b) / d)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NaiveLevel {
    pub t: f64,
    pub hits: usize,
    pub n_paths: usize,
    pub probability: f64,
    /// `−ln(p)/t`; `None` marks a level with no hits.
    pub estimate: Option<f64>,
    /// `−ln` of the Wilson bounds over `t` (low estimate from the high
    /// probability bound).
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NaiveHEstimate {
    pub a: f64,
    pub b: f64,
    pub levels: Vec<NaiveLevel>,
    /// Slope of `−ln p_t` against `t` over levels with hits.
    pub slope: Option<f64>,
    /// Always true: plain Monte Carlo without variance reduction.
    pub naive: bool,
}

impl NaiveHEstimate {
    /// Survival curve of the event probabilities, reusing the tail layout.
    pub fn as_tail(&self) -> TailCurve {
        TailCurve {
            levels: self.levels.iter().map(|l| l.t as usize).collect(),
            survival: self.levels.iter().map(|l| l.probability).collect(),
            ci_low: self.levels.iter().map(|l| (-l.ci_high * l.t).exp()).collect(),
            ci_high: self.levels.iter().map(|l| (-l.ci_low * l.t).exp()).collect(),
            hits: self.levels.iter().map(|l| l.hits).collect(),
            fitted_rate: self.slope,
            fit_r2: None,
            n_samples: self.levels.first().map_or(0, |l| l.n_paths),
            censored: 0,
        }
    }
}

/// Plain Monte Carlo for
/// `−t⁻¹ log P(Σ_{i≤⌊t⌋} X_i ≥ a t, Σ_{i≤⌊t⌋} Y_i ≥ b t, τ_1 > t)`.
pub fn naive_h_estimate(
    a: f64,
    b: f64,
    params: ModelParams,
    t_levels: &[f64],
    n_paths: usize,
    seed: u64,
) -> Result<NaiveHEstimate> {
    use rayon::prelude::*;
    if !params.is_wide() {
        return Err(NavError::InvalidParameter("naive H estimate needs θ in (π/4, π/2)".into()));
    }
    if t_levels.iter().any(|&t| !(t >= 1.0)) {
        return Err(NavError::InvalidParameter("t levels must be ≥ 1".into()));
    }
    let max_steps = t_levels.iter().map(|t| t.floor() as usize).max().unwrap_or(0);
    let hits_per_path: Vec<Vec<bool>> = (0..n_paths as u64)
        .into_par_iter()
        .map(|id| -> Result<Vec<bool>> {
            let mut nav = crate::nav::Navigator::new(params, seed, id, Sampler::Points);
            let mut sums = Vec::with_capacity(max_steps);
            let mut first_renewal = usize::MAX;
            for n in 1..=max_steps {
                let s = nav.step()?;
                if s.history_empty_after && first_renewal == usize::MAX {
                    first_renewal = n;
                }
                sums.push(nav.position());
                if first_renewal != usize::MAX {
                    break;
                }
            }
            Ok(t_levels
                .iter()
                .map(|&t| {
                    let k = t.floor() as usize;
                    first_renewal > k && sums.len() >= k && {
                        let v = sums[k - 1];
                        v.x >= a * t && v.y >= b * t
                    }
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let levels: Vec<NaiveLevel> = t_levels
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let hits = hits_per_path.iter().filter(|h| h[i]).count();
            let p = hits as f64 / n_paths as f64;
            let (lo, hi) = wilson_interval(hits, n_paths, Z99);
            NaiveLevel {
                t,
                hits,
                n_paths,
                probability: p,
                estimate: (hits > 0).then(|| -p.ln() / t),
                ci_low: -hi.ln() / t,
                ci_high: if lo > 0.0 { -lo.ln() / t } else { f64::INFINITY },
            }
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = levels
        .iter()
        .filter(|l| l.hits > 0)
        .map(|l| (l.t, -l.probability.ln()))
        .unzip();
    let slope = crate::stats::linear_fit(&xs, &ys).map(|f| f.slope);
    Ok(NaiveHEstimate {
        a,
        b,
        levels,
        slope,
        naive: true,
    })
}

/// Draw `n` steps from an empty history (used for direct CGF checks).
pub fn empty_history_steps(params: &ModelParams, n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = RandomStream::new(seed, 0);
    (0..n)
        .map(|_| {
            let r = (rng.exp1() / (params.lambda * params.theta)).sqrt();
            let phi = params.theta * (2.0 * rng.uniform() - 1.0);
            [r * phi.cos(), r * phi.sin()]
        })
        .collect()
}

/// Minimize a one-dimensional convex function on a bracket (re-exported for
/// callers building their own perspective infima).
pub fn minimize_1d<F: FnMut(f64) -> f64>(f: F, lo: f64, hi: f64) -> (f64, f64) {
    let m = golden_section(f, lo, hi, 1e-12, 500);
    (m.x, m.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quarter() -> ModelParams {
        ModelParams::new(1.0, FRAC_PI_4).unwrap()
    }

    #[test]
    fn rho_examples() {
        let r1 = rho_closed_form(&quarter()).unwrap();
        assert!((r1 - 1.945_914_299_723).abs() < 1e-11, "{r1}");
        let r4 = rho_closed_form(&ModelParams::new(4.0, FRAC_PI_4).unwrap()).unwrap();
        assert!((r4 - 2.0 * r1).abs() < 1e-12);
        let r = rho_closed_form(&ModelParams::new(1.0, 0.1).unwrap()).unwrap();
        assert!((r - 42.052).abs() < 1e-3, "{r}");
        assert!(rho_closed_form(&ModelParams::new(1.0, 1.0).unwrap()).is_err());
        assert_eq!(mdp_rate(0.0, 1.9459), 0.0);
        assert_eq!(mdp_rate(1.0, 1.9459), 1.9459);
        assert_eq!(mdp_rate(-1.0, 2.0), mdp_rate(1.0, 2.0));
    }

    #[test]
    fn radial_moments_match_high_precision_values() {
        // 30-digit adaptive quadrature of ∫ s^k e^{−s²+hs} ds
        let cases = [
            (-60.0, -8.1903525621415557, 0.033277992651999967, 0.0016602204400009816),
            (-10.0, -4.6614393825841471, 0.18941211878436071, 0.05293940607819646),
            (-4.5, -3.238834667429976, 0.36155375560331186, 0.18650404989254831),
            (-4.0, -3.0507598999126452, 0.39142450862159, 0.21715098275682),
            (0.0, -0.69314718055994531, 0.88622692545275801, 1.0),
            (3.0, 3.2307002162733772, 1.8267450317201122, 3.7401175475801683),
        ];
        for (h, l1, r2, r3) in cases {
            let (a, b, c) = radial_moments(h);
            assert!((a - l1).abs() < 1e-12 * l1.abs().max(1.0), "h={h} ln I1 {a} vs {l1}");
            assert!((b / r2 - 1.0).abs() < 1e-11, "h={h} {b} vs {r2}");
            assert!((c / r3 - 1.0).abs() < 1e-11, "h={h} {c} vs {r3}");
        }
        // both branches agree where they meet
        let lo = radial_moments(-4.0 - 1e-12);
        let hi = radial_moments(-4.0);
        assert!((lo.0 - hi.0).abs() < 1e-11 && (lo.1 / hi.1 - 1.0).abs() < 1e-11);
    }

    #[test]
    fn cgf_examples() {
        let p = quarter();
        assert_eq!(cgf_step([0.0, 0.0], &p), 0.0);
        let a = cgf_step([0.7, 0.4], &p);
        let b = cgf_step([0.7, -0.4], &p);
        assert!((a - b).abs() < 1e-14);
        let g = StepCgf::new(p).gradient([0.0, 0.0]);
        assert!((g[0] - 0.90032).abs() < 1e-5 && g[1].abs() < 1e-15, "{g:?}");
        let fd = (cgf_step([1e-5, 0.0], &p) - cgf_step([-1e-5, 0.0], &p)) / 2e-5;
        assert!((fd - p.mean_step_x()).abs() < 1e-6);
    }

    #[test]
    fn legendre_examples() {
        let p = quarter();
        let cgf = StepCgf::new(p);
        let at_mean = legendre([p.mean_step_x(), 0.0], &cgf);
        assert!(at_mean.converged && at_mean.value < 1e-6);
        let out = legendre([1.0, 1.5], &cgf);
        assert!(out.infinite && out.witness.is_empty());
        // independent grid oracle (step 1e−4 refinement of a step-0.01 grid)
        let v = legendre([1.2, 0.0], &cgf);
        assert!(v.converged);
        assert!((v.value - 0.17101672).abs() < 1e-3, "{v:?}");
        assert!((v.value - 0.17101672).abs() < 1e-6, "{v:?}");
    }

    #[test]
    fn ldp_examples() {
        let p = quarter();
        let r0 = ldp_rate(0.0, &p).unwrap();
        assert!(r0.value < 1e-9, "{r0:?}");
        assert!((r0.witness[0] - 1.0 / p.mean_step_x()).abs() < 1e-4, "{r0:?}");
        for x in [0.2, 0.5, 1.0] {
            let a = ldp_rate(x, &p).unwrap();
            let b = ldp_rate(-x, &p).unwrap();
            assert!(a.infinite || (a.value - b.value).abs() < 1e-6);
            assert_eq!(a.infinite, b.infinite);
            if x < 1.0 {
                let c = ldp_rate(x, &ModelParams::new(4.0, FRAC_PI_4).unwrap()).unwrap();
                assert!((c.value - 2.0 * a.value).abs() < 1e-6, "{} vs {}", c.value, a.value);
            }
        }
        assert!(ldp_rate(1.5, &p).unwrap().infinite);
        assert!(ldp_rate(0.1, &ModelParams::new(1.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn dependent_fixture() {
        let ip = |u: f64, v: f64| (u - 1.0).powi(2) + v * v;
        let h = |x: f64, y: f64| 1.0 + x * x + y * y;
        let r = dependent_ldp_rate(1.0, ip, h);
        let target = 2.0 * 2f64.sqrt() - 2.0;
        assert!((r.value - target).abs() < 1e-3, "{r:?}");
        assert_eq!(r.witness.len(), 4);
    }

    #[test]
    fn segment_cgf_zero_and_shares() {
        let segs: Vec<SegmentRecord> = (0..1000)
            .map(|i| SegmentRecord { xp: 1.0 + (i % 7) as f64 * 0.1, yp: ((i % 5) as f64 - 2.0) * 0.3, gap: 1 })
            .collect();
        let z = segment_cgf_mc([0.0, 0.0], &segs, 1).unwrap();
        assert_eq!(z.estimate.value, 0.0);
        assert!(!segment_cgf_mc([0.1, 0.2], &segs, 1).unwrap().unstable);
        let mut heavy = segs.clone();
        heavy[0].xp = 200.0;
        assert!(segment_cgf_mc([0.1, 0.0], &heavy, 1).unwrap().unstable);
    }
}
