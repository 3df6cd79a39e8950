//! Planar geometry for cones, balls and history sets.
//!
//! Conventions: cones `C_θ(a) = a + {(r, φ): |φ| ≤ θ}` are closed (the apex
//! is included), balls `B(c, ρ)` are open. Every cone in this module has a
//! half-angle in `(0, π/2)`, so a cone is the intersection of the two
//! half-planes below its upper boundary line and above its lower one.
//!
//! A history set is stored as a list of [`HistoryTerm`]s, each the convex
//! region `C_θ(apex) ∩ B(center, radius)`. Free radii along a ray and free
//! angles on a circle are computed per term (ray ∩ convex set is a single
//! interval, circle ∩ term is cut out by three arc constraints) and then
//! subtracted from the full range.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{NavError, Result};
use crate::quad::gauss_legendre_16;

/// Relative slack used when deciding that a term is empty: a cone–ball pair
/// is empty when `dist ≥ radius · (1 − EMPTY_SLACK/2) − 8 ε · scale`, where
/// `scale` is the largest coordinate magnitude involved. The absolute part
/// absorbs the rounding of `|center − apex|` far from the origin.
pub const EMPTY_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn from_polar(r: f64, phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Self { x: r * c, y: r * s }
    }

    #[inline]
    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    #[inline]
    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Polar angle in `[-π, π]`.
    #[inline]
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    #[inline]
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    #[inline]
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    #[inline]
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

/// Polar form `(r, φ)` of a progress vector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarStep {
    pub r: f64,
    pub phi: f64,
}

impl PolarStep {
    pub fn to_point(self) -> Point {
        Point::from_polar(self.r, self.phi)
    }
}

/// Wrap an angle into `[-π, π)`.
#[inline]
pub fn wrap_angle(a: f64) -> f64 {
    let mut x = (a + PI).rem_euclid(2.0 * PI) - PI;
    if x >= PI {
        x -= 2.0 * PI;
    }
    x
}

/// True iff `p` lies in the closed cone `C_θ(apex)`.
pub fn cone_contains(apex: Point, p: Point, theta: f64) -> bool {
    let d = p - apex;
    if d.x == 0.0 && d.y == 0.0 {
        return true;
    }
    d.angle().abs() <= theta
}

/// Upper and lower boundary offsets of `C_θ(a)`: the cone is
/// `{p : n_up·p ≤ k_up, n_lo·p ≤ k_lo}` with unit normals
/// `n_up = (−sin θ, cos θ)`, `n_lo = (−sin θ, −cos θ)`.
#[inline]
fn cone_offsets(a: Point, sin_t: f64, cos_t: f64) -> (f64, f64) {
    (-sin_t * a.x + cos_t * a.y, -sin_t * a.x - cos_t * a.y)
}

/// Apex `w` with `C_θ(a1) ∩ C_θ(a2) = C_θ(w)`.
///
/// Translates of one cone have parallel boundary lines, so the binding upper
/// line is the lower of the two and the binding lower line the higher one.
/// The result is never empty for `θ > 0`; `None` is reserved for inputs that
/// are not finite.
pub fn cones_intersection_apex(a1: Point, a2: Point, theta: f64) -> Option<Point> {
    if !a1.is_finite() || !a2.is_finite() {
        return None;
    }
    if cone_contains(a1, a2, theta) {
        return Some(a2);
    }
    if cone_contains(a2, a1, theta) {
        return Some(a1);
    }
    let (s, c) = theta.sin_cos();
    let (u1, l1) = cone_offsets(a1, s, c);
    let (u2, l2) = cone_offsets(a2, s, c);
    let ku = u1.min(u2);
    let kl = l1.min(l2);
    // -s x + c y = ku, -s x - c y = kl
    let x = -(ku + kl) / (2.0 * s);
    let y = (ku - kl) / (2.0 * c);
    Some(Point::new(x, y))
}

/// Euclidean distance from `q` to the closed cone with the given apex and
/// half-angle (`0 < half_angle < π/2`).
pub fn distance_to_cone(q: Point, apex: Point, half_angle: f64) -> f64 {
    let d = q - apex;
    let r = d.norm();
    if r == 0.0 {
        return 0.0;
    }
    let a = d.angle().abs();
    if a <= half_angle {
        0.0
    } else if a - half_angle <= FRAC_PI_2 {
        r * (a - half_angle).sin()
    } else {
        r
    }
}

/// True iff `C_α(apex) ∩ B(center, radius) = ∅`, with the slack of
/// [`EMPTY_SLACK`].
pub fn cone_ball_is_empty(apex: Point, half_angle: f64, center: Point, radius: f64) -> bool {
    let d = distance_to_cone(center, apex, half_angle);
    let scale = apex.x.abs().max(apex.y.abs()).max(center.x.abs()).max(center.y.abs());
    d >= radius * (1.0 - 0.5 * EMPTY_SLACK) - 8.0 * f64::EPSILON * scale
}

/// One piece `C_θ(cone_apex) ∩ B(ball_center, ball_radius)` of a history set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryTerm {
    pub cone_apex: Point,
    pub ball_center: Point,
    pub ball_radius: f64,
}

/// True iff the term's region is empty.
pub fn term_is_empty(term: &HistoryTerm, theta: f64) -> bool {
    cone_ball_is_empty(term.cone_apex, theta, term.ball_center, term.ball_radius)
}

impl HistoryTerm {
    pub fn new(cone_apex: Point, ball_center: Point, ball_radius: f64) -> Self {
        Self {
            cone_apex,
            ball_center,
            ball_radius,
        }
    }

    #[inline]
    pub fn contains(&self, p: Point, theta: f64) -> bool {
        (p - self.ball_center).norm2() < self.ball_radius * self.ball_radius
            && cone_contains(self.cone_apex, p, theta)
    }

    pub fn is_empty(&self, theta: f64) -> bool {
        term_is_empty(self, theta)
    }

    /// Parameter range `[lo, hi]` (with `lo ≥ 0`) of the ray `o + t·e`
    /// that lies in the term, or `None`.
    fn ray_interval(&self, o: Point, e: Point, sin_t: f64, cos_t: f64) -> Option<(f64, f64)> {
        let mut lo = 0.0_f64;
        let mut hi = f64::INFINITY;

        // ball: t² + 2 t e·(o − c) + |o − c|² − ρ² < 0
        let oc = o - self.ball_center;
        let b = e.dot(oc);
        let cc = oc.norm2() - self.ball_radius * self.ball_radius;
        let disc = b * b - cc;
        if disc <= 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        let (r1, r2) = if b > 0.0 {
            let q = -b - sq;
            (q, cc / q)
        } else {
            let q = -b + sq;
            (cc / q, q)
        };
        let (r1, r2) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        lo = lo.max(r1);
        hi = hi.min(r2);
        if lo >= hi {
            return None;
        }

        // half-planes n·(p − w) ≤ 0
        let ow = o - self.cone_apex;
        for n in [Point::new(-sin_t, cos_t), Point::new(-sin_t, -cos_t)] {
            let a = n.dot(ow);
            let bn = n.dot(e);
            if bn > 0.0 {
                hi = hi.min(-a / bn);
            } else if bn < 0.0 {
                lo = lo.max(-a / bn);
            } else if a > 0.0 {
                return None;
            }
            if lo >= hi {
                return None;
            }
        }
        Some((lo, hi))
    }

    /// Angles `φ ∈ [−θ, θ]` with `o + (r, φ)` inside the term.
    fn arc_set(&self, o: Point, r: f64, theta: f64, sin_t: f64, cos_t: f64) -> Vec<(f64, f64)> {
        let window = (-theta, theta);
        // ball constraint
        let co = self.ball_center - o;
        let dist = co.norm();
        let ball: Vec<(f64, f64)> = if dist == 0.0 {
            if r < self.ball_radius {
                vec![window]
            } else {
                vec![]
            }
        } else {
            let q = (r * r + dist * dist - self.ball_radius * self.ball_radius) / (2.0 * r * dist);
            if q < -1.0 {
                vec![window]
            } else if q >= 1.0 {
                vec![]
            } else {
                arc_in_window(co.angle(), q.acos(), window)
            }
        };
        if ball.is_empty() {
            return ball;
        }
        let mut acc = ball;
        let ow = o - self.cone_apex;
        for n in [Point::new(-sin_t, cos_t), Point::new(-sin_t, -cos_t)] {
            let s = -n.dot(ow) / r;
            let allowed = if s >= 1.0 {
                vec![window]
            } else if s < -1.0 {
                vec![]
            } else {
                arc_in_window(n.angle() + PI, PI - s.acos(), window)
            };
            acc = intersect_intervals(&acc, &allowed);
            if acc.is_empty() {
                break;
            }
        }
        acc
    }

    /// Supremum of the x-coordinate over the term region, `None` if empty.
    pub fn max_x(&self, theta: f64) -> Option<f64> {
        let c = self.ball_center;
        let rho = self.ball_radius;
        let rightmost = Point::new(c.x + rho, c.y);
        if cone_contains(self.cone_apex, rightmost, theta) {
            return Some(rightmost.x);
        }
        let (s, co) = theta.sin_cos();
        let mut best: Option<f64> = None;
        let wc = self.cone_apex - c;
        for d in [Point::new(co, s), Point::new(co, -s)] {
            let b = d.dot(wc);
            let cc = wc.norm2() - rho * rho;
            let disc = b * b - cc;
            if disc <= 0.0 {
                continue;
            }
            let t = -b + disc.sqrt();
            if t > 0.0 {
                let x = self.cone_apex.x + t * d.x;
                best = Some(best.map_or(x, |v: f64| v.max(x)));
            }
        }
        if wc.norm2() < rho * rho {
            let x = self.cone_apex.x;
            best = Some(best.map_or(x, |v: f64| v.max(x)));
        }
        best
    }
}

/// History set `H_n` as a pruned union of terms, anchored at the current
/// waypoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistorySet {
    terms: Vec<HistoryTerm>,
    reference_vertex: Point,
}

impl HistorySet {
    /// `H_0 = ∅` anchored at `vertex`.
    pub fn empty(vertex: Point) -> Self {
        Self {
            terms: Vec::new(),
            reference_vertex: vertex,
        }
    }

    /// Build from raw terms; empty terms are dropped.
    pub fn from_terms(vertex: Point, terms: Vec<HistoryTerm>, theta: f64) -> Self {
        let terms = terms.into_iter().filter(|t| !t.is_empty(theta)).collect();
        Self {
            terms,
            reference_vertex: vertex,
        }
    }

    pub fn terms(&self) -> &[HistoryTerm] {
        &self.terms
    }

    pub fn reference_vertex(&self) -> Point {
        self.reference_vertex
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn contains(&self, p: Point, theta: f64) -> bool {
        self.terms.iter().any(|t| t.contains(p, theta))
    }

    /// History after stepping from the reference vertex to `new_vertex`
    /// with step radius `step_radius`:
    /// `H' = C_θ(new_vertex) ∩ (H ∪ B(reference_vertex, step_radius))`.
    pub fn advanced(&self, new_vertex: Point, step_radius: f64, theta: f64) -> HistorySet {
        let mut terms = Vec::with_capacity(self.terms.len() + 1);
        for t in &self.terms {
            let apex = cones_intersection_apex(t.cone_apex, new_vertex, theta)
                .unwrap_or(new_vertex);
            let nt = HistoryTerm::new(apex, t.ball_center, t.ball_radius);
            if !nt.is_empty(theta) {
                terms.push(nt);
            }
        }
        let fresh = HistoryTerm::new(new_vertex, self.reference_vertex, step_radius);
        if !fresh.is_empty(theta) {
            terms.push(fresh);
        }
        HistorySet {
            terms,
            reference_vertex: new_vertex,
        }
    }

    /// Lower bound on the distance from the reference vertex to the region.
    pub fn near_radius(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| ((t.ball_center - self.reference_vertex).norm() - t.ball_radius).max(0.0))
            .fold(f64::INFINITY, f64::min)
    }

    /// Upper bound on the distance from the reference vertex to the region.
    pub fn far_radius(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| (t.ball_center - self.reference_vertex).norm() + t.ball_radius)
            .fold(0.0, f64::max)
    }
}

/// Disjoint sorted closed subintervals of `[−θ, θ]`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct AngularSet {
    pub intervals: Vec<(f64, f64)>,
}

impl AngularSet {
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn contains(&self, phi: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= phi && phi <= b)
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// The point at arc-length fraction `u ∈ [0, 1)` of the set.
    pub fn quantile(&self, u: f64) -> Option<f64> {
        let total = self.measure();
        if total <= 0.0 {
            return None;
        }
        let mut target = u * total;
        for &(a, b) in &self.intervals {
            let len = b - a;
            if target <= len {
                return Some(a + target);
            }
            target -= len;
        }
        self.intervals.last().map(|&(_, b)| b)
    }
}

/// Disjoint sorted subintervals of `[0, r_max]`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct RadialSet {
    pub intervals: Vec<(f64, f64)>,
}

impl RadialSet {
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn contains(&self, r: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= r && r <= b)
    }
}

fn arc_in_window(center: f64, half_width: f64, window: (f64, f64)) -> Vec<(f64, f64)> {
    if half_width >= PI {
        return vec![window];
    }
    let c = wrap_angle(center);
    let mut out = Vec::with_capacity(2);
    for k in [-1.0, 0.0, 1.0] {
        let a = snap((c - half_width + 2.0 * PI * k).max(window.0), window);
        let b = snap((c + half_width + 2.0 * PI * k).min(window.1), window);
        if a < b {
            out.push((a, b));
        }
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    merge_intervals(out)
}

/// Rounding in `acos`/`atan2` can leave arc ends a few ulps off the window.
#[inline]
fn snap(a: f64, window: (f64, f64)) -> f64 {
    if (a - window.0).abs() < 1e-12 {
        window.0
    } else if (a - window.1).abs() < 1e-12 {
        window.1
    } else {
        a
    }
}

fn merge_intervals(mut v: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    if v.len() <= 1 {
        return v;
    }
    v.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(v.len());
    for (a, b) in v {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

fn intersect_intervals(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if lo < hi {
            out.push((lo, hi));
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// `[lo, hi]` minus a union of (unsorted, possibly overlapping) intervals.
fn subtract_from_range(lo: f64, hi: f64, blocked: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let blocked = merge_intervals(blocked);
    let mut out = Vec::new();
    let mut cursor = lo;
    for (a, b) in blocked {
        if b <= cursor {
            continue;
        }
        if a >= hi {
            break;
        }
        if a > cursor {
            out.push((cursor, a.min(hi)));
        }
        cursor = cursor.max(b);
        if cursor >= hi {
            break;
        }
    }
    if cursor < hi {
        out.push((cursor, hi));
    }
    out
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(NavError::InvalidParameter(format!(
            "cone half-angle must lie in (0, π/2), got {theta}"
        )));
    }
    Ok(())
}

/// Free radii `{r ∈ [0, r_max] : origin + (r, φ) ∉ H}` along one ray.
pub fn free_radial_intervals(
    origin: Point,
    phi: f64,
    r_max: f64,
    history: &HistorySet,
    theta: f64,
) -> Result<RadialSet> {
    check_theta(theta)?;
    if phi.abs() > theta {
        return Err(NavError::InvalidParameter(format!(
            "ray angle {phi} outside [−θ, θ] with θ = {theta}"
        )));
    }
    if !(r_max > 0.0) {
        return Err(NavError::InvalidParameter(format!("r_max must be > 0, got {r_max}")));
    }
    let (s, c) = theta.sin_cos();
    let e = Point::from_polar(1.0, phi);
    let blocked: Vec<(f64, f64)> = history
        .terms
        .iter()
        .filter_map(|t| t.ray_interval(origin, e, s, c))
        .filter(|&(a, _)| a < r_max)
        .map(|(a, b)| (a, b.min(r_max)))
        .collect();
    Ok(RadialSet {
        intervals: subtract_from_range(0.0, r_max, blocked),
    })
}

/// Free angles `{φ ∈ [−θ, θ] : origin + (r, φ) ∉ H}` on one circle.
pub fn free_angular_set(origin: Point, r: f64, history: &HistorySet, theta: f64) -> Result<AngularSet> {
    check_theta(theta)?;
    if !(r > 0.0) {
        return Err(NavError::InvalidParameter(format!("radius must be > 0, got {r}")));
    }
    Ok(free_angles_unchecked(origin, r, history, theta))
}

pub(crate) fn free_angles_unchecked(origin: Point, r: f64, history: &HistorySet, theta: f64) -> AngularSet {
    let (s, c) = theta.sin_cos();
    let mut blocked = Vec::new();
    for t in &history.terms {
        blocked.extend(t.arc_set(origin, r, theta, s, c));
    }
    AngularSet {
        intervals: subtract_from_range(-theta, theta, blocked),
    }
}

/// Blocked part of `∫_0^r r' dr'` along direction `phi`.
#[inline]
fn blocked_moment(origin: Point, phi: f64, r: f64, history: &HistorySet, s: f64, c: f64) -> f64 {
    let e = Point::from_polar(1.0, phi);
    let mut iv: [(f64, f64); 16] = [(0.0, 0.0); 16];
    let mut spill = Vec::new();
    let mut n = 0;
    for t in &history.terms {
        if let Some((a, b)) = t.ray_interval(origin, e, s, c) {
            if a < r {
                let seg = (a, b.min(r));
                if n < iv.len() {
                    iv[n] = seg;
                    n += 1;
                } else {
                    spill.push(seg);
                }
            }
        }
    }
    if n == 0 {
        return 0.0;
    }
    if n == 1 && spill.is_empty() {
        let (a, b) = iv[0];
        return 0.5 * (b * b - a * a);
    }
    let mut all: Vec<(f64, f64)> = iv[..n].to_vec();
    all.extend(spill);
    merge_intervals(all)
        .into_iter()
        .map(|(a, b)| 0.5 * (b * b - a * a))
        .sum()
}

/// Critical angles of the free-length integrand on `[−θ, θ]`: returns
/// `(breakpoints, tangency_angles)`. Between consecutive breakpoints the
/// integrand is smooth; tangency angles (inside the window or not) are
/// square-root branch points of the ray–circle roots.
fn critical_angles(origin: Point, r: f64, history: &HistorySet, theta: f64) -> (Vec<f64>, Vec<f64>) {
    let (s, c) = theta.sin_cos();
    let mut angles = vec![-theta, theta];
    let mut tangents = Vec::new();
    let reach = r * (1.0 + 1e-9);

    let mut lines: Vec<(Point, Point)> = Vec::with_capacity(2 * history.terms.len());
    let mut circles: Vec<(Point, f64)> = Vec::with_capacity(history.terms.len() + 1);
    for t in &history.terms {
        // boundary rays through the origin only meet circles on the window edges
        if t.cone_apex != origin && !lines.iter().any(|l| l.0 == t.cone_apex) {
            lines.push((t.cone_apex, Point::new(c, s)));
            lines.push((t.cone_apex, Point::new(c, -s)));
        }
        circles.push((t.ball_center, t.ball_radius));
    }
    circles.push((origin, r));

    let push_point = |p: Point, angles: &mut Vec<f64>| {
        let d = p - origin;
        let dn = d.norm();
        if dn > 0.0 && dn <= reach {
            let a = d.angle();
            if a > -theta && a < theta {
                angles.push(a);
            }
        }
    };

    for t in &history.terms {
        push_point(t.cone_apex, &mut angles);
        let co = t.ball_center - origin;
        let dist = co.norm();
        let rho = t.ball_radius;
        if dist > 0.0 && dist >= rho * (1.0 - 1e-9) {
            let beta = co.angle();
            let half = (rho / dist).min(1.0).asin();
            let tangent_len = (dist * dist - rho * rho).max(0.0).sqrt();
            for a in [beta - half, beta + half] {
                let a = wrap_angle(a);
                if tangent_len <= reach && a > -theta && a < theta {
                    angles.push(a);
                }
                // branch points of the ray–circle roots, also just outside the window
                if dist > rho * (1.0 + 1e-9) && a.abs() < FRAC_PI_2 + theta {
                    tangents.push(a);
                }
            }
        }
    }
    for i in 0..lines.len() {
        for j in (i + 1)..lines.len() {
            if let Some(p) = line_line(lines[i], lines[j]) {
                push_point(p, &mut angles);
            }
        }
        for &(cc, rr) in &circles {
            for p in line_circle(lines[i], cc, rr) {
                push_point(p, &mut angles);
            }
        }
    }
    for i in 0..circles.len() {
        for j in (i + 1)..circles.len() {
            for p in circle_circle(circles[i], circles[j]) {
                push_point(p, &mut angles);
            }
        }
    }
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    (angles, tangents)
}

fn line_line(l1: (Point, Point), l2: (Point, Point)) -> Option<Point> {
    let den = l1.1.cross(l2.1);
    if den.abs() < 1e-14 {
        return None;
    }
    let t = (l2.0 - l1.0).cross(l2.1) / den;
    Some(l1.0 + l1.1 * t)
}

fn line_circle(l: (Point, Point), c: Point, rho: f64) -> Vec<Point> {
    let pc = l.0 - c;
    let b = l.1.dot(pc);
    let cc = pc.norm2() - rho * rho;
    let disc = b * b - cc;
    if disc < 0.0 {
        return vec![];
    }
    let sq = disc.sqrt();
    vec![l.0 + l.1 * (-b - sq), l.0 + l.1 * (-b + sq)]
}

fn circle_circle(a: (Point, f64), b: (Point, f64)) -> Vec<Point> {
    let d = b.0 - a.0;
    let dist = d.norm();
    if dist == 0.0 || dist > a.1 + b.1 || dist < (a.1 - b.1).abs() {
        return vec![];
    }
    let along = (dist * dist + a.1 * a.1 - b.1 * b.1) / (2.0 * dist);
    let h = (a.1 * a.1 - along * along).max(0.0).sqrt();
    let u = d * (1.0 / dist);
    let mid = a.0 + u * along;
    let perp = Point::new(-u.y, u.x);
    vec![mid + perp * h, mid - perp * h]
}

/// Area of `(C_θ(origin) ∩ B(origin, r)) \ H`.
///
/// Integrates the exact per-ray free moment `∫ 1{free} r' dr'` over the
/// angle with Gauss–Legendre (16 nodes) on every piece between critical
/// angles. Pieces that end at, or lie close to, a tangency angle `φ_t` are
/// integrated after the substitution `φ = φ_t ± u²`, which removes the
/// square-root behaviour.
pub fn explored_area(origin: Point, r: f64, history: &HistorySet, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    if !(r >= 0.0) {
        return Err(NavError::InvalidParameter(format!("radius must be ≥ 0, got {r}")));
    }
    Ok(explored_area_unchecked(origin, r, history, theta))
}

pub(crate) fn explored_area_unchecked(origin: Point, r: f64, history: &HistorySet, theta: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let full = theta * r * r;
    if history.is_empty() || r <= history.near_radius() {
        return full;
    }
    let (s, c) = theta.sin_cos();
    let (angles, tangents) = critical_angles(origin, r, history, theta);
    let rule = gauss_legendre_16();
    let f = |phi: f64| blocked_moment(origin, phi, r, history, s, c);
    // ∫_a^b f with a branch point at s ≤ a (or s ≥ b) mapped away by φ = s ± u²
    let from_left = |sing: f64, a: f64, b: f64| {
        rule.integrate((a - sing).max(0.0).sqrt(), (b - sing).sqrt(), |u| f(sing + u * u) * 2.0 * u)
    };
    let from_right = |sing: f64, a: f64, b: f64| {
        rule.integrate((sing - b).max(0.0).sqrt(), (sing - a).sqrt(), |u| f(sing - u * u) * 2.0 * u)
    };
    let mut blocked = 0.0;
    for w in angles.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = b - a;
        if len <= 0.0 {
            continue;
        }
        let near = 2.0 * len;
        let left = tangents
            .iter()
            .copied()
            .filter(|&t| t <= a + 1e-13 && a - t < near)
            .fold(None, |m: Option<f64>, t| Some(m.map_or(t, |m| m.max(t))));
        let right = tangents
            .iter()
            .copied()
            .filter(|&t| t >= b - 1e-13 && t - b < near)
            .fold(None, |m: Option<f64>, t| Some(m.map_or(t, |m| m.min(t))));
        blocked += match (left, right) {
            (None, None) => rule.integrate(a, b, f),
            (Some(sl), None) => from_left(sl.min(a), a, b),
            (None, Some(sr)) => from_right(sr.max(b), a, b),
            (Some(sl), Some(sr)) => {
                let m = 0.5 * (a + b);
                from_left(sl.min(a), a, m) + from_right(sr.max(b), m, b)
            }
        };
    }
    (full - blocked).max(0.0)
}

/// Width `L = sup{x − V.x : (x, y) ∈ H}` of a history set anchored at `V`.
pub fn history_width(history: &HistorySet, theta: f64) -> f64 {
    history
        .terms
        .iter()
        .filter_map(|t| t.max_x(theta))
        .map(|x| x - history.reference_vertex.x)
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn single(apex: Point, center: Point, radius: f64) -> HistorySet {
        HistorySet {
            terms: vec![HistoryTerm::new(apex, center, radius)],
            reference_vertex: apex,
        }
    }

    #[test]
    fn cone_membership_examples() {
        let o = Point::ORIGIN;
        assert!(cone_contains(o, Point::new(1.0, 0.0), FRAC_PI_4));
        assert!(!cone_contains(o, Point::new(-1.0, 0.0), FRAC_PI_4));
        assert!(cone_contains(o, Point::new(1.0, 1.0), FRAC_PI_4));
        assert!(cone_contains(o, o, FRAC_PI_4));
    }

    #[test]
    fn cone_intersection_examples() {
        let o = Point::ORIGIN;
        let w = cones_intersection_apex(o, Point::new(1.0, 0.0), FRAC_PI_4).unwrap();
        assert_eq!(w, Point::new(1.0, 0.0));
        let w = cones_intersection_apex(o, Point::new(0.0, 2.0), FRAC_PI_4).unwrap();
        assert!((w.x - 1.0).abs() < 1e-12 && (w.y - 1.0).abs() < 1e-12, "{w:?}");
        let w = cones_intersection_apex(o, o, 0.3).unwrap();
        assert_eq!(w, o);
    }

    #[test]
    fn term_emptiness_examples() {
        let t = HistoryTerm::new(Point::new(10.0, 0.0), Point::ORIGIN, 1.0);
        assert!(term_is_empty(&t, FRAC_PI_4));
        let t = HistoryTerm::new(Point::ORIGIN, Point::new(1.0, 0.0), 0.5);
        assert!(!term_is_empty(&t, FRAC_PI_4));
        let edge = 2.0 * FRAC_PI_4.sin();
        let t = HistoryTerm::new(Point::ORIGIN, Point::new(0.0, 2.0), edge + 0.01);
        assert!(!term_is_empty(&t, FRAC_PI_4));
        let t = HistoryTerm::new(Point::ORIGIN, Point::new(0.0, 2.0), edge - 0.01);
        assert!(term_is_empty(&t, FRAC_PI_4));
    }

    #[test]
    fn free_radial_examples() {
        let o = Point::ORIGIN;
        let th = FRAC_PI_4;
        let empty = HistorySet::empty(o);
        let r = free_radial_intervals(o, 0.3, 3.0, &empty, th).unwrap();
        assert_eq!(r.intervals, vec![(0.0, 3.0)]);

        let h = single(o, o, 1.0);
        let r = free_radial_intervals(o, 0.0, 3.0, &h, th).unwrap();
        assert_eq!(r.intervals.len(), 1);
        assert!((r.intervals[0].0 - 1.0).abs() < 1e-14 && r.intervals[0].1 == 3.0);

        // a term far behind blocks nothing
        let h = HistorySet::from_terms(o, vec![HistoryTerm::new(o, Point::new(-5.0, 0.0), 1.0)], th);
        assert!(h.is_empty());
        let r = free_radial_intervals(o, 0.1, 2.0, &h, th).unwrap();
        assert_eq!(r.intervals, vec![(0.0, 2.0)]);

        assert!(free_radial_intervals(o, 0.9, 2.0, &empty, th).is_err());
    }

    #[test]
    fn free_angular_examples() {
        let o = Point::ORIGIN;
        let th = FRAC_PI_4;
        let a = free_angular_set(o, 1.0, &HistorySet::empty(o), th).unwrap();
        assert_eq!(a.intervals, vec![(-th, th)]);
        let h = single(o, o, 2.0);
        assert!(free_angular_set(o, 1.0, &h, th).unwrap().is_empty());
        let a = free_angular_set(o, 3.0, &h, th).unwrap();
        assert_eq!(a.intervals, vec![(-th, th)]);
        assert!(free_angular_set(o, 0.0, &h, th).is_err());
    }

    #[test]
    fn explored_area_examples() {
        let o = Point::ORIGIN;
        let th = FRAC_PI_4;
        let a = explored_area(o, 2.0, &HistorySet::empty(o), th).unwrap();
        assert!((a - PI).abs() < 1e-14);
        let h = single(o, o, 1.0);
        assert!(explored_area(o, 1.0, &h, th).unwrap().abs() < 1e-12);
        let a = explored_area(o, 2.0, &h, th).unwrap();
        assert!((a - 3.0 * PI / 4.0).abs() < 1e-10, "{a}");
        assert!(explored_area(o, -1.0, &h, th).is_err());
    }

    #[test]
    fn width_examples() {
        let o = Point::ORIGIN;
        assert_eq!(history_width(&HistorySet::empty(o), 0.5), 0.0);
        let h = single(o, o, 2.0);
        assert!((history_width(&h, FRAC_PI_4) - 2.0).abs() < 1e-14);

        // lens C_{π/4}(o) ∩ B((0, 2), 1.8): the upper boundary ray y = x meets
        // the circle at x = 1 + √0.62
        let h = single(o, Point::new(0.0, 2.0), 1.8);
        let w = history_width(&h, FRAC_PI_4);
        assert!((w - (1.0 + 0.62f64.sqrt())).abs() < 1e-12, "{w}");
        // grid oracle
        let mut best = 0.0_f64;
        let n = 2000;
        for i in 0..=n {
            for j in 0..=n {
                let p = Point::new(4.0 * i as f64 / n as f64, 4.0 * j as f64 / n as f64);
                if h.contains(p, FRAC_PI_4) {
                    best = best.max(p.x);
                }
            }
        }
        assert!(w >= best && w - best < 5e-3, "w={w} grid={best}");
    }

    #[test]
    fn wrap_angle_range() {
        for a in [-7.0, -PI, -1.0, 0.0, 3.0, PI, 9.5] {
            let w = wrap_angle(a);
            assert!((-PI..PI).contains(&w));
            assert!(((a - w) / (2.0 * PI)).fract().abs() < 1e-12 || ((a - w) / (2.0 * PI)).fract().abs() > 1.0 - 1e-12);
        }
    }
}
