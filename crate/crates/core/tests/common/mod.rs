#![allow(dead_code)]

use poisson_nav::geom::{HistorySet, Point};
use std::f64::consts::PI;

/// Exact area of `(C_θ(o) ∩ B(o, r)) \ H` for histories whose terms all have
/// apex `o`, by Green's theorem over the boundary arcs of
/// `C_θ(o) ∩ B(o, r) ∩ ∪ B_i`. Radial edges through `o` contribute nothing.
pub fn green_explored_area(o: Point, r: f64, h: &HistorySet, theta: f64) -> f64 {
    let discs: Vec<(Point, f64)> = h
        .terms()
        .iter()
        .map(|t| {
            assert_eq!(t.cone_apex, o, "oracle needs all apexes at the vertex");
            (t.ball_center - o, t.ball_radius)
        })
        .collect();
    let in_sector = |p: Point| p.norm() <= r * (1.0 + 1e-14) && p.y.atan2(p.x).abs() <= theta;
    let in_cone = |p: Point| p.y.atan2(p.x).abs() <= theta;
    let in_disc = |p: Point, d: &(Point, f64)| (p - d.0).norm() < d.1;
    let arc_integral = |c: Point, rho: f64, a: f64, b: f64| {
        0.5 * (rho * rho * (b - a) + rho * (c.x * (b.sin() - a.sin()) - c.y * (b.cos() - a.cos())))
    };

    let mut circles = discs.clone();
    circles.push((Point::ORIGIN, r));
    let mut blocked = 0.0;
    for (i, &(c, rho)) in circles.iter().enumerate() {
        let mut cuts = vec![-PI, PI];
        for (j, &(c2, rho2)) in circles.iter().enumerate() {
            if i == j {
                continue;
            }
            let d = c2 - c;
            let dist = d.norm();
            if dist > 0.0 && dist <= rho + rho2 && dist >= (rho - rho2).abs() {
                let base = d.y.atan2(d.x);
                let cosv = ((dist * dist + rho * rho - rho2 * rho2) / (2.0 * dist * rho)).clamp(-1.0, 1.0);
                let w = cosv.acos();
                cuts.push(wrap(base + w));
                cuts.push(wrap(base - w));
            }
        }
        for dir in [theta, -theta] {
            let e = Point::new(dir.cos(), dir.sin());
            // |t e − c| = ρ
            let b = e.x * c.x + e.y * c.y;
            let disc = b * b - (c.x * c.x + c.y * c.y - rho * rho);
            if disc >= 0.0 {
                for t in [b - disc.sqrt(), b + disc.sqrt()] {
                    let p = e * t - c;
                    cuts.push(p.y.atan2(p.x));
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b - a < 1e-15 {
                continue;
            }
            let m = 0.5 * (a + b);
            let p = c + Point::new(rho * m.cos(), rho * m.sin());
            let on_boundary = if i == circles.len() - 1 {
                in_cone(p) && discs.iter().any(|d| in_disc(p, d))
            } else {
                in_sector(p)
                    && !discs
                        .iter()
                        .enumerate()
                        .any(|(j, d)| j != i && in_disc(p, d))
            };
            if on_boundary {
                blocked += arc_integral(c, rho, a, b);
            }
        }
    }
    theta * r * r - blocked
}

fn wrap(a: f64) -> f64 {
    let mut x = a;
    while x >= PI {
        x -= 2.0 * PI;
    }
    while x < -PI {
        x += 2.0 * PI;
    }
    x
}
