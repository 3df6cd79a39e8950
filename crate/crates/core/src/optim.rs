//! Derivative-free minimizers used by the rate-function code.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Min1d {
    pub x: f64,
    pub value: f64,
}

/// Golden-section search for a minimum of a unimodal `f` on `[a, b]`.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64, max_iter: usize) -> Min1d {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iter {
        if (b - a).abs() <= tol * (c.abs() + d.abs()).max(1e-300) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        Min1d { x: c, value: fc }
    } else {
        Min1d { x: d, value: fd }
    }
}

/// Minimize `f` over `[lo, hi]` (with `0 < lo < hi`) in log coordinates: a
/// coarse scan of `scan` log-spaced points, then golden-section search in
/// the bracket around the best scan point.
pub fn log_scan_golden<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, scan: usize, tol: f64) -> Min1d {
    let (la, lb) = (lo.ln(), hi.ln());
    let scan = scan.max(3);
    let step = (lb - la) / (scan - 1) as f64;
    let mut best = (0usize, f64::INFINITY);
    for i in 0..scan {
        let v = f((la + step * i as f64).exp());
        if v < best.1 {
            best = (i, v);
        }
    }
    let i = best.0;
    let a = la + step * i.saturating_sub(1) as f64;
    let b = la + step * (i + 1).min(scan - 1) as f64;
    let refined = golden_section(|u| f(u.exp()), a, b, tol, 200);
    if refined.value <= best.1 {
        Min1d {
            x: refined.x.exp(),
            value: refined.value,
        }
    } else {
        Min1d {
            x: (la + step * i as f64).exp(),
            value: best.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinNd {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Compass (pattern) search from `x0` with initial steps `step`, clamping
/// every trial point into `[lower, upper]`. Steps halve after an
/// unsuccessful sweep until all fall below `tol`.
pub fn pattern_search<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: &[f64],
    lower: &[f64],
    upper: &[f64],
    tol: f64,
    max_evals: usize,
) -> MinNd {
    let n = x0.len();
    let clamp = |x: &mut Vec<f64>| {
        for k in 0..n {
            x[k] = x[k].clamp(lower[k], upper[k]);
        }
    };
    let mut x = x0.to_vec();
    clamp(&mut x);
    let mut fx = f(&x);
    let mut h = step.to_vec();
    let mut evals = 1;
    while evals < max_evals && h.iter().any(|&s| s > tol) {
        let mut improved = false;
        for k in 0..n {
            for sign in [1.0, -1.0] {
                let mut y = x.clone();
                y[k] += sign * h[k];
                clamp(&mut y);
                if y == x {
                    continue;
                }
                let fy = f(&y);
                evals += 1;
                if fy < fx {
                    x = y;
                    fx = fy;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            for s in h.iter_mut() {
                *s *= 0.5;
            }
        }
    }
    MinNd {
        x,
        value: fx,
        evaluations: evals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_minimum() {
        let m = golden_section(|x| (x - 1.3).powi(2) + 2.0, -5.0, 5.0, 1e-12, 500);
        assert!((m.x - 1.3).abs() < 1e-6);
        assert!((m.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn log_scan_handles_wide_brackets() {
        let m = log_scan_golden(|b| (b.ln() - 3.0).powi(2), 1e-3, 1e3, 61, 1e-12);
        assert!((m.x - 3f64.exp()).abs() < 1e-4);
    }

    #[test]
    fn pattern_search_rosenbrock_like() {
        let f = |x: &[f64]| (x[0] - 2.0).powi(2) + 10.0 * (x[1] + 1.0).powi(2);
        let m = pattern_search(f, &[0.0, 0.0], &[1.0, 1.0], &[-10.0, -10.0], &[10.0, 10.0], 1e-10, 100_000);
        assert!((m.x[0] - 2.0).abs() < 1e-8 && (m.x[1] + 1.0).abs() < 1e-8);
        let m = pattern_search(f, &[0.0, 0.0], &[1.0, 1.0], &[-10.0, 0.0], &[1.0, 10.0], 1e-10, 100_000);
        assert_eq!(m.x, vec![1.0, 0.0]);
    }
}
