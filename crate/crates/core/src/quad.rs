//! Gauss quadrature rules.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Nodes and weights of a Gauss rule.
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Gauss–Legendre rule on `[-1, 1]` with `n` nodes, found by Newton
    /// iteration on the Legendre polynomial from Chebyshev-like guesses.
    pub fn legendre(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_eval(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_eval(n, z);
            if d.is_finite() {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Gauss–Laguerre rule for `∫_0^∞ e^{-x} f(x) dx` with `n` nodes.
    pub fn laguerre(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        let mut z = 0.0_f64;
        for i in 0..n {
            // initial guesses for the i-th root
            z = if i == 0 {
                3.0 / (1.0 + 2.4 * nf)
            } else if i == 1 {
                z + 15.0 / (1.0 + 2.5 * nf)
            } else {
                let ai = (i - 1) as f64;
                z + ((1.0 + 2.55 * ai) / (1.9 * ai)) * (z - nodes[i - 2])
            };
            let mut pp = 1.0;
            for _ in 0..200 {
                let (p1, p2) = laguerre_eval(n, z);
                pp = (nf * p1 - nf * p2) / z;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            nodes[i] = z;
            weights[i] = 1.0 / (z * pp * pp);
        }
        Self { nodes, weights }
    }

    /// Integrate `f` over `[a, b]` with this (Legendre) rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn legendre_eval(n: usize, z: f64) -> (f64, f64) {
    let mut p1 = 1.0;
    let mut p2 = 0.0;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j as f64 + 1.0) * z * p2 - j as f64 * p3) / (j as f64 + 1.0);
    }
    let d = n as f64 * (z * p1 - p2) / (z * z - 1.0);
    (p1, d)
}

/// Returns `(L_n(z), L_{n-1}(z))`.
fn laguerre_eval(n: usize, z: f64) -> (f64, f64) {
    let mut p1 = 1.0;
    let mut p2 = 0.0;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j as f64 + 1.0 - z) * p2 - j as f64 * p3) / (j as f64 + 1.0);
    }
    (p1, p2)
}

pub fn gauss_legendre_16() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| GaussRule::legendre(16))
}

pub fn gauss_legendre_64() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| GaussRule::legendre(64))
}

pub fn gauss_laguerre_32() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| GaussRule::laguerre(32))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_weights_sum_to_two() {
        for n in [1, 2, 5, 16, 64] {
            let r = GaussRule::legendre(n);
            let s: f64 = r.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n} sum={s}");
        }
    }

    #[test]
    fn legendre_16_is_exact_for_degree_31() {
        let r = gauss_legendre_16();
        let v = r.integrate(0.0, 2.0, |x| x.powi(31));
        let exact = 2f64.powi(32) / 32.0;
        assert!((v / exact - 1.0).abs() < 1e-13);
        let c = r.integrate(-1.0, 0.5, f64::cos);
        assert!((c - (0.5f64.sin() + 1f64.sin())).abs() < 1e-15);
    }

    #[test]
    fn laguerre_moments() {
        let r = gauss_laguerre_32();
        // ∫ x^k e^{-x} = k!
        let mut fact = 1.0;
        for k in 0..20 {
            if k > 0 {
                fact *= k as f64;
            }
            let v: f64 = r
                .nodes
                .iter()
                .zip(&r.weights)
                .map(|(&x, &w)| w * x.powi(k))
                .sum();
            assert!((v / fact - 1.0).abs() < 1e-11, "k={k} v={v} fact={fact}");
        }
    }
}
