//! Gauss-Legendre quadrature with order doubling.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Default convergence threshold for the one-dimensional integrals.
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MIN_ORDER: usize = 64;
pub const DEFAULT_MAX_ORDER: usize = 1024;

/// Environment variable overriding [`DEFAULT_TOL`] in [`QuadOptions::from_env`].
pub const TOL_ENV: &str = "TELECERT_QUAD_TOL";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadOptions {
    pub tol: f64,
    pub min_order: usize,
    pub max_order: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            min_order: DEFAULT_MIN_ORDER,
            max_order: DEFAULT_MAX_ORDER,
        }
    }
}

impl QuadOptions {
    /// Defaults, with the tolerance taken from `TELECERT_QUAD_TOL` if it parses
    /// as a positive number.
    pub fn from_env() -> Self {
        let mut o = Self::default();
        if let Some(t) = std::env::var(TOL_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|t| *t > 0.0 && t.is_finite())
        {
            o.tol = t;
        }
        o
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on P_n from the Tricomi initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        let nf = n as f64;
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Shared rule for power-of-two orders up to 4096, built once.
    pub fn cached(n: usize) -> &'static GaussLegendre {
        static RULES: [OnceLock<GaussLegendre>; 13] = [const { OnceLock::new() }; 13];
        assert!(
            n.is_power_of_two() && n <= 4096,
            "no cached rule of order {n}"
        );
        RULES[n.trailing_zeros() as usize].get_or_init(|| GaussLegendre::new(n))
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// Integral of f over [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self.iter().map(|(x, w)| w * f(mid + half * x)).sum::<f64>()
    }
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Runs `estimate(order)` for order = min, 2 min, ... until two successive
/// estimates differ by less than `tol` in every component.
pub fn doubling<const K: usize, F>(opts: &QuadOptions, mut estimate: F) -> Result<[f64; K]>
where
    F: FnMut(usize) -> [f64; K],
{
    let mut order = opts.min_order.max(1);
    let mut prev = estimate(order);
    let mut change = f64::INFINITY;
    while order * 2 <= opts.max_order {
        order *= 2;
        let next = estimate(order);
        change = prev
            .iter()
            .zip(next.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if change.is_nan() {
            return Err(Error::NonFinite("quadrature estimate"));
        }
        if change < opts.tol {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::QuadratureNotConverged { order, change })
}

/// Integrals of `f(z) * [1, z]` over z in [-1, 1], evaluated in the polar
/// angle (z = cos theta) so that sqrt(1 -+ z) endpoint behaviour becomes smooth.
pub fn integrate_moments<F: Fn(f64) -> f64>(opts: &QuadOptions, f: F) -> Result<[f64; 2]> {
    doubling(opts, |order| {
        let rule = rule_for(order);
        let half = 0.5 * PI;
        let mut m0 = 0.0;
        let mut m1 = 0.0;
        for (x, w) in rule.iter() {
            let theta = half * (x + 1.0);
            let z = theta.cos();
            let jac = w * half * theta.sin();
            let v = f(z) * jac;
            m0 += v;
            m1 += v * z;
        }
        [m0, m1]
    })
}

pub(crate) fn rule_for(order: usize) -> std::borrow::Cow<'static, GaussLegendre> {
    if order.is_power_of_two() && order <= 4096 {
        std::borrow::Cow::Borrowed(GaussLegendre::cached(order))
    } else {
        std::borrow::Cow::Owned(GaussLegendre::new(order))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 64, 1024] {
            let s: f64 = GaussLegendre::new(n).weights().iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n} sum={s}");
        }
    }

    #[test]
    fn exact_for_polynomials() {
        let rule = GaussLegendre::new(5);
        // degree 9 is the highest exact degree for 5 nodes
        let got = rule.integrate(-1.0, 1.0, |x| x.powi(8) + x.powi(9));
        assert!((got - 2.0 / 9.0).abs() < 1e-15);
        let got = rule.integrate(0.0, 2.0, |x| x * x);
        assert!((got - 8.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn known_nodes() {
        let r = GaussLegendre::new(2);
        let x = 1.0 / 3f64.sqrt();
        assert!((r.nodes()[0] + x).abs() < 1e-15);
        assert!((r.nodes()[1] - x).abs() < 1e-15);
        let r = GaussLegendre::new(3);
        assert!(r.nodes()[1].abs() < 1e-15);
        assert!((r.weights()[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn moments_of_endpoint_singularity() {
        // f(z) = sqrt((1 - z)/2): integral 4/3, first moment -4/15
        let [m0, m1] =
            integrate_moments(&QuadOptions::default(), |z| ((1.0 - z) / 2.0).sqrt()).unwrap();
        assert!((m0 - 4.0 / 3.0).abs() < 1e-12);
        assert!((m1 + 4.0 / 15.0).abs() < 1e-12);
    }

    #[test]
    fn doubling_reports_failure() {
        let opts = QuadOptions {
            tol: 1e-30,
            min_order: 4,
            max_order: 16,
        };
        let mut calls = 0;
        let res = doubling(&opts, |n| {
            calls += 1;
            [1.0 / n as f64]
        });
        assert!(matches!(
            res,
            Err(Error::QuadratureNotConverged { order: 16, .. })
        ));
        assert_eq!(calls, 3);
    }
}
