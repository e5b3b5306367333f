//! Gauss–Legendre quadrature on composite panels.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;


use crate::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// A fixed rule reused across many integrals.
#[derive(Debug, Clone)]
pub struct Rule {
    nodes: Vec<(f64, f64)>,
}

impl Rule {
    pub fn new(n: usize) -> Self {
        Rule {
            nodes: gauss_legendre(n),
        }
    }

    /// Composite rule: `panels` equal panels on `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
        let h = (b - a) / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let lo = a + h * p as f64;
            let mid = lo + 0.5 * h;
            let mut s = 0.0;
            for &(x, w) in &self.nodes {
                s += w * f(mid + 0.5 * h * x);
            }
            total += 0.5 * h * s;
        }
        total
    }

    /// Points and weights of the composite rule, for callers that evaluate
    /// several integrands on one grid.
    pub fn grid(&self, a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
        let h = (b - a) / panels as f64;
        let mut out = Vec::with_capacity(panels * self.nodes.len());
        for p in 0..panels {
            let mid = a + h * (p as f64 + 0.5);
            for &(x, w) in &self.nodes {
                out.push((mid + 0.5 * h * x, 0.5 * h * w));
            }
        }
        out
    }
}

/// Composite Gauss–Legendre with panel doubling until two successive
/// estimates agree to `rel_tol` (relative, with absolute floor `abs_tol`).
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    mut f: F,
) -> Result<f64> {
    let rule = Rule::new(20);
    let mut panels = 4;
    let mut prev = rule.integrate(a, b, panels, &mut f);
    while panels < 1 << 14 {
        panels *= 2;
        let cur = rule.integrate(a, b, panels, &mut f);
        if (cur - prev).abs() <= rel_tol * cur.abs() + abs_tol {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::QuadratureBudgetExceeded)
}
