//! Streaming moments, Monte Carlo estimates and a few summary statistics.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

/// Running mean and variance (Welford), mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Accumulator {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Combine two disjoint sample sets.
    pub fn merge(&self, o: &Accumulator) -> Accumulator {
        if self.n == 0 {
            return *o;
        }
        if o.n == 0 {
            return *self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        let mean = self.mean + d * (o.n as f64 / n as f64);
        let m2 = self.m2 + o.m2 + d * d * (self.n as f64 * o.n as f64 / n as f64);
        Accumulator { n, mean, m2 }
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }

    pub fn estimate(&self, seed: u64) -> McEstimate {
        McEstimate {
            mean: self.mean,
            std_error: self.std_error(),
            n_samples: self.n,
            seed,
        }
    }

    pub fn scaled(&self, c: f64) -> Accumulator {
        Accumulator {
            n: self.n,
            mean: self.mean * c,
            m2: self.m2 * c * c,
        }
    }
}

/// Pairwise merge in index order; the result depends only on the slice.
pub fn merge_pairwise(parts: &[Accumulator]) -> Accumulator {
    match parts.len() {
        0 => Accumulator::new(),
        1 => parts[0],
        n => {
            let (l, r) = parts.split_at(n / 2);
            merge_pairwise(l).merge(&merge_pairwise(r))
        }
    }
}

/// Monte Carlo estimate `mean ± std_error` from `n_samples` draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl McEstimate {
    pub fn zero(seed: u64) -> Self {
        McEstimate {
            mean: 0.0,
            std_error: 0.0,
            n_samples: 0,
            seed,
        }
    }
}

/// Median of a slice (the slice is sorted in place).
pub fn median(xs: &mut [f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a: Vec<f64> = a.to_vec();
    let mut b: Vec<f64> = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Weighted least-squares line `y = a + b x`; returns `(a, b, se_b)`.
/// With unit weights and `n > 2` the slope error uses the residual variance;
/// with supplied standard errors it uses them directly.
pub fn linear_fit(x: &[f64], y: &[f64], se: Option<&[f64]>) -> (f64, f64, f64) {
    let n = x.len();
    let w: Vec<f64> = match se {
        Some(s) => s.iter().map(|v| 1.0 / (v * v).max(f64::MIN_POSITIVE)).collect(),
        None => alloc::vec![1.0; n],
    };
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(&w).map(|(a, b)| b * (a - mx) * (a - mx)).sum();
    let sxy: f64 = x
        .iter()
        .zip(y)
        .zip(&w)
        .map(|((a, c), b)| b * (a - mx) * (c - my))
        .sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let se_b = if se.is_some() {
        (1.0 / sxx).sqrt()
    } else if n > 2 {
        let rss: f64 = x
            .iter()
            .zip(y)
            .map(|(a, c)| {
                let r = c - icpt - slope * a;
                r * r
            })
            .sum();
        (rss / (n - 2) as f64 / sxx).sqrt()
    } else {
        0.0
    };
    (icpt, slope, se_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut all = Accumulator::new();
        xs.iter().for_each(|&x| all.push(x));
        let parts: Vec<Accumulator> = xs
            .chunks(77)
            .map(|c| {
                let mut a = Accumulator::new();
                c.iter().for_each(|&x| a.push(x));
                a
            })
            .collect();
        let m = merge_pairwise(&parts);
        assert_eq!(m.n, all.n);
        assert!((m.mean - all.mean).abs() < 1e-12);
        assert!((m.variance() - all.variance()).abs() < 1e-9);
    }

    #[test]
    fn median_and_ks() {
        let mut v = vec![3.0, 1.0, 2.0, 4.0];
        assert_eq!(median(&mut v), 2.5);
        assert_eq!(ks_distance(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(ks_distance(&[1.0, 2.0], &[3.0, 4.0]), 1.0);
    }

    #[test]
    fn fit_exact_line() {
        let (a, b, se) = linear_fit(&[0.0, 1.0, 2.0, 3.0], &[1.0, 3.0, 5.0, 7.0], None);
        assert!((a - 1.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12 && se < 1e-10);
    }
}
