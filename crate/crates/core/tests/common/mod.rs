//! Independent oracles shared by the integration tests. Nothing here calls
//! into the density code under test.
#![allow(dead_code)]

use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub const LN_2PI: f64 = 1.8378770664093453;

/// `ln N(v; mean, variance)` written out directly.
pub fn gauss_ln_pdf(v: f64, mean: f64, variance: f64) -> f64 {
    let d = v - mean;
    -0.5 * (LN_2PI + variance.ln() + d * d / variance)
}

/// Log-volatility model parameters as plain numbers.
#[derive(Debug, Clone, Copy)]
pub struct Ar1 {
    pub alpha: f64,
    pub phi: f64,
    pub sigma2: f64,
}

impl Ar1 {
    pub fn stationary_mean(&self) -> f64 {
        self.alpha / (1.0 - self.phi)
    }

    pub fn stationary_variance(&self) -> f64 {
        self.sigma2 / (1.0 - self.phi * self.phi)
    }
}

/// Exact filter for the log-volatility model on a fixed uniform grid.
///
/// `mass[k]` is the filtering probability of the cell centred on
/// `points[k]`; prediction integrates the Gaussian transition by the
/// midpoint rule.
#[derive(Debug, Clone)]
pub struct GridFilter {
    pub points: Vec<f64>,
    pub spacing: f64,
    pub mass: Vec<f64>,
    transition: Vec<f64>,
}

impl GridFilter {
    /// Grid over `stationary mean ± half_width · stationary sd`, initialised
    /// with the stationary law.
    pub fn stationary(p: Ar1, size: usize, half_width: f64) -> Self {
        let m = p.stationary_mean();
        let sd = p.stationary_variance().sqrt();
        let lo = m - half_width * sd;
        let spacing = 2.0 * half_width * sd / size as f64;
        let points: Vec<f64> = (0..size).map(|k| lo + (k as f64 + 0.5) * spacing).collect();
        let mut mass: Vec<f64> = points
            .iter()
            .map(|&g| gauss_ln_pdf(g, m, p.stationary_variance()).exp())
            .collect();
        normalize(&mut mass);
        // transition[j * size + k] = P(cell k | point j)
        let mut transition = vec![0.0; size * size];
        for (j, &from) in points.iter().enumerate() {
            let row = &mut transition[j * size..(j + 1) * size];
            for (k, &to) in points.iter().enumerate() {
                row[k] = gauss_ln_pdf(to, p.alpha + p.phi * from, p.sigma2).exp() * spacing;
            }
        }
        GridFilter {
            points,
            spacing,
            mass,
            transition,
        }
    }

    pub fn predict(&mut self) {
        let n = self.points.len();
        let mut next = vec![0.0; n];
        for (j, &w) in self.mass.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (acc, t) in next.iter_mut().zip(&self.transition[j * n..(j + 1) * n]) {
                *acc += w * t;
            }
        }
        normalize(&mut next);
        self.mass = next;
    }

    /// Multiplies by the likelihood of `y ~ N(0, exp(x))`.
    pub fn update(&mut self, y: f64) {
        let ll: Vec<f64> = self
            .points
            .iter()
            .map(|&g| gauss_ln_pdf(y, 0.0, g.exp()))
            .collect();
        let max = ll.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (m, l) in self.mass.iter_mut().zip(ll) {
            *m *= (l - max).exp();
        }
        normalize(&mut self.mass);
    }

    pub fn mean(&self) -> f64 {
        self.points.iter().zip(&self.mass).map(|(g, m)| g * m).sum()
    }

    /// Draw from the piecewise-uniform density whose cell masses are `mass`.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut k = self.mass.len() - 1;
        for (i, m) in self.mass.iter().enumerate() {
            acc += m;
            if u < acc {
                k = i;
                break;
            }
        }
        self.points[k] + (rng.random::<f64>() - 0.5) * self.spacing
    }
}

fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    for x in v {
        *x /= s;
    }
}

/// Upper-tail p-value of Pearson's statistic for `observed` counts against
/// `expected` counts.
pub fn chi_square_p_value(observed: &[u64], expected: &[f64]) -> f64 {
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum();
    let df = (observed.len() - 1) as f64;
    1.0 - ChiSquared::new(df).unwrap().cdf(stat)
}

/// Kolmogorov–Smirnov statistic of `sample` against `cdf`.
pub fn ks_statistic(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(|a, b| a.total_cmp(b));
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

/// Normalized density of `ln_density` on a uniform grid over `[lo, hi]`,
/// returned as `(points, probabilities)`.
pub fn grid_density(lo: f64, hi: f64, size: usize, ln_density: impl Fn(f64) -> f64) -> (Vec<f64>, Vec<f64>) {
    let h = (hi - lo) / size as f64;
    let pts: Vec<f64> = (0..size).map(|k| lo + (k as f64 + 0.5) * h).collect();
    let ln: Vec<f64> = pts.iter().map(|&p| ln_density(p)).collect();
    let max = ln.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = ln.iter().map(|l| (l - max).exp()).collect();
    normalize(&mut w);
    (pts, w)
}

pub fn grid_mean(lo: f64, hi: f64, size: usize, ln_density: impl Fn(f64) -> f64) -> f64 {
    let (p, w) = grid_density(lo, hi, size, ln_density);
    p.iter().zip(&w).map(|(a, b)| a * b).sum()
}

/// Prints one acceptance line and returns whether it passed.
///
/// Writes to the stderr handle directly so the line survives the test
/// harness's output capture for passing tests too.
pub fn report(id: u32, name: &str, pass: bool, detail: &str) -> bool {
    use std::io::Write;
    let line = format!(
        "[{}] criterion {id}: {name}: {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
    pass
}
