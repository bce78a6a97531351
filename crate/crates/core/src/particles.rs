//! Weighted particle clouds over the parameter-augmented state space.
//!
//! Weights are kept as unnormalized log-weights end to end and only
//! exponentiated after subtracting the running maximum.

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::SvParamsTransformed;

/// `N` triples `(x, θ, log w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleCloud {
    pub states: Vec<f64>,
    pub params: Vec<SvParamsTransformed>,
    pub log_weights: Vec<f64>,
}

impl ParticleCloud {
    pub fn new(states: Vec<f64>, params: Vec<SvParamsTransformed>, log_weights: Vec<f64>) -> Result<Self> {
        let cloud = ParticleCloud {
            states,
            params,
            log_weights,
        };
        cloud.validate()?;
        Ok(cloud)
    }

    /// A cloud with equal weights.
    pub fn uniform(states: Vec<f64>, params: Vec<SvParamsTransformed>) -> Result<Self> {
        let n = states.len();
        let lw = if n > 0 { -(n as f64).ln() } else { 0.0 };
        Self::new(states, params, vec![lw; n])
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.states.len();
        if n == 0 {
            return Err(Error::Domain(
                "particle cloud must hold at least one particle".into(),
            ));
        }
        if self.params.len() != n || self.log_weights.len() != n {
            return Err(Error::Domain(format!(
                "particle cloud length mismatch: {} states, {} params, {} weights",
                n,
                self.params.len(),
                self.log_weights.len()
            )));
        }
        if !self.log_weights.iter().any(|w| *w > f64::NEG_INFINITY) {
            return Err(Error::Degenerate("all log-weights are -inf".into()));
        }
        Ok(())
    }

    pub fn normalized_weights(&self) -> Result<Vec<f64>> {
        normalize(&self.log_weights)
    }

    pub fn ess(&self) -> Result<f64> {
        ess(&self.normalized_weights()?)
    }

    /// Particle `i` of `self`, for each `i` in `indices`, with uniform weights.
    pub fn gather_uniform(&self, indices: &[usize]) -> ParticleCloud {
        let n = indices.len();
        ParticleCloud {
            states: indices.iter().map(|&i| self.states[i]).collect(),
            params: indices.iter().map(|&i| self.params[i]).collect(),
            log_weights: vec![-(n as f64).ln(); n],
        }
    }
}

/// Normalized weights `exp(lw_i - max) / Σ exp(lw_k - max)`.
pub fn normalize(log_weights: &[f64]) -> Result<Vec<f64>> {
    if log_weights.iter().any(|w| w.is_nan()) {
        return Err(Error::Numerical("NaN log-weight".into()));
    }
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::Degenerate("all log-weights are -inf".into()));
    }
    if max == f64::INFINITY {
        return Err(Error::Numerical("infinite log-weight".into()));
    }
    let mut w: Vec<f64> = log_weights.iter().map(|lw| (lw - max).exp()).collect();
    let total: f64 = w.iter().sum();
    for wi in &mut w {
        *wi /= total;
    }
    Ok(w)
}

/// Effective sample size of a nonnegative weight vector.
///
/// Evaluates `N / (1 + N Σ (w_i - mean)² / (Σ w)²)`, which equals
/// `(Σ w)² / Σ w²`; the result is clamped to `[1, N]`.
pub fn ess(weights: &[f64]) -> Result<f64> {
    let n = weights.len() as f64;
    let total: f64 = weights.iter().sum();
    if !total.is_finite() || total <= 0.0 {
        return Err(Error::Degenerate("weights sum to zero".into()));
    }
    let mean = total / n;
    let dispersion: f64 = weights.iter().map(|w| (w - mean) * (w - mean)).sum();
    let value = n / (1.0 + n * dispersion / (total * total));
    Ok(value.clamp(1.0, n))
}

/// Draws `count` indices independently from the categorical distribution
/// given by `weights` (need not be normalized).
pub fn multinomial_indices<R: Rng + ?Sized>(
    weights: &[f64],
    count: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for &w in weights {
        acc += w;
        cumulative.push(acc);
    }
    if !acc.is_finite() || acc <= 0.0 {
        return Err(Error::Degenerate("cannot resample from zero total weight".into()));
    }
    let last = weights.len() - 1;
    Ok((0..count)
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            cumulative.partition_point(|&c| c <= u).min(last)
        })
        .collect())
}

/// Multinomial resampling: `N` categorical draws, uniform output weights.
pub fn multinomial_resample<R: Rng + ?Sized>(cloud: &ParticleCloud, rng: &mut R) -> Result<ParticleCloud> {
    let w = cloud.normalized_weights()?;
    let idx = multinomial_indices(&w, cloud.len(), rng)?;
    Ok(cloud.gather_uniform(&idx))
}

/// Weighted mean `θ̄` and population covariance `V` of the parameter particles.
pub fn weighted_mean_cov(params: &[SvParamsTransformed], weights: &[f64]) -> (Vector3<f64>, Matrix3<f64>) {
    let mut mean = Vector3::zeros();
    for (p, &w) in params.iter().zip(weights) {
        mean += Vector3::from(p.as_array()) * w;
    }
    let mut cov = Matrix3::zeros();
    for (p, &w) in params.iter().zip(weights) {
        let d = Vector3::from(p.as_array()) - mean;
        cov += d * d.transpose() * w;
    }
    // symmetrize rounding residue
    let cov = (cov + cov.transpose()) * 0.5;
    (mean, cov)
}

/// Liu–West shrinkage settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    /// Shrinkage factor in `[0, 1]`; `b² = 1 - a²`.
    pub a: f64,
    /// Relative jitter: the first factorization attempt adds
    /// `jitter · trace(V) / 3` to the diagonal.
    pub jitter: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            a: 0.98,
            jitter: 1e-10,
        }
    }
}

impl KernelConfig {
    pub fn new(a: f64) -> Result<Self> {
        let k = KernelConfig { a, jitter: 1e-10 };
        k.validate()?;
        Ok(k)
    }

    /// `a = (3δ - 1) / (2δ)` for discount factor `δ`.
    pub fn from_discount(delta: f64) -> Self {
        KernelConfig {
            a: (3.0 * delta - 1.0) / (2.0 * delta),
            jitter: 1e-10,
        }
    }

    pub fn b2(&self) -> f64 {
        1.0 - self.a * self.a
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.a) {
            return Err(Error::Config(format!("shrinkage a = {} outside [0, 1]", self.a)));
        }
        if !self.jitter.is_finite() || self.jitter < 0.0 {
            return Err(Error::Config(format!("jitter = {} must be >= 0", self.jitter)));
        }
        Ok(())
    }
}

const JITTER_ESCALATIONS: usize = 3;

/// A Liu–West move with factorized covariance, built once per filter step.
#[derive(Debug, Clone)]
pub struct LiuWestKernel {
    a: f64,
    b: f64,
    mean: Vector3<f64>,
    chol: Matrix3<f64>,
}

impl LiuWestKernel {
    pub fn new(mean: Vector3<f64>, cov: Matrix3<f64>, cfg: &KernelConfig) -> Result<Self> {
        cfg.validate()?;
        let b = cfg.b2().sqrt();
        let chol = if b == 0.0 {
            Matrix3::zeros()
        } else {
            factor_with_jitter(&cov, cfg.jitter)?
        };
        Ok(LiuWestKernel {
            a: cfg.a,
            b,
            mean,
            chol,
        })
    }

    /// Builds the kernel from a weighted parameter cloud.
    pub fn from_cloud(params: &[SvParamsTransformed], weights: &[f64], cfg: &KernelConfig) -> Result<Self> {
        let (mean, cov) = weighted_mean_cov(params, weights);
        Self::new(mean, cov, cfg)
    }

    /// Kernel location `aθ + (1-a)θ̄`.
    pub fn shrunk(&self, theta: &SvParamsTransformed) -> SvParamsTransformed {
        let t = Vector3::from(theta.as_array());
        if self.a == 1.0 {
            return *theta;
        }
        let m = t * self.a + self.mean * (1.0 - self.a);
        SvParamsTransformed::from_array([m[0], m[1], m[2]])
    }

    /// Moves `theta` using the given standard normal vector.
    pub fn apply(&self, theta: &SvParamsTransformed, z: [f64; 3]) -> SvParamsTransformed {
        if self.b == 0.0 {
            return self.shrunk(theta);
        }
        let loc = Vector3::from(self.shrunk(theta).as_array());
        let out = loc + self.chol * Vector3::from(z) * self.b;
        SvParamsTransformed::from_array([out[0], out[1], out[2]])
    }

    /// Draws from `N(aθ + (1-a)θ̄, b²V)`; always consumes three normals.
    pub fn sample<R: Rng + ?Sized>(&self, theta: &SvParamsTransformed, rng: &mut R) -> SvParamsTransformed {
        let z = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        self.apply(theta, z)
    }
}

fn factor_with_jitter(cov: &Matrix3<f64>, rel_jitter: f64) -> Result<Matrix3<f64>> {
    let trace = cov.trace();
    if !trace.is_finite() {
        return Err(Error::Numerical("non-finite parameter covariance".into()));
    }
    if trace == 0.0 {
        return Ok(Matrix3::zeros());
    }
    let mut jitter = rel_jitter * trace / 3.0;
    for _ in 0..=JITTER_ESCALATIONS {
        let m = cov + Matrix3::identity() * jitter;
        if let Some(c) = m.cholesky() {
            return Ok(c.l());
        }
        jitter *= 10.0;
    }
    Err(Error::Numerical(format!(
        "Cholesky factorization failed after jitter escalation to {jitter:e}"
    )))
}

/// One Liu–West draw `N(aθ + (1-a)θ̄, b²V)`, factorizing `V` on the spot.
pub fn liu_west_move<R: Rng + ?Sized>(
    theta: &SvParamsTransformed,
    mean: &Vector3<f64>,
    cov: &Matrix3<f64>,
    cfg: &KernelConfig,
    rng: &mut R,
) -> Result<SvParamsTransformed> {
    Ok(LiuWestKernel::new(*mean, *cov, cfg)?.sample(theta, rng))
}
