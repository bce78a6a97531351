//! Univariate stochastic volatility model.
//!
//! ```text
//! y_t | x_t          ~ N(0, exp(x_t))
//! x_t | x_{t-1}, θ   ~ N(α + φ x_{t-1}, σ²)
//! x_0                ~ N(0, σ² / (1 - φ²))
//! ```
//!
//! Filters carry the static parameters in the unconstrained coordinates
//! `θ = (α, log((1+φ)/(1-φ)), log σ²)` so that Gaussian kernel moves never
//! leave the stationary region. Every density in this module is returned in
//! log space.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Largest double strictly below one.
const ONE_BELOW: f64 = 1.0 - f64::EPSILON / 2.0;

/// Static parameters in their natural parameterization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvParams {
    /// Drift of the log-volatility autoregression.
    pub alpha: f64,
    /// Persistence, `|phi| < 1`.
    pub phi: f64,
    /// Innovation variance, `sigma2 > 0`.
    pub sigma2: f64,
}

/// Static parameters in the unconstrained coordinates used by the filters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SvParamsTransformed {
    pub alpha: f64,
    /// `log((1 + phi) / (1 - phi))`
    pub psi: f64,
    /// `log(sigma2)`
    pub lambda: f64,
}

impl SvParams {
    /// Builds a parameter set, rejecting non-stationary or degenerate values.
    pub fn new(alpha: f64, phi: f64, sigma2: f64) -> Result<Self> {
        let p = SvParams { alpha, phi, sigma2 };
        p.validate()?;
        Ok(p)
    }

    /// Parameters of the daily benchmark dataset.
    pub fn daily() -> Self {
        SvParams {
            alpha: 0.0,
            phi: 0.99,
            sigma2: 0.01,
        }
    }

    /// Parameters of the weekly benchmark dataset.
    pub fn weekly() -> Self {
        SvParams {
            alpha: 0.0,
            phi: 0.9,
            sigma2: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.phi.is_finite() && self.sigma2.is_finite()) {
            return Err(Error::Domain(format!("non-finite parameters {self:?}")));
        }
        if self.phi.abs() >= 1.0 {
            return Err(Error::Domain(format!(
                "phi = {} violates stationarity (|phi| < 1)",
                self.phi
            )));
        }
        if self.sigma2 <= 0.0 {
            return Err(Error::Domain(format!(
                "sigma2 = {} must be strictly positive",
                self.sigma2
            )));
        }
        Ok(())
    }

    pub fn to_transformed(&self) -> Result<SvParamsTransformed> {
        self.validate()?;
        Ok(SvParamsTransformed {
            alpha: self.alpha,
            psi: 2.0 * self.phi.atanh(),
            lambda: self.sigma2.ln(),
        })
    }

    /// Variance of the stationary law of the log-volatility.
    pub fn stationary_variance(&self) -> f64 {
        self.sigma2 / (1.0 - self.phi * self.phi)
    }

    /// As a `[alpha, phi, sigma2]` array.
    pub fn as_array(&self) -> [f64; 3] {
        [self.alpha, self.phi, self.sigma2]
    }
}

impl SvParamsTransformed {
    pub fn from_array(v: [f64; 3]) -> Self {
        SvParamsTransformed {
            alpha: v[0],
            psi: v[1],
            lambda: v[2],
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.alpha, self.psi, self.lambda]
    }

    /// Maps back to the natural parameterization.
    ///
    /// Saturating: extreme but finite coordinates still land strictly inside
    /// `|phi| < 1` and `0 < sigma2 < inf`.
    pub fn to_natural(&self) -> SvParams {
        let phi = (0.5 * self.psi).tanh().clamp(-ONE_BELOW, ONE_BELOW);
        let sigma2 = self.lambda.exp().clamp(f64::MIN_POSITIVE, f64::MAX);
        SvParams {
            alpha: self.alpha,
            phi,
            sigma2,
        }
    }
}

/// Provenance label stored next to a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetLabel {
    Daily,
    Weekly,
    Custom,
}

impl DatasetLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            DatasetLabel::Daily => "daily",
            DatasetLabel::Weekly => "weekly",
            DatasetLabel::Custom => "custom",
        }
    }

    /// True parameters and default horizon of the preset, `None` for custom.
    pub fn preset(&self) -> Option<(SvParams, usize)> {
        match self {
            DatasetLabel::Daily => Some((SvParams::daily(), 1500)),
            DatasetLabel::Weekly => Some((SvParams::weekly(), 500)),
            DatasetLabel::Custom => None,
        }
    }
}

impl std::str::FromStr for DatasetLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "daily" => Ok(DatasetLabel::Daily),
            "weekly" => Ok(DatasetLabel::Weekly),
            "custom" => Ok(DatasetLabel::Custom),
            other => Err(Error::Config(format!("unknown dataset label `{other}`"))),
        }
    }
}

impl std::fmt::Display for DatasetLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A simulated observation path together with its latent log-volatility.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// `y[t - 1]` is the observation at time `t`, for `t = 1..=T`.
    pub y: Vec<f64>,
    /// `x_true[t]` is the log-volatility at time `t`, for `t = 0..=T`.
    pub x_true: Vec<f64>,
    pub params_true: SvParams,
    pub seed: u64,
    pub label: DatasetLabel,
}

impl Dataset {
    /// Number of observations `T`.
    pub fn horizon(&self) -> usize {
        self.y.len()
    }

    /// Observation at time `t` (1-based).
    pub fn y_at(&self, t: usize) -> f64 {
        self.y[t - 1]
    }

    /// Observations `y_1..y_n`.
    pub fn window(&self, n: usize) -> &[f64] {
        &self.y[..n]
    }

    pub fn validate(&self) -> Result<()> {
        if self.y.is_empty() {
            return Err(Error::Domain("dataset horizon must be at least 1".into()));
        }
        if self.x_true.len() != self.y.len() + 1 {
            return Err(Error::Domain(format!(
                "x_true has length {} but horizon is {}",
                self.x_true.len(),
                self.y.len()
            )));
        }
        self.params_true.validate()
    }
}

/// Simulates `T` observations from the model.
///
/// Draw order is fixed (`x_0`, then `(x_t, y_t)` for each `t`), so a seeded
/// stream reproduces the dataset bit for bit.
pub fn simulate<R: Rng + ?Sized>(
    params: &SvParams,
    horizon: usize,
    seed: u64,
    label: DatasetLabel,
    rng: &mut R,
) -> Result<Dataset> {
    params.validate()?;
    if horizon == 0 {
        return Err(Error::Domain("horizon must be at least 1".into()));
    }
    let sigma = params.sigma2.sqrt();
    let mut x_true = Vec::with_capacity(horizon + 1);
    let mut y = Vec::with_capacity(horizon);

    let z: f64 = rng.sample(StandardNormal);
    let mut x = params.stationary_variance().sqrt() * z;
    x_true.push(x);
    for _ in 0..horizon {
        let e: f64 = rng.sample(StandardNormal);
        x = transition_mean(x, params) + sigma * e;
        let u: f64 = rng.sample(StandardNormal);
        x_true.push(x);
        y.push((0.5 * x).exp() * u);
    }
    Ok(Dataset {
        y,
        x_true,
        params_true: *params,
        seed,
        label,
    })
}

/// Simulates with the dataset's own seed, so `(params, horizon, seed)`
/// alone regenerates it.
pub fn simulate_seeded(params: &SvParams, horizon: usize, seed: u64, label: DatasetLabel) -> Result<Dataset> {
    let mut rng = crate::rng::stream(seed, crate::rng::streams::DATASET);
    simulate(params, horizon, seed, label, &mut rng)
}

/// Gaussian log-density.
#[inline]
pub fn normal_ln_pdf(x: f64, mean: f64, variance: f64) -> f64 {
    let d = x - mean;
    -0.5 * (LN_2PI + variance.ln() + d * d / variance)
}

/// `log p(y | x)` for `y ~ N(0, exp(x))`.
#[inline]
pub fn log_measurement_density(y: f64, x: f64) -> f64 {
    -0.5 * (LN_2PI + x + y * y * (-x).exp())
}

#[inline]
pub fn transition_mean(x_prev: f64, p: &SvParams) -> f64 {
    p.alpha + p.phi * x_prev
}

/// `log p(x_next | x_prev, θ)`.
#[inline]
pub fn log_transition_density(x_next: f64, x_prev: f64, p: &SvParams) -> f64 {
    normal_ln_pdf(x_next, transition_mean(x_prev, p), p.sigma2)
}

/// Mean and variance of a Gaussian proposal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianProposal {
    pub mean: f64,
    pub variance: f64,
}

impl GaussianProposal {
    pub fn ln_pdf(&self, x: f64) -> f64 {
        normal_ln_pdf(x, self.mean, self.variance)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        self.mean + self.variance.sqrt() * z
    }
}

/// Gaussian approximation of `N(x; prior_mean, 1/prior_precision) · p(y | x)`
/// obtained by expanding the log measurement density to second order at
/// the prior mean. `y2` is the squared observation already divided by any
/// scale factor on the measurement variance.
pub fn laplace_tilt(prior_mean: f64, prior_precision: f64, y2: f64) -> GaussianProposal {
    let e = y2 * (-prior_mean).exp();
    let grad = -0.5 + 0.5 * e;
    let curv = -0.5 * e;
    let precision = prior_precision - curv;
    GaussianProposal {
        mean: prior_mean + grad / precision,
        variance: 1.0 / precision,
    }
}

/// Shephard–Pitt proposal for `x_{t+1}` given `x_t`, `θ` and `y_{t+1}`.
pub fn shephard_pitt_proposal(x_prev: f64, p: &SvParams, y_next: f64) -> GaussianProposal {
    laplace_tilt(transition_mean(x_prev, p), 1.0 / p.sigma2, y_next * y_next)
}
