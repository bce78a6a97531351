//! Metropolis-within-Gibbs startup sampler.
//!
//! The prior `p(β², φ, σ²) ∝ 1/(σβ)` on `(-1, 1)` is improper, so the filters
//! cannot start from it. Instead the posterior given `y_1..y_n` is sampled by
//! MCMC and the retained draws become a uniformly weighted particle set at
//! time `n`.
//!
//! The sampler works with the centered model
//!
//! ```text
//! y_t | x_t   ~ N(0, β² exp(x_t))
//! x_t         = φ x_{t-1} + σ ε_t,    x_1 ~ N(0, σ² / (1 - φ²))
//! ```
//!
//! and converts each draw to the drift parameterization used by the filters
//! with `α = (1 - φ) log β²` and `x ↦ x + log β²`, which describe the same law
//! for the observations.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::model::{laplace_tilt, GaussianProposal, SvParamsTransformed};
use crate::particles::ParticleCloud;
use crate::rng;

/// Smallest inverse-gamma scale accepted by the conjugate samplers.
pub const SCALE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GibbsConfig {
    /// Length of the startup window `y_1..y_n`.
    pub n: usize,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
}

impl GibbsConfig {
    pub const DEFAULT_BURN_IN: usize = 2000;

    /// Burn-in of 2000 sweeps followed by exactly `n_particles` kept sweeps.
    pub fn for_particles(n: usize, n_particles: usize) -> Self {
        GibbsConfig {
            n,
            iterations: Self::DEFAULT_BURN_IN + n_particles,
            burn_in: Self::DEFAULT_BURN_IN,
            thin: 1,
        }
    }

    pub fn kept(&self) -> usize {
        if self.thin == 0 || self.iterations <= self.burn_in {
            return 0;
        }
        (self.iterations - self.burn_in).div_ceil(self.thin)
    }

    pub fn validate(&self, n_particles: usize) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Domain(format!(
                "startup window n = {} must be >= 2 for a proper posterior",
                self.n
            )));
        }
        if self.thin == 0 {
            return Err(Error::Config("thin must be >= 1".into()));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::Config(format!(
                "burn_in = {} must be below iterations = {}",
                self.burn_in, self.iterations
            )));
        }
        if self.kept() < n_particles {
            return Err(Error::Config(format!(
                "{} retained sweeps cannot supply {} particles",
                self.kept(),
                n_particles
            )));
        }
        Ok(())
    }
}

/// Uniformly weighted particles anchored at time `start_index`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitSample {
    pub start_index: usize,
    /// `x_n` per particle, in the filter's parameterization.
    pub states: Vec<f64>,
    pub params: Vec<SvParamsTransformed>,
}

impl InitSample {
    pub fn new(start_index: usize, states: Vec<f64>, params: Vec<SvParamsTransformed>) -> Result<Self> {
        if states.is_empty() || states.len() != params.len() {
            return Err(Error::Domain(format!(
                "initial sample needs matching non-empty states/params ({} vs {})",
                states.len(),
                params.len()
            )));
        }
        Ok(InitSample {
            start_index,
            states,
            params,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// The sample as a particle cloud with weights `1/N`.
    pub fn to_cloud(&self) -> Result<ParticleCloud> {
        ParticleCloud::uniform(self.states.clone(), self.params.clone())
    }
}

/// Inverse-gamma draw with density `∝ z^{-shape-1} exp(-scale/z)`.
pub fn sample_inverse_gamma<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> Result<f64> {
    if !scale.is_finite() || scale < SCALE_FLOOR {
        return Err(Error::Numerical(format!(
            "inverse-gamma scale {scale:e} below floor {SCALE_FLOOR:e}"
        )));
    }
    let g = Gamma::new(shape, 1.0).map_err(|e| Error::Domain(format!("inverse-gamma shape {shape}: {e}")))?;
    Ok(scale / g.sample(rng))
}

/// `β² | y, x ~ IG(shape (n-1)/2, scale Σ y_t² exp(-x_t) / 2)`.
pub fn sample_beta2<R: Rng + ?Sized>(y: &[f64], x: &[f64], rng: &mut R) -> Result<f64> {
    let n = check_window(y.len(), x.len())?;
    let scale = y.iter().zip(x).map(|(yt, xt)| yt * yt * (-xt).exp()).sum::<f64>() / 2.0;
    sample_inverse_gamma((n as f64 - 1.0) / 2.0, scale, rng)
}

/// Sum of squared AR residuals including the stationary term for `x_1`.
fn ar_sum_of_squares(x: &[f64], phi: f64) -> f64 {
    let mut s = x[0] * x[0] * (1.0 - phi * phi);
    for t in 1..x.len() {
        let r = x[t] - phi * x[t - 1];
        s += r * r;
    }
    s
}

/// `σ² | x, φ ~ IG(shape (n-1)/2, scale [Σ (x_t - φ x_{t-1})² + x_1²(1-φ²)] / 2)`.
pub fn sample_sigma2<R: Rng + ?Sized>(x: &[f64], phi: f64, rng: &mut R) -> Result<f64> {
    let n = check_window(x.len(), x.len())?;
    if phi.abs() >= 1.0 {
        return Err(Error::Domain(format!("phi = {phi} outside (-1, 1)")));
    }
    sample_inverse_gamma((n as f64 - 1.0) / 2.0, ar_sum_of_squares(x, phi) / 2.0, rng)
}

fn check_window(a: usize, b: usize) -> Result<usize> {
    if a != b {
        return Err(Error::Domain(format!("window length mismatch ({a} vs {b})")));
    }
    if a < 2 {
        return Err(Error::Domain(format!("window length {a} must be >= 2")));
    }
    Ok(a)
}

/// Outcome of one Metropolis–Hastings update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MhDraw {
    pub value: f64,
    pub proposed: f64,
    pub accept_prob: f64,
    pub accepted: bool,
}

/// Independence-sampler MH update from `current` to `proposed`.
fn mh_accept<R: Rng + ?Sized>(
    current: f64,
    proposed: f64,
    log_target: impl Fn(f64) -> f64,
    log_proposal: impl Fn(f64) -> f64,
    rng: &mut R,
) -> MhDraw {
    let accept_prob = independence_accept_prob(current, proposed, &log_target, &log_proposal);
    let u: f64 = rng.random();
    let accepted = u < accept_prob;
    MhDraw {
        value: if accepted { proposed } else { current },
        proposed,
        accept_prob,
        accepted,
    }
}

fn independence_accept_prob(
    current: f64,
    proposed: f64,
    log_target: impl Fn(f64) -> f64,
    log_proposal: impl Fn(f64) -> f64,
) -> f64 {
    let num = log_target(proposed) - log_proposal(proposed);
    let den = log_target(current) - log_proposal(current);
    let log_ratio = num - den;
    if log_ratio.is_nan() {
        // both at -inf: cannot happen for a current point inside the support
        return 0.0;
    }
    log_ratio.min(0.0).exp()
}

/// Unnormalized log full conditional of `φ`:
/// `½ log(1-φ²) - [x_1²(1-φ²) + Σ_{t≥2} (x_t - φ x_{t-1})²] / (2σ²)` on `(-1, 1)`.
pub fn phi_log_target(x: &[f64], sigma2: f64, phi: f64) -> f64 {
    if phi.abs() >= 1.0 {
        return f64::NEG_INFINITY;
    }
    0.5 * (1.0 - phi * phi).ln() - ar_sum_of_squares(x, phi) / (2.0 * sigma2)
}

/// Proposal for `φ`: the Gaussian carried by the quadratic part of the
/// conditional, truncated to `(-1, 1)`, or a uniform on `(-1, 1)` when that
/// Gaussian puts little mass there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhiProposal {
    Truncated(GaussianProposal),
    Uniform,
}

impl PhiProposal {
    pub fn new(x: &[f64], sigma2: f64) -> Self {
        let n = x.len();
        let quad: f64 = x[1..n - 1].iter().map(|v| v * v).sum();
        let cross: f64 = (1..n).map(|t| x[t] * x[t - 1]).sum();
        if quad <= 1e-300 {
            return PhiProposal::Uniform;
        }
        let g = GaussianProposal {
            mean: cross / quad,
            variance: sigma2 / quad,
        };
        let sd = g.variance.sqrt();
        if sd < 2.0 && g.mean.abs() < 1.0 + sd {
            PhiProposal::Truncated(g)
        } else {
            PhiProposal::Uniform
        }
    }

    /// Log density up to a constant on `(-1, 1)`.
    pub fn ln_pdf(&self, phi: f64) -> f64 {
        if phi.abs() >= 1.0 {
            return f64::NEG_INFINITY;
        }
        match self {
            PhiProposal::Truncated(g) => g.ln_pdf(phi),
            PhiProposal::Uniform => 0.0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            PhiProposal::Truncated(g) => loop {
                let v = g.sample(rng);
                if v.abs() < 1.0 {
                    return v;
                }
            },
            PhiProposal::Uniform => loop {
                let v = rng.random::<f64>() * 2.0 - 1.0;
                if v > -1.0 {
                    return v;
                }
            },
        }
    }
}

/// MH acceptance probability for moving `φ` from `current` to `proposed`.
pub fn phi_accept_prob(x: &[f64], sigma2: f64, current: f64, proposed: f64) -> f64 {
    let q = PhiProposal::new(x, sigma2);
    independence_accept_prob(
        current,
        proposed,
        |p| phi_log_target(x, sigma2, p),
        |p| q.ln_pdf(p),
    )
}

/// One MH update of `φ`.
pub fn sample_phi_mh<R: Rng + ?Sized>(
    x: &[f64],
    sigma2: f64,
    phi_current: f64,
    rng: &mut R,
) -> Result<MhDraw> {
    check_window(x.len(), x.len())?;
    if phi_current.abs() >= 1.0 {
        return Err(Error::Domain(format!("phi = {phi_current} outside (-1, 1)")));
    }
    let q = PhiProposal::new(x, sigma2);
    let proposed = q.sample(rng);
    Ok(mh_accept(
        phi_current,
        proposed,
        |p| phi_log_target(x, sigma2, p),
        |p| q.ln_pdf(p),
        rng,
    ))
}

/// Coordinates shared by the `x_t` conditional and its proposal.
#[derive(Debug, Clone, Copy)]
pub struct XContext {
    pub y: f64,
    pub beta2: f64,
    pub phi: f64,
    pub sigma2: f64,
}

/// Unnormalized log full conditional of `x[idx]` (0-based) evaluated at `value`.
///
/// Left factor: the AR transition from `x[idx-1]`, or the stationary law at
/// the first index. Right factor: the transition into `x[idx+1]`, absent at
/// the last index.
pub fn x_log_target(idx: usize, value: f64, x: &[f64], ctx: &XContext) -> f64 {
    let XContext {
        y,
        beta2,
        phi,
        sigma2,
    } = *ctx;
    let left = if idx == 0 {
        (1.0 - phi * phi) * value * value
    } else {
        let r = value - phi * x[idx - 1];
        r * r
    };
    let right = if idx + 1 < x.len() {
        let r = x[idx + 1] - phi * value;
        r * r
    } else {
        0.0
    };
    -(left + right) / (2.0 * sigma2) - 0.5 * (value + y * y * (-value).exp() / beta2)
}

/// Shephard–Pitt proposal for `x[idx]`, built on the two-sided AR prior.
pub fn x_proposal(idx: usize, x: &[f64], ctx: &XContext) -> GaussianProposal {
    let n = x.len();
    let (phi, s2) = (ctx.phi, ctx.sigma2);
    let (precision, mean) = if idx == 0 {
        (1.0 / s2, phi * x[1])
    } else if idx + 1 == n {
        (1.0 / s2, phi * x[n - 2])
    } else {
        let k = 1.0 + phi * phi;
        (k / s2, phi * (x[idx - 1] + x[idx + 1]) / k)
    };
    laplace_tilt(mean, precision, ctx.y * ctx.y / ctx.beta2)
}

/// MH acceptance probability for moving `x[idx]` to `proposed`.
pub fn x_accept_prob(idx: usize, proposed: f64, x: &[f64], ctx: &XContext) -> f64 {
    let q = x_proposal(idx, x, ctx);
    independence_accept_prob(
        x[idx],
        proposed,
        |v| x_log_target(idx, v, x, ctx),
        |v| q.ln_pdf(v),
    )
}

/// One MH update of `x[idx]` (0-based index into the window `x_1..x_n`).
pub fn sample_x_mh<R: Rng + ?Sized>(idx: usize, x: &[f64], ctx: &XContext, rng: &mut R) -> Result<MhDraw> {
    check_window(x.len(), x.len())?;
    if idx >= x.len() {
        return Err(Error::Domain(format!(
            "index {idx} outside window of {}",
            x.len()
        )));
    }
    let q = x_proposal(idx, x, ctx);
    let proposed = q.sample(rng);
    Ok(mh_accept(
        x[idx],
        proposed,
        |v| x_log_target(idx, v, x, ctx),
        |v| q.ln_pdf(v),
        rng,
    ))
}

/// Current state of the startup chain.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsState {
    pub beta2: f64,
    pub phi: f64,
    pub sigma2: f64,
    pub x: Vec<f64>,
}

impl GibbsState {
    /// Data-driven starting point: centered log squared observations.
    pub fn initial(y: &[f64]) -> Self {
        let mean_sq = y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64;
        let eps = 1e-3 * mean_sq.max(1e-12);
        let c: Vec<f64> = y.iter().map(|v| (v * v + eps).ln()).collect();
        let cbar = c.iter().sum::<f64>() / c.len() as f64;
        GibbsState {
            beta2: mean_sq.max(1e-12),
            phi: 0.5,
            sigma2: 0.1,
            x: c.iter().map(|v| 0.5 * (v - cbar)).collect(),
        }
    }

    /// Particle in the filter's parameterization.
    pub fn export(&self) -> (f64, SvParamsTransformed) {
        let shift = self.beta2.ln();
        let state = self.x[self.x.len() - 1] + shift;
        let theta = SvParamsTransformed {
            alpha: (1.0 - self.phi) * shift,
            psi: 2.0 * self.phi.atanh(),
            lambda: self.sigma2.ln(),
        };
        (state, theta)
    }
}

/// Acceptance counters of the MH coordinates.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Acceptance {
    pub phi_accepted: u64,
    pub phi_proposed: u64,
    pub x_accepted: u64,
    pub x_proposed: u64,
}

impl Acceptance {
    pub fn phi_rate(&self) -> f64 {
        self.phi_accepted as f64 / self.phi_proposed.max(1) as f64
    }

    pub fn x_rate(&self) -> f64 {
        self.x_accepted as f64 / self.x_proposed.max(1) as f64
    }
}

/// A single Metropolis-within-Gibbs chain over `(β², σ², φ, x_1..x_n)`.
#[derive(Debug, Clone)]
pub struct GibbsSampler<'a> {
    y: &'a [f64],
    pub state: GibbsState,
    pub acceptance: Acceptance,
}

impl<'a> GibbsSampler<'a> {
    pub fn new(y: &'a [f64]) -> Result<Self> {
        if y.len() < 2 {
            return Err(Error::Domain(format!(
                "startup window n = {} must be >= 2 for a proper posterior",
                y.len()
            )));
        }
        Ok(GibbsSampler {
            y,
            state: GibbsState::initial(y),
            acceptance: Acceptance::default(),
        })
    }

    /// One full sweep: `β²`, `σ²`, `φ`, then each `x_t` in turn.
    pub fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        self.state.beta2 = sample_beta2(self.y, &self.state.x, rng)?;
        self.sweep_given_beta2(rng)
    }

    /// The `σ²`, `φ` and `x_t` updates of a sweep with `β²` held at its
    /// current value. With `β²` fixed the joint target is proper for any
    /// `n >= 1`, which makes this block checkable on tiny instances.
    pub fn sweep_given_beta2<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<()> {
        let s = &mut self.state;
        s.sigma2 = sample_sigma2(&s.x, s.phi, rng)?;
        let d = sample_phi_mh(&s.x, s.sigma2, s.phi, rng)?;
        s.phi = d.value;
        self.acceptance.phi_proposed += 1;
        self.acceptance.phi_accepted += d.accepted as u64;
        for idx in 0..s.x.len() {
            let ctx = XContext {
                y: self.y[idx],
                beta2: s.beta2,
                phi: s.phi,
                sigma2: s.sigma2,
            };
            let d = sample_x_mh(idx, &s.x, &ctx, rng)?;
            s.x[idx] = d.value;
            self.acceptance.x_proposed += 1;
            self.acceptance.x_accepted += d.accepted as u64;
        }
        Ok(())
    }
}

/// Runs one chain on `y_1..y_n` and returns `n_particles` retained draws.
pub fn run_gibbs<R: Rng + ?Sized>(
    y: &[f64],
    cfg: &GibbsConfig,
    n_particles: usize,
    rng: &mut R,
) -> Result<InitSample> {
    cfg.validate(n_particles)?;
    if y.len() != cfg.n {
        return Err(Error::Domain(format!(
            "window has {} observations, config expects n = {}",
            y.len(),
            cfg.n
        )));
    }
    let mut sampler = GibbsSampler::new(y)?;
    let mut states = Vec::with_capacity(n_particles);
    let mut params = Vec::with_capacity(n_particles);
    for sweep in 0..cfg.iterations {
        sampler.sweep(rng)?;
        if sweep >= cfg.burn_in && (sweep - cfg.burn_in).is_multiple_of(cfg.thin) {
            let (x, theta) = sampler.state.export();
            states.push(x);
            params.push(theta);
            if states.len() == n_particles {
                break;
            }
        }
    }
    InitSample::new(cfg.n, states, params)
}

/// Runs one chain per seed and pools their draws round-robin.
///
/// Each chain keeps `ceil(N / chains)` draws; particle `i` comes from chain
/// `i mod chains`.
pub fn run_gibbs_chains(
    y: &[f64],
    cfg: &GibbsConfig,
    n_particles: usize,
    seeds: &[u64],
) -> Result<InitSample> {
    if seeds.is_empty() {
        return Err(Error::Config("at least one chain seed is required".into()));
    }
    let per_chain = n_particles.div_ceil(seeds.len());
    let chain_cfg = GibbsConfig {
        iterations: cfg.burn_in + cfg.thin * per_chain,
        ..*cfg
    };
    let chains = seeds
        .iter()
        .map(|&s| {
            let mut r = rng::stream(s, rng::streams::GIBBS);
            run_gibbs(y, &chain_cfg, per_chain, &mut r)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut states = Vec::with_capacity(n_particles);
    let mut params = Vec::with_capacity(n_particles);
    for i in 0..n_particles {
        let c = &chains[i % seeds.len()];
        states.push(c.states[i / seeds.len()]);
        params.push(c.params[i / seeds.len()]);
    }
    InitSample::new(cfg.n, states, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn inverse_gamma_mean() {
        let mut r = stream(1, 0);
        let n = 1_000_000;
        let m = (0..n)
            .map(|_| sample_inverse_gamma(2.0, 4.0, &mut r).unwrap())
            .sum::<f64>()
            / n as f64;
        // scale / (shape - 1) = 4
        assert!((m - 4.0).abs() / 4.0 < 0.01, "{m}");
    }

    #[test]
    fn beta2_uses_scale_and_shape() {
        // n = 5, Σ y² e^{-x} = 8 -> shape 2, scale 4
        let y = [2.0, 0.0, 0.0, 0.0, 2.0];
        let x = [0.0; 5];
        let mut r = stream(2, 0);
        let draws: Vec<f64> = (0..200_000)
            .map(|_| sample_beta2(&y, &x, &mut r).unwrap())
            .collect();
        assert!(draws.iter().all(|d| *d > 0.0));
        let m = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!((m - 4.0).abs() / 4.0 < 0.03, "{m}");
    }

    #[test]
    fn sigma2_floor_errors_on_zero_path() {
        let mut r = stream(3, 0);
        assert!(matches!(
            sample_sigma2(&[0.0; 10], 0.5, &mut r),
            Err(Error::Numerical(_))
        ));
        let v = sample_sigma2(&[0.1, -0.2, 0.3], 0.5, &mut r).unwrap();
        assert!(v > 0.0);
    }

    #[test]
    fn phi_acceptance_is_one_for_identical_proposal() {
        let x = [0.3, -0.1, 0.4, 0.2, -0.5];
        assert_eq!(phi_accept_prob(&x, 0.2, 0.4, 0.4), 1.0);
        for (c, p) in [(0.1, 0.9), (-0.7, 0.2), (0.99, -0.99)] {
            let a = phi_accept_prob(&x, 0.2, c, p);
            assert!((0.0..=1.0).contains(&a));
        }
    }

    #[test]
    fn phi_draws_stay_in_unit_interval() {
        let mut r = stream(4, 0);
        let x: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut phi = 0.0;
        for _ in 0..2000 {
            phi = sample_phi_mh(&x, 0.05, phi, &mut r).unwrap().value;
            assert!(phi.abs() < 1.0);
        }
        // n = 2: no quadratic information, uniform proposal
        let phi = sample_phi_mh(&[0.5, 0.4], 0.1, 0.2, &mut r).unwrap().value;
        assert!(phi.abs() < 1.0);
    }

    #[test]
    fn x_acceptance_in_unit_interval() {
        let x = [0.1, 0.3, -0.2, 0.5];
        let ctx = XContext {
            y: 1.3,
            beta2: 0.7,
            phi: 0.9,
            sigma2: 0.1,
        };
        for idx in 0..4 {
            assert_eq!(x_accept_prob(idx, x[idx], &x, &ctx), 1.0);
            for p in [-3.0, 0.0, 2.0] {
                let a = x_accept_prob(idx, p, &x, &ctx);
                assert!((0.0..=1.0).contains(&a));
            }
        }
    }

    #[test]
    fn run_gibbs_rejects_short_window() {
        let mut r = stream(5, 0);
        let cfg = GibbsConfig {
            n: 1,
            iterations: 10,
            burn_in: 0,
            thin: 1,
        };
        assert!(matches!(
            run_gibbs(&[0.3], &cfg, 5, &mut r),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn run_gibbs_output_shape_and_determinism() {
        let d = crate::model::simulate_seeded(
            &crate::model::SvParams::weekly(),
            60,
            8,
            crate::model::DatasetLabel::Weekly,
        )
        .unwrap();
        let cfg = GibbsConfig {
            n: 60,
            iterations: 300,
            burn_in: 100,
            thin: 2,
        };
        let a = run_gibbs(d.window(60), &cfg, 100, &mut stream(6, 1)).unwrap();
        let b = run_gibbs(d.window(60), &cfg, 100, &mut stream(6, 1)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 100);
        assert_eq!(a.start_index, 60);
        let cloud = a.to_cloud().unwrap();
        let w = cloud.normalized_weights().unwrap();
        assert!(w.iter().all(|v| (v - 0.01).abs() < 1e-15));
        for p in &a.params {
            let nat = p.to_natural();
            assert!(nat.phi.abs() < 1.0 && nat.sigma2 > 0.0);
        }
        assert!(cfg.validate(101).is_err());
    }

    #[test]
    fn pooled_chains_interleave() {
        let d = crate::model::simulate_seeded(
            &crate::model::SvParams::weekly(),
            30,
            9,
            crate::model::DatasetLabel::Weekly,
        )
        .unwrap();
        let cfg = GibbsConfig {
            n: 30,
            iterations: 60,
            burn_in: 50,
            thin: 1,
        };
        let pooled = run_gibbs_chains(d.window(30), &cfg, 10, &[1, 2]).unwrap();
        assert_eq!(pooled.len(), 10);
        let single_cfg = GibbsConfig {
            iterations: 55,
            ..cfg
        };
        let first = run_gibbs(d.window(30), &single_cfg, 5, &mut stream(1, rng::streams::GIBBS)).unwrap();
        assert_eq!(pooled.states[0], first.states[0]);
        assert_eq!(pooled.states[2], first.states[1]);
    }

    #[test]
    fn export_matches_drift_parameterization() {
        let s = GibbsState {
            beta2: 4.0,
            phi: 0.5,
            sigma2: 0.2,
            x: vec![0.0, 1.0],
        };
        let (x, theta) = s.export();
        assert!((x - (1.0 + 4f64.ln())).abs() < 1e-15);
        assert!((theta.alpha - 0.5 * 4f64.ln()).abs() < 1e-15);
        let nat = theta.to_natural();
        assert!((nat.phi - 0.5).abs() < 1e-15 && (nat.sigma2 - 0.2).abs() < 1e-15);
    }
}
