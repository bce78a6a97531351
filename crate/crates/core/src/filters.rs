//! Regularized SIS, SIR and auxiliary particle filters.
//!
//! Each step first moves every parameter particle with a Liu–West kernel
//! whose location and covariance come from the incoming weighted cloud,
//! then propagates the hidden state and reweights. The seven benchmark
//! variants are fixed combinations of [`Algorithm`], [`StateProposal`] and
//! [`ResampleRule`]; see [`Variant`].
//!
//! Per-particle randomness comes from a substream keyed by a per-step seed
//! and the particle's stream id, so a particle's move does not depend on
//! its position in the cloud.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gibbs::InitSample;
use crate::metrics;
use crate::model::{
    log_measurement_density, log_transition_density, shephard_pitt_proposal, transition_mean, Dataset,
    SvParams,
};
use crate::particles::{
    multinomial_indices, multinomial_resample, KernelConfig, LiuWestKernel, ParticleCloud,
};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    Sis,
    Sir,
    Apf,
}

/// Importance density for the hidden state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateProposal {
    Transition,
    ShephardPitt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResampleRule {
    Never,
    /// Resample after every step (`κ = N`).
    Always,
    /// Resample when `ESS < kappa_frac · N`.
    EssThreshold,
}

/// Parameters used for the APF first-stage predictive mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ApfSelection {
    /// Each particle's current parameters.
    Current,
    /// The kernel location `aθ + (1-a)θ̄`.
    Shrunk,
}

/// The seven benchmark filters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    Sis,
    SisP,
    Sir,
    SirP,
    SirR,
    SirRP,
    Apf,
}

impl Variant {
    pub const ALL: [Variant; 7] = [
        Variant::Sis,
        Variant::SisP,
        Variant::Sir,
        Variant::SirP,
        Variant::SirR,
        Variant::SirRP,
        Variant::Apf,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Variant::Sis => "SIS",
            Variant::SisP => "SIS-p",
            Variant::Sir => "SIR",
            Variant::SirP => "SIR-p",
            Variant::SirR => "SIR-r",
            Variant::SirRP => "SIR-r-p",
            Variant::Apf => "APF",
        }
    }

    pub fn index(&self) -> usize {
        Variant::ALL.iter().position(|v| v == self).unwrap()
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            Variant::Sis | Variant::SisP => Algorithm::Sis,
            Variant::Apf => Algorithm::Apf,
            _ => Algorithm::Sir,
        }
    }

    pub fn is_sis_family(&self) -> bool {
        self.algorithm() == Algorithm::Sis
    }

    pub fn is_sir_family(&self) -> bool {
        self.algorithm() == Algorithm::Sir
    }
}

impl ApfSelection {
    pub fn as_str(&self) -> &'static str {
        match self {
            ApfSelection::Current => "current",
            ApfSelection::Shrunk => "shrunk",
        }
    }
}

impl FromStr for ApfSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "current" => Ok(ApfSelection::Current),
            "shrunk" => Ok(ApfSelection::Shrunk),
            other => Err(Error::Config(format!(
                "unknown APF selection `{other}` (current|shrunk)"
            ))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .iter()
            .find(|v| v.label().eq_ignore_ascii_case(s))
            .copied()
            .ok_or_else(|| Error::Config(format!("unknown filter variant `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterConfig {
    pub algo: Algorithm,
    pub state_proposal: StateProposal,
    pub resample_rule: ResampleRule,
    /// Threshold fraction for [`ResampleRule::EssThreshold`].
    pub kappa_frac: f64,
    pub n_particles: usize,
    pub kernel: KernelConfig,
    pub apf_selection: ApfSelection,
}

impl FilterConfig {
    pub const DEFAULT_KAPPA_FRAC: f64 = 0.9;

    pub fn for_variant(variant: Variant, n_particles: usize) -> Self {
        use ResampleRule::*;
        use StateProposal::*;
        let (algo, state_proposal, resample_rule) = match variant {
            Variant::Sis => (Algorithm::Sis, Transition, Never),
            Variant::SisP => (Algorithm::Sis, ShephardPitt, Never),
            Variant::Sir => (Algorithm::Sir, Transition, Always),
            Variant::SirP => (Algorithm::Sir, ShephardPitt, Always),
            Variant::SirR => (Algorithm::Sir, Transition, EssThreshold),
            Variant::SirRP => (Algorithm::Sir, ShephardPitt, EssThreshold),
            Variant::Apf => (Algorithm::Apf, Transition, Never),
        };
        FilterConfig {
            algo,
            state_proposal,
            resample_rule,
            kappa_frac: Self::DEFAULT_KAPPA_FRAC,
            n_particles,
            kernel: KernelConfig::default(),
            apf_selection: ApfSelection::Current,
        }
    }

    pub fn with_kernel(mut self, kernel: KernelConfig) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn with_kappa_frac(mut self, kappa_frac: f64) -> Self {
        self.kappa_frac = kappa_frac;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_particles == 0 {
            return Err(Error::Config("particle count must be positive".into()));
        }
        if !(self.kappa_frac > 0.0 && self.kappa_frac <= 1.0) {
            return Err(Error::Config(format!(
                "kappa_frac = {} outside (0, 1]",
                self.kappa_frac
            )));
        }
        if self.algo == Algorithm::Sis && self.resample_rule != ResampleRule::Never {
            return Err(Error::Config("SIS never resamples".into()));
        }
        if self.algo == Algorithm::Apf && self.state_proposal != StateProposal::Transition {
            return Err(Error::Config("APF propagates with the transition density".into()));
        }
        self.kernel.validate()
    }

    /// Whether a cloud with the given ESS must be resampled.
    pub fn needs_resample(&self, ess: f64) -> bool {
        match self.resample_rule {
            ResampleRule::Never => false,
            ResampleRule::Always => true,
            ResampleRule::EssThreshold => ess < self.kappa_frac * self.n_particles as f64,
        }
    }
}

/// Log weight increment of the transition-proposal filters, up to a constant:
/// `-½ [y² exp(-x) + x]`.
#[inline]
pub fn transition_log_increment(y: f64, x_new: f64) -> f64 {
    -0.5 * (y * y * (-x_new).exp() + x_new)
}

/// APF second-stage log weight
/// `-½ [y² (exp(-x) - exp(-μ)) + x - μ]`, i.e. `log p(y|x) - log p(y|μ)`.
#[inline]
pub fn apf_log_factor(y: f64, x_new: f64, mu: f64) -> f64 {
    -0.5 * (y * y * ((-x_new).exp() - (-mu).exp()) + x_new - mu)
}

/// Full importance correction `log p(y|x') + log p(x'|x) - log q(x')`.
#[inline]
pub fn importance_log_increment(
    y: f64,
    x_prev: f64,
    x_new: f64,
    params: &SvParams,
    log_proposal: f64,
) -> f64 {
    log_measurement_density(y, x_new) + log_transition_density(x_new, x_prev, params) - log_proposal
}

fn finite_or_neg_inf(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

fn shift_to_max(log_weights: &mut [f64]) -> Result<()> {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::Degenerate("all updated log-weights are -inf".into()));
    }
    if max == f64::INFINITY {
        return Err(Error::Numerical("infinite log-weight".into()));
    }
    for lw in log_weights.iter_mut() {
        *lw -= max;
    }
    Ok(())
}

/// Kernel move plus state propagation and reweighting, shared by SIS and SIR.
///
/// Particle `i` draws from substream `stream_ids[i]` of `step_seed`.
pub(crate) fn propagate_with_streams(
    cloud: &ParticleCloud,
    y_next: f64,
    cfg: &FilterConfig,
    step_seed: u64,
    stream_ids: &[u64],
) -> Result<ParticleCloud> {
    let w = cloud.normalized_weights()?;
    let kernel = LiuWestKernel::from_cloud(&cloud.params, &w, &cfg.kernel)?;
    let n = cloud.len();
    let mut out = ParticleCloud {
        states: Vec::with_capacity(n),
        params: Vec::with_capacity(n),
        log_weights: Vec::with_capacity(n),
    };
    for (i, &id) in stream_ids[..n].iter().enumerate() {
        let mut r = rng::stream(step_seed, id);
        let theta = kernel.sample(&cloud.params[i], &mut r);
        let p = theta.to_natural();
        let x_prev = cloud.states[i];
        let (x_new, inc) = match cfg.state_proposal {
            StateProposal::Transition => {
                let z: f64 = r.sample(StandardNormal);
                let x = transition_mean(x_prev, &p) + p.sigma2.sqrt() * z;
                (x, transition_log_increment(y_next, x))
            }
            StateProposal::ShephardPitt => {
                let q = shephard_pitt_proposal(x_prev, &p, y_next);
                let x = q.sample(&mut r);
                (x, importance_log_increment(y_next, x_prev, x, &p, q.ln_pdf(x)))
            }
        };
        out.states.push(x_new);
        out.params.push(theta);
        out.log_weights
            .push(finite_or_neg_inf(cloud.log_weights[i] + inc));
    }
    shift_to_max(&mut out.log_weights)?;
    Ok(out)
}

fn identity_streams(n: usize) -> Vec<u64> {
    (0..n as u64).collect()
}

/// One regularized SIS step: kernel move, propagation, reweighting.
pub fn sis_step<R: Rng + ?Sized>(
    cloud: &ParticleCloud,
    y_next: f64,
    cfg: &FilterConfig,
    rng: &mut R,
) -> Result<ParticleCloud> {
    let step_seed = rng.random::<u64>();
    propagate_with_streams(cloud, y_next, cfg, step_seed, &identity_streams(cloud.len()))
}

/// Resamples `cloud` if the configured rule asks for it.
pub fn resample_if_needed<R: Rng + ?Sized>(
    cloud: ParticleCloud,
    cfg: &FilterConfig,
    rng: &mut R,
) -> Result<(ParticleCloud, bool)> {
    let ess = cloud.ess()?;
    if cfg.needs_resample(ess) {
        Ok((multinomial_resample(&cloud, rng)?, true))
    } else {
        Ok((cloud, false))
    }
}

/// One regularized SIR step. Returns the new cloud and whether it was
/// resampled.
pub fn sir_step<R: Rng + ?Sized>(
    cloud: &ParticleCloud,
    y_next: f64,
    cfg: &FilterConfig,
    rng: &mut R,
) -> Result<(ParticleCloud, bool)> {
    let propagated = sis_step(cloud, y_next, cfg, rng)?;
    resample_if_needed(propagated, cfg, rng)
}

/// First-stage predictive means `μ_k` and unnormalized log weights
/// `log w_k + log p(y | μ_k)`.
fn apf_first_stage(
    cloud: &ParticleCloud,
    kernel: &LiuWestKernel,
    y_next: f64,
    cfg: &FilterConfig,
) -> (Vec<f64>, Vec<f64>) {
    let n = cloud.len();
    let mut mu = Vec::with_capacity(n);
    let mut lg = Vec::with_capacity(n);
    for i in 0..n {
        let p = match cfg.apf_selection {
            ApfSelection::Current => cloud.params[i].to_natural(),
            ApfSelection::Shrunk => kernel.shrunk(&cloud.params[i]).to_natural(),
        };
        let m = transition_mean(cloud.states[i], &p);
        mu.push(m);
        lg.push(finite_or_neg_inf(
            cloud.log_weights[i] + log_measurement_density(y_next, m),
        ));
    }
    (mu, lg)
}

/// Normalized APF selection probabilities `g_k ∝ w_k p(y | μ_k)`.
pub fn apf_selection_weights(cloud: &ParticleCloud, y_next: f64, cfg: &FilterConfig) -> Result<Vec<f64>> {
    let w = cloud.normalized_weights()?;
    let kernel = LiuWestKernel::from_cloud(&cloud.params, &w, &cfg.kernel)?;
    let (_, lg) = apf_first_stage(cloud, &kernel, y_next, cfg);
    crate::particles::normalize(&lg)
}

/// Draws the APF ancestor indices.
pub fn apf_select<R: Rng + ?Sized>(
    cloud: &ParticleCloud,
    y_next: f64,
    cfg: &FilterConfig,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let g = apf_selection_weights(cloud, y_next, cfg)?;
    multinomial_indices(&g, cloud.len(), rng)
}

/// One regularized auxiliary particle filter step.
///
/// The returned weights are the second-stage ratios only; the incoming
/// weights were consumed by the selection.
pub fn apf_step<R: Rng + ?Sized>(
    cloud: &ParticleCloud,
    y_next: f64,
    cfg: &FilterConfig,
    rng: &mut R,
) -> Result<ParticleCloud> {
    let step_seed = rng.random::<u64>();
    let w = cloud.normalized_weights()?;
    let kernel = LiuWestKernel::from_cloud(&cloud.params, &w, &cfg.kernel)?;
    let (mu, lg) = apf_first_stage(cloud, &kernel, y_next, cfg);
    let g = crate::particles::normalize(&lg)?;
    let idx = multinomial_indices(&g, cloud.len(), rng)?;

    let n = cloud.len();
    let mut out = ParticleCloud {
        states: Vec::with_capacity(n),
        params: Vec::with_capacity(n),
        log_weights: Vec::with_capacity(n),
    };
    for (i, &j) in idx.iter().enumerate() {
        let mut r = rng::stream(step_seed, i as u64);
        let theta = kernel.sample(&cloud.params[j], &mut r);
        let p = theta.to_natural();
        let z: f64 = r.sample(StandardNormal);
        let x = transition_mean(cloud.states[j], &p) + p.sigma2.sqrt() * z;
        out.states.push(x);
        out.params.push(theta);
        out.log_weights
            .push(finite_or_neg_inf(apf_log_factor(y_next, x, mu[j])));
    }
    shift_to_max(&mut out.log_weights)?;
    Ok(out)
}

/// Posterior means of the state and of the natural parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilteredEstimate {
    pub x_mean: f64,
    pub params: SvParams,
}

impl FilteredEstimate {
    /// `[x, alpha, phi, sigma2]`
    pub fn as_array(&self) -> [f64; 4] {
        [
            self.x_mean,
            self.params.alpha,
            self.params.phi,
            self.params.sigma2,
        ]
    }
}

/// Weighted means; parameters are mapped to natural space per particle
/// before averaging.
pub fn filtered_estimate(cloud: &ParticleCloud) -> Result<FilteredEstimate> {
    let w = cloud.normalized_weights()?;
    let mut acc = [0.0; 4];
    for ((wi, x), theta) in w.iter().zip(&cloud.states).zip(&cloud.params) {
        if *wi == 0.0 {
            continue;
        }
        let p = theta.to_natural();
        acc[0] += wi * x;
        acc[1] += wi * p.alpha;
        acc[2] += wi * p.phi;
        acc[3] += wi * p.sigma2;
    }
    Ok(FilteredEstimate {
        x_mean: acc[0],
        params: SvParams {
            alpha: acc[1],
            phi: acc[2],
            sigma2: acc[3],
        },
    })
}

/// One assimilated observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    pub t: usize,
    pub x_true: f64,
    pub x_mean: f64,
    pub alpha_mean: f64,
    pub phi_mean: f64,
    pub sigma2_mean: f64,
    /// ESS of the reweighted cloud, before any resampling.
    pub ess: f64,
    /// Cumulated RMSE over `(x, alpha, phi, sigma2)`.
    pub rmse_cum: f64,
    pub resampled: bool,
}

/// Where and why a run stopped early.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    pub t: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub algo: String,
    pub n_particles: usize,
    pub start_index: usize,
    pub steps: Vec<TraceStep>,
    /// Per-component cumulated RMSE, in `[x, alpha, phi, sigma2]` order.
    pub component_rmse: [Vec<f64>; 4],
    pub final_cloud: ParticleCloud,
    pub failure: Option<RunFailure>,
}

impl RunTrace {
    pub fn is_degenerate(&self) -> bool {
        self.failure.is_some()
    }

    /// First time at which the ESS fell below `frac · N`.
    pub fn ess_collapse_time(&self, frac: f64) -> Option<usize> {
        let bound = frac * self.n_particles as f64;
        self.steps.iter().find(|s| s.ess < bound).map(|s| s.t)
    }

    pub fn last(&self) -> Option<&TraceStep> {
        self.steps.last()
    }
}

/// Assimilates `y_{n+1..T}` starting from the initial sample at time `n`.
///
/// A degenerate or numerically failed step ends the run; the trace up to
/// that point is kept and [`RunTrace::failure`] records the cause.
pub fn run_filter<R: Rng + ?Sized>(
    dataset: &Dataset,
    init: &InitSample,
    cfg: &FilterConfig,
    label: &str,
    rng: &mut R,
) -> Result<RunTrace> {
    cfg.validate()?;
    let n0 = init.start_index;
    if n0 < 2 {
        return Err(Error::Domain(format!("start index n = {n0} must be >= 2")));
    }
    if n0 > dataset.horizon() {
        return Err(Error::Domain(format!(
            "start index n = {n0} beyond horizon T = {}",
            dataset.horizon()
        )));
    }
    if init.len() != cfg.n_particles {
        return Err(Error::Config(format!(
            "initial sample has {} particles but the filter expects {}",
            init.len(),
            cfg.n_particles
        )));
    }
    let truth = dataset.params_true;
    let mut cloud = init.to_cloud()?;
    let mut steps = Vec::with_capacity(dataset.horizon() - n0);
    let mut estimates = Vec::with_capacity(dataset.horizon() - n0);
    let mut truths = Vec::with_capacity(dataset.horizon() - n0);
    let mut failure = None;

    for t in n0 + 1..=dataset.horizon() {
        let y = dataset.y_at(t);
        let stepped = match cfg.algo {
            Algorithm::Sis | Algorithm::Sir => sis_step(&cloud, y, cfg, rng),
            Algorithm::Apf => apf_step(&cloud, y, cfg, rng),
        };
        let assessed = stepped.and_then(|c| {
            let ess = c.ess()?;
            let est = filtered_estimate(&c)?;
            Ok((c, ess, est))
        });
        let (propagated, ess, est) = match assessed {
            Ok(v) => v,
            Err(e) => {
                failure = Some(RunFailure {
                    t,
                    message: e.to_string(),
                });
                break;
            }
        };
        let mut resampled = false;
        cloud = if cfg.needs_resample(ess) {
            resampled = true;
            match multinomial_resample(&propagated, rng) {
                Ok(c) => c,
                Err(e) => {
                    failure = Some(RunFailure {
                        t,
                        message: e.to_string(),
                    });
                    break;
                }
            }
        } else {
            propagated
        };
        let x_true = dataset.x_true[t];
        estimates.push(est.as_array());
        truths.push([x_true, truth.alpha, truth.phi, truth.sigma2]);
        steps.push(TraceStep {
            t,
            x_true,
            x_mean: est.x_mean,
            alpha_mean: est.params.alpha,
            phi_mean: est.params.phi,
            sigma2_mean: est.params.sigma2,
            ess,
            rmse_cum: 0.0,
            resampled,
        });
    }

    let rmse = metrics::rmse_trace(&estimates, &truths)?;
    for (s, r) in steps.iter_mut().zip(&rmse.aggregate) {
        s.rmse_cum = *r;
    }
    Ok(RunTrace {
        algo: label.to_string(),
        n_particles: cfg.n_particles,
        start_index: n0,
        steps,
        component_rmse: rmse.components,
        final_cloud: cloud,
        failure,
    })
}
