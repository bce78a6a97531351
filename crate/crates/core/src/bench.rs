//! Experiment orchestration: simulate, initialize, filter, summarize.
//!
//! Run `r` of an experiment uses seed `seed + r`. The dataset, the Gibbs
//! chain and each filter variant draw from distinct streams of that seed
//! (see [`crate::rng::streams`]), so results are identical whatever the
//! execution order or thread count.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::filters::{run_filter, ApfSelection, FilterConfig, RunTrace, Variant};
use crate::gibbs::{run_gibbs, GibbsConfig, InitSample};
use crate::metrics::{self, aggregate_across_runs, EnvelopePoint, ParamMse, RunSummary, SummaryRow};
use crate::model::{simulate_seeded, Dataset, DatasetLabel, SvParams};
use crate::particles::KernelConfig;
use crate::rng::{self, streams};

/// Where the observations of each run come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    /// Simulate from the given parameters with the run's seed.
    Simulated {
        label: DatasetLabel,
        params: SvParams,
        horizon: usize,
    },
    /// Use this dataset for every run.
    Fixed(Dataset),
}

impl DatasetSource {
    pub fn preset(label: DatasetLabel) -> Result<Self> {
        let (params, horizon) = label
            .preset()
            .ok_or_else(|| Error::Config("custom datasets need explicit parameters".into()))?;
        Ok(DatasetSource::Simulated {
            label,
            params,
            horizon,
        })
    }

    pub fn truth(&self) -> SvParams {
        match self {
            DatasetSource::Simulated { params, .. } => *params,
            DatasetSource::Fixed(d) => d.params_true,
        }
    }

    pub fn label(&self) -> DatasetLabel {
        match self {
            DatasetSource::Simulated { label, .. } => *label,
            DatasetSource::Fixed(d) => d.label,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: DatasetSource,
    pub particles: usize,
    /// Startup window `n` for the Gibbs initializer.
    pub init_n: usize,
    pub runs: usize,
    pub seed: u64,
    pub variants: Vec<Variant>,
    pub kappa_frac: f64,
    pub kernel: KernelConfig,
    pub apf_selection: ApfSelection,
    /// Gibbs burn-in sweeps; draws after burn-in are kept consecutively.
    pub burn_in: usize,
    /// Reuse the dataset of run 0 for every run.
    pub fixed_dataset: bool,
    /// Worker threads; 0 lets rayon decide.
    pub jobs: usize,
}

impl ExperimentConfig {
    /// Desk-scale defaults: `N = 2000`, `R = 10`, `n = 100`.
    pub fn desk_scale(label: DatasetLabel) -> Result<Self> {
        Ok(ExperimentConfig {
            source: DatasetSource::preset(label)?,
            particles: 2000,
            init_n: 100,
            runs: 10,
            seed: 1,
            variants: Variant::ALL.to_vec(),
            kappa_frac: FilterConfig::DEFAULT_KAPPA_FRAC,
            kernel: KernelConfig::default(),
            apf_selection: ApfSelection::Current,
            burn_in: GibbsConfig::DEFAULT_BURN_IN,
            fixed_dataset: false,
            jobs: 0,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Config("at least one run is required (--runs >= 1)".into()));
        }
        if self.particles < 2 {
            return Err(Error::Config("at least two particles are required".into()));
        }
        if self.init_n < 2 {
            return Err(Error::Config("startup window --init-n must be >= 2".into()));
        }
        if self.variants.is_empty() {
            return Err(Error::Config("no filter variant selected".into()));
        }
        let horizon = match &self.source {
            DatasetSource::Simulated { params, horizon, .. } => {
                params.validate()?;
                *horizon
            }
            DatasetSource::Fixed(d) => {
                d.validate()?;
                d.horizon()
            }
        };
        if self.init_n > horizon {
            return Err(Error::Config(format!(
                "startup window n = {} exceeds horizon T = {horizon}",
                self.init_n
            )));
        }
        self.kernel.validate()?;
        self.filter_config(Variant::Sir).validate()
    }

    pub fn filter_config(&self, v: Variant) -> FilterConfig {
        let mut cfg = FilterConfig::for_variant(v, self.particles)
            .with_kernel(self.kernel)
            .with_kappa_frac(self.kappa_frac);
        cfg.apf_selection = self.apf_selection;
        cfg
    }

    pub fn gibbs_config(&self) -> GibbsConfig {
        GibbsConfig {
            n: self.init_n,
            iterations: self.burn_in + self.particles,
            burn_in: self.burn_in,
            thin: 1,
        }
    }

    pub fn run_seed(&self, run: usize) -> u64 {
        self.seed.wrapping_add(run as u64)
    }

    /// Dataset used by run `run`.
    pub fn dataset(&self, run: usize) -> Result<Dataset> {
        match &self.source {
            DatasetSource::Fixed(d) => Ok(d.clone()),
            DatasetSource::Simulated {
                label,
                params,
                horizon,
            } => {
                let seed = if self.fixed_dataset {
                    self.seed
                } else {
                    self.run_seed(run)
                };
                simulate_seeded(params, *horizon, seed, *label)
            }
        }
    }

    /// Startup particles of run `run`, shared by every variant.
    pub fn init_sample(&self, run: usize, dataset: &Dataset) -> Result<InitSample> {
        let mut r = rng::stream(self.run_seed(run), streams::GIBBS);
        run_gibbs(
            dataset.window(self.init_n),
            &self.gibbs_config(),
            self.particles,
            &mut r,
        )
    }

    /// Runs one filter variant on a prepared dataset and startup sample.
    pub fn filter(&self, run: usize, v: Variant, dataset: &Dataset, init: &InitSample) -> Result<RunTrace> {
        let mut r = rng::stream(self.run_seed(run), streams::FILTER_BASE + v.index() as u64);
        run_filter(dataset, init, &self.filter_config(v), v.label(), &mut r)
    }
}

/// Everything produced by one independent run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub run: usize,
    pub dataset: Dataset,
    pub init: InitSample,
    pub traces: Vec<(Variant, RunTrace)>,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub runs: Vec<RunOutput>,
}

pub(crate) fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Prepares datasets and startup samples for every run.
pub fn prepare_runs(cfg: &ExperimentConfig) -> Result<Vec<(Dataset, InitSample)>> {
    cfg.validate()?;
    with_pool(cfg.jobs, || {
        (0..cfg.runs)
            .into_par_iter()
            .map(|r| {
                let d = cfg.dataset(r)?;
                let init = cfg.init_sample(r, &d)?;
                Ok((d, init))
            })
            .collect::<Result<Vec<_>>>()
    })?
}

/// Runs every configured variant on every run.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Experiment> {
    let prepared = prepare_runs(cfg)?;
    run_prepared(cfg, prepared)
}

/// Runs every configured variant on already prepared `(dataset, startup
/// sample)` pairs, one per run.
pub fn run_prepared(cfg: &ExperimentConfig, prepared: Vec<(Dataset, InitSample)>) -> Result<Experiment> {
    cfg.validate()?;
    if prepared.len() != cfg.runs {
        return Err(Error::Config(format!(
            "{} prepared runs for {} configured",
            prepared.len(),
            cfg.runs
        )));
    }
    let jobs: Vec<(usize, Variant)> = (0..cfg.runs)
        .flat_map(|r| cfg.variants.iter().map(move |v| (r, *v)))
        .collect();
    let traces = with_pool(cfg.jobs, || {
        jobs.par_iter()
            .map(|&(r, v)| cfg.filter(r, v, &prepared[r].0, &prepared[r].1))
            .collect::<Result<Vec<_>>>()
    })??;
    let mut runs: Vec<RunOutput> = prepared
        .into_iter()
        .enumerate()
        .map(|(run, (dataset, init))| RunOutput {
            run,
            dataset,
            init,
            traces: Vec::new(),
        })
        .collect();
    for ((r, v), tr) in jobs.into_iter().zip(traces) {
        runs[r].traces.push((v, tr));
    }
    Ok(Experiment {
        config: cfg.clone(),
        runs,
    })
}

/// Final estimates of a trace as a table row.
pub fn summarize(trace: &RunTrace, run: usize) -> RunSummary {
    match trace.last() {
        Some(s) => RunSummary {
            algo: trace.algo.clone(),
            run,
            estimate: SvParams {
                alpha: s.alpha_mean,
                phi: s.phi_mean,
                sigma2: s.sigma2_mean,
            },
            final_rmse: s.rmse_cum,
            degenerate: trace.is_degenerate(),
        },
        None => RunSummary {
            algo: trace.algo.clone(),
            run,
            estimate: SvParams {
                alpha: f64::NAN,
                phi: f64::NAN,
                sigma2: f64::NAN,
            },
            final_rmse: f64::NAN,
            degenerate: true,
        },
    }
}

/// Per-variant statistics over the runs of an experiment.
#[derive(Debug, Clone)]
pub struct VariantStats {
    pub variant: Variant,
    pub mse: Option<ParamMse>,
    /// Median over runs of the squared error, `[alpha, phi, sigma2]`.
    pub median_se: [Option<f64>; 3],
    pub runs: usize,
    pub degenerate: usize,
    /// Runs whose ESS fell below 1% of N at some step.
    pub ess_collapsed: usize,
}

impl Experiment {
    pub fn truth(&self) -> SvParams {
        self.config.source.truth()
    }

    pub fn summaries(&self) -> Vec<RunSummary> {
        self.runs
            .iter()
            .flat_map(|r| r.traces.iter().map(move |(_, t)| summarize(t, r.run)))
            .collect()
    }

    pub fn traces_of(&self, v: Variant) -> Vec<&RunTrace> {
        self.runs
            .iter()
            .flat_map(|r| r.traces.iter().filter(|(w, _)| *w == v).map(|(_, t)| t))
            .collect()
    }

    /// Summary-table rows, run-major with variants in configured order.
    pub fn summary_rows(&self) -> Vec<SummaryRow> {
        let truth = self.truth();
        self.summaries()
            .iter()
            .map(|s| SummaryRow::new(s, &truth))
            .collect()
    }

    /// Runs per variant whose ESS fell below 1% of N at some step.
    pub fn ess_collapse_counts(&self) -> Vec<(Variant, usize)> {
        self.config
            .variants
            .iter()
            .map(|&v| {
                let c = self
                    .traces_of(v)
                    .iter()
                    .filter(|t| t.ess_collapse_time(ESS_COLLAPSE_FRAC).is_some())
                    .count();
                (v, c)
            })
            .collect()
    }

    pub fn stats(&self) -> Vec<VariantStats> {
        variant_stats(&self.summary_rows(), &self.ess_collapse_counts())
    }

    /// Pointwise envelopes of the ESS and cumulated RMSE per variant, indexed
    /// by assimilation step.
    pub fn envelopes(&self) -> Vec<(String, Vec<EnvelopePoint>)> {
        let mut out = Vec::new();
        for &v in &self.config.variants {
            let traces = self.traces_of(v);
            let len = traces.iter().map(|t| t.steps.len()).max().unwrap_or(0);
            let pad = |f: fn(&crate::filters::TraceStep) -> f64| -> Vec<Vec<Option<f64>>> {
                traces
                    .iter()
                    .map(|t| {
                        let mut v: Vec<Option<f64>> = t.steps.iter().map(|s| Some(f(s))).collect();
                        v.resize(len, None);
                        v
                    })
                    .collect()
            };
            out.push((
                format!("{}/ess", v.label()),
                aggregate_across_runs(&pad(|s| s.ess)),
            ));
            out.push((
                format!("{}/rmse", v.label()),
                aggregate_across_runs(&pad(|s| s.rmse_cum)),
            ));
        }
        out
    }
}

/// ESS fraction of N below which a run counts as collapsed.
pub const ESS_COLLAPSE_FRAC: f64 = 0.01;

/// Per-variant statistics from summary rows, for the variants listed in
/// `collapsed` (in that order).
pub fn variant_stats(rows: &[SummaryRow], collapsed: &[(Variant, usize)]) -> Vec<VariantStats> {
    collapsed
        .iter()
        .map(|&(v, ess_collapsed)| {
            let mine: Vec<SummaryRow> = rows.iter().filter(|r| r.algo == v.label()).cloned().collect();
            VariantStats {
                variant: v,
                mse: metrics::mse_from_rows(&mine),
                median_se: metrics::median_from_rows(&mine),
                runs: mine.len(),
                degenerate: mine.iter().filter(|r| r.degenerate).count(),
                ess_collapsed,
            }
        })
        .collect()
}

/// Median squared-error ordering `APF < best SIR-family < best SIS-family`
/// for parameter `k` (0 = alpha, 1 = phi, 2 = sigma2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ranking {
    pub apf: f64,
    pub best_sir: f64,
    pub best_sis: f64,
}

impl Ranking {
    pub fn holds(&self) -> bool {
        self.apf < self.best_sir && self.best_sir < self.best_sis
    }
}

pub fn ranking(stats: &[VariantStats], k: usize) -> Option<Ranking> {
    let best = |f: fn(&Variant) -> bool| {
        stats
            .iter()
            .filter(|s| f(&s.variant))
            .filter_map(|s| s.median_se[k])
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))))
    };
    Some(Ranking {
        apf: best(|v| *v == Variant::Apf)?,
        best_sir: best(Variant::is_sir_family)?,
        best_sis: best(Variant::is_sis_family)?,
    })
}

/// Reference MSEs printed alongside measured ones, `[alpha, phi, sigma2]`
/// per variant in [`Variant::ALL`] order.
pub fn reference_mse(label: DatasetLabel) -> Option<[[f64; 3]; 7]> {
    match label {
        DatasetLabel::Daily => Some([
            [0.00719, 0.66767, 0.89327],
            [0.00945, 0.83264, 0.87910],
            [0.00885, 0.12433, 0.00676],
            [0.00925, 0.13355, 0.00670],
            [0.00315, 0.15252, 0.00643],
            [0.00912, 0.13456, 0.00654],
            [0.00065, 0.00855, 0.00506],
        ]),
        DatasetLabel::Weekly => Some([
            [0.00534, 0.51290, 0.70540],
            [0.00487, 0.55648, 0.71242],
            [0.00589, 0.05292, 0.00010],
            [0.00442, 0.03754, 0.00009],
            [0.00380, 0.04885, 0.00009],
            [0.00431, 0.03687, 0.00009],
            [0.00016, 0.00029, 0.00008],
        ]),
        DatasetLabel::Custom => None,
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.5}"))
}

/// Plain-text report of an experiment.
pub fn render_report(
    label: DatasetLabel,
    truth: &SvParams,
    particles: usize,
    stats: &[VariantStats],
) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "dataset: {label}  (alpha = {}, phi = {}, sigma2 = {})  N = {particles}",
        truth.alpha, truth.phi, truth.sigma2
    );
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{:<8} {:>5} {:>5} {:>9} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "algo",
        "runs",
        "degen",
        "ess<1%N",
        "mse_alpha",
        "mse_phi",
        "mse_sig2",
        "med_alpha",
        "med_phi",
        "med_sig2"
    );
    for st in stats {
        let m = st.mse;
        let _ = writeln!(
            s,
            "{:<8} {:>5} {:>5} {:>9} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
            st.variant.label(),
            st.runs,
            st.degenerate,
            st.ess_collapsed,
            fmt_opt(m.map(|m| m.alpha)),
            fmt_opt(m.map(|m| m.phi)),
            fmt_opt(m.map(|m| m.sigma2)),
            fmt_opt(st.median_se[0]),
            fmt_opt(st.median_se[1]),
            fmt_opt(st.median_se[2]),
        );
    }
    let _ = writeln!(s);
    for (k, name) in [(1, "phi"), (2, "sigma2")] {
        match ranking(stats, k) {
            Some(r) => {
                let _ = writeln!(
                    s,
                    "ordering median SE({name}): APF {:.5} < best SIR-family {:.5} < best SIS-family {:.5}: {}",
                    r.apf,
                    r.best_sir,
                    r.best_sis,
                    if r.holds() { "HOLDS" } else { "VIOLATED" }
                );
            }
            None => {
                let _ = writeln!(s, "ordering median SE({name}): not enough variants");
            }
        }
    }
    if let Some(reference) = reference_mse(label) {
        let _ = writeln!(s);
        let _ = writeln!(s, "published MSEs (N = 10,000, display only):");
        for (v, r) in Variant::ALL.iter().zip(reference) {
            let _ = writeln!(s, "{:<8} {:>10.5} {:>10.5} {:>10.5}", v.label(), r[0], r[1], r[2]);
        }
    }
    s
}

impl Experiment {
    pub fn report(&self) -> String {
        render_report(
            self.config.source.label(),
            &self.truth(),
            self.config.particles,
            &self.stats(),
        )
    }
}
