//! Output-directory layout of the command-line harness.
//!
//! ```text
//! <out>/run_000/dataset.csv, dataset.meta.json
//! <out>/run_000/init.csv, init.meta.json
//! <out>/run_000/trace_<algo>.csv, trace_<algo>.meta.json, rmse_<algo>.csv
//! <out>/summary.csv, envelope.csv, bench.meta.json, report.txt
//! ```
//!
//! The startup sample of a run is cached in its directory: a later command
//! with the same dataset and initializer settings reads it back instead of
//! re-running the Gibbs sampler, so every variant of a run starts from the
//! same particles.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::bench::{render_report, run_prepared, variant_stats, with_pool, Experiment, ExperimentConfig};
use crate::error::{Error, Result};
use crate::filters::{RunTrace, Variant};
use crate::gibbs::InitSample;
use crate::io::{self, BenchMeta, InitMeta, TraceMeta};
use crate::model::{Dataset, SvParams};

pub fn run_dir(out: &Path, run: usize) -> PathBuf {
    out.join(format!("run_{run:03}"))
}

/// Metadata describing the startup sample of run `run`.
pub fn init_meta(cfg: &ExperimentConfig, run: usize) -> InitMeta {
    let g = cfg.gibbs_config();
    InitMeta {
        n: g.n,
        particles: cfg.particles,
        seeds: vec![cfg.run_seed(run)],
        iterations: g.iterations,
        burn_in: g.burn_in,
        thin: g.thin,
        mapping: io::INIT_MAPPING_NOTE.to_string(),
    }
}

fn cached_init(dir: &Path, dataset: &Dataset, meta: &InitMeta) -> Option<InitSample> {
    let on_disk = io::read_dataset(dir).ok()?;
    if &on_disk != dataset {
        return None;
    }
    match io::read_init(dir) {
        Ok((sample, m)) if &m == meta => Some(sample),
        _ => None,
    }
}

/// Dataset and startup sample of every run, written to (or reused from) the
/// run directories under `out`.
pub fn prepare_runs_cached(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<(Dataset, InitSample)>> {
    cfg.validate()?;
    with_pool(cfg.jobs, || {
        (0..cfg.runs)
            .into_par_iter()
            .map(|r| {
                let dir = run_dir(out, r);
                let dataset = cfg.dataset(r)?;
                let meta = init_meta(cfg, r);
                if let Some(init) = cached_init(&dir, &dataset, &meta) {
                    return Ok((dataset, init));
                }
                let init = cfg.init_sample(r, &dataset)?;
                io::write_dataset(&dir, &dataset)?;
                io::write_init(&dir, &init, &meta)?;
                Ok((dataset, init))
            })
            .collect::<Result<Vec<_>>>()
    })?
}

pub fn trace_meta(cfg: &ExperimentConfig, run: usize, dataset: &Dataset, trace: &RunTrace) -> TraceMeta {
    TraceMeta {
        algo: trace.algo.clone(),
        run,
        seed: cfg.run_seed(run),
        particles: trace.n_particles,
        init_n: trace.start_index,
        horizon: dataset.horizon(),
        kappa_frac: cfg.kappa_frac,
        shrinkage_a: cfg.kernel.a,
        apf_selection: cfg.apf_selection.as_str().to_string(),
        degenerate: trace.is_degenerate(),
        failure_t: trace.failure.as_ref().map(|f| f.t),
        failure_message: trace.failure.as_ref().map(|f| f.message.clone()),
        ess_collapse_t: trace.ess_collapse_time(crate::bench::ESS_COLLAPSE_FRAC),
        steps: trace.steps.len(),
    }
}

/// Runs the configured variants and writes one trace per (variant, run).
pub fn run_and_write_traces(cfg: &ExperimentConfig, out: &Path) -> Result<Experiment> {
    let prepared = prepare_runs_cached(cfg, out)?;
    let exp = run_prepared(cfg, prepared)?;
    for run in &exp.runs {
        let dir = run_dir(out, run.run);
        for (_, trace) in &run.traces {
            io::write_trace(&dir, trace, &trace_meta(cfg, run.run, &run.dataset, trace))?;
        }
    }
    Ok(exp)
}

pub fn bench_meta(exp: &Experiment) -> BenchMeta {
    let cfg = &exp.config;
    let truth = exp.truth();
    let collapsed = exp.ess_collapse_counts();
    BenchMeta {
        label: cfg.source.label(),
        alpha: truth.alpha,
        phi: truth.phi,
        sigma2: truth.sigma2,
        particles: cfg.particles,
        init_n: cfg.init_n,
        runs: cfg.runs,
        seed: cfg.seed,
        kappa_frac: cfg.kappa_frac,
        shrinkage_a: cfg.kernel.a,
        apf_selection: cfg.apf_selection.as_str().to_string(),
        fixed_dataset: cfg.fixed_dataset,
        variants: collapsed.iter().map(|(v, _)| v.label().to_string()).collect(),
        ess_collapsed: collapsed.iter().map(|(_, c)| *c).collect(),
    }
}

/// Full benchmark: traces per run plus summary, envelopes and report.
pub fn bench_and_write(cfg: &ExperimentConfig, out: &Path) -> Result<(Experiment, String)> {
    let exp = run_and_write_traces(cfg, out)?;
    io::write_summary(&out.join(io::SUMMARY_CSV), &exp.summary_rows())?;
    let rows = io::envelope_rows(&exp.envelopes(), cfg.init_n + 1);
    io::write_atomic(
        &out.join(io::ENVELOPE_CSV),
        io::envelope_to_csv(&rows)?.as_bytes(),
    )?;
    io::write_json(&out.join(io::BENCH_META), &bench_meta(&exp))?;
    let report = report_from_dir(out)?;
    Ok((exp, report))
}

/// Renders the report from `summary.csv` and `bench.meta.json` in `out` and
/// writes it to `report.txt`.
pub fn report_from_dir(out: &Path) -> Result<String> {
    let meta_path = out.join(io::BENCH_META);
    let meta: BenchMeta = io::read_json(&meta_path)?;
    let rows = io::read_summary(&out.join(io::SUMMARY_CSV))?;
    if meta.variants.len() != meta.ess_collapsed.len() {
        return Err(Error::parse(
            &meta_path,
            "variants and ess_collapsed lengths differ",
        ));
    }
    let collapsed = meta
        .variants
        .iter()
        .zip(&meta.ess_collapsed)
        .map(|(v, c)| Ok((v.parse::<Variant>().map_err(|e| Error::parse(&meta_path, e))?, *c)))
        .collect::<Result<Vec<_>>>()?;
    let truth = SvParams {
        alpha: meta.alpha,
        phi: meta.phi,
        sigma2: meta.sigma2,
    };
    let report = render_report(
        meta.label,
        &truth,
        meta.particles,
        &variant_stats(&rows, &collapsed),
    );
    io::write_atomic(&out.join(io::REPORT_TXT), report.as_bytes())?;
    Ok(report)
}
