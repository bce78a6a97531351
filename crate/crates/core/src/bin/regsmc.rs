//! Command-line harness: simulate datasets, build startup samples, run the
//! regularized filters and summarize repeated runs.
//!
//! Options may also come from a flat `key = value` file given with
//! `--config`; flags on the command line take precedence.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};

use regsmc::bench::{DatasetSource, ExperimentConfig};
use regsmc::filters::{ApfSelection, FilterConfig, Variant};
use regsmc::gibbs::GibbsConfig;
use regsmc::model::{simulate_seeded, DatasetLabel, SvParams};
use regsmc::particles::KernelConfig;
use regsmc::{harness, io, Error, Result};

#[derive(Parser)]
#[command(
    name = "regsmc",
    version,
    about = "Kernel-regularized particle filters for stochastic volatility"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a dataset and write dataset.csv + dataset.meta.json.
    #[command(args_override_self = true)]
    Simulate(SimulateArgs),
    /// Build and cache the Gibbs startup sample of each run.
    #[command(args_override_self = true)]
    Init(InitArgs),
    /// Run filter variants and write one trace per (variant, run).
    #[command(args_override_self = true)]
    Run(RunArgs),
    /// Run the variants over R runs; write summary, envelopes and report.
    #[command(args_override_self = true)]
    Bench(RunArgs),
    /// Regenerate report.txt from summary.csv in an output directory.
    #[command(args_override_self = true)]
    Report(ReportArgs),
}

#[derive(Args, Clone)]
struct DataArgs {
    /// Benchmark preset (daily: T = 1500, weekly: T = 500).
    #[arg(long)]
    label: Option<DatasetLabel>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    phi: Option<f64>,
    #[arg(long)]
    sigma2: Option<f64>,
    /// Number of observations T.
    #[arg(long)]
    horizon: Option<usize>,
    /// Base seed; run r uses seed + r.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Flat key=value options file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct SimulateArgs {
    #[command(flatten)]
    data: DataArgs,
}

#[derive(Args, Clone)]
struct InitArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Existing dataset (directory or dataset.csv) used for every run.
    #[arg(long = "data", conflicts_with_all = ["label", "alpha", "phi", "sigma2", "horizon"])]
    data_file: Option<PathBuf>,
    /// Number of particles N.
    #[arg(long, default_value_t = 2000)]
    particles: usize,
    /// Startup window n.
    #[arg(long, default_value_t = 100)]
    init_n: usize,
    /// Independent runs R (default 10 for bench, 1 otherwise).
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long, default_value_t = GibbsConfig::DEFAULT_BURN_IN)]
    burn_in: usize,
    /// Simulate one dataset (from the base seed) shared by all runs.
    #[arg(long)]
    fixed_dataset: bool,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args, Clone)]
struct RunArgs {
    #[command(flatten)]
    init: InitArgs,
    /// Comma-separated variants (SIS, SIS-p, SIR, SIR-p, SIR-r, SIR-r-p, APF) or `all`.
    #[arg(long, default_value = "all")]
    algo: String,
    /// ESS threshold as a fraction of N for the SIR-r variants.
    #[arg(long, default_value_t = FilterConfig::DEFAULT_KAPPA_FRAC)]
    kappa_frac: f64,
    /// Liu–West shrinkage a in (0, 1].
    #[arg(long, default_value_t = KernelConfig::default().a)]
    shrinkage_a: f64,
    /// Parameters used by the APF first stage (current|shrunk).
    #[arg(long, default_value = "current")]
    apf_selection: ApfSelection,
}

#[derive(Args, Clone)]
struct ReportArgs {
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl DataArgs {
    fn source(&self) -> Result<DatasetSource> {
        let custom = self.alpha.is_some() || self.phi.is_some() || self.sigma2.is_some();
        let base = self.label.unwrap_or(DatasetLabel::Daily);
        let (preset, preset_t) = base.preset().unwrap_or((SvParams::daily(), 1500));
        let params = SvParams {
            alpha: self.alpha.unwrap_or(preset.alpha),
            phi: self.phi.unwrap_or(preset.phi),
            sigma2: self.sigma2.unwrap_or(preset.sigma2),
        };
        params.validate()?;
        let horizon = self.horizon.unwrap_or(preset_t);
        if horizon == 0 {
            return Err(Error::Config("--horizon must be >= 1".into()));
        }
        Ok(DatasetSource::Simulated {
            label: if custom { DatasetLabel::Custom } else { base },
            params,
            horizon,
        })
    }
}

impl InitArgs {
    fn experiment(&self, default_runs: usize) -> Result<ExperimentConfig> {
        let source = match &self.data_file {
            Some(p) => DatasetSource::Fixed(io::read_dataset(p)?),
            None => self.data.source()?,
        };
        let cfg = ExperimentConfig {
            source,
            particles: self.particles,
            init_n: self.init_n,
            runs: self.runs.unwrap_or(default_runs),
            seed: self.data.seed,
            variants: Variant::ALL.to_vec(),
            kappa_frac: FilterConfig::DEFAULT_KAPPA_FRAC,
            kernel: KernelConfig::default(),
            apf_selection: ApfSelection::Current,
            burn_in: self.burn_in,
            fixed_dataset: self.fixed_dataset,
            jobs: self.jobs,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RunArgs {
    fn experiment(&self, default_runs: usize) -> Result<ExperimentConfig> {
        let mut cfg = self.init.experiment(default_runs)?;
        cfg.variants = parse_variants(&self.algo)?;
        cfg.kappa_frac = self.kappa_frac;
        cfg.kernel = KernelConfig::new(self.shrinkage_a)?;
        cfg.apf_selection = self.apf_selection;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_variants(s: &str) -> Result<Vec<Variant>> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(Variant::ALL.to_vec());
    }
    let mut out: Vec<Variant> = s.split(',').map(|p| p.trim().parse()).collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}

/// Arguments with the options of a `--config` file inserted before the
/// user's own flags, so the latter override the former.
fn merge_config(argv: Vec<String>, sub: &str, path: &Path) -> Result<Vec<String>> {
    let root = Cli::command();
    let known = |cmd: &clap::Command, key: &str| cmd.get_arguments().any(|a| a.get_long() == Some(key));
    let this = root
        .find_subcommand(sub)
        .ok_or_else(|| Error::Config(format!("unknown command `{sub}`")))?;
    let mut injected = Vec::new();
    for (key, value) in io::read_key_values(path)? {
        if key == "config" {
            return Err(Error::Config("nested config files are not supported".into()));
        }
        if !known(this, &key) {
            if root.get_subcommands().any(|c| known(c, &key)) {
                continue; // meant for another command
            }
            return Err(Error::Config(format!(
                "unknown option `{key}` in {}",
                path.display()
            )));
        }
        let is_flag = this
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .is_some_and(|a| !a.get_action().takes_values());
        if is_flag {
            match value.as_str() {
                "true" | "1" | "yes" => injected.push(format!("--{key}")),
                "false" | "0" | "no" => {}
                v => {
                    return Err(Error::Config(format!(
                        "`{key}` expects true or false, found `{v}`"
                    )))
                }
            }
        } else {
            injected.push(format!("--{key}={value}"));
        }
    }
    let pos = argv.iter().position(|a| a == sub).unwrap_or(1) + 1;
    let mut merged = argv[..pos].to_vec();
    merged.extend(injected);
    merged.extend_from_slice(&argv[pos..]);
    Ok(merged)
}

fn config_path(cmd: &Command) -> Option<(&'static str, PathBuf)> {
    match cmd {
        Command::Simulate(a) => a.data.config.clone().map(|p| ("simulate", p)),
        Command::Init(a) => a.data.config.clone().map(|p| ("init", p)),
        Command::Run(a) => a.init.data.config.clone().map(|p| ("run", p)),
        Command::Bench(a) => a.init.data.config.clone().map(|p| ("bench", p)),
        Command::Report(_) => None,
    }
}

fn parse_cli() -> std::result::Result<Cli, ExitCode> {
    let argv: Vec<String> = std::env::args().collect();
    let parse = |args: &[String]| {
        Cli::try_parse_from(args).map_err(|e| {
            let _ = e.print();
            if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        })
    };
    let cli = parse(&argv)?;
    match config_path(&cli.command) {
        None => Ok(cli),
        Some((sub, path)) => match merge_config(argv, sub, &path) {
            Ok(merged) => parse(&merged),
            Err(e) => Err(fail(&e)),
        },
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate(a) => {
            let DatasetSource::Simulated {
                label,
                params,
                horizon,
            } = a.data.source()?
            else {
                unreachable!("command-line sources are simulated")
            };
            let d = simulate_seeded(&params, horizon, a.data.seed, label)?;
            io::write_dataset(&a.data.out, &d)?;
            println!(
                "wrote {} observations ({}, seed {}) to {}",
                d.horizon(),
                d.label,
                d.seed,
                a.data.out.display()
            );
        }
        Command::Init(a) => {
            let cfg = a.experiment(1)?;
            let prepared = harness::prepare_runs_cached(&cfg, &a.data.out)?;
            for (r, (d, init)) in prepared.iter().enumerate() {
                println!(
                    "run {r}: {} particles at t = {} from T = {} observations -> {}",
                    init.len(),
                    init.start_index,
                    d.horizon(),
                    harness::run_dir(&a.data.out, r).display()
                );
            }
        }
        Command::Run(a) => {
            let cfg = a.experiment(1)?;
            let exp = harness::run_and_write_traces(&cfg, &a.init.data.out)?;
            for run in &exp.runs {
                for (_, t) in &run.traces {
                    let last = t.last();
                    println!(
                        "run {} {:<8} steps {:>5}  phi {:>8}  sigma2 {:>8}  ess<1%N at {}{}",
                        run.run,
                        t.algo,
                        t.steps.len(),
                        last.map_or("-".into(), |s| format!("{:.4}", s.phi_mean)),
                        last.map_or("-".into(), |s| format!("{:.4}", s.sigma2_mean)),
                        t.ess_collapse_time(regsmc::bench::ESS_COLLAPSE_FRAC)
                            .map_or("-".into(), |v| v.to_string()),
                        t.failure.as_ref().map_or(String::new(), |f| format!(
                            "  stopped at t = {}: {}",
                            f.t, f.message
                        )),
                    );
                }
            }
        }
        Command::Bench(a) => {
            let cfg = a.experiment(10)?;
            let (_, report) = harness::bench_and_write(&cfg, &a.init.data.out)?;
            print!("{report}");
        }
        Command::Report(a) => {
            print!("{}", harness::report_from_dir(&a.out)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match parse_cli() {
        Ok(c) => c,
        Err(code) => return code,
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
