//! Plain-text persistence of datasets, startup samples, traces and tables.
//!
//! Every file is a CSV table or a JSON sidecar. Floats are written in their
//! shortest round-trip form, so reading a file back reproduces the written
//! values exactly. Writes go to a temporary file in the destination directory
//! and are renamed into place, so readers never observe partial files.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::{RunTrace, TraceStep};
use crate::gibbs::InitSample;
use crate::metrics::{EnvelopePoint, SummaryRow};
use crate::model::{Dataset, DatasetLabel, SvParams, SvParamsTransformed};

pub const DATASET_CSV: &str = "dataset.csv";
pub const DATASET_META: &str = "dataset.meta.json";
pub const INIT_CSV: &str = "init.csv";
pub const INIT_META: &str = "init.meta.json";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const ENVELOPE_CSV: &str = "envelope.csv";
pub const REPORT_TXT: &str = "report.txt";
pub const BENCH_META: &str = "bench.meta.json";

/// Writes `bytes` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| Error::io(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn to_csv<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)
            .map_err(|e| Error::Numerical(format!("csv encoding: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Numerical(format!("csv encoding: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Numerical(format!("csv encoding: {e}")))
}

/// Parses a CSV table whose header must equal `header`.
fn from_csv<T: DeserializeOwned>(text: &str, header: &[&str], path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let found = r.headers().map_err(|e| Error::parse(path, e))?;
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::parse(
            path,
            format!(
                "expected header `{}`, found `{}`",
                header.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    r.deserialize()
        .map(|row| row.map_err(|e| Error::parse(path, e)))
        .collect()
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s =
        serde_json::to_string_pretty(value).map_err(|e| Error::Numerical(format!("json encoding: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn from_json<T: DeserializeOwned>(text: &str, path: &Path) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::parse(path, e))
}

// ---------------------------------------------------------------- datasets

pub const DATASET_HEADER: [&str; 3] = ["t", "y", "x_true"];

#[derive(Debug, Serialize, Deserialize)]
struct DatasetRecord {
    t: usize,
    y: Option<f64>,
    x_true: f64,
}

/// Sidecar of `dataset.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub alpha: f64,
    pub phi: f64,
    pub sigma2: f64,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub seed: u64,
    pub label: DatasetLabel,
}

pub fn dataset_to_strings(d: &Dataset) -> Result<(String, String)> {
    d.validate()?;
    let rows = (0..=d.horizon()).map(|t| DatasetRecord {
        t,
        y: (t > 0).then(|| d.y_at(t)),
        x_true: d.x_true[t],
    });
    let meta = DatasetMeta {
        alpha: d.params_true.alpha,
        phi: d.params_true.phi,
        sigma2: d.params_true.sigma2,
        horizon: d.horizon(),
        seed: d.seed,
        label: d.label,
    };
    Ok((to_csv(rows)?, to_json(&meta)?))
}

pub fn dataset_from_strings(csv_text: &str, meta_text: &str, path: &Path) -> Result<Dataset> {
    let meta: DatasetMeta = from_json(meta_text, &path.with_file_name(DATASET_META))?;
    let rows: Vec<DatasetRecord> = from_csv(csv_text, &DATASET_HEADER, path)?;
    if rows.len() != meta.horizon + 1 {
        return Err(Error::parse(
            path,
            format!(
                "expected {} rows for T = {}, found {}",
                meta.horizon + 1,
                meta.horizon,
                rows.len()
            ),
        ));
    }
    let mut y = Vec::with_capacity(meta.horizon);
    let mut x_true = Vec::with_capacity(meta.horizon + 1);
    for (i, r) in rows.into_iter().enumerate() {
        if r.t != i {
            return Err(Error::parse(path, format!("row {i} has t = {}", r.t)));
        }
        match (i, r.y) {
            (0, None) => {}
            (0, Some(_)) => return Err(Error::parse(path, "row t = 0 must have an empty y")),
            (_, Some(v)) => y.push(v),
            (_, None) => return Err(Error::parse(path, format!("missing y at t = {i}"))),
        }
        x_true.push(r.x_true);
    }
    let d = Dataset {
        y,
        x_true,
        params_true: SvParams {
            alpha: meta.alpha,
            phi: meta.phi,
            sigma2: meta.sigma2,
        },
        seed: meta.seed,
        label: meta.label,
    };
    d.validate().map_err(|e| Error::parse(path, e))?;
    Ok(d)
}

/// Writes `dataset.csv` and `dataset.meta.json` into `dir`.
pub fn write_dataset(dir: &Path, d: &Dataset) -> Result<()> {
    let (csv_text, meta) = dataset_to_strings(d)?;
    write_atomic(&dir.join(DATASET_CSV), csv_text.as_bytes())?;
    write_atomic(&dir.join(DATASET_META), meta.as_bytes())
}

/// Reads a dataset from its directory or from the path of its CSV file.
pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let csv_path = if path.is_dir() {
        path.join(DATASET_CSV)
    } else {
        path.to_path_buf()
    };
    let meta_path = csv_path.with_file_name(DATASET_META);
    dataset_from_strings(&read_text(&csv_path)?, &read_text(&meta_path)?, &csv_path)
}

// ---------------------------------------------------------- startup sample

pub const INIT_HEADER: [&str; 5] = ["i", "x_n", "alpha", "psi", "lambda"];

pub const INIT_MAPPING_NOTE: &str =
    "centered-model draws (beta2, phi, sigma2, x_n) exported as alpha = (1 - phi) * ln(beta2), \
     x_n + ln(beta2), psi = ln((1 + phi) / (1 - phi)), lambda = ln(sigma2)";

#[derive(Debug, Serialize, Deserialize)]
struct InitRecord {
    i: usize,
    x_n: f64,
    alpha: f64,
    psi: f64,
    lambda: f64,
}

/// Sidecar of `init.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitMeta {
    /// Startup window length; the sample targets time `n`.
    pub n: usize,
    pub particles: usize,
    /// Chain seeds (one per chain).
    pub seeds: Vec<u64>,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub mapping: String,
}

pub fn init_to_csv(s: &InitSample) -> Result<String> {
    to_csv(
        s.states
            .iter()
            .zip(&s.params)
            .enumerate()
            .map(|(i, (x, p))| InitRecord {
                i,
                x_n: *x,
                alpha: p.alpha,
                psi: p.psi,
                lambda: p.lambda,
            }),
    )
}

pub fn init_from_csv(text: &str, start_index: usize, path: &Path) -> Result<InitSample> {
    let rows: Vec<InitRecord> = from_csv(text, &INIT_HEADER, path)?;
    let mut states = Vec::with_capacity(rows.len());
    let mut params = Vec::with_capacity(rows.len());
    for (k, r) in rows.into_iter().enumerate() {
        if r.i != k {
            return Err(Error::parse(path, format!("row {k} has i = {}", r.i)));
        }
        states.push(r.x_n);
        params.push(SvParamsTransformed {
            alpha: r.alpha,
            psi: r.psi,
            lambda: r.lambda,
        });
    }
    InitSample::new(start_index, states, params).map_err(|e| Error::parse(path, e))
}

pub fn write_init(dir: &Path, s: &InitSample, meta: &InitMeta) -> Result<()> {
    write_atomic(&dir.join(INIT_CSV), init_to_csv(s)?.as_bytes())?;
    write_atomic(&dir.join(INIT_META), to_json(meta)?.as_bytes())
}

pub fn read_init(dir: &Path) -> Result<(InitSample, InitMeta)> {
    let meta_path = dir.join(INIT_META);
    let meta: InitMeta = from_json(&read_text(&meta_path)?, &meta_path)?;
    let csv_path = dir.join(INIT_CSV);
    let sample = init_from_csv(&read_text(&csv_path)?, meta.n, &csv_path)?;
    if sample.len() != meta.particles {
        return Err(Error::parse(
            &csv_path,
            format!("{} particles, metadata says {}", sample.len(), meta.particles),
        ));
    }
    Ok((sample, meta))
}

// ------------------------------------------------------------------ traces

pub const TRACE_HEADER: [&str; 10] = [
    "t",
    "algo",
    "x_true",
    "x_mean",
    "alpha_mean",
    "phi_mean",
    "sigma2_mean",
    "ess",
    "rmse_cum",
    "resampled",
];

pub const COMPONENT_RMSE_HEADER: [&str; 5] = ["t", "x", "alpha", "phi", "sigma2"];

#[derive(Debug, Serialize, Deserialize)]
struct TraceRecord {
    t: usize,
    algo: String,
    x_true: f64,
    x_mean: f64,
    alpha_mean: f64,
    phi_mean: f64,
    sigma2_mean: f64,
    ess: f64,
    rmse_cum: f64,
    resampled: u8,
}

#[derive(Debug, Serialize, Deserialize)]
struct ComponentRmseRecord {
    t: usize,
    x: f64,
    alpha: f64,
    phi: f64,
    sigma2: f64,
}

/// Provenance of one trace file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub algo: String,
    pub run: usize,
    pub seed: u64,
    pub particles: usize,
    pub init_n: usize,
    pub horizon: usize,
    pub kappa_frac: f64,
    pub shrinkage_a: f64,
    pub apf_selection: String,
    /// The run stopped before assimilating every observation.
    pub degenerate: bool,
    pub failure_t: Option<usize>,
    pub failure_message: Option<String>,
    /// First time at which the ESS fell below 1% of the particle count.
    pub ess_collapse_t: Option<usize>,
    pub steps: usize,
}

pub fn trace_to_csv(algo: &str, steps: &[TraceStep]) -> Result<String> {
    to_csv(steps.iter().map(|s| TraceRecord {
        t: s.t,
        algo: algo.to_string(),
        x_true: s.x_true,
        x_mean: s.x_mean,
        alpha_mean: s.alpha_mean,
        phi_mean: s.phi_mean,
        sigma2_mean: s.sigma2_mean,
        ess: s.ess,
        rmse_cum: s.rmse_cum,
        resampled: u8::from(s.resampled),
    }))
}

/// Parses a trace file into its algorithm label and steps.
pub fn trace_from_csv(text: &str, path: &Path) -> Result<(Option<String>, Vec<TraceStep>)> {
    let rows: Vec<TraceRecord> = from_csv(text, &TRACE_HEADER, path)?;
    let algo = rows.first().map(|r| r.algo.clone());
    let steps = rows
        .into_iter()
        .map(|r| {
            if Some(&r.algo) != algo.as_ref() {
                return Err(Error::parse(path, format!("mixed algorithms at t = {}", r.t)));
            }
            let resampled = match r.resampled {
                0 => false,
                1 => true,
                v => return Err(Error::parse(path, format!("resampled must be 0 or 1, found {v}"))),
            };
            Ok(TraceStep {
                t: r.t,
                x_true: r.x_true,
                x_mean: r.x_mean,
                alpha_mean: r.alpha_mean,
                phi_mean: r.phi_mean,
                sigma2_mean: r.sigma2_mean,
                ess: r.ess,
                rmse_cum: r.rmse_cum,
                resampled,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((algo, steps))
}

pub fn component_rmse_to_csv(trace: &RunTrace) -> Result<String> {
    let [x, a, p, s] = &trace.component_rmse;
    to_csv(trace.steps.iter().enumerate().map(|(k, st)| ComponentRmseRecord {
        t: st.t,
        x: x[k],
        alpha: a[k],
        phi: p[k],
        sigma2: s[k],
    }))
}

/// File stem of a variant's trace, e.g. `trace_SIR-r-p`.
pub fn trace_stem(algo: &str) -> String {
    format!("trace_{algo}")
}

/// Writes `trace_<algo>.csv`, its `.meta.json` sidecar and the per-component
/// RMSE table `rmse_<algo>.csv` into `dir`.
pub fn write_trace(dir: &Path, trace: &RunTrace, meta: &TraceMeta) -> Result<()> {
    let stem = trace_stem(&trace.algo);
    write_atomic(
        &dir.join(format!("{stem}.csv")),
        trace_to_csv(&trace.algo, &trace.steps)?.as_bytes(),
    )?;
    write_atomic(&dir.join(format!("{stem}.meta.json")), to_json(meta)?.as_bytes())?;
    write_atomic(
        &dir.join(format!("rmse_{}.csv", trace.algo)),
        component_rmse_to_csv(trace)?.as_bytes(),
    )
}

pub fn read_trace(dir: &Path, algo: &str) -> Result<(Vec<TraceStep>, TraceMeta)> {
    let stem = trace_stem(algo);
    let meta_path = dir.join(format!("{stem}.meta.json"));
    let meta: TraceMeta = from_json(&read_text(&meta_path)?, &meta_path)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let (_, steps) = trace_from_csv(&read_text(&csv_path)?, &csv_path)?;
    Ok((steps, meta))
}

// ------------------------------------------------------------------ tables

pub const SUMMARY_HEADER: [&str; 7] = [
    "algo",
    "run",
    "mse_alpha",
    "mse_phi",
    "mse_sigma2",
    "final_rmse",
    "degenerate",
];

pub fn summary_to_csv(rows: &[SummaryRow]) -> Result<String> {
    to_csv(rows)
}

pub fn summary_from_csv(text: &str, path: &Path) -> Result<Vec<SummaryRow>> {
    from_csv(text, &SUMMARY_HEADER, path)
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    write_atomic(path, summary_to_csv(rows)?.as_bytes())
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    summary_from_csv(&read_text(path)?, path)
}

pub const ENVELOPE_HEADER: [&str; 6] = ["t", "metric", "mean", "min", "max", "count"];

/// One point of a named envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    pub t: usize,
    pub metric: String,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

/// Flattens named envelopes whose first point sits at time `t0`.
pub fn envelope_rows(envelopes: &[(String, Vec<EnvelopePoint>)], t0: usize) -> Vec<EnvelopeRow> {
    envelopes
        .iter()
        .flat_map(|(metric, pts)| {
            pts.iter().enumerate().map(move |(k, p)| EnvelopeRow {
                t: t0 + k,
                metric: metric.clone(),
                mean: p.mean,
                min: p.min,
                max: p.max,
                count: p.count,
            })
        })
        .collect()
}

pub fn envelope_to_csv(rows: &[EnvelopeRow]) -> Result<String> {
    to_csv(rows)
}

pub fn envelope_from_csv(text: &str, path: &Path) -> Result<Vec<EnvelopeRow>> {
    from_csv(text, &ENVELOPE_HEADER, path)
}

/// Experiment description stored next to the summary so the report can be
/// regenerated from files alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchMeta {
    pub label: DatasetLabel,
    pub alpha: f64,
    pub phi: f64,
    pub sigma2: f64,
    pub particles: usize,
    pub init_n: usize,
    pub runs: usize,
    pub seed: u64,
    pub kappa_frac: f64,
    pub shrinkage_a: f64,
    pub apf_selection: String,
    pub fixed_dataset: bool,
    /// Variant labels, in table order.
    pub variants: Vec<String>,
    /// Runs per variant whose ESS fell below 1% of N.
    pub ess_collapsed: Vec<usize>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, to_json(value)?.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    from_json(&read_text(path)?, path)
}

// ----------------------------------------------------------- config files

/// Parses flat `key = value` lines. Blank lines and lines starting with `#`
/// are ignored; keys may use `-` or `_` interchangeably.
pub fn parse_key_values(text: &str, path: &Path) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(path, format!("line {}: expected key=value", no + 1)))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(Error::parse(path, format!("line {}: empty key", no + 1)));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

pub fn read_key_values(path: &Path) -> Result<Vec<(String, String)>> {
    parse_key_values(&read_text(path)?, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::simulate_seeded;
    use proptest::prelude::*;

    fn p() -> PathBuf {
        PathBuf::from("mem.csv")
    }

    #[test]
    fn dataset_layout() {
        let d = simulate_seeded(&SvParams::weekly(), 3, 5, DatasetLabel::Weekly).unwrap();
        let (csv_text, meta) = dataset_to_strings(&d).unwrap();
        let lines: Vec<&str> = csv_text.lines().collect();
        assert_eq!(lines[0], "t,y,x_true");
        assert!(lines[1].starts_with("0,,"));
        assert_eq!(lines.len(), 5);
        let m: serde_json::Value = serde_json::from_str(&meta).unwrap();
        for k in ["alpha", "phi", "sigma2", "T", "seed", "label"] {
            assert!(m.get(k).is_some(), "missing {k}");
        }
        assert_eq!(m["label"], "weekly");
        assert_eq!(m["T"], 3);
    }

    #[test]
    fn dataset_round_trip_and_files() {
        let d = simulate_seeded(&SvParams::daily(), 200, 11, DatasetLabel::Daily).unwrap();
        let (c, m) = dataset_to_strings(&d).unwrap();
        assert_eq!(dataset_from_strings(&c, &m, &p()).unwrap(), d);

        let dir = tempfile::tempdir().unwrap();
        write_dataset(dir.path(), &d).unwrap();
        assert_eq!(read_dataset(dir.path()).unwrap(), d);
        assert_eq!(read_dataset(&dir.path().join(DATASET_CSV)).unwrap(), d);
    }

    #[test]
    fn dataset_rejects_malformed() {
        let d = simulate_seeded(&SvParams::weekly(), 4, 1, DatasetLabel::Weekly).unwrap();
        let (c, m) = dataset_to_strings(&d).unwrap();
        let bad_header = c.replacen("t,y,x_true", "t,x_true,y", 1);
        assert!(matches!(
            dataset_from_strings(&bad_header, &m, &p()),
            Err(Error::Parse { .. })
        ));
        let truncated: String = c.lines().take(3).map(|l| format!("{l}\n")).collect();
        assert!(matches!(
            dataset_from_strings(&truncated, &m, &p()),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            dataset_from_strings(&c, "{", &p()),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            read_dataset(Path::new("/nonexistent/dataset.csv")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn init_round_trip() {
        let s = InitSample::new(
            7,
            vec![0.1, -2.5e-17, 3.0],
            vec![
                SvParamsTransformed {
                    alpha: 0.0,
                    psi: 5.293304824724492,
                    lambda: -4.605170185988091,
                },
                SvParamsTransformed::default(),
                SvParamsTransformed {
                    alpha: -1e-300,
                    psi: 1.0 / 3.0,
                    lambda: 2.0,
                },
            ],
        )
        .unwrap();
        let text = init_to_csv(&s).unwrap();
        assert!(text.starts_with("i,x_n,alpha,psi,lambda\n"));
        assert_eq!(init_from_csv(&text, 7, &p()).unwrap(), s);

        let meta = InitMeta {
            n: 7,
            particles: 3,
            seeds: vec![4],
            iterations: 2003,
            burn_in: 2000,
            thin: 1,
            mapping: INIT_MAPPING_NOTE.into(),
        };
        let dir = tempfile::tempdir().unwrap();
        write_init(dir.path(), &s, &meta).unwrap();
        assert_eq!(read_init(dir.path()).unwrap(), (s, meta));
    }

    fn step(t: usize, v: f64, resampled: bool) -> TraceStep {
        TraceStep {
            t,
            x_true: v,
            x_mean: -v,
            alpha_mean: v * 1e-9,
            phi_mean: 0.9,
            sigma2_mean: 0.1 + v,
            ess: 1999.999,
            rmse_cum: v.abs(),
            resampled,
        }
    }

    #[test]
    fn trace_round_trip() {
        let steps = vec![step(101, 0.25, false), step(102, -1.0 / 7.0, true)];
        let text = trace_to_csv("SIR-r-p", &steps).unwrap();
        assert!(text.starts_with(&TRACE_HEADER.join(",")));
        assert!(text.lines().nth(2).unwrap().ends_with(",1"));
        let (algo, back) = trace_from_csv(&text, &p()).unwrap();
        assert_eq!(algo.as_deref(), Some("SIR-r-p"));
        assert_eq!(back, steps);
        let mixed = format!("{text}103,APF,0,0,0,0,0,1,0,0\n");
        assert!(trace_from_csv(&mixed, &p()).is_err());
    }

    #[test]
    fn summary_and_envelope_round_trip() {
        let rows = vec![
            SummaryRow {
                algo: "SIS".into(),
                run: 0,
                mse_alpha: 1e-7,
                mse_phi: 0.6676,
                mse_sigma2: 0.89,
                final_rmse: 1.25,
                degenerate: true,
            },
            SummaryRow {
                algo: "APF".into(),
                run: 3,
                mse_alpha: 0.0,
                mse_phi: 2.0 / 3.0,
                mse_sigma2: 5e-300,
                final_rmse: 0.1,
                degenerate: false,
            },
        ];
        let text = summary_to_csv(&rows).unwrap();
        assert!(text.starts_with("algo,run,mse_alpha,mse_phi,mse_sigma2,final_rmse,degenerate\n"));
        assert_eq!(summary_from_csv(&text, &p()).unwrap(), rows);

        let env = vec![(
            "APF/ess".to_string(),
            vec![
                EnvelopePoint {
                    mean: 2.0,
                    min: 1.0,
                    max: 3.0,
                    count: 2,
                },
                EnvelopePoint {
                    mean: 0.1,
                    min: 0.1,
                    max: 0.1,
                    count: 1,
                },
            ],
        )];
        let er = envelope_rows(&env, 101);
        assert_eq!(er[1].t, 102);
        let text = envelope_to_csv(&er).unwrap();
        assert!(text.starts_with("t,metric,mean,min,max,count\n"));
        assert_eq!(envelope_from_csv(&text, &p()).unwrap(), er);
    }

    #[test]
    fn atomic_write_replaces_and_leaves_no_temporaries() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("nested/out.txt");
        write_atomic(&f, b"first").unwrap();
        write_atomic(&f, b"second").unwrap();
        assert_eq!(fs::read(&f).unwrap(), b"second");
        assert_eq!(fs::read_dir(f.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn key_values() {
        let kv = parse_key_values("# comment\n\nparticles = 500\nkappa_frac=0.5\n", &p()).unwrap();
        assert_eq!(
            kv,
            vec![
                ("particles".to_string(), "500".to_string()),
                ("kappa-frac".to_string(), "0.5".to_string())
            ]
        );
        assert!(parse_key_values("particles 500", &p()).is_err());
        assert!(parse_key_values(" = 3", &p()).is_err());
    }

    proptest! {
        #[test]
        fn summary_round_trip_any_finite(
            vals in prop::collection::vec((any::<f64>().prop_filter("finite", |v| v.is_finite()), any::<bool>()), 1..20)
        ) {
            let rows: Vec<SummaryRow> = vals.iter().enumerate().map(|(i, (v, d))| SummaryRow {
                algo: "SIR-r".into(),
                run: i,
                mse_alpha: *v,
                mse_phi: v.abs(),
                mse_sigma2: -v,
                final_rmse: v * 0.5,
                degenerate: *d,
            }).collect();
            let text = summary_to_csv(&rows).unwrap();
            prop_assert_eq!(summary_from_csv(&text, &p()).unwrap(), rows);
        }

        #[test]
        fn dataset_round_trip_any_seed(seed in any::<u64>(), horizon in 1usize..50) {
            let d = simulate_seeded(&SvParams::weekly(), horizon, seed, DatasetLabel::Custom).unwrap();
            let (c, m) = dataset_to_strings(&d).unwrap();
            prop_assert_eq!(dataset_from_strings(&c, &m, &p()).unwrap(), d);
        }
    }
}
