//! Evaluation quantities: cumulated RMSE traces, across-run parameter MSEs
//! and pointwise envelopes over independent runs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SvParams;

/// Names of the filtered components, in trace order.
pub const COMPONENTS: [&str; 4] = ["x", "alpha", "phi", "sigma2"];

/// `RMSE_t = sqrt((1/t) Σ_{u ≤ t} e_u²)` for a scalar error sequence.
pub fn cumulative_rmse(errors: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    errors
        .iter()
        .enumerate()
        .map(|(i, e)| {
            acc += e * e;
            (acc / (i + 1) as f64).sqrt()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmseTrace {
    /// One cumulated trace per entry of [`COMPONENTS`].
    pub components: [Vec<f64>; 4],
    /// Squared errors summed across components before cumulating.
    pub aggregate: Vec<f64>,
}

/// Cumulated RMSE of `(x, alpha, phi, sigma2)` estimates against the truth.
pub fn rmse_trace(estimates: &[[f64; 4]], truths: &[[f64; 4]]) -> Result<RmseTrace> {
    if estimates.len() != truths.len() {
        return Err(Error::Domain(format!(
            "estimate/truth length mismatch ({} vs {})",
            estimates.len(),
            truths.len()
        )));
    }
    let component = |k: usize| -> Vec<f64> {
        let e: Vec<f64> = estimates.iter().zip(truths).map(|(a, b)| a[k] - b[k]).collect();
        cumulative_rmse(&e)
    };
    let components = [component(0), component(1), component(2), component(3)];
    let mut acc = 0.0;
    let aggregate = estimates
        .iter()
        .zip(truths)
        .enumerate()
        .map(|(i, (a, b))| {
            acc += (0..4).map(|k| (a[k] - b[k]).powi(2)).sum::<f64>();
            (acc / (i + 1) as f64).sqrt()
        })
        .collect();
    Ok(RmseTrace {
        components,
        aggregate,
    })
}

/// Outcome of one filter run, as entered into the MSE tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub algo: String,
    pub run: usize,
    /// Estimates at the last assimilated observation.
    pub estimate: SvParams,
    pub final_rmse: f64,
    /// The run aborted before assimilating every observation.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamMse {
    pub alpha: f64,
    pub phi: f64,
    pub sigma2: f64,
    pub used: usize,
    pub excluded: usize,
}

/// `MSE = (1/R) Σ_r (θ̂_r - θ)²` over non-degenerate runs.
pub fn param_mse(runs: &[RunSummary], truth: &SvParams) -> Result<ParamMse> {
    let used: Vec<&RunSummary> = runs.iter().filter(|r| !r.degenerate).collect();
    if used.is_empty() {
        return Err(Error::Domain("no non-degenerate runs to average".into()));
    }
    let r = used.len() as f64;
    let mse = |f: fn(&SvParams) -> f64| {
        used.iter()
            .map(|s| (f(&s.estimate) - f(truth)).powi(2))
            .sum::<f64>()
            / r
    };
    Ok(ParamMse {
        alpha: mse(|p| p.alpha),
        phi: mse(|p| p.phi),
        sigma2: mse(|p| p.sigma2),
        used: used.len(),
        excluded: runs.len() - used.len(),
    })
}

/// Median over non-degenerate runs of the squared error of one parameter.
pub fn median_squared_error(
    runs: &[RunSummary],
    truth: &SvParams,
    pick: fn(&SvParams) -> f64,
) -> Option<f64> {
    let mut v: Vec<f64> = runs
        .iter()
        .filter(|r| !r.degenerate)
        .map(|r| (pick(&r.estimate) - pick(truth)).powi(2))
        .collect();
    median(&mut v)
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let m = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    })
}

/// One row of the per-run summary table: squared errors of the final
/// estimates, in natural parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub algo: String,
    pub run: usize,
    pub mse_alpha: f64,
    pub mse_phi: f64,
    pub mse_sigma2: f64,
    pub final_rmse: f64,
    pub degenerate: bool,
}

impl SummaryRow {
    pub fn new(summary: &RunSummary, truth: &SvParams) -> Self {
        let se = |a: f64, b: f64| (a - b).powi(2);
        SummaryRow {
            algo: summary.algo.clone(),
            run: summary.run,
            mse_alpha: se(summary.estimate.alpha, truth.alpha),
            mse_phi: se(summary.estimate.phi, truth.phi),
            mse_sigma2: se(summary.estimate.sigma2, truth.sigma2),
            final_rmse: summary.final_rmse,
            degenerate: summary.degenerate,
        }
    }

    pub fn squared_errors(&self) -> [f64; 3] {
        [self.mse_alpha, self.mse_phi, self.mse_sigma2]
    }
}

/// Mean squared errors over the non-degenerate rows; `None` when every row
/// is degenerate.
pub fn mse_from_rows(rows: &[SummaryRow]) -> Option<ParamMse> {
    let used: Vec<[f64; 3]> = rows
        .iter()
        .filter(|r| !r.degenerate)
        .map(SummaryRow::squared_errors)
        .collect();
    if used.is_empty() {
        return None;
    }
    let r = used.len() as f64;
    let mean = |k: usize| used.iter().map(|e| e[k]).sum::<f64>() / r;
    Some(ParamMse {
        alpha: mean(0),
        phi: mean(1),
        sigma2: mean(2),
        used: used.len(),
        excluded: rows.len() - used.len(),
    })
}

/// Median squared error per parameter over the non-degenerate rows.
pub fn median_from_rows(rows: &[SummaryRow]) -> [Option<f64>; 3] {
    let col = |k: usize| {
        let mut v: Vec<f64> = rows
            .iter()
            .filter(|r| !r.degenerate)
            .map(|r| r.squared_errors()[k])
            .collect();
        median(&mut v)
    };
    [col(0), col(1), col(2)]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopePoint {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Runs contributing a value at this step.
    pub count: usize,
}

/// Pointwise mean, min and max across runs, skipping missing values.
///
/// Shorter traces count as missing past their end. Steps where no run has
/// a value yield NaN statistics with `count = 0`.
pub fn aggregate_across_runs(traces: &[Vec<Option<f64>>]) -> Vec<EnvelopePoint> {
    let len = traces.iter().map(Vec::len).max().unwrap_or(0);
    (0..len)
        .map(|t| {
            let vals: Vec<f64> = traces
                .iter()
                .filter_map(|tr| tr.get(t).copied().flatten())
                .collect();
            if vals.is_empty() {
                return EnvelopePoint {
                    mean: f64::NAN,
                    min: f64::NAN,
                    max: f64::NAN,
                    count: 0,
                };
            }
            EnvelopePoint {
                mean: vals.iter().sum::<f64>() / vals.len() as f64,
                min: vals.iter().copied().fold(f64::INFINITY, f64::min),
                max: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                count: vals.len(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn summary(run: usize, phi: f64, degenerate: bool) -> RunSummary {
        RunSummary {
            algo: "APF".into(),
            run,
            estimate: SvParams {
                alpha: 0.0,
                phi,
                sigma2: 0.1,
            },
            final_rmse: 0.0,
            degenerate,
        }
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(cumulative_rmse(&[0.0; 5]), vec![0.0; 5]);
        assert_eq!(cumulative_rmse(&[1.0; 4]), vec![1.0; 4]);
        let r = cumulative_rmse(&[1.0, 0.0]);
        assert_eq!(r[0], 1.0);
        assert!((r[1] - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rmse_trace_components_and_aggregate() {
        let est = [[1.0, 0.0, 0.5, 0.1], [0.0, 0.0, 0.5, 0.1]];
        let tru = [[0.0, 0.0, 0.5, 0.1], [0.0, 0.0, 0.5, 0.1]];
        let r = rmse_trace(&est, &tru).unwrap();
        assert_eq!(r.components[0], r.aggregate);
        assert_eq!(r.components[2], vec![0.0, 0.0]);
        assert!(rmse_trace(&est, &tru[..1]).is_err());
    }

    #[test]
    fn mse_examples() {
        let truth = SvParams {
            alpha: 0.0,
            phi: 1.0 - 1e-9,
            sigma2: 0.1,
        };
        let m = param_mse(&[summary(0, truth.phi, false)], &truth).unwrap();
        assert_eq!((m.alpha, m.phi, m.sigma2), (0.0, 0.0, 0.0));

        let truth = SvParams { phi: 0.5, ..truth };
        let m = param_mse(
            &[
                summary(0, 0.0, false),
                summary(1, 1.0, false),
                summary(2, 9.0, true),
            ],
            &truth,
        )
        .unwrap();
        assert!((m.phi - 0.25).abs() < 1e-15);
        assert_eq!((m.used, m.excluded), (2, 1));
        assert!(param_mse(&[summary(0, 0.0, true)], &truth).is_err());
    }

    #[test]
    fn mse_integer_example() {
        // estimates (0, 2), truth 1 -> 1
        let truth = SvParams {
            alpha: 1.0,
            phi: 0.0,
            sigma2: 1.0,
        };
        let runs: Vec<RunSummary> = [0.0, 2.0]
            .iter()
            .enumerate()
            .map(|(i, a)| RunSummary {
                algo: "SIR".into(),
                run: i,
                estimate: SvParams { alpha: *a, ..truth },
                final_rmse: 0.0,
                degenerate: false,
            })
            .collect();
        assert_eq!(param_mse(&runs, &truth).unwrap().alpha, 1.0);
    }

    #[test]
    fn rows_agree_with_direct_mse() {
        let truth = SvParams {
            alpha: 0.0,
            phi: 0.5,
            sigma2: 0.1,
        };
        let runs = [
            summary(0, 0.0, false),
            summary(1, 1.0, false),
            summary(2, 0.7, false),
            summary(3, 9.0, true),
        ];
        let rows: Vec<SummaryRow> = runs.iter().map(|r| SummaryRow::new(r, &truth)).collect();
        let a = param_mse(&runs, &truth).unwrap();
        let b = mse_from_rows(&rows).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            median_from_rows(&rows)[1],
            median_squared_error(&runs, &truth, |p| p.phi)
        );
        assert_eq!(median_from_rows(&rows)[1], Some(0.25));
        assert!(mse_from_rows(&rows[3..]).is_none());
    }

    #[test]
    fn envelope_examples() {
        let one = vec![Some(1.0), Some(2.0)];
        let e = aggregate_across_runs(std::slice::from_ref(&one));
        assert_eq!((e[1].mean, e[1].min, e[1].max, e[1].count), (2.0, 2.0, 2.0, 1));

        let a = vec![Some(1.0); 3];
        let b = vec![Some(3.0); 3];
        let e = aggregate_across_runs(&[a.clone(), b]);
        assert!(e
            .iter()
            .all(|p| p.mean == 2.0 && p.min == 1.0 && p.max == 3.0 && p.count == 2));

        let c = vec![Some(5.0), Some(5.0)];
        let e = aggregate_across_runs(&[a, vec![Some(3.0), Some(3.0), None], c]);
        assert_eq!(e[2].count, 1);
        assert_eq!(e[2].mean, 1.0);
        assert_eq!(e[1].count, 3);
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&mut []), None);
    }

    proptest! {
        #[test]
        fn cumulated_square_error_is_running_sum(e in prop::collection::vec(-5.0f64..5.0, 1..100)) {
            let r = cumulative_rmse(&e);
            let mut prev = 0.0;
            for (t, v) in r.iter().enumerate() {
                let s = v * v * (t + 1) as f64;
                prop_assert!(s + 1e-9 >= prev);
                prev = s;
            }
        }

        #[test]
        fn mse_permutation_invariant(phis in prop::collection::vec(-0.9f64..0.9, 1..12), rot in 0usize..12) {
            let truth = SvParams { alpha: 0.0, phi: 0.3, sigma2: 0.1 };
            let runs: Vec<_> = phis.iter().enumerate().map(|(i, p)| summary(i, *p, false)).collect();
            let mut rotated = runs.clone();
            rotated.rotate_left(rot % runs.len());
            let a = param_mse(&runs, &truth).unwrap();
            let b = param_mse(&rotated, &truth).unwrap();
            prop_assert!((a.phi - b.phi).abs() < 1e-12);
        }

        #[test]
        fn envelope_bounds(traces in prop::collection::vec(prop::collection::vec(prop::option::of(-10.0f64..10.0), 0..20), 1..6)) {
            for p in aggregate_across_runs(&traces) {
                if p.count > 0 {
                    prop_assert!(p.min <= p.mean + 1e-12 && p.mean <= p.max + 1e-12);
                }
            }
        }
    }
}
