//! Reproducible experiment runs with CSV and JSON artifacts.
//!
//! An [`Experiment`] (usually resolved from an [`ExperimentConfig`]) fans out
//! over its seeds. Each seed runs one [`twin_run`] and writes
//! `trace_<seed>.csv`. Once every seed has finished, a single `summary.json`
//! is written. Identical inputs produce byte-identical CSV files.
//!
//! Trace CSV schema, with 12 significant digits and empty fields for metrics
//! that were not recorded:
//!
//! ```text
//! step,bl,tv,predictor_bl,predictor_tv,cos_lower
//! ```

mod config;

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

pub use config::{
    ChannelConfig, DistanceName, Experiment, ExperimentConfig, KernelConfig, MethodName, ModelConfig, NoiseConfig,
    Overrides, PriorConfig, PriorsConfig, DEFAULT_HORIZON, DEFAULT_PARTICLES,
};

use crate::error::{Error, Result};
use crate::models::{assumption_report, CheckReport};
use crate::numeric::fmt_sig12;
use crate::stability::{estimate_rate, liminf_constant, tail_window, twin_run, StabilityTrace, TraceRow, TwinRunConfig};

/// Header of every trace CSV.
pub const TRACE_HEADER: [&str; 6] = ["step", "bl", "tv", "predictor_bl", "predictor_tv", "cos_lower"];

/// Writes trace rows in the CSV schema.
pub fn write_trace_csv<W: Write>(out: W, rows: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    let cell = |v: Option<f64>| v.map(fmt_sig12).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.step.to_string(),
            cell(r.bl),
            cell(r.tv),
            cell(r.predictor_bl),
            cell(r.predictor_tv),
            cell(r.cos_lower),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a trace CSV back. The header must match [`TRACE_HEADER`] exactly.
pub fn read_trace_csv<R: Read>(input: R) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != TRACE_HEADER {
        return Err(Error::Config(format!(
            "trace header {header:?} does not match {}",
            TRACE_HEADER.join(",")
        )));
    }
    let parse = |s: &str, col: &str, line: usize| -> Result<Option<f64>> {
        if s.is_empty() {
            return Ok(None);
        }
        s.parse::<f64>()
            .map(Some)
            .map_err(|_| Error::Config(format!("line {line}: `{s}` in column {col} is not a number")))
    };
    let mut rows = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let step = rec[0]
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("line {line}: bad step `{}`", &rec[0])))?;
        rows.push(TraceRow {
            step,
            bl: parse(&rec[1], "bl", line)?,
            tv: parse(&rec[2], "tv", line)?,
            predictor_bl: parse(&rec[3], "predictor_bl", line)?,
            predictor_tv: parse(&rec[4], "predictor_tv", line)?,
            cos_lower: parse(&rec[5], "cos_lower", line)?,
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, Serialize)]
pub struct SeedLiminf {
    pub seed: u64,
    pub x0: f64,
    pub estimate: f64,
    pub target: f64,
}

/// Counts of trace rows satisfying the per-step invariants.
#[derive(Clone, Debug, Default, Serialize)]
pub struct TraceInvariants {
    pub rows: usize,
    pub distances_in_range: usize,
    pub bl_le_tv: usize,
    pub cos_le_bl: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SummaryChecks {
    pub assumptions: Vec<CheckReport>,
    pub trace_invariants: TraceInvariants,
}

/// Contents of `summary.json`. Per-seed lists follow the order of `seeds`.
#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub preset: String,
    pub seeds: Vec<u64>,
    pub final_bl: Vec<Option<f64>>,
    pub final_tv: Vec<Option<f64>>,
    /// Log-log slope of the seed-averaged BL trace (TV when BL is off).
    pub rate_slope: Option<f64>,
    pub rate_class: Option<String>,
    /// Static-Gaussian runs only: `min n·cos_lower_n` over the second half.
    pub liminf_estimate: Option<Vec<SeedLiminf>>,
    pub checks: SummaryChecks,
}

/// Output of [`run_experiment`].
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub traces: Vec<(u64, StabilityTrace)>,
    pub summary: Summary,
    pub trace_paths: Vec<PathBuf>,
    pub summary_path: PathBuf,
}

impl Experiment {
    pub fn twin_config(&self, seed: u64) -> TwinRunConfig {
        TwinRunConfig {
            spec: self.spec.clone(),
            prior_mu: self.prior_mu.clone(),
            prior_nu: self.prior_nu.clone(),
            observation_prior: self.observation_prior.clone(),
            horizon: self.horizon,
            seed,
            method: self.method.clone(),
            distances: self.distances,
            record_predictor: self.record_predictor,
        }
    }
}

/// Runs every seed (in parallel), writes `trace_<seed>.csv` per seed and
/// `summary.json` into `exp.out`.
pub fn run_experiment(exp: &Experiment) -> Result<RunOutput> {
    fs::create_dir_all(&exp.out)?;
    let traces: Vec<(u64, StabilityTrace)> = exp
        .seeds
        .par_iter()
        .map(|&seed| twin_run(&exp.twin_config(seed)).map(|t| (seed, t)))
        .collect::<Result<_>>()?;
    let mut trace_paths = Vec::with_capacity(traces.len());
    for (seed, t) in &traces {
        let path = exp.out.join(format!("trace_{seed}.csv"));
        write_trace_csv(fs::File::create(&path)?, &t.rows)?;
        trace_paths.push(path);
    }
    let summary = summarize(exp, &traces)?;
    let summary_path = exp.out.join("summary.json");
    fs::write(&summary_path, serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(RunOutput {
        traces,
        summary,
        trace_paths,
        summary_path,
    })
}

fn summarize(exp: &Experiment, traces: &[(u64, StabilityTrace)]) -> Result<Summary> {
    let final_bl = traces.iter().map(|(_, t)| t.last().and_then(|r| r.bl)).collect();
    let final_tv = traces.iter().map(|(_, t)| t.last().and_then(|r| r.tv)).collect();

    let column = |r: &TraceRow| if exp.distances.bl { r.bl } else { r.tv };
    let mean: Vec<f64> = (0..exp.horizon)
        .map(|n| traces.iter().filter_map(|(_, t)| column(&t.rows[n])).sum::<f64>() / traces.len() as f64)
        .collect();
    let fit = estimate_rate(&mean, tail_window(mean.len())).ok();

    let liminf_estimate = match exp.static_model {
        Some(model) => Some(
            traces
                .iter()
                .map(|(seed, t)| {
                    let x0 = t.initial_state[0];
                    liminf_constant(t, &model, x0, 0.5).map(|l| SeedLiminf {
                        seed: *seed,
                        x0,
                        estimate: l.estimate,
                        target: l.target,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        ),
        None => None,
    };

    let mut inv = TraceInvariants::default();
    for (_, t) in traces {
        for r in &t.rows {
            inv.rows += 1;
            let in_range = [r.bl, r.tv, r.predictor_bl, r.predictor_tv]
                .iter()
                .flatten()
                .all(|d| (0.0..=2.0).contains(d));
            inv.distances_in_range += in_range as usize;
            inv.bl_le_tv += match (r.bl, r.tv) {
                (Some(b), Some(t)) => b <= t + 1e-9,
                _ => true,
            } as usize;
            inv.cos_le_bl += match (r.cos_lower, r.bl) {
                (Some(c), Some(b)) => c <= b + 1e-9,
                _ => true,
            } as usize;
        }
    }

    Ok(Summary {
        preset: exp.name.clone(),
        seeds: exp.seeds.clone(),
        final_bl,
        final_tv,
        rate_slope: fit.as_ref().map(|f| f.slope),
        rate_class: fit.map(|f| f.classification.as_str().to_string()),
        liminf_estimate,
        checks: SummaryChecks {
            assumptions: assumption_report(&exp.spec),
            trace_invariants: inv,
        },
    })
}

/// Reads a trace CSV from disk.
pub fn load_trace(path: &Path) -> Result<Vec<TraceRow>> {
    read_trace_csv(fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let rows = vec![
            TraceRow {
                step: 0,
                bl: Some(0.5),
                tv: Some(1.25),
                cos_lower: Some(1e-7),
                ..Default::default()
            },
            TraceRow {
                step: 1,
                bl: Some(1.0 / 3.0),
                ..Default::default()
            },
        ];
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("step,bl,tv,predictor_bl,predictor_tv,cos_lower\n"));
        assert!(text.contains("\n1,3.33333333333e-1,,,,\n"), "{text}");
        let back = read_trace_csv(&buf[..]).unwrap();
        assert_eq!(back[0], rows[0]);
        assert!((back[1].bl.unwrap() - 1.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn wrong_header_rejected() {
        assert!(read_trace_csv("step,bl\n0,1\n".as_bytes()).is_err());
    }
}
