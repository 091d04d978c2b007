//! Parameter sweeps: one run per (axis value, seed), then per-value mean and
//! quartiles of each summary metric.

use std::cmp::Ordering;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::ScenarioConfig;
use crate::error::{Error, OutputError};
use crate::output::{fmt_opt, read_table, write_rows, RunSummary, SUMMARY_HEADER};
use crate::sim;

/// Summary columns that get aggregated.
pub const METRICS: [&str; 4] = [
    "loss_pct",
    "mean_delay_ms",
    "throughput_kbps",
    "tx_bitrate_kbps",
];
pub const STATS: [&str; 6] = ["mean", "min", "q1", "median", "q3", "max"];

pub fn aggregate_header() -> Vec<String> {
    let mut h = vec!["axis".to_string(), "value".into(), "runs".into()];
    for m in METRICS {
        for s in STATS {
            h.push(format!("{m}_{s}"));
        }
    }
    h
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: String,
    pub values: Vec<String>,
    pub seeds: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRun {
    pub value: String,
    pub summary: RunSummary,
}

/// Mean, min, quartiles and max of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spread {
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl Spread {
    /// `None` for an empty sample. Quartiles interpolate linearly between
    /// order statistics.
    pub fn of(values: &[f64]) -> Option<Spread> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        Some(Spread {
            mean: v.iter().sum::<f64>() / v.len() as f64,
            min: v[0],
            q1: quantile(&v, 0.25),
            median: quantile(&v, 0.5),
            q3: quantile(&v, 0.75),
            max: v[v.len() - 1],
        })
    }

    pub fn get(&self, stat: &str) -> Option<f64> {
        Some(match stat {
            "mean" => self.mean,
            "min" => self.min,
            "q1" => self.q1,
            "median" => self.median,
            "q3" => self.q3,
            "max" => self.max,
            _ => return None,
        })
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub axis: String,
    pub value: String,
    pub runs: usize,
    /// One entry per name in [`METRICS`].
    pub metrics: Vec<Option<Spread>>,
}

impl AggregateRow {
    pub fn metric(&self, name: &str) -> Option<&Spread> {
        let i = METRICS.iter().position(|m| *m == name)?;
        self.metrics[i].as_ref()
    }

    fn to_record(&self) -> Vec<String> {
        let mut r = vec![self.axis.clone(), self.value.clone(), self.runs.to_string()];
        for s in &self.metrics {
            for stat in STATS {
                r.push(fmt_opt(s.as_ref().and_then(|s| s.get(stat))));
            }
        }
        r
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub runs: Vec<SweepRun>,
    pub aggregate: Vec<AggregateRow>,
}

/// Sort key for an axis value: the resolved numeric parameter when there is
/// one, then the text.
fn value_key(cfg: &ScenarioConfig, axis: &str) -> (f64, String) {
    match axis {
        "cv_count" => (f64::from(cfg.mobility.cv_count), String::new()),
        "max_speed" => (cfg.mobility.max_speed.as_mps(), String::new()),
        "offered_rate" => (cfg.traffic.offered_rate_bps, String::new()),
        "packet_size" => (f64::from(cfg.traffic.packet_size), String::new()),
        _ => (0.0, cfg.tech().as_str().to_string()),
    }
}

/// Configs for every (value, seed) pair, ordered by (value, seed). Seeds
/// are the base seed plus 0..seeds.
pub fn plan(
    base: &ScenarioConfig,
    spec: &SweepSpec,
) -> Result<Vec<(String, ScenarioConfig)>, Error> {
    let mut points = Vec::with_capacity(spec.values.len());
    for v in &spec.values {
        let cfg = base.with_axis(&spec.axis, v)?;
        points.push((value_key(&cfg, &spec.axis), v.trim().to_string(), cfg));
    }
    points.sort_by(|a, b| {
        a.0 .0
            .partial_cmp(&b.0 .0)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.0 .1.cmp(&b.0 .1))
    });
    let mut jobs = Vec::new();
    for (_, value, cfg) in points {
        for k in 0..u64::from(spec.seeds) {
            let mut c = cfg.clone();
            c.scenario.seed = base.scenario.seed + k;
            c.scenario.name = format!("{}-{}-{}", base.scenario.name, spec.axis, value);
            c.output.write_packets = false;
            jobs.push((value.clone(), c));
        }
    }
    Ok(jobs)
}

/// Groups runs by value (runs must already be in (value, seed) order).
pub fn aggregate(axis: &str, runs: &[SweepRun]) -> Vec<AggregateRow> {
    let mut rows: Vec<AggregateRow> = Vec::new();
    let mut start = 0;
    while start < runs.len() {
        let value = &runs[start].value;
        let end = start
            + runs[start..]
                .iter()
                .take_while(|r| &r.value == value)
                .count();
        let group = &runs[start..end];
        rows.push(AggregateRow {
            axis: axis.to_string(),
            value: value.clone(),
            runs: group.len(),
            metrics: METRICS
                .iter()
                .map(|m| {
                    let v: Vec<f64> = group.iter().filter_map(|r| r.summary.metric(m)).collect();
                    Spread::of(&v)
                })
                .collect(),
        });
        start = end;
    }
    rows
}

/// Executes the sweep. Runs may finish in any order; results are reported
/// in plan order.
pub fn run_sweep(base: &ScenarioConfig, spec: &SweepSpec) -> Result<SweepResult, Error> {
    let jobs = plan(base, spec)?;
    let runs = jobs
        .par_iter()
        .map(|(value, cfg)| {
            sim::run(cfg).map(|r| SweepRun {
                value: value.clone(),
                summary: RunSummary::from_run(&r),
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let aggregate = aggregate(&spec.axis, &runs);
    Ok(SweepResult { runs, aggregate })
}

pub fn runs_header() -> Vec<String> {
    let mut h = vec!["axis".to_string(), "value".into()];
    h.extend(SUMMARY_HEADER.iter().map(|s| s.to_string()));
    h
}

/// Writes runs.csv and aggregate.csv into `dir`.
pub fn write_sweep(
    axis: &str,
    result: &SweepResult,
    dir: &Path,
) -> Result<(PathBuf, PathBuf), OutputError> {
    std::fs::create_dir_all(dir).map_err(|source| OutputError::Io {
        path: dir.to_owned(),
        source,
    })?;
    let runs_path = dir.join("runs.csv");
    let agg_path = dir.join("aggregate.csv");
    let rh = runs_header();
    let rh: Vec<&str> = rh.iter().map(String::as_str).collect();
    write_rows(
        &runs_path,
        &rh,
        result.runs.iter().map(|r| {
            let mut row = vec![axis.to_string(), r.value.clone()];
            row.extend(r.summary.to_record());
            row
        }),
    )?;
    let ah = aggregate_header();
    let ah: Vec<&str> = ah.iter().map(String::as_str).collect();
    write_rows(
        &agg_path,
        &ah,
        result.aggregate.iter().map(AggregateRow::to_record),
    )?;
    Ok((runs_path, agg_path))
}

fn parse_opt(path: &Path, line: u64, raw: &str) -> Result<Option<f64>, OutputError> {
    if raw.is_empty() {
        return Ok(None);
    }
    raw.parse().map(Some).map_err(|_| OutputError::Record {
        path: path.to_owned(),
        line,
        message: format!("bad number `{raw}`"),
    })
}

/// Reads aggregate.csv back.
pub fn read_aggregate(path: &Path) -> Result<Vec<AggregateRow>, OutputError> {
    let header = aggregate_header();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut out = Vec::new();
    for (line, rec) in read_table(path, &header)? {
        let runs = rec
            .get(2)
            .unwrap_or("")
            .parse()
            .map_err(|_| OutputError::Record {
                path: path.to_owned(),
                line,
                message: "bad runs count".into(),
            })?;
        let mut metrics = Vec::new();
        for (mi, _) in METRICS.iter().enumerate() {
            let base = 3 + mi * STATS.len();
            let vals = (0..STATS.len())
                .map(|k| parse_opt(path, line, rec.get(base + k).unwrap_or("")))
                .collect::<Result<Vec<_>, _>>()?;
            metrics.push(match vals.as_slice() {
                [Some(mean), Some(min), Some(q1), Some(median), Some(q3), Some(max)] => {
                    Some(Spread {
                        mean: *mean,
                        min: *min,
                        q1: *q1,
                        median: *median,
                        q3: *q3,
                        max: *max,
                    })
                }
                _ => None,
            });
        }
        out.push(AggregateRow {
            axis: rec[0].to_string(),
            value: rec[1].to_string(),
            runs,
            metrics,
        });
    }
    Ok(out)
}

/// Oracle: recomputes aggregate.csv from the per-run rows in runs.csv and
/// checks they agree to the written precision.
pub fn verify_aggregate(runs_csv: &Path, aggregate_csv: &Path) -> Result<(), String> {
    let header = runs_header();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = read_table(runs_csv, &header).map_err(|e| e.to_string())?;
    let written = read_aggregate(aggregate_csv).map_err(|e| e.to_string())?;
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .expect("known column")
    };

    let mut groups: Vec<(String, String, Vec<&csv::StringRecord>)> = Vec::new();
    for (_, rec) in &rows {
        match groups.last_mut() {
            Some((_, v, g)) if v == &rec[1] => g.push(rec),
            _ => groups.push((rec[0].to_string(), rec[1].to_string(), vec![rec])),
        }
    }
    if groups.len() != written.len() {
        return Err(format!(
            "{} value groups in runs, {} aggregate rows",
            groups.len(),
            written.len()
        ));
    }
    for ((axis, value, g), row) in groups.iter().zip(&written) {
        if *axis != row.axis || *value != row.value || g.len() != row.runs {
            return Err(format!(
                "row for {axis}={value} disagrees on identity or run count"
            ));
        }
        for m in METRICS {
            let c = col(m);
            let v: Vec<f64> = g
                .iter()
                .filter(|r| !r[c].is_empty())
                .map(|r| r[c].parse::<f64>().map_err(|e| e.to_string()))
                .collect::<Result<_, _>>()?;
            let expect = Spread::of(&v);
            let got = row.metric(m);
            let ok = match (expect, got) {
                (None, None) => true,
                (Some(e), Some(g)) => STATS.iter().all(|s| {
                    let (a, b) = (e.get(s).unwrap(), g.get(s).unwrap());
                    // runs.csv values carry 6 decimals; means of them can
                    // round differently in the 6th place.
                    (a - b).abs() <= 1e-6 * (1.0 + a.abs())
                }),
                _ => false,
            };
            if !ok {
                return Err(format!(
                    "{axis}={value}: {m} aggregate {got:?} != recomputed {expect:?}"
                ));
            }
        }
    }
    Ok(())
}
