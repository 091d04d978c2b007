//! CSV files of a run and the reader used by the recomputation oracle.
//!
//! Floats are written with fixed precision so identical runs give
//! byte-identical files. Absent values are empty fields.

use std::fs::File;
use std::io::{BufWriter, Read};
use std::path::{Path, PathBuf};

use crate::engine::SimTime;
use crate::error::OutputError;
use crate::metrics::{mean_present, percentile_ns, recompute_from_records, FlowStats};
use crate::sim::RunResult;
use crate::traffic::{PacketRecord, PacketStatus};
use crate::VERSION;

pub const PACKETS_HEADER: [&str; 10] = [
    "run_id",
    "flow_id",
    "seq",
    "size_bytes",
    "created_ns",
    "tx_first_ns",
    "rx_ns",
    "status",
    "attempts",
    "sinr_db",
];

pub const FLOWS_HEADER: [&str; 11] = [
    "run_id",
    "flow_id",
    "dest_node",
    "sent",
    "delivered",
    "lost",
    "in_flight",
    "loss_pct",
    "mean_delay_ms",
    "throughput_kbps",
    "tx_bitrate_kbps",
];

/// The p50/p95 delay columns are extras beyond the five evaluation metrics.
pub const SUMMARY_HEADER: [&str; 20] = [
    "run_id",
    "tech",
    "cv_count",
    "max_speed_mps",
    "packet_size",
    "offered_rate_bps",
    "seed",
    "loss_pct",
    "mean_delay_ms",
    "throughput_kbps",
    "tx_bitrate_kbps",
    "extra_p50_delay_ms",
    "extra_p95_delay_ms",
    "sent",
    "delivered",
    "lost",
    "in_flight",
    "duration_s",
    "config_hash",
    "version",
];

pub const SINR_HEADER: [&str; 4] = ["run_id", "time_ns", "node_id", "sinr_db"];

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.6}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// One summary.csv row.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub run_id: String,
    pub tech: String,
    pub cv_count: u32,
    pub max_speed_mps: f64,
    pub packet_size: u32,
    pub offered_rate_bps: f64,
    pub seed: u64,
    pub loss_pct: Option<f64>,
    pub mean_delay_ms: Option<f64>,
    pub throughput_kbps: Option<f64>,
    pub tx_bitrate_kbps: Option<f64>,
    pub p50_delay_ms: Option<f64>,
    pub p95_delay_ms: Option<f64>,
    pub sent: u64,
    pub delivered: u64,
    pub lost: u64,
    pub in_flight: u64,
    pub duration_s: f64,
    pub config_hash: String,
    pub version: String,
}

impl RunSummary {
    /// Metric columns are means over flows of each flow's value, skipping
    /// flows where the value is absent.
    pub fn from_run(r: &RunResult) -> Self {
        let c = &r.config;
        let flows = &r.flows;
        let mut delays: Vec<u64> = flows
            .iter()
            .flat_map(|f| f.delays_ns().iter().copied())
            .collect();
        let p50 = percentile_ns(&mut delays, 0.5).map(|ns| ns as f64 / 1e6);
        let p95 = percentile_ns(&mut delays, 0.95).map(|ns| ns as f64 / 1e6);
        RunSummary {
            run_id: r.run_id.clone(),
            tech: c.tech().as_str().to_string(),
            cv_count: flows.len() as u32,
            max_speed_mps: c.mobility.max_speed.as_mps(),
            packet_size: c.traffic.packet_size,
            offered_rate_bps: c.traffic.offered_rate_bps,
            seed: c.scenario.seed,
            loss_pct: mean_present(flows.iter().map(FlowStats::packet_loss_ratio)),
            mean_delay_ms: mean_present(flows.iter().map(FlowStats::mean_delay_ms)),
            throughput_kbps: mean_present(flows.iter().map(|f| Some(f.throughput_kbps()))),
            tx_bitrate_kbps: mean_present(flows.iter().map(|f| Some(f.tx_bitrate_kbps()))),
            p50_delay_ms: p50,
            p95_delay_ms: p95,
            sent: flows.iter().map(|f| f.sent).sum(),
            delivered: flows.iter().map(|f| f.delivered).sum(),
            lost: flows.iter().map(|f| f.lost).sum(),
            in_flight: flows.iter().map(FlowStats::in_flight).sum(),
            duration_s: c.horizon().saturating_sub(c.warmup()).as_secs_f64(),
            config_hash: c.digest(),
            version: VERSION.to_string(),
        }
    }

    pub fn to_record(&self) -> Vec<String> {
        vec![
            self.run_id.clone(),
            self.tech.clone(),
            self.cv_count.to_string(),
            fmt_f64(self.max_speed_mps),
            self.packet_size.to_string(),
            fmt_f64(self.offered_rate_bps),
            self.seed.to_string(),
            fmt_opt(self.loss_pct),
            fmt_opt(self.mean_delay_ms),
            fmt_opt(self.throughput_kbps),
            fmt_opt(self.tx_bitrate_kbps),
            fmt_opt(self.p50_delay_ms),
            fmt_opt(self.p95_delay_ms),
            self.sent.to_string(),
            self.delivered.to_string(),
            self.lost.to_string(),
            self.in_flight.to_string(),
            fmt_f64(self.duration_s),
            self.config_hash.clone(),
            self.version.clone(),
        ]
    }

    /// Metric value by summary column name.
    pub fn metric(&self, name: &str) -> Option<f64> {
        match name {
            "loss_pct" => self.loss_pct,
            "mean_delay_ms" => self.mean_delay_ms,
            "throughput_kbps" => self.throughput_kbps,
            "tx_bitrate_kbps" => self.tx_bitrate_kbps,
            "extra_p50_delay_ms" => self.p50_delay_ms,
            "extra_p95_delay_ms" => self.p95_delay_ms,
            _ => None,
        }
    }
}

/// Paths of the files written for one run.
#[derive(Debug, Clone)]
pub struct RunFiles {
    pub packets: Option<PathBuf>,
    pub flows: PathBuf,
    pub summary: PathBuf,
    pub sinr: PathBuf,
    pub config: PathBuf,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> OutputError + '_ {
    move |source| OutputError::Io {
        path: path.to_owned(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> OutputError + '_ {
    move |source| OutputError::Csv {
        path: path.to_owned(),
        source,
    }
}

pub(crate) fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, OutputError> {
    let f = File::create(path).map_err(io_err(path))?;
    Ok(csv::Writer::from_writer(BufWriter::new(f)))
}

pub(crate) fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<(), OutputError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = writer(path)?;
    let e = csv_err(path);
    w.write_record(header).map_err(&e)?;
    for row in rows {
        w.write_record(row).map_err(&e)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn packet_row(run_id: &str, p: &PacketRecord) -> [String; 10] {
    let ns = |t: Option<SimTime>| t.map(|t| t.as_nanos().to_string()).unwrap_or_default();
    [
        run_id.to_string(),
        p.flow_id.to_string(),
        p.seq.to_string(),
        p.size.to_string(),
        p.created.as_nanos().to_string(),
        ns(p.tx_first),
        ns(p.rx),
        p.status.as_str().to_string(),
        p.attempts.to_string(),
        fmt_opt(p.sinr_at_rx),
    ]
}

pub fn flow_row(run_id: &str, f: &FlowStats) -> [String; 11] {
    [
        run_id.to_string(),
        f.flow_id.to_string(),
        f.dest_node.to_string(),
        f.sent.to_string(),
        f.delivered.to_string(),
        f.lost.to_string(),
        f.in_flight().to_string(),
        fmt_opt(f.packet_loss_ratio()),
        fmt_opt(f.mean_delay_ms()),
        fmt_f64(f.throughput_kbps()),
        fmt_f64(f.tx_bitrate_kbps()),
    ]
}

/// Writes packets.csv (when records were kept), flows.csv, summary.csv,
/// sinr.csv and the expanded config.toml into `dir`.
pub fn write_run(r: &RunResult, dir: &Path) -> Result<RunFiles, OutputError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let id = r.run_id.as_str();
    let files = RunFiles {
        packets: r.records.as_ref().map(|_| dir.join("packets.csv")),
        flows: dir.join("flows.csv"),
        summary: dir.join("summary.csv"),
        sinr: dir.join("sinr.csv"),
        config: dir.join("config.toml"),
    };
    if let (Some(path), Some(recs)) = (&files.packets, &r.records) {
        write_rows(
            path,
            &PACKETS_HEADER,
            recs.iter().map(|p| packet_row(id, p)),
        )?;
    }
    write_rows(
        &files.flows,
        &FLOWS_HEADER,
        r.flows.iter().map(|f| flow_row(id, f)),
    )?;
    write_rows(
        &files.summary,
        &SUMMARY_HEADER,
        [RunSummary::from_run(r).to_record()],
    )?;
    write_rows(
        &files.sinr,
        &SINR_HEADER,
        r.sinr.iter().map(|s| {
            [
                id.to_string(),
                s.time.as_nanos().to_string(),
                s.node_id.to_string(),
                fmt_f64(s.sinr),
            ]
        }),
    )?;
    std::fs::write(&files.config, r.config.to_toml()).map_err(io_err(&files.config))?;
    Ok(files)
}

/// Reads a whole CSV file, checking the header. A file whose last line lacks
/// its terminating newline is reported as truncated.
pub(crate) fn read_table(
    path: &Path,
    header: &[&str],
) -> Result<Vec<(u64, csv::StringRecord)>, OutputError> {
    let mut text = String::new();
    File::open(path)
        .map_err(io_err(path))?
        .read_to_string(&mut text)
        .map_err(io_err(path))?;
    let schema = |message: String| OutputError::Schema {
        path: path.to_owned(),
        message,
    };
    if text.is_empty() {
        return Err(schema("empty file, expected a header".into()));
    }
    if !text.ends_with('\n') {
        let line = text.lines().count() as u64;
        return Err(OutputError::Record {
            path: path.to_owned(),
            line,
            message: "truncated: last line is incomplete".into(),
        });
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let got = rdr.headers().map_err(csv_err(path))?.clone();
    let want: Vec<&str> = header.to_vec();
    let missing: Vec<&str> = want
        .iter()
        .copied()
        .filter(|h| !got.iter().any(|g| g == *h))
        .collect();
    if !missing.is_empty() {
        return Err(schema(format!("missing columns: {}", missing.join(", "))));
    }
    if got.iter().collect::<Vec<_>>() != want {
        return Err(schema(format!(
            "columns out of order; expected {}",
            want.join(",")
        )));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| OutputError::Record {
            path: path.to_owned(),
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        rows.push((line, rec));
    }
    Ok(rows)
}

fn field<T: std::str::FromStr>(
    path: &Path,
    line: u64,
    rec: &csv::StringRecord,
    i: usize,
    name: &str,
) -> Result<T, OutputError> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse().map_err(|_| OutputError::Record {
        path: path.to_owned(),
        line,
        message: format!("bad {name} `{raw}`"),
    })
}

fn opt_field<T: std::str::FromStr>(
    path: &Path,
    line: u64,
    rec: &csv::StringRecord,
    i: usize,
    name: &str,
) -> Result<Option<T>, OutputError> {
    if rec.get(i).unwrap_or("").is_empty() {
        Ok(None)
    } else {
        field(path, line, rec, i, name).map(Some)
    }
}

/// Parses packets.csv back into records.
pub fn read_packets(path: &Path) -> Result<Vec<PacketRecord>, OutputError> {
    let rows = read_table(path, &PACKETS_HEADER)?;
    let mut out = Vec::with_capacity(rows.len());
    for (line, rec) in rows {
        let status_raw = rec.get(7).unwrap_or("");
        let status = PacketStatus::parse(status_raw).ok_or_else(|| OutputError::Record {
            path: path.to_owned(),
            line,
            message: format!("bad status `{status_raw}`"),
        })?;
        let rx: Option<u64> = opt_field(path, line, &rec, 6, "rx_ns")?;
        if (status == PacketStatus::Delivered) != rx.is_some() {
            return Err(OutputError::Record {
                path: path.to_owned(),
                line,
                message: "rx_ns must be present exactly for delivered packets".into(),
            });
        }
        out.push(PacketRecord {
            flow_id: field(path, line, &rec, 1, "flow_id")?,
            seq: field(path, line, &rec, 2, "seq")?,
            size: field(path, line, &rec, 3, "size_bytes")?,
            created: SimTime::from_nanos(field(path, line, &rec, 4, "created_ns")?),
            tx_first: opt_field::<u64>(path, line, &rec, 5, "tx_first_ns")?
                .map(SimTime::from_nanos),
            rx: rx.map(SimTime::from_nanos),
            status,
            attempts: field(path, line, &rec, 8, "attempts")?,
            sinr_at_rx: opt_field(path, line, &rec, 9, "sinr_db")?,
        });
    }
    Ok(out)
}

/// `(flow_id, dest_node)` pairs listed in flows.csv.
pub fn read_flow_ids(path: &Path) -> Result<Vec<(u32, u32)>, OutputError> {
    read_table(path, &FLOWS_HEADER)?
        .into_iter()
        .map(|(line, rec)| {
            Ok((
                field(path, line, &rec, 1, "flow_id")?,
                field(path, line, &rec, 2, "dest_node")?,
            ))
        })
        .collect()
}

/// Recomputes every flow's accumulators from packets.csv alone.
pub fn recompute_oracle(
    packets_csv: &Path,
    flows: &[(u32, u32)],
    horizon: SimTime,
    warmup: SimTime,
) -> Result<Vec<FlowStats>, OutputError> {
    let records = read_packets(packets_csv)?;
    Ok(recompute_from_records(&records, flows, horizon, warmup))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(status: PacketStatus) -> PacketRecord {
        let mut p = PacketRecord::new(2, 7, 1024, SimTime::from_millis(5));
        p.status = status;
        if status == PacketStatus::Delivered {
            p.tx_first = Some(SimTime::from_millis(6));
            p.rx = Some(SimTime::from_millis(7));
            p.attempts = 2;
            p.sinr_at_rx = Some(3.25);
        }
        p
    }

    #[test]
    fn packet_rows_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("packets.csv");
        let recs = vec![
            rec(PacketStatus::Delivered),
            rec(PacketStatus::Lost),
            rec(PacketStatus::InFlight),
        ];
        write_rows(
            &path,
            &PACKETS_HEADER,
            recs.iter().map(|p| packet_row("r", p)),
        )
        .unwrap();
        assert_eq!(read_packets(&path).unwrap(), recs);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(
            "run_id,flow_id,seq,size_bytes,created_ns,tx_first_ns,rx_ns,status,attempts,sinr_db\n"
        ));
        assert!(text.contains("r,2,7,1024,5000000,,,lost,0,\n"));
    }

    #[test]
    fn truncated_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("packets.csv");
        write_rows(
            &path,
            &PACKETS_HEADER,
            [packet_row("r", &rec(PacketStatus::Delivered))],
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, &text[..text.len() - 9]).unwrap();
        let err = read_packets(&path).unwrap_err();
        assert!(err.to_string().contains("truncated"), "{err}");

        std::fs::write(&path, "").unwrap();
        assert!(matches!(
            read_packets(&path),
            Err(OutputError::Schema { .. })
        ));
    }

    #[test]
    fn missing_columns_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("flows.csv");
        std::fs::write(&path, "run_id,flow_id\nx,1\n").unwrap();
        let err = read_flow_ids(&path).unwrap_err().to_string();
        assert!(err.contains("dest_node"), "{err}");
    }

    #[test]
    fn delivered_without_rx_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("packets.csv");
        let mut text = PACKETS_HEADER.join(",");
        text.push_str("\nr,0,0,10,0,,,delivered,1,\n");
        std::fs::write(&path, text).unwrap();
        assert!(matches!(
            read_packets(&path),
            Err(OutputError::Record { line: 2, .. })
        ));
    }

    #[test]
    fn fixed_precision() {
        assert_eq!(fmt_f64(1.0 / 3.0), "0.333333");
        assert_eq!(fmt_opt(None), "");
    }
}
