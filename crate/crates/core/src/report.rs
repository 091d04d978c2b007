//! Text tables from a sweep's aggregate.csv.

use std::fmt::Write;

use crate::sweep::{AggregateRow, Spread, METRICS, STATS};

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"))
}

fn table(out: &mut String, title: &str, header: &[String], rows: &[Vec<String>]) {
    let mut widths: Vec<usize> = header.iter().map(String::len).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: &[String]| {
        cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| {
                if i == 0 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect::<Vec<_>>()
            .join("  ")
    };
    let _ = writeln!(out, "{title}");
    let _ = writeln!(out, "{}", line(header));
    let _ = writeln!(
        out,
        "{}",
        widths
            .iter()
            .map(|w| "-".repeat(*w))
            .collect::<Vec<_>>()
            .join("  ")
    );
    for r in rows {
        let _ = writeln!(out, "{}", line(r));
    }
    let _ = writeln!(out);
}

/// One table per metric (rows are axis points), followed by the ratio of
/// each point's mean to the first point's mean.
pub fn render(rows: &[AggregateRow]) -> String {
    let mut out = String::new();
    if rows.is_empty() {
        let _ = writeln!(out, "no data");
        return out;
    }
    let axis = &rows[0].axis;
    for m in METRICS {
        let mut header = vec![axis.clone(), "runs".to_string()];
        header.extend(STATS.iter().map(|s| s.to_string()));
        let body: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                let s = r.metric(m);
                let mut cells = vec![r.value.clone(), r.runs.to_string()];
                cells.extend(STATS.iter().map(|st| cell(s.and_then(|s| s.get(st)))));
                cells
            })
            .collect();
        table(&mut out, m, &header, &body);
    }
    if rows.len() > 1 {
        let _ = writeln!(out, "ratios of means (point / {}={}):", axis, rows[0].value);
        for r in &rows[1..] {
            for m in METRICS {
                let ratio = match (rows[0].metric(m), r.metric(m)) {
                    (Some(Spread { mean: a, .. }), Some(Spread { mean: b, .. })) if *a != 0.0 => {
                        format!("{:.3}", b / a)
                    }
                    _ => "-".into(),
                };
                let _ = writeln!(out, "  {axis}={}: {m} x{ratio}", r.value);
            }
        }
    }
    out
}
