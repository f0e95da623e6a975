//! CSV output shaped like the published tables: one column per pair id plus
//! `AVG`, and per-iteration trace files for the trend plots.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::table1::*;
use super::{ExperimentReport, ProtocolResults};
use crate::error::Result;
use crate::similarity::Dimension;

fn fmt(x: f64) -> String {
    format!("{x:.4}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

/// Header `0,1,...,AVG` and one row of percent errors.
pub fn write_error_table<W: Write>(report: &ExperimentReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = report.pair_ids.iter().map(u32::to_string).collect();
    header.push("AVG".into());
    w.write_record(&header)?;
    let mut row: Vec<String> = report.per_pair_error.iter().map(|e| fmt_opt(*e)).collect();
    row.push(fmt(report.avg_error));
    w.write_record(&row)?;
    w.flush()?;
    Ok(())
}

pub fn write_trace<W: Write>(report: &ExperimentReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "iteration",
        "error",
        "accumulated_error",
        "untrained_error",
        "accumulated_untrained_error",
    ])?;
    let acc = report.accumulated_trace();
    let ctl = report.accumulated_control();
    for (i, (&e, &a)) in report.trace.iter().zip(&acc).enumerate() {
        w.write_record([
            (i + 1).to_string(),
            fmt(e),
            fmt(a),
            fmt_opt(report.control_trace.get(i).copied()),
            fmt_opt(ctl.get(i).copied()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_user_errors<W: Write>(report: &ExperimentReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["user_id", "error"])?;
    if let Some(errs) = &report.per_user_error {
        for (u, e) in report.user_ids.iter().zip(errs) {
            w.write_record([u.to_string(), fmt(*e)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One summary row: measured average next to the published one.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SummaryRow {
    pub method: String,
    pub avg_error: f64,
    pub published: Option<f64>,
    pub divergence: Option<f64>,
}

pub fn summary_rows(results: &ProtocolResults) -> Vec<SummaryRow> {
    let row = |method: &str, avg: f64, published: Option<f64>| SummaryRow {
        method: method.to_owned(),
        avg_error: avg,
        published,
        divergence: published.map(|p| avg - p),
    };
    vec![
        row("pair", results.pair.avg_error, Some(PUBLISHED_PAIR)),
        row("feature", results.feature.avg_error, Some(PUBLISHED_FEATURE)),
        row("user", results.user.avg_error, Some(PUBLISHED_USER)),
        row("hybrid", results.hybrid.avg_error, Some(PUBLISHED_HYBRID)),
        row("sort_only", results.sort_only.avg_error, Some(PUBLISHED_SORT_ONLY)),
        row("untrained", results.untrained.avg_error, None),
        row(
            "feature_repeated_pairs",
            results.feature_repeated_avg.unwrap_or(f64::NAN),
            Some(PUBLISHED_FEATURE_REPEATED),
        ),
    ]
}

pub fn write_summary<W: Write>(results: &ProtocolResults, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "avg_error", "published", "divergence"])?;
    for r in summary_rows(results) {
        w.write_record([r.method, fmt(r.avg_error), fmt_opt(r.published), fmt_opt(r.divergence)])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes every table, trace and summary of a protocol run into `dir` and
/// returns the paths written.
pub fn write_protocol(results: &ProtocolResults, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut emit = |name: String, f: &dyn Fn(&mut Vec<u8>) -> Result<()>| -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        let path = dir.join(name);
        fs::write(&path, buf)?;
        written.push(path);
        Ok(())
    };
    for report in [
        &results.pair,
        &results.feature,
        &results.user,
        &results.hybrid,
        &results.sort_only,
        &results.untrained,
    ] {
        let m = report.method.name();
        emit(format!("table_{m}.csv"), &|b| write_error_table(report, b))?;
        emit(format!("trace_{m}.csv"), &|b| write_trace(report, b))?;
    }
    for report in [&results.user, &results.hybrid] {
        emit(format!("users_{}.csv", report.method.name()), &|b| {
            write_user_errors(report, b)
        })?;
    }
    for report in &results.single_dimension {
        emit(format!("table_{}.csv", report.method.name()), &|b| {
            write_error_table(report, b)
        })?;
    }
    emit("dimension_ranking.csv".into(), &|b| {
        let mut w = csv::Writer::from_writer(b);
        let mut header = vec!["pair_id".to_string()];
        header.extend(Dimension::ALL.iter().map(|d| d.name().to_string()));
        header.push("best".into());
        w.write_record(&header)?;
        for r in &results.ranking {
            let mut row = vec![r.pair_id.to_string()];
            row.extend(r.errors.iter().map(|e| fmt_opt(*e)));
            row.push(r.best.map(|d| d.name().to_string()).unwrap_or_default());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    })?;
    emit("final_weights.csv".into(), &|b| {
        let mut w = csv::Writer::from_writer(b);
        let mut header = vec!["method".to_string()];
        header.extend(Dimension::ALL.iter().map(|d| d.name().to_string()));
        w.write_record(&header)?;
        for r in [&results.pair, &results.feature, &results.user, &results.hybrid] {
            if let Some(ws) = r.mean_final_weights {
                let mut row = vec![r.method.name()];
                row.extend(ws.iter().map(|x| fmt(*x)));
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    })?;
    emit("summary.csv".into(), &|b| write_summary(results, b))?;
    emit("significance.csv".into(), &|b| {
        let s = &results.significance;
        let mut w = csv::Writer::from_writer(b);
        w.write_record([
            "comparison",
            "n",
            "statistic",
            "critical",
            "reject",
            "published_statistic",
        ])?;
        w.write_record([
            "feature_vs_sort_only".to_string(),
            s.n.to_string(),
            fmt(s.statistic),
            fmt(-s.critical),
            s.reject.to_string(),
            fmt(PUBLISHED_STATISTIC),
        ])?;
        w.flush()?;
        Ok(())
    })?;
    Ok(written)
}
