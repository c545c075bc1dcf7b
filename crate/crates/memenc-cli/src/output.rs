//! Output writers. Every file lands via write-then-rename.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Result;
use memenc::checkpoint::atomic_write;
use memenc::encoder::EncodingReport;
use serde::Serialize;

/// The Table-1 style metrics row.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsRow {
    pub test_acc: f64,
    pub enc_precision: f64,
    pub enc_recall: f64,
    pub enc_auc: f64,
}

pub fn write_metrics_row(path: &Path, row: &MetricsRow, json: bool) -> Result<()> {
    let body = if json {
        format!("{}\n", serde_json::to_string_pretty(row)?)
    } else {
        format!(
            "test_acc,enc_precision,enc_recall,enc_auc\n{},{},{},{}\n",
            row.test_acc, row.enc_precision, row.enc_recall, row.enc_auc
        )
    };
    atomic_write(path, body.as_bytes())?;
    Ok(())
}

/// Per-epoch loss trajectories as CSV.
pub fn write_report_csv(path: &Path, report: &EncodingReport) -> Result<()> {
    let mut body = String::from("epoch,ce_members,ce_nonmembers,ce_test,enc_loss\n");
    for (i, ((m, nm), t)) in report
        .ce_members
        .iter()
        .zip(&report.ce_nonmembers)
        .zip(&report.ce_test)
        .enumerate()
    {
        let enc = report
            .enc_loss
            .get(i)
            .map_or(String::new(), |v| v.to_string());
        writeln!(body, "{},{},{},{},{}", i + 1, m, nm, t, enc)?;
    }
    atomic_write(path, body.as_bytes())?;
    Ok(())
}

/// Generic CSV dump from a header and preformatted rows.
pub fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    let mut body = String::with_capacity(rows.len() * 32 + header.len() + 1);
    body.push_str(header);
    body.push('\n');
    for row in rows {
        body.push_str(row);
        body.push('\n');
    }
    atomic_write(path, body.as_bytes())?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let body = format!("{}\n", serde_json::to_string_pretty(value)?);
    atomic_write(path, body.as_bytes())?;
    Ok(())
}
