use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use super::experiment::{ExperimentOutput, RunRecord, Summary, ARMS};
use crate::error::Result;
use crate::metrics::Winner;

pub const RUNS_COLUMNS: [&str; 17] = [
    "network_id",
    "assignment_id",
    "q",
    "seed",
    "horizon",
    "tau_no_bias",
    "tau_bias",
    "consensus_no_bias",
    "consensus_bias",
    "consensus_delta",
    "information_loss",
    "in_scope_no_bias",
    "in_scope_bias",
    "shocks_no_bias",
    "shocks_bias",
    "winners_no_bias",
    "winners_bias",
];

fn opt<T: std::fmt::Debug>(v: Option<T>) -> String {
    v.map(|v| format!("{v:?}")).unwrap_or_default()
}

fn joined(ts: &[usize]) -> String {
    ts.iter().map(usize::to_string).collect::<Vec<_>>().join(";")
}

fn letters(ws: &[Winner]) -> String {
    ws.iter().map(|w| if *w == Winner::Left { 'L' } else { 'R' }).collect()
}

/// One row per run; list columns are `;`-joined, winners are L/R strings.
pub fn write_runs<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RUNS_COLUMNS)?;
    for r in records {
        w.write_record([
            r.network_id.to_string(),
            r.assignment_id.to_string(),
            format!("{:?}", r.q),
            r.seed.to_string(),
            r.horizon.to_string(),
            opt(r.no_bias.convergence_time),
            opt(r.bias.convergence_time),
            opt(r.no_bias.consensus),
            opt(r.bias.consensus),
            opt(r.consensus_delta()),
            r.information_loss.to_string(),
            r.no_bias.in_scope.to_string(),
            r.bias.in_scope.to_string(),
            joined(&r.no_bias.shock_times),
            joined(&r.bias.shock_times),
            letters(&r.no_bias.winners),
            letters(&r.bias.winners),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Long format: t, arm, value.
fn write_series<W: Write>(summary_series: &std::collections::BTreeMap<&'static str, Vec<f64>>, value: &str, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "arm", value])?;
    let len = summary_series.values().map(Vec::len).max().unwrap_or(0);
    for t in 0..len {
        for arm in ARMS {
            w.write_record([t.to_string(), arm.to_string(), format!("{:?}", summary_series[arm][t])])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_polarization<W: Write>(summary: &Summary, out: W) -> Result<()> {
    write_series(&summary.polarization, "mean_var", out)
}

pub fn write_shocks<W: Write>(summary: &Summary, out: W) -> Result<()> {
    write_series(&summary.shock_fraction, "shock_fraction", out)
}

/// runs.csv, polarization.csv, shocks.csv and summary.json under `dir`.
pub fn write_outputs(dir: &Path, output: &ExperimentOutput) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_runs(&output.records, BufWriter::new(File::create(dir.join("runs.csv"))?))?;
    write_polarization(&output.summary, BufWriter::new(File::create(dir.join("polarization.csv"))?))?;
    write_shocks(&output.summary, BufWriter::new(File::create(dir.join("shocks.csv"))?))?;
    let mut f = BufWriter::new(File::create(dir.join("summary.json"))?);
    serde_json::to_writer_pretty(&mut f, &output.summary)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}
