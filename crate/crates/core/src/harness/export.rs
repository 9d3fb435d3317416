//! Result files.
//!
//! `raw.jsonl` holds one JSON object per trial and checkpoint with the fields
//! `policy, beta, trial, t, rec_rank, rec_mean, simple_regret, cum_regret,
//! cum_reward, elapsed_ns` (regret fields are `null` for unbounded reservoirs).
//!
//! `agg.csv` has the header `policy,beta,t,metric,median,q25,q75`. Numbers use
//! the shortest representation that parses back to the same value, and
//! infinities are written `inf` / `-inf`. Wall times are not aggregated, so
//! the file is byte-identical across runs with the same configuration.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::{AggregateRow, AggregateStats, HarnessError, Metric, TrialTrace};

pub const AGG_HEADER: [&str; 7] = ["policy", "beta", "t", "metric", "median", "q25", "q75"];

#[derive(Serialize)]
struct RawRecord<'a> {
    policy: &'a str,
    beta: &'a str,
    trial: u32,
    t: u64,
    rec_rank: f64,
    rec_mean: f64,
    simple_regret: Option<f64>,
    cum_regret: Option<f64>,
    cum_reward: f64,
    elapsed_ns: u64,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.display().to_string(), source }
}

fn fmt_f64(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

fn parse_f64(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

/// Writes `raw.jsonl` and `agg.csv` into `out_dir`, creating it if needed.
pub fn export(traces: &[TrialTrace], agg: &AggregateStats, out_dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;

    let raw_path = out_dir.join("raw.jsonl");
    let mut raw = BufWriter::new(File::create(&raw_path).map_err(io_err(&raw_path))?);
    for tr in traces {
        for p in &tr.points {
            let rec = RawRecord {
                policy: &tr.policy,
                beta: &tr.beta,
                trial: tr.trial,
                t: p.t,
                rec_rank: p.rec_rank,
                rec_mean: p.rec_mean,
                simple_regret: p.simple_regret,
                cum_regret: p.cum_regret,
                cum_reward: p.cum_reward,
                elapsed_ns: p.elapsed_ns,
            };
            serde_json::to_writer(&mut raw, &rec).map_err(|e| HarnessError::Io {
                path: raw_path.display().to_string(),
                source: e.into(),
            })?;
            raw.write_all(b"\n").map_err(io_err(&raw_path))?;
        }
    }
    raw.flush().map_err(io_err(&raw_path))?;

    let agg_path = out_dir.join("agg.csv");
    let csv_err = |e: csv::Error| HarnessError::Format { path: agg_path.display().to_string(), message: e.to_string() };
    let mut w = csv::Writer::from_path(&agg_path).map_err(csv_err)?;
    w.write_record(AGG_HEADER).map_err(csv_err)?;
    for r in &agg.rows {
        w.write_record([
            r.policy.as_str(),
            r.beta.as_str(),
            &r.t.to_string(),
            r.metric.name(),
            &fmt_f64(r.median),
            &fmt_f64(r.q25),
            &fmt_f64(r.q75),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io_err(&agg_path))?;
    Ok(())
}

/// Reads an `agg.csv` written by [`export`].
pub fn import_aggregate(path: &Path) -> Result<AggregateStats, HarnessError> {
    let bad = |message: String| HarnessError::Format { path: path.display().to_string(), message };
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => HarnessError::Io { path: path.display().to_string(), source },
        other => bad(format!("{other:?}")),
    })?;
    let header = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().ne(AGG_HEADER) {
        return Err(bad(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let field = |i: usize| rec.get(i).unwrap_or_default();
        let num = |i: usize| parse_f64(field(i)).ok_or_else(|| bad(format!("row {}: bad number {:?}", line + 2, field(i))));
        rows.push(AggregateRow {
            policy: field(0).to_string(),
            beta: field(1).to_string(),
            t: field(2).parse().map_err(|_| bad(format!("row {}: bad t {:?}", line + 2, field(2))))?,
            metric: Metric::parse(field(3)).ok_or_else(|| bad(format!("row {}: unknown metric {:?}", line + 2, field(3))))?,
            median: num(4)?,
            q25: num(5)?,
            q75: num(6)?,
        });
    }
    Ok(AggregateStats { rows })
}
