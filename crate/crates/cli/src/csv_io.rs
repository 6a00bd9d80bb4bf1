//! CSV emission and parse-back of traces and summaries.

use std::io::Write;
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Terminator, WriterBuilder};

use crate::error::{CliError, Result};
use crate::experiment::{Metric, RunTrace, Summary};

pub const TRACE_HEADER: [&str; 10] = [
    "run_id",
    "seed",
    "algo",
    "game",
    "k",
    "samples_seen",
    "dist_sq_rel",
    "h_rel",
    "gamma",
    "flag",
];

pub const SUMMARY_HEADER: [&str; 6] = [
    "algo",
    "metric",
    "samples_seen",
    "mean",
    "ci_half_width",
    "m",
];

/// Shortest decimal string that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// One line of the traces file.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceLine {
    pub run_id: usize,
    pub seed: u64,
    pub algo: String,
    pub game: String,
    pub k: u64,
    pub samples_seen: u64,
    pub dist_sq_rel: f64,
    pub h_rel: f64,
    pub gamma: f64,
    pub flag: String,
}

impl TraceLine {
    fn fields(&self) -> [String; 10] {
        [
            self.run_id.to_string(),
            self.seed.to_string(),
            self.algo.clone(),
            self.game.clone(),
            self.k.to_string(),
            self.samples_seen.to_string(),
            fmt_f64(self.dist_sq_rel),
            fmt_f64(self.h_rel),
            fmt_f64(self.gamma),
            self.flag.clone(),
        ]
    }
}

/// Flattens traces into file lines, in run then record order.
pub fn trace_lines(traces: &[RunTrace], game: &str) -> Vec<TraceLine> {
    traces
        .iter()
        .flat_map(|t| {
            t.rows.iter().map(move |r| TraceLine {
                run_id: t.run_id,
                seed: t.seed,
                algo: t.label.clone(),
                game: game.to_string(),
                k: r.k,
                samples_seen: r.samples_seen,
                dist_sq_rel: r.dist_sq_rel,
                h_rel: r.h_rel,
                gamma: r.gamma,
                flag: if r.diverged { "DIVERGED" } else { "OK" }.to_string(),
            })
        })
        .collect()
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = WriterBuilder::new()
        .terminator(Terminator::Any(b'\n'))
        .from_writer(std::io::BufWriter::new(file));
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>())
            .map_err(csv_err)?;
    }
    let mut inner = w
        .into_inner()
        .map_err(|e| CliError::io(path, e.into_error()))?;
    inner.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_traces(path: &Path, lines: &[TraceLine]) -> Result<()> {
    write_rows(path, &TRACE_HEADER, lines.iter().map(TraceLine::fields))
}

pub fn write_summaries(path: &Path, summaries: &[Summary]) -> Result<()> {
    let rows = summaries.iter().flat_map(|s| {
        s.checkpoints.iter().enumerate().map(move |(c, samples)| {
            [
                s.label.clone(),
                s.metric.column().to_string(),
                samples.to_string(),
                fmt_f64(s.mean[c]),
                fmt_f64(s.ci[c]),
                s.m.to_string(),
            ]
        })
    });
    write_rows(path, &SUMMARY_HEADER, rows)
}

fn read_records(path: &Path, header: &[&str]) -> Result<Vec<StringRecord>> {
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = ReaderBuilder::new().from_path(path).map_err(csv_err)?;
    let found = r.headers().map_err(csv_err)?;
    if found.iter().ne(header.iter().copied()) {
        return Err(CliError::Usage(format!(
            "{}: unexpected header",
            path.display()
        )));
    }
    r.records()
        .collect::<std::result::Result<_, _>>()
        .map_err(csv_err)
}

fn field<T: std::str::FromStr>(
    path: &Path,
    rec: &StringRecord,
    idx: usize,
    name: &str,
) -> Result<T> {
    rec.get(idx).and_then(|v| v.parse().ok()).ok_or_else(|| {
        CliError::Usage(format!(
            "{}: bad `{name}` in line {:?}",
            path.display(),
            rec.position().map(|p| p.line())
        ))
    })
}

pub fn read_traces(path: &Path) -> Result<Vec<TraceLine>> {
    read_records(path, &TRACE_HEADER)?
        .iter()
        .map(|r| {
            Ok(TraceLine {
                run_id: field(path, r, 0, "run_id")?,
                seed: field(path, r, 1, "seed")?,
                algo: field(path, r, 2, "algo")?,
                game: field(path, r, 3, "game")?,
                k: field(path, r, 4, "k")?,
                samples_seen: field(path, r, 5, "samples_seen")?,
                dist_sq_rel: field(path, r, 6, "dist_sq_rel")?,
                h_rel: field(path, r, 7, "h_rel")?,
                gamma: field(path, r, 8, "gamma")?,
                flag: field(path, r, 9, "flag")?,
            })
        })
        .collect()
}

/// One line of the summary file.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryLine {
    pub algo: String,
    pub metric: Metric,
    pub samples_seen: u64,
    pub mean: f64,
    pub ci_half_width: f64,
    pub m: usize,
}

pub fn read_summaries(path: &Path) -> Result<Vec<SummaryLine>> {
    read_records(path, &SUMMARY_HEADER)?
        .iter()
        .map(|r| {
            let metric = match r.get(1) {
                Some("dist_sq_rel") => Metric::Distance,
                Some("h_rel") => Metric::Hamiltonian,
                _ => return Err(CliError::Usage(format!("{}: bad `metric`", path.display()))),
            };
            Ok(SummaryLine {
                algo: field(path, r, 0, "algo")?,
                metric,
                samples_seen: field(path, r, 2, "samples_seen")?,
                mean: field(path, r, 3, "mean")?,
                ci_half_width: field(path, r, 4, "ci_half_width")?,
                m: field(path, r, 5, "m")?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for v in [
            0.0,
            -0.0,
            1.0,
            0.1,
            1.0 / 3.0,
            1e-300,
            5e-324,
            1.7976931348623157e308,
            123456.789,
            f64::NAN,
            f64::INFINITY,
        ] {
            let s = fmt_f64(v);
            let back: f64 = s.parse().unwrap();
            assert!(
                back.to_bits() == v.to_bits() || (v.is_nan() && back.is_nan()),
                "{v} -> {s}"
            );
        }
        assert_eq!(fmt_f64(0.5), "0.5");
        assert_eq!(fmt_f64(1e-30), "1e-30");
    }
}
