//! Text and CSV rendering.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::definiteness::{DefinitenessReport, Failure, Verdict, Witness};
use crate::error::{Error, Result};
use crate::estimate::ComparisonReport;
use crate::simulate::FieldSample;

/// Up to ten significant digits, trailing zeros trimmed.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..10).contains(&mag) {
        let decimals = (9 - mag).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" {
            "0".into()
        } else {
            s
        }
    } else {
        let s = format!("{x:.9e}");
        let (mantissa, exp) = s.split_once('e').expect("exponent form");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exp}")
    }
}

fn fmt_point(p: &[f64]) -> String {
    match p {
        [x] => fmt_num(*x),
        _ => format!("({})", p.iter().map(|&x| fmt_num(x)).collect::<Vec<_>>().join(" ")),
    }
}

/// `points=0,1,2; a=1,-2,1; qf=8`. Coefficients are site-major.
pub fn witness_row(w: &Witness<f64>) -> String {
    let points: Vec<String> = w.config.iter().map(fmt_point).collect();
    let coeffs: Vec<String> = w.vector.iter().map(|&a| fmt_num(a)).collect();
    format!(
        "points={}; a={}; qf={}",
        points.join(","),
        coeffs.join(","),
        fmt_num(w.quadratic_form)
    )
}

pub fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Inconclusive => "inconclusive",
    }
}

/// Summary lines of a definiteness report.
pub fn report_lines(label: &str, r: &DefinitenessReport<f64>) -> Vec<String> {
    let mut out = vec![format!("{label}: {}", verdict_str(r.verdict))];
    match &r.failure {
        Some(Failure::DiagonalAtOrigin { component, value }) => {
            out.push(format!(
                "  gamma_{0}{0}(0) = {1} is not zero",
                component + 1,
                fmt_num(*value)
            ));
        }
        _ => {
            out.push(format!("  configurations checked: {}", r.configs_checked));
            out.push(format!("  min eigenvalue: {}", fmt_num(r.eigenvalue_range.0)));
            out.push(format!("  max eigenvalue: {}", fmt_num(r.eigenvalue_range.1)));
            out.push(format!("  tolerance: {}", fmt_num(r.tolerance)));
        }
    }
    if let Some(w) = &r.witness {
        out.push(format!("  witness ({}): {}", w.constraint, witness_row(w)));
    }
    out
}

fn lf_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| {
        Error::Config(format!("cannot create {}: {e}", path.display()))
    })?))
}

pub fn write_witness_csv(path: &Path, witness: Option<&Witness<f64>>, failure: Option<&Failure<f64>>) -> Result<()> {
    let mut w = lf_writer(create(path)?);
    w.write_record(["witness"])?;
    if let Some(wit) = witness {
        w.write_record([witness_row(wit)])?;
    } else if let Some(Failure::DiagonalAtOrigin { component, value }) = failure {
        w.write_record([format!("component={}; gamma_ii(0)={}", component + 1, fmt_num(*value))])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct SampleRecord {
    replicate: usize,
    component: usize,
    space_index: usize,
    time_index: usize,
    value: f64,
}

/// Components are written one-based.
pub fn write_samples<W: Write>(out: W, samples: &FieldSample<f64>) -> Result<()> {
    let mut w = lf_writer(out);
    for r in 0..samples.replicates() {
        for c in 0..samples.variates() {
            for s in 0..samples.n_space() {
                for t in 0..samples.n_time() {
                    w.serialize(SampleRecord {
                        replicate: r,
                        component: c + 1,
                        space_index: s,
                        time_index: t,
                        value: samples.get(r, c, s, t),
                    })?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_samples_file(path: &Path, samples: &FieldSample<f64>) -> Result<()> {
    write_samples(create(path)?, samples)
}

/// Reads a samples table for a grid of `variates × n_space × n_time` nodes;
/// every cell of every replicate must appear exactly once.
pub fn read_samples(path: &Path, variates: usize, n_space: usize, n_time: usize) -> Result<FieldSample<f64>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let records: Vec<SampleRecord> = rdr.deserialize().collect::<std::result::Result<_, _>>()?;
    let replicates = records.iter().map(|r| r.replicate + 1).max().unwrap_or(0);
    let nodes = variates * n_space * n_time;
    if records.len() != replicates * nodes {
        return Err(Error::Config(format!(
            "{}: expected {} rows for {replicates} replicates, found {}",
            path.display(),
            replicates * nodes,
            records.len()
        )));
    }
    let mut data = vec![f64::NAN; replicates * nodes];
    let mut seen = vec![false; replicates * nodes];
    for rec in &records {
        if rec.component == 0 || rec.component > variates || rec.space_index >= n_space || rec.time_index >= n_time {
            return Err(Error::Config(format!("{}: row out of grid: {rec:?}", path.display())));
        }
        let k = rec.replicate * nodes + ((rec.component - 1) * n_space + rec.space_index) * n_time + rec.time_index;
        if std::mem::replace(&mut seen[k], true) {
            return Err(Error::Config(format!("{}: duplicate row {rec:?}", path.display())));
        }
        data[k] = rec.value;
    }
    FieldSample::from_vec(replicates, variates, n_space, n_time, data)
}

#[derive(Debug, Serialize)]
struct ReportRecord {
    i: usize,
    j: usize,
    space_lag: isize,
    time_lag: isize,
    empirical: f64,
    model: f64,
    diff: f64,
    verdict: &'static str,
}

/// Components are written one-based.
pub fn write_report<W: Write>(out: W, report: &ComparisonReport<f64>) -> Result<()> {
    let mut w = lf_writer(out);
    for row in &report.rows {
        w.serialize(ReportRecord {
            i: row.key.i + 1,
            j: row.key.j + 1,
            space_lag: row.key.lag.space,
            time_lag: row.key.lag.time,
            empirical: row.empirical,
            model: row.model,
            diff: row.diff,
            verdict: if row.pass { "pass" } else { "fail" },
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_report_file(path: &Path, report: &ComparisonReport<f64>) -> Result<()> {
    write_report(create(path)?, report)
}
