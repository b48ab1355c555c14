//! `enumerate` and `compute`.

use std::io::Write;

use serde::{Deserialize, Serialize};
use selmerlab::descent::descend_oriented;
use selmerlab::family::count_window;
use selmerlab::local::tamagawa_exponent;
use selmerlab::stats::{g1, g2};
use selmerlab::{CurvePair, FamilyWindow, Orientation};

use crate::driver::{ordered_map, work_units};
use crate::{CliError, CliResult, Format, RunConfig};

/// Curves whose errors are echoed individually before summarizing.
const ERRORS_ECHOED: usize = 10;

/// One output row. g1 and g2 count all odd prime divisors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRecord {
    #[serde(rename = "A")]
    pub a: i64,
    #[serde(rename = "B")]
    pub b: i64,
    pub t_total: i32,
    pub t_descent: Option<i32>,
    pub dim_sel_phi: Option<u32>,
    pub dim_sel_phihat: Option<u32>,
    pub g1: u32,
    pub g2: u32,
    pub n_additive: u32,
    pub square_disc_flag: bool,
}

pub fn record_for(c: &CurvePair, with_descent: bool, orientation: Orientation) -> selmerlab::Result<OutputRecord> {
    let ledger = tamagawa_exponent(c)?;
    let descent = if with_descent {
        Some(descend_oriented(c.a, c.b, orientation)?)
    } else {
        None
    };
    Ok(OutputRecord {
        a: c.a,
        b: c.b,
        t_total: ledger.total,
        t_descent: descent.as_ref().map(|d| d.exponent()),
        dim_sel_phi: descent.as_ref().map(|d| d.phi.dim),
        dim_sel_phihat: descent.as_ref().map(|d| d.phihat.dim),
        g1: g1(c.a, c.b, None)?,
        g2: g2(c.a, c.b, None)?,
        n_additive: ledger.n_additive,
        square_disc_flag: c.two_torsion_full,
    })
}

#[derive(Debug, Serialize)]
struct CountRow {
    x: u64,
    count: u64,
    predicted: f64,
    ratio: f64,
    square_disc: u64,
}

pub fn cmd_enumerate(cfg: &RunConfig, stderr: &mut dyn Write) -> CliResult<()> {
    let (count, predicted) = count_window(cfg.xmax);
    let (mut listed, mut square_disc) = (0u64, 0u64);
    for c in FamilyWindow::new(cfg.xmax).iter() {
        listed += 1;
        square_disc += c.two_torsion_full as u64;
    }
    if listed != count {
        return Err(CliError::Failed(format!(
            "enumeration lists {listed} curves but the stripe count is {count}"
        )));
    }
    let row = CountRow {
        x: cfg.xmax,
        count,
        predicted,
        ratio: count as f64 / predicted,
        square_disc,
    };
    let mut out = cfg.writer()?;
    match cfg.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.serialize(&row)?;
            w.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &row)?;
            writeln!(out)?;
        }
        Format::Tsv => return Err(CliError::Config("tsv is reserved for histograms".into())),
    }
    out.flush()?;
    writeln!(stderr, "#E({}) = {count}, predicted {predicted:.1}, ratio {:.5}", cfg.xmax, row.ratio)?;
    Ok(())
}

enum RecordSink<'a> {
    Csv(csv::Writer<&'a mut dyn Write>),
    Json { out: &'a mut dyn Write, first: bool },
}

impl RecordSink<'_> {
    fn write(&mut self, r: &OutputRecord) -> CliResult<()> {
        match self {
            RecordSink::Csv(w) => w.serialize(r)?,
            RecordSink::Json { out, first } => {
                out.write_all(if *first { b"[\n" } else { b",\n" })?;
                serde_json::to_writer(&mut **out, r)?;
                *first = false;
            }
        }
        Ok(())
    }

    fn finish(self) -> CliResult<()> {
        match self {
            RecordSink::Csv(mut w) => w.flush()?,
            RecordSink::Json { out, first } => {
                out.write_all(if first { b"[]\n" } else { b"\n]\n" })?;
                out.flush()?;
            }
        }
        Ok(())
    }
}

pub fn cmd_compute(cfg: &RunConfig, stderr: &mut dyn Write) -> CliResult<()> {
    if cfg.format == Format::Tsv {
        return Err(CliError::Config("tsv is reserved for histograms".into()));
    }
    let window = cfg.window();
    let units = work_units(&window, cfg.sample, cfg.seed)?;
    let mut out = cfg.writer()?;
    let mut sink = match cfg.format {
        Format::Csv => RecordSink::Csv(csv::Writer::from_writer(&mut *out as &mut dyn Write)),
        _ => RecordSink::Json {
            out: &mut *out,
            first: true,
        },
    };
    let (mut written, mut failed, mut mismatched) = (0u64, 0u64, 0u64);
    let mut echoed = Vec::new();
    ordered_map(
        cfg,
        &units,
        |u| {
            u.curves(&window)
                .map(|c| record_for(&c, cfg.with_descent, cfg.orientation).map_err(|e| (c.a, c.b, e)))
                .collect::<Vec<_>>()
        },
        |rows| {
            for row in rows {
                match row {
                    Ok(r) => {
                        if r.t_descent.is_some_and(|t| t != r.t_total) {
                            mismatched += 1;
                            if echoed.len() < ERRORS_ECHOED {
                                echoed.push(format!(
                                    "(A,B) = ({}, {}): t_total {} != t_descent {}",
                                    r.a,
                                    r.b,
                                    r.t_total,
                                    r.t_descent.unwrap()
                                ));
                            }
                        }
                        sink.write(&r)?;
                        written += 1;
                    }
                    Err((a, b, e)) => {
                        failed += 1;
                        if echoed.len() < ERRORS_ECHOED {
                            echoed.push(format!("(A,B) = ({a}, {b}) skipped: {e}"));
                        }
                    }
                }
            }
            Ok(())
        },
    )?;
    sink.finish()?;
    drop(out);
    for line in &echoed {
        writeln!(stderr, "{line}")?;
    }
    writeln!(stderr, "{written} records written, {failed} curves skipped, {mismatched} mismatches")?;
    if mismatched > 0 {
        return Err(CliError::Failed(format!("{mismatched} records with t_total != t_descent")));
    }
    Ok(())
}
