//! `stats`: moments of (g1, g2) against the model and the distribution of t.

use std::io::Write;

use serde::Serialize;
use selmerlab::local::tamagawa_exponent;
use selmerlab::stats::{
    cdf_distance, mean_variance, model_mixed_moment, moment_reports, normalizer, standardized_histogram, HistogramBin,
    HISTOGRAM_BIN_WIDTH,
};
use selmerlab::JointHistogram;

use crate::driver::{ordered_map, work_units};
use crate::{open_output, CliError, CliResult, Format, RunConfig};

/// Highest total degree k1 + k2 reported.
pub const MAX_DEGREE: usize = 4;

/// One line of the statistics report. Moment rows carry k1 and k2.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatRow {
    pub quantity: String,
    pub k1: Option<usize>,
    pub k2: Option<usize>,
    pub empirical: f64,
    pub model: Option<f64>,
    pub sample_size: u64,
}

impl StatRow {
    fn scalar(quantity: &str, empirical: f64, model: Option<f64>, sample_size: u64) -> Self {
        StatRow {
            quantity: quantity.into(),
            k1: None,
            k2: None,
            empirical,
            model,
            sample_size,
        }
    }
}

/// Everything `stats` computes for one window.
#[derive(Debug, Clone)]
pub struct FamilyStats {
    pub rows: Vec<StatRow>,
    pub histogram: Vec<HistogramBin>,
    pub t_values: Vec<i64>,
    pub joint: JointHistogram,
    pub skipped: u64,
}

impl FamilyStats {
    pub fn row(&self, quantity: &str) -> Option<&StatRow> {
        self.rows.iter().find(|r| r.quantity == quantity)
    }

    pub fn moment(&self, k1: usize, k2: usize) -> Option<&StatRow> {
        self.rows
            .iter()
            .find(|r| r.quantity == "centered_moment" && r.k1 == Some(k1) && r.k2 == Some(k2))
    }
}

/// Runs the statistics over the configured window. Curves whose ledger
/// fails are left out of t and counted in `skipped`.
pub fn family_stats(cfg: &RunConfig) -> CliResult<FamilyStats> {
    let window = cfg.window();
    let units = work_units(&window, cfg.sample, cfg.seed)?;
    let mut joint = JointHistogram::default();
    let mut t_values = Vec::new();
    let mut skipped = 0u64;
    ordered_map(
        cfg,
        &units,
        |u| {
            let curves: Vec<_> = u.curves(&window).collect();
            let h = JointHistogram::from_curves(curves.iter().copied(), cfg.zcut);
            let ts: Vec<Option<i64>> = curves
                .iter()
                .map(|c| tamagawa_exponent(c).ok().map(|l| l.total as i64))
                .collect();
            (h, ts)
        },
        |(h, ts)| {
            joint.merge(&h);
            for t in ts {
                match t {
                    Some(t) => t_values.push(t),
                    None => skipped += 1,
                }
            }
            Ok(())
        },
    )?;
    if joint.total() == 0 || t_values.is_empty() {
        return Err(CliError::Failed(format!("empty family at X = {}", cfg.xmax)));
    }

    let n = joint.total();
    let reports = moment_reports(&joint, cfg.xmax, cfg.zcut, MAX_DEGREE)?;
    let center = reports[0].centering;
    let mut rows: Vec<StatRow> = reports
        .into_iter()
        .map(|r| StatRow {
            quantity: "centered_moment".into(),
            k1: Some(r.k1),
            k2: Some(r.k2),
            empirical: r.empirical,
            model: Some(r.model),
            sample_size: r.sample_size,
        })
        .collect();
    // Centered first moments of the model vanish, so its covariance is the
    // centered (1, 1) moment.
    let model_cov = model_mixed_moment(1, 1, cfg.zcut)?;
    let (m1, m2) = joint.means()?;
    rows.push(StatRow::scalar("mean_g1", m1, Some(center), n));
    rows.push(StatRow::scalar("mean_g2", m2, Some(center), n));
    rows.push(StatRow::scalar("mean_g1_minus_g2", m1 - m2, Some(0.0), n));
    rows.push(StatRow::scalar("cov_g1_g2", joint.covariance()?, Some(model_cov), n));

    let nt = t_values.len() as u64;
    let (t_mean, t_var) = mean_variance(&t_values)?;
    let scale = normalizer(cfg.xmax)?;
    rows.push(StatRow::scalar("t_mean", t_mean, Some(0.0), nt));
    rows.push(StatRow::scalar("t_variance", t_var, Some(scale * scale), nt));
    rows.push(StatRow::scalar("cdf_distance", cdf_distance(&t_values, cfg.xmax)?, None, nt));
    let histogram = standardized_histogram(&t_values, cfg.xmax, HISTOGRAM_BIN_WIDTH)?;
    Ok(FamilyStats {
        rows,
        histogram,
        t_values,
        joint,
        skipped,
    })
}

/// Histogram rows as tab-separated text with LF line endings.
pub fn write_histogram(out: &mut dyn Write, bins: &[HistogramBin]) -> CliResult<()> {
    writeln!(out, "bin_left\tbin_right\tcount\tdensity")?;
    for b in bins {
        writeln!(out, "{}\t{}\t{}\t{}", b.left, b.right, b.count, b.density)?;
    }
    Ok(())
}

pub fn cmd_stats(cfg: &RunConfig, stderr: &mut dyn Write) -> CliResult<()> {
    let stats = family_stats(cfg)?;
    if let Some(path) = &cfg.hist {
        let mut h = open_output(Some(path))?;
        write_histogram(&mut *h, &stats.histogram)?;
        h.flush()?;
    }
    let mut out = cfg.writer()?;
    match cfg.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            for r in &stats.rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &stats.rows)?;
            writeln!(out)?;
        }
        Format::Tsv => write_histogram(&mut *out, &stats.histogram)?,
    }
    out.flush()?;
    if stats.skipped > 0 {
        writeln!(stderr, "{} curves skipped by the ledger", stats.skipped)?;
    }
    let cdf = stats.row("cdf_distance").map_or(f64::NAN, |r| r.empirical);
    writeln!(
        stderr,
        "X = {}, z = {}: {} curves, CDF distance {cdf:.4}",
        cfg.xmax,
        cfg.zcut,
        stats.joint.total()
    )?;
    Ok(())
}
