//! Result tables and their CSV form.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::stats::{ci95_halfwidth, Tally};
use crate::Result;

/// First line of every CSV written by the harness.
pub const SCHEMA_TAG: &str = "# mimorx-csv v1";

/// Which rate the confidence interval refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CiBasis {
    Bits,
    Frames,
}

/// One SNR point of one series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub series: String,
    pub snr_db: f64,
    pub trials: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub frame_errors: u64,
    pub fer: f64,
    pub avg_iterations: f64,
    pub avg_flops_add: f64,
    pub avg_flops_cmp: f64,
    pub avg_flops_mul: f64,
    pub ci95_halfwidth: f64,
}

impl SweepRow {
    pub fn from_tally(series: &str, snr_db: f64, t: &Tally, basis: CiBasis) -> Self {
        Self {
            series: series.to_string(),
            snr_db,
            trials: t.trials,
            bit_errors: t.bit_errors,
            ber: t.ber(),
            frame_errors: t.frame_errors,
            fer: t.fer(),
            avg_iterations: t.mean(t.iterations),
            avg_flops_add: t.mean(t.flops.additions),
            avg_flops_cmp: t.mean(t.flops.comparisons),
            avg_flops_mul: t.mean(t.flops.multiplications),
            ci95_halfwidth: match basis {
                CiBasis::Bits => ci95_halfwidth(t.bit_errors, t.bits),
                CiBasis::Frames => ci95_halfwidth(t.frame_errors, t.trials),
            },
        }
    }
}

/// Rows grouped by series, each group sorted by SNR.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub experiment: String,
    /// Free-form `key=value` notes written into the schema line.
    pub meta: Vec<(String, String)>,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn series(&self, name: &str) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.series == name).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityRow {
    pub detector: String,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub t: usize,
    pub multiplications: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationRow {
    pub series: String,
    pub snr_db: f64,
    pub t: usize,
    pub pairs: u64,
    pub corr_estimates: Option<f64>,
    pub corr_errors: Option<f64>,
}

/// Any table the harness produces.
#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    Sweep(SweepResult),
    Complexity(Vec<ComplexityRow>),
    Correlation(Vec<CorrelationRow>),
}

impl Report {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        match self {
            Report::Sweep(s) => {
                let meta: String = s.meta.iter().map(|(k, v)| format!(" {k}={v}")).collect();
                writeln!(out, "{SCHEMA_TAG} table=sweep experiment={}{meta}", s.experiment)?;
                write_rows(out, &s.rows)
            }
            Report::Complexity(rows) => {
                writeln!(out, "{SCHEMA_TAG} table=complexity")?;
                write_rows(out, rows)
            }
            Report::Correlation(rows) => {
                writeln!(out, "{SCHEMA_TAG} table=correlation")?;
                write_rows(out, rows)
            }
        }
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
    }

    pub fn write_to(&self, path: Option<&Path>) -> Result<()> {
        match path {
            Some(p) => self.write_csv(std::io::BufWriter::new(std::fs::File::create(p)?)),
            None => self.write_csv(std::io::stdout().lock()),
        }
    }
}

fn write_rows<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
