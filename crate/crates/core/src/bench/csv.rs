//! Metric CSV output and matrix dumps.

use std::fmt::Write as _;
use std::path::Path;

use super::metrics::MetricRecord;
use crate::error::{Error, Result};
use crate::numkit::ComplexMatrix;

pub const HEADER: &str = "method,snr_db,nmse_db,doa_rmse_deg,p_detect,mean_sse,trials,wall_ms";

/// Six significant digits, `%g` style: fixed notation for exponents in
/// `[-4, 6)`, scientific otherwise, trailing zeros removed.
pub fn format_g(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{}", trim_zeros(mantissa), exp)
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(format_g).unwrap_or_default()
}

pub fn format_csv(records: &[MetricRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.method,
            format_g(r.snr_db),
            format_g(r.nmse_db),
            opt(r.doa_rmse_deg),
            opt(r.p_detect),
            format_g(r.mean_sse),
            r.trials,
            format_g(r.wall_ms)
        );
    }
    out
}

pub fn emit_csv(records: &[MetricRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_csv(records)).map_err(|e| Error::io(path, e))
}

/// Parse text produced by [`format_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<MetricRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == HEADER => {}
        _ => {
            return Err(Error::Config {
                line: 1,
                message: "missing metric CSV header".into(),
            })
        }
    }
    let mut out = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| Error::Config { line: idx + 1, message };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(bad(format!("expected 8 fields, got {}", fields.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("`{s}`: {e}")));
        let opt_num = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
        out.push(MetricRecord {
            method: fields[0].to_string(),
            snr_db: num(fields[1])?,
            nmse_db: num(fields[2])?,
            doa_rmse_deg: opt_num(fields[3])?,
            p_detect: opt_num(fields[4])?,
            mean_sse: num(fields[5])?,
            trials: fields[6].parse().map_err(|e| bad(format!("`{}`: {e}", fields[6])))?,
            wall_ms: num(fields[7])?,
        });
    }
    Ok(out)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<MetricRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}

/// `m,n,re,im` rows, one per entry, full precision.
pub fn format_matrix(m: &ComplexMatrix) -> String {
    let mut out = String::from("m,n,re,im\n");
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            let z = m[(r, c)];
            let _ = writeln!(out, "{r},{c},{:e},{:e}", z.re, z.im);
        }
    }
    out
}

pub fn write_matrix(m: &ComplexMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_matrix(m)).map_err(|e| Error::io(path, e))
}
