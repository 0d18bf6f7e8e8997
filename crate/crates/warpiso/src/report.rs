//! Report and CSV formatting.
//!
//! All numeric output is printed with 17 significant digits so that values
//! round-trip exactly through text, and all CSV output uses LF line endings
//! and a header row. Identical inputs produce byte-identical output.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::dido::{CriticalPoint, ProfileSample};
use crate::error::{Error, Result};
use crate::isoperimetric::IsoperimetricReport;

/// 17-significant-digit decimal form of a double (round-trip exact).
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Ordered key=value lines.
#[derive(Debug, Default)]
pub struct KeyValues {
    lines: Vec<(String, String)>,
}

impl KeyValues {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: &str, value: impl Into<String>) {
        self.lines.push((key.to_owned(), value.into()));
    }

    pub fn push_f64(&mut self, key: &str, value: f64) {
        self.push(key, fmt17(value));
    }

    pub fn push_bool(&mut self, key: &str, value: bool) {
        self.push(key, if value { "true" } else { "false" });
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.lines {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }
}

/// Profile CSV: `h,Iprofile,nfprime_over_f`, one row per sample.
pub fn profile_csv(samples: &[ProfileSample]) -> String {
    let mut out = String::from("h,Iprofile,nfprime_over_f\n");
    for s in samples {
        let _ = writeln!(out, "{},{},{}", fmt17(s.h), fmt17(s.iso), fmt17(s.growth));
    }
    out
}

/// Critical-point CSV: `h_star,crit_value`.
pub fn critical_points_csv(points: &[CriticalPoint]) -> String {
    let mut out = String::from("h_star,crit_value\n");
    for p in points {
        let _ = writeln!(out, "{},{}", fmt17(p.h), fmt17(p.value));
    }
    out
}

pub const VERIFY_CSV_HEADER: &str = "seed,expression,k,domain_max,vol_floor,vol_room,H,vol_S,\
vol_C_vertical,vol_C_full,margin,equality,log_convex,strict_f";

/// One CSV row for a verification report. `expression` cannot contain commas
/// (the grammar has no comma tokens), so no quoting is needed.
pub fn verify_csv_row(
    report: &IsoperimetricReport,
    seed: u64,
    expression: &str,
    k: u32,
    domain_max: f64,
) -> String {
    let full = report.vol_full.map(fmt17).unwrap_or_default();
    format!(
        "{seed},{expression},{k},{},{},{},{},{},{},{full},{},{},{},{}\n",
        fmt17(domain_max),
        fmt17(report.vol_floor),
        fmt17(report.vol_room),
        fmt17(report.constant_height),
        fmt17(report.vol_constant),
        fmt17(report.vol_vertical),
        fmt17(report.margin),
        report.equality.name(),
        report.log_convex,
        report.strictly_log_convex,
    )
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io { path: path.to_owned(), source })
}

/// Append a CSV row, writing the header first when the file is new or empty.
pub fn append_csv_row(path: &Path, header: &str, row: &str) -> Result<()> {
    let io_err = |source| Error::Io { path: path.to_owned(), source };
    let needs_header = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let mut file = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err)?;
    if needs_header {
        writeln!(file, "{header}").map_err(io_err)?;
    }
    file.write_all(row.as_bytes()).map_err(io_err)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt17(1.0), "1.0000000000000000e0");
        assert_eq!(fmt17(0.1), "1.0000000000000001e-1");
        let v = 1.1752011936438014f64;
        let round_tripped: f64 = fmt17(v).parse().unwrap();
        assert_eq!(v.to_bits(), round_tripped.to_bits());
    }

    #[test]
    fn key_values_render_in_order() {
        let mut kv = KeyValues::new();
        kv.push("b", "2");
        kv.push("a", "1");
        assert_eq!(kv.render(), "b=2\na=1\n");
    }

    #[test]
    fn profile_csv_shape() {
        let samples = vec![
            ProfileSample { h: 0.5, iso: 2.0, growth: 0.4 },
            ProfileSample { h: 1.0, iso: 1.5, growth: 0.8 },
        ];
        let csv = profile_csv(&samples);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "h,Iprofile,nfprime_over_f");
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.ends_with('\n'));
        assert!(!csv.contains('\r'));
    }
}
