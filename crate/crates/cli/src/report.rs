//! Writing reports to disk.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::scenario::ScenarioReport;
use crate::stats::StatsSeries;

pub const CSV_HEADER: &str = "iteration,mean,sigma_upper,sigma_lower,samples";
pub const JSON_FILE: &str = "report.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Formats like C's `%.{digits}g`.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let precision = digits.max(1) - 1;
    let sci = format!("{x:.precision$e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        format!(
            "{}e{}{:02}",
            trim_zeros(mantissa),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    } else {
        let decimals = (precision as i32 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn series_csv(series: &StatsSeries) -> String {
    let mut out = String::with_capacity(64 * (series.points.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for p in &series.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            p.iteration,
            format_significant(p.mean, 12),
            format_significant(p.sigma_upper, 12),
            format_significant(p.sigma_lower, 12),
            p.samples
        );
    }
    out
}

fn write(path: PathBuf, bytes: &[u8]) -> Result<PathBuf, CliError> {
    std::fs::write(&path, bytes).map_err(|source| CliError::Write {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Writes `<policy id>.csv` per policy, or a single `report.json`, into
/// `dir`. Returns the paths written.
pub fn emit_report(
    report: &ScenarioReport,
    format: OutputFormat,
    dir: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    match format {
        OutputFormat::Csv => report
            .policies
            .iter()
            .map(|p| {
                write(
                    dir.join(format!("{}.csv", p.id)),
                    series_csv(&p.series).as_bytes(),
                )
            })
            .collect(),
        OutputFormat::Json => {
            let mut text = serde_json::to_string_pretty(report).expect("report serializes");
            text.push('\n');
            Ok(vec![write(dir.join(JSON_FILE), text.as_bytes())?])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::StatsPoint;

    #[test]
    fn significant_digits_match_printf() {
        assert_eq!(format_significant(1.0, 12), "1");
        assert_eq!(format_significant(0.5, 12), "0.5");
        assert_eq!(format_significant(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(format_significant(2.0 / 3.0, 12), "0.666666666667");
        assert_eq!(format_significant(123456.789, 12), "123456.789");
        assert_eq!(format_significant(1e-5, 12), "1e-05");
        assert_eq!(format_significant(0.0001, 12), "0.0001");
        assert_eq!(format_significant(1.5e12, 12), "1.5e+12");
        assert_eq!(format_significant(999999999999.5, 12), "1e+12");
        assert_eq!(format_significant(-2.25e-7, 12), "-2.25e-07");
        assert_eq!(format_significant(1e300, 12), "1e+300");
    }

    #[test]
    fn csv_layout() {
        let series = StatsSeries {
            points: vec![
                StatsPoint {
                    iteration: 1,
                    mean: 0.5,
                    sigma_upper: 0.25,
                    sigma_lower: 0.0,
                    samples: 3,
                },
                StatsPoint {
                    iteration: 2,
                    mean: 1.0,
                    sigma_upper: 0.0,
                    sigma_lower: 0.0,
                    samples: 3,
                },
            ],
        };
        assert_eq!(
            series_csv(&series),
            "iteration,mean,sigma_upper,sigma_lower,samples\n1,0.5,0.25,0,3\n2,1,0,0,3\n"
        );
    }
}
