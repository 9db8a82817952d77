//! CSV tables with fixed headers, JSON reports and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::AppError;

pub const FORWARD_SCHEMA: &[&str] = &[
    "lambda", "n", "ReT", "ImT", "ReL", "ImL", "ReR", "ImR", "unitarity_residual",
];
pub const CAM_SCHEMA: &[&str] = &["Re_z", "Im_z", "log10_abs_aL3"];
pub const ZEROS_SCHEMA: &[&str] = &["Re_z", "Im_z", "residual"];
pub const ASYM_SCHEMA: &[&str] = &["n", "abs_T", "arg_L", "ratio_T_pred"];
pub const BH_SCHEMA: &[&str] = &["root", "r", "kappa"];
pub const RECOVERY_SCHEMA: &[&str] = &["parameter", "true", "recovered", "relative_error"];
pub const UNIQ_SCHEMA: &[&str] = &["n", "ln_abs_difference", "kept"];
pub const TRANSMISSION_SCHEMA: &[&str] = &[
    "n", "abs_T_a", "abs_T_b", "abs_T_difference", "abs_L_difference", "sigma",
];

fn io(path: &Path, e: impl std::fmt::Display) -> AppError {
    AppError::Io(format!("{}: {e}", path.display()))
}

pub fn write_table(rows: &[Vec<String>], schema: &[&str], path: &Path) -> Result<(), AppError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io(path, e))?;
    w.write_record(schema).map_err(|e| io(path, e))?;
    for (i, row) in rows.iter().enumerate() {
        if row.len() != schema.len() {
            return Err(AppError::Io(format!(
                "{}: row {i} has {} fields, schema has {}",
                path.display(),
                row.len(),
                schema.len()
            )));
        }
        w.write_record(row).map_err(|e| io(path, e))?;
    }
    w.flush().map_err(|e| io(path, e))
}

/// Returns the header and the data rows.
#[cfg(test)]
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), AppError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io(path, e))?;
    let header = r.headers().map_err(|e| io(path, e))?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(String::from).collect()))
        .collect::<Result<_, _>>()
        .map_err(|e| io(path, e))?;
    Ok((header, rows))
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), AppError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| io(path, e))?;
    fs::write(path, text + "\n").map_err(|e| io(path, e))
}

/// Output directory plus the list of files written so far.
pub struct Sink {
    pub dir: PathBuf,
    pub files: Vec<String>,
}

impl Sink {
    pub fn new(dir: PathBuf) -> Result<Self, AppError> {
        fs::create_dir_all(&dir).map_err(|e| io(&dir, e))?;
        Ok(Self { dir, files: Vec::new() })
    }

    pub fn table(&mut self, name: &str, schema: &[&str], rows: &[Vec<String>]) -> Result<(), AppError> {
        write_table(rows, schema, &self.dir.join(name))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), AppError> {
        write_json(value, &self.dir.join(name))?;
        self.files.push(name.to_string());
        Ok(())
    }
}

#[derive(Serialize)]
pub struct Manifest<'a, C: Serialize, S: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    /// Seconds since the Unix epoch; the only non-deterministic field.
    pub generated_at: u64,
    pub config: &'a C,
    pub solver: &'a S,
    pub files: &'a [String],
}

pub fn unix_time() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Shortest representation that parses back to the same `f64`; exponent form
/// for very small or very large magnitudes.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let rows = vec![
            vec![num(0.1), num(-2.5e-300), num(f64::MAX)],
            vec![num(1.0 / 3.0), num(0.0), num(std::f64::consts::PI)],
        ];
        write_table(&rows, ZEROS_SCHEMA, &path).unwrap();
        let (header, back) = read_table(&path).unwrap();
        assert_eq!(header, ZEROS_SCHEMA);
        assert_eq!(back, rows);
        let parsed: f64 = back[1][0].parse().unwrap();
        assert_eq!(parsed, 1.0 / 3.0);
        assert_eq!(back[0][1], "-2.5e-300");
        assert_eq!(back[0][2].parse::<f64>().unwrap(), f64::MAX);
    }

    #[test]
    fn schema_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![vec!["1".to_string()]];
        assert!(write_table(&rows, ZEROS_SCHEMA, &dir.path().join("t.csv")).is_err());
    }
}
