//! Two-column `x a` text tables.

use std::path::Path;

use super::{tabulated_profile, PotentialProfile};
use crate::error::{Error, Result};

/// Parses a table whose first non-blank line is the header `# x a`.
pub fn parse_table(text: &str, label: &str) -> Result<PotentialProfile> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, header)) if header.split_whitespace().collect::<Vec<_>>() == ["#", "x", "a"] => {}
        Some((i, _)) => {
            return Err(Error::Table {
                line: i + 1,
                msg: "expected header '# x a'".into(),
            })
        }
        None => {
            return Err(Error::Table {
                line: 0,
                msg: "empty table".into(),
            })
        }
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, line) in lines {
        if line.trim_start().starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 2 {
            return Err(Error::Table {
                line: i + 1,
                msg: format!("expected 2 columns, found {}", cols.len()),
            });
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|e| Error::Table {
                line: i + 1,
                msg: format!("'{s}': {e}"),
            })
        };
        let x = parse(cols[0])?;
        let y = parse(cols[1])?;
        if let Some(&prev) = xs.last() {
            if !(x > prev) {
                return Err(Error::Table {
                    line: i + 1,
                    msg: format!("x must be strictly increasing ({prev} then {x})"),
                });
            }
        }
        xs.push(x);
        ys.push(y);
    }
    tabulated_profile(xs, ys, label)
}

pub fn load_table(path: impl AsRef<Path>) -> Result<PotentialProfile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Table {
        line: 0,
        msg: format!("{}: {e}", path.display()),
    })?;
    parse_table(&text, &path.display().to_string())
}
