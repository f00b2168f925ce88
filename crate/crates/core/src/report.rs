//! Plain-text CSV helpers shared by the exporters.

use std::io::{self, Write};

use serde::Serialize;

/// One numerical check: a residual compared against its threshold.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    /// Passes iff `residual <= threshold`; NaN never passes.
    pub fn at_most(name: impl Into<String>, residual: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            residual,
            threshold,
            passed: residual <= threshold,
        }
    }

    /// A yes/no property, recorded with residual 0 or 1.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            residual: if ok { 0.0 } else { 1.0 },
            threshold: 0.0,
            passed: ok,
        }
    }
}

/// Full double precision: 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write a header row followed by numeric rows.
pub fn write_csv<W: Write>(
    mut out: W,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> io::Result<()> {
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
