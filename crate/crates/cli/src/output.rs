//! CSV emission with a `#` metadata header and fixed float formatting.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use anyhow::{Context, Result};

/// Version string baked in at build time, `git describe` style.
pub const VERSION: &str = env!("TORQUE_STIRAP_VERSION");

pub const UNITS: &str = "time in T, field amplitudes in 1/T, angles in rad, vector components in the units of x0";

/// Rounds to 12 significant digits, then prints the shortest string that
/// reads back to the rounded value.
pub fn fmt_float(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x:?}");
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("float round trip");
    // fold -0 into 0 so sign noise does not leak into diffs
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    format!("{rounded:?}")
}

#[derive(Debug, Default)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(command: &str, config_json: &str) -> Self {
        let mut text = String::new();
        writeln!(text, "# torque-stirap {VERSION}").unwrap();
        writeln!(text, "# command: {command}").unwrap();
        writeln!(text, "# config: {config_json}").unwrap();
        writeln!(text, "# units: {UNITS}").unwrap();
        Self { text }
    }

    /// Extra metadata line; only valid before [`Csv::columns`].
    pub fn meta(&mut self, key: &str, value: &str) {
        writeln!(self.text, "# {key}: {value}").unwrap();
    }

    pub fn columns(&mut self, names: &[&str]) {
        writeln!(self.text, "{}", names.join(",")).unwrap();
    }

    pub fn row(&mut self, values: &[f64]) {
        let cells: Vec<String> = values.iter().map(|&v| fmt_float(v)).collect();
        writeln!(self.text, "{}", cells.join(",")).unwrap();
    }

    pub fn footer(&mut self, message: &str) {
        for line in message.lines() {
            writeln!(self.text, "# {line}").unwrap();
        }
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    /// Writes to `path`, or to stdout when `None`.
    pub fn emit(&self, path: Option<&Path>) -> Result<()> {
        match path {
            Some(p) => std::fs::write(p, &self.text).with_context(|| format!("writing {}", p.display())),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(self.text.as_bytes())?;
                out.flush()?;
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format() {
        assert_eq!(fmt_float(0.1), "0.1");
        assert_eq!(fmt_float(1.0), "1.0");
        assert_eq!(fmt_float(-1.2), "-1.2");
        assert_eq!(fmt_float(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_float(0.1 + 0.2), "0.3");
        assert_eq!(fmt_float(2.0f64.sqrt() * 1e-9), "1.41421356237e-9");
        assert_eq!(fmt_float(-0.0), "0.0");
        assert_eq!(fmt_float(f64::NAN), "NaN");
        assert_eq!(fmt_float(123456789012345.0), "123456789012000.0");
    }

    #[test]
    fn header_precedes_columns() {
        let mut c = Csv::new("simulate", "{}");
        c.columns(&["a", "b"]);
        c.row(&[1.0, 2.5]);
        let lines: Vec<&str> = c.as_str().lines().collect();
        assert!(lines[..4].iter().all(|l| l.starts_with('#')));
        assert_eq!(lines[4], "a,b");
        assert_eq!(lines[5], "1.0,2.5");
    }
}
