use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};

pub const SIG_DIGITS: usize = 9;

/// `x` rounded to nine significant digits.
pub fn sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    // exponent after rounding, so 9.9999999999 is treated as 10
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    if !(-4..9).contains(&exp) {
        return sci;
    }
    let decimals = (SIG_DIGITS as i32 - 1 - exp) as usize;
    format!("{x:.decimals$}")
}

pub fn sig_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|&x| sig(x)).collect();
    format!("[{}]", parts.join(", "))
}

pub fn angle(x: f64, degrees: bool) -> f64 {
    if degrees {
        x.to_degrees()
    } else {
        x
    }
}

pub fn open(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Aligned `key  value` lines.
#[derive(Default)]
pub struct Table {
    rows: Vec<(String, String)>,
}

impl Table {
    pub fn new() -> Self {
        Self { rows: Vec::new() }
    }

    pub fn row(&mut self, key: impl Into<String>, value: impl Into<String>) -> &mut Self {
        self.rows.push((key.into(), value.into()));
        self
    }

    pub fn num(&mut self, key: impl Into<String>, x: f64) -> &mut Self {
        self.row(key, sig(x))
    }

    pub fn write(&self, out: &mut dyn Write) -> io::Result<()> {
        let width = self.rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
        for (k, v) in &self.rows {
            writeln!(out, "{k:<width$}  {v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig(2.0 * 5f64.sqrt()), "4.47213595");
        assert_eq!(sig(5f64.sqrt()), "2.23606798");
        assert_eq!(sig(1.0 / 2f64.sqrt()), "0.707106781");
        assert_eq!(sig(2.0 * 0.8f64.sqrt()), "1.78885438");
        assert_eq!(sig(-0.6), "-0.600000000");
        assert_eq!(sig(0.0), "0");
        assert_eq!(sig(-0.0), "0");
        assert_eq!(sig(123.0), "123.000000");
        assert_eq!(sig(9.9999999999), "10.0000000");
        assert_eq!(sig(1.5e-17), "1.50000000e-17");
    }
}
