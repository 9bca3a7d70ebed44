//! CSV/gnuplot rendering and all-or-nothing file output.

use std::fs;
use std::path::{Path, PathBuf};

use crate::engine::MetricEstimate;
use crate::error::Result;

/// Formats `v` with 9 significant digits, `%g` style: fixed notation for
/// exponents in [-5, 9), scientific otherwise, trailing zeros trimmed.
pub fn fmt_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}"))
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

/// `value,stderr,ci95_low,ci95_high,n_trials`
pub fn estimate_fields(e: &MetricEstimate) -> String {
    format!(
        "{},{},{},{},{}",
        fmt_sig9(e.value),
        fmt_sig9(e.stderr),
        fmt_sig9(e.ci95_low),
        fmt_sig9(e.ci95_high),
        e.n_trials
    )
}

/// A set of files that are written together or not at all.
#[derive(Debug, Default)]
pub struct OutputSet {
    files: Vec<(PathBuf, String)>,
}

impl OutputSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, path: impl Into<PathBuf>, contents: String) {
        self.files.push((path.into(), contents));
    }

    pub fn extend(&mut self, other: OutputSet) {
        self.files.extend(other.files);
    }

    pub fn paths(&self) -> impl Iterator<Item = &Path> {
        self.files.iter().map(|(p, _)| p.as_path())
    }

    /// Writes every file. On the first failure, removes whatever this call
    /// already wrote and returns the error.
    pub fn commit(self) -> Result<Vec<PathBuf>> {
        let mut written: Vec<PathBuf> = Vec::new();
        for (path, contents) in &self.files {
            let res = (|| -> std::io::Result<()> {
                if let Some(parent) = path.parent() {
                    if !parent.as_os_str().is_empty() {
                        fs::create_dir_all(parent)?;
                    }
                }
                fs::write(path, contents)
            })();
            if let Err(e) = res {
                for p in &written {
                    let _ = fs::remove_file(p);
                }
                let _ = fs::remove_file(path);
                return Err(e.into());
            }
            written.push(path.clone());
        }
        Ok(written)
    }
}
