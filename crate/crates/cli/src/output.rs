//! Deterministic CSV and JSON emission.
//!
//! Floats are printed with 17 significant digits (round-trip exact), so
//! identical configurations produce byte-identical artifacts.

use lct_core::transform::{BlockId, StateLayout};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Round-trip exact float formatting: 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Column names for an augmented state in layout order: `x1..xD`, then
/// `V{k}_{i}`, `u{k}_{n}_{i}`, `v{k}_{n}_{i}` (all 1-based).
pub fn state_column_names(layout: &StateLayout) -> Vec<String> {
    let mut names = Vec::with_capacity(layout.dim_augmented());
    for (block, range) in layout.blocks() {
        let width = range.len();
        for i in 1..=width {
            let name = match block {
                BlockId::State => format!("x{i}"),
                BlockId::Chain { kernel } => format!("V{}_{i}", kernel + 1),
                BlockId::OscRe { kernel, osc } => format!("u{}_{}_{i}", kernel + 1, osc + 1),
                BlockId::OscIm { kernel, osc } => format!("v{}_{}_{i}", kernel + 1, osc + 1),
            };
            names.push(name);
        }
    }
    names
}

/// Buffered CSV writer with a frozen header.
pub struct Csv {
    buffer: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut buffer = String::new();
        buffer.push_str(&header.join(","));
        buffer.push('\n');
        Self { buffer, columns: header.len() }
    }

    pub fn row(&mut self, cells: &[String]) {
        assert_eq!(cells.len(), self.columns, "row width mismatch");
        self.buffer.push_str(&cells.join(","));
        self.buffer.push('\n');
    }

    pub fn finish(self) -> String {
        self.buffer
    }
}

/// Compact JSON value builder for report emission (stable key order).
pub fn json_object(pairs: &[(&str, String)]) -> String {
    let mut out = String::from("{");
    for (i, (key, value)) in pairs.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "\"{key}\":{value}");
    }
    out.push('}');
    out
}

pub fn json_float(x: f64) -> String {
    if x.is_finite() {
        fmt_float(x)
    } else {
        format!("\"{x}\"")
    }
}

pub fn json_array(values: impl IntoIterator<Item = String>) -> String {
    let mut out = String::from("[");
    for (i, v) in values.into_iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&v);
    }
    out.push(']');
    out
}

pub fn json_float_array(values: &[f64]) -> String {
    json_array(values.iter().map(|v| json_float(*v)))
}

pub fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_round_trips() {
        for x in [0.1, -3.0e-7, 12345.6789, f64::MIN_POSITIVE, 2.0 / 3.0] {
            let text = fmt_float(x);
            let back: f64 = text.parse().unwrap();
            assert_eq!(back, x, "{text}");
        }
    }

    #[test]
    fn column_names_follow_layout() {
        let layout = StateLayout::new(2, 1, vec![1, 0]);
        let names = state_column_names(&layout);
        assert_eq!(names, vec!["x1", "x2", "V1_1", "V2_1", "u1_1_1", "v1_1_1"]);
    }
}
