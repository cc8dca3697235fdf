//! Human-readable summaries: aligned tables under an echo of the config.

use std::fmt::Write;

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub title: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(title: &str, headers: &[&str]) -> Self {
        Table {
            title: title.into(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: vec![],
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn render(&self, out: &mut String) {
        let cols = self.headers.len().max(self.rows.iter().map(Vec::len).max().unwrap_or(0));
        let mut widths = vec![0; cols];
        for row in std::iter::once(&self.headers).chain(&self.rows) {
            for (i, cell) in row.iter().enumerate() {
                widths[i] = widths[i].max(cell.chars().count());
            }
        }
        let line = |out: &mut String, row: &[String]| {
            let cells: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(i, c)| format!("{c:<w$}", w = widths[i]))
                .collect();
            let _ = writeln!(out, "  {}", cells.join("  ").trim_end());
        };
        if !self.title.is_empty() {
            let _ = writeln!(out, "{}", self.title);
        }
        line(out, &self.headers);
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
        line(out, &rule);
        for row in &self.rows {
            line(out, row);
        }
    }
}

/// What one command produced, for display.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub config: ExperimentConfig,
    pub tables: Vec<Table>,
    /// Single-line facts, e.g. a fitted slope.
    pub notes: Vec<String>,
}

/// Renders `report`: the resolved config as `key = value` lines, then each
/// table, then the notes.
pub fn emit_report(report: &Report) -> String {
    let mut out = String::new();
    let command = report.config.command.map_or("?".to_string(), |c| c.to_string());
    let _ = writeln!(out, "wlp {command}");
    let _ = writeln!(out, "config");
    if let Ok(serde_json::Value::Object(map)) = serde_json::to_value(&report.config) {
        for (k, v) in map.iter().filter(|(_, v)| !v.is_null()) {
            let _ = writeln!(out, "  {k:<10} = {v}");
        }
    }
    for t in &report.tables {
        out.push('\n');
        t.render(&mut out);
    }
    if !report.notes.is_empty() {
        out.push('\n');
        for n in &report.notes {
            let _ = writeln!(out, "{n}");
        }
    }
    out
}

/// Compact float formatting for tables; CSV files keep full precision.
pub fn fmt_f(v: f64) -> String {
    if v == 0.0 || (1e-3..1e6).contains(&v.abs()) {
        format!("{v:.6}")
    } else {
        format!("{v:.6e}")
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("-".into(), fmt_f)
}
