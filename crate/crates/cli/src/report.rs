//! CSV reports: `#` comment lines (run metadata, timestamp), then a header
//! row of `name [unit]` columns, then the body. '.' decimal, ',' separator.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Debug, Clone, Default)]
pub struct CsvReport {
    pub meta: Vec<(String, String)>,
    /// `(name, unit)`
    pub columns: Vec<(String, String)>,
    pub rows: Vec<Vec<String>>,
}

/// Writes `text` to stdout; a closed pipe (`nilpw catalog | head`) is not an error.
pub fn emit(text: &str) {
    use std::io::Write as _;
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

/// Shortest round-trip representation, so equal values print equal bytes.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == 0.0 {
        "0".into()
    } else {
        format!("{x:e}")
    }
}

impl CsvReport {
    pub fn new(columns: &[(&str, &str)]) -> Self {
        Self {
            meta: Vec::new(),
            columns: columns
                .iter()
                .map(|(n, u)| (n.to_string(), u.to_string()))
                .collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let stamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let _ = writeln!(s, "# generated_unix: {stamp}");
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k}: {v}");
        }
        s.push_str(&self.body());
        s
    }

    /// Header row and data rows; identical across runs of the same config.
    pub fn body(&self) -> String {
        let mut s = String::new();
        let header: Vec<String> = self
            .columns
            .iter()
            .map(|(n, u)| format!("{n} [{u}]"))
            .collect();
        s.push_str(&header.join(","));
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.render())
    }
}

/// The body of a rendered report: everything after the `#` lines.
pub fn body_of(text: &str) -> String {
    text.lines()
        .skip_while(|l| l.starts_with('#'))
        .fold(String::new(), |mut acc, l| {
            acc.push_str(l);
            acc.push('\n');
            acc
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn body_excludes_metadata() {
        let mut r = CsvReport::new(&[("lambda_1", "1/coord"), ("hs", "-")]);
        r.meta("epsilon", num(1e-8));
        r.push(vec![num(0.5), num(2.0)]);
        let text = r.render();
        assert!(text.starts_with("# generated_unix: "));
        assert_eq!(body_of(&text), "lambda_1 [1/coord],hs [-]\n5e-1,2e0\n");
    }
}
