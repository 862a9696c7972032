use std::fmt::Write as _;

use crate::error::{Error, Result};

/// A rectangular table of finite numbers with named columns.
///
/// Rendered as CSV: `#` comment lines first, then the header, then one line
/// per row, LF-terminated. Rows that could not be computed are kept as
/// notes and rendered as comments.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvTable {
    comments: Vec<String>,
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
    skipped: Vec<String>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        CsvTable {
            header: header.into_iter().map(Into::into).collect(),
            ..Default::default()
        }
    }

    pub fn comment(&mut self, line: impl Into<String>) {
        self.comments.push(line.into());
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::domain(format!(
                "row has {} cells, header has {}",
                row.len(),
                self.header.len()
            )));
        }
        if let Some(v) = row.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite cell {v}")));
        }
        self.rows.push(row);
        Ok(())
    }

    /// Records a row that failed, with the reason.
    pub fn skip(&mut self, reason: impl Into<String>) {
        self.skipped.push(reason.into());
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn comments(&self) -> &[String] {
        &self.comments
    }

    pub fn skipped(&self) -> &[String] {
        &self.skipped
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            let _ = writeln!(out, "# {c}");
        }
        for s in &self.skipped {
            let _ = writeln!(out, "# skipped: {s}");
        }
        let _ = writeln!(out, "{}", self.header.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_csv() {
        let mut t = CsvTable::new(["x", "y"]);
        t.comment("demo");
        t.push(vec![1.0, 0.5]).unwrap();
        t.push(vec![2.0, 1e-7]).unwrap();
        t.skip("x=3: out of range");
        assert_eq!(t.to_csv(), "# demo\n# skipped: x=3: out of range\nx,y\n1,0.5\n2,0.0000001\n");
        assert_eq!(t.column("y").unwrap(), vec![0.5, 1e-7]);
    }

    #[test]
    fn values_round_trip_through_text() {
        let mut t = CsvTable::new(["v"]);
        let v = std::f64::consts::LN_2 * 1e-12;
        t.push(vec![v]).unwrap();
        let line = t.to_csv().lines().nth(1).unwrap().to_string();
        assert_eq!(line.parse::<f64>().unwrap(), v);
    }

    #[test]
    fn rejects_ragged_and_non_finite_rows() {
        let mut t = CsvTable::new(["a", "b"]);
        assert!(t.push(vec![1.0]).is_err());
        assert!(t.push(vec![1.0, f64::NAN]).is_err());
        assert!(t.rows().is_empty());
    }
}
