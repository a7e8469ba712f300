//! CSV tables: a `#` comment line with the resolved config, a header row,
//! then data rows in a fixed column order.

use std::fmt::Write as _;
use std::io::{self, Write};

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(i64),
    Real(f64),
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Scientific notation with 11 significant digits.
pub fn format_real(v: f64) -> String {
    format!("{v:.10e}")
}

fn write_cell(out: &mut String, cell: &Cell) {
    match cell {
        Cell::Int(v) => write!(out, "{v}").unwrap(),
        Cell::Real(v) => out.push_str(&format_real(*v)),
        Cell::Text(s) if s.contains([',', '"', '\n']) => {
            write!(out, "\"{}\"", s.replace('"', "\"\"")).unwrap()
        }
        Cell::Text(s) => out.push_str(s),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// Renders the whole document; `comment` must be a single line.
    pub fn to_csv(&self, comment: &str) -> String {
        let mut out = String::new();
        writeln!(out, "# {}", comment.replace('\n', " ")).unwrap();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_cell(&mut out, cell);
            }
            out.push('\n');
        }
        out
    }

    pub fn write_to(&self, comment: &str, w: &mut dyn Write) -> io::Result<()> {
        w.write_all(self.to_csv(comment).as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_fixed_layout() {
        let mut t = Table::new(&["system", "k", "value"]);
        t.push(vec!["CO".into(), Cell::Int(-3), Cell::Real(0.0483)]);
        t.push(vec!["a,b".into(), Cell::Int(7), Cell::Real(0.0)]);
        let csv = t.to_csv("cfg {\"x\":1}");
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "# cfg {\"x\":1}");
        assert_eq!(lines[1], "system,k,value");
        assert_eq!(lines[2], "CO,-3,4.8300000000e-2");
        assert_eq!(lines[3], "\"a,b\",7,0.0000000000e0");
    }

    #[test]
    fn reals_keep_ten_digits() {
        let v = 2.883_012_345_678_9e-11;
        let s = format_real(v);
        let back: f64 = s.parse().unwrap();
        assert!(((back - v) / v).abs() < 1e-10);
        assert_eq!(s.split('e').next().unwrap().replace(['.', '-'], "").len(), 11);
    }
}
