use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::error::{dim_err, Result};

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum CsvValue {
    Int(i64),
    Float(f64),
    Text(String),
}

impl CsvValue {
    /// Floats use 17 significant digits, which round-trips every `f64`.
    pub fn render(&self) -> String {
        match self {
            CsvValue::Int(i) => i.to_string(),
            CsvValue::Float(x) => format_float(*x),
            CsvValue::Text(s) => s.clone(),
        }
    }
}

pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

impl From<f64> for CsvValue {
    fn from(x: f64) -> Self {
        CsvValue::Float(x)
    }
}

impl From<usize> for CsvValue {
    fn from(x: usize) -> Self {
        CsvValue::Int(x as i64)
    }
}

impl From<u64> for CsvValue {
    fn from(x: u64) -> Self {
        CsvValue::Int(x as i64)
    }
}

impl From<i64> for CsvValue {
    fn from(x: i64) -> Self {
        CsvValue::Int(x)
    }
}

impl From<u32> for CsvValue {
    fn from(x: u32) -> Self {
        CsvValue::Int(x as i64)
    }
}

impl From<bool> for CsvValue {
    fn from(x: bool) -> Self {
        CsvValue::Text(x.to_string())
    }
}

impl From<&str> for CsvValue {
    fn from(s: &str) -> Self {
        CsvValue::Text(s.to_string())
    }
}

impl From<String> for CsvValue {
    fn from(s: String) -> Self {
        CsvValue::Text(s)
    }
}

/// Header plus rows, every row as long as the header.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvTable {
    pub schema: Vec<String>,
    pub rows: Vec<Vec<CsvValue>>,
}

impl CsvTable {
    pub fn new(schema: &[&str]) -> Self {
        CsvTable {
            schema: schema.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<CsvValue>) -> Result<()> {
        if row.len() != self.schema.len() {
            return Err(dim_err(format!("row has {} fields, schema has {}", row.len(), self.schema.len())));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn extend(&mut self, other: CsvTable) -> Result<()> {
        if other.schema != self.schema {
            return Err(dim_err("cannot append a table with a different schema"));
        }
        self.rows.extend(other.rows);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Column index by name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|s| s == name)
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        out.write_record(&self.schema)?;
        for row in &self.rows {
            out.write_record(row.iter().map(CsvValue::render))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_to(File::create(path)?)
    }
}

/// Writes `rows` under the header `schema`.
pub fn write_csv(rows: &[Vec<CsvValue>], schema: &[&str], path: impl AsRef<Path>) -> Result<()> {
    let mut t = CsvTable::new(schema);
    for r in rows {
        t.push(r.clone())?;
    }
    t.write(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn render(t: &CsvTable) -> String {
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn empty_table_is_header_only() {
        assert_eq!(render(&CsvTable::new(&["a", "b"])), "a,b\n");
    }

    #[test]
    fn float_round_trip_is_bit_exact() {
        let mut t = CsvTable::new(&["x", "y", "n"]);
        let x = 0.1 + 0.2;
        let y = -1.0 / 3.0 * 1e-310;
        t.push(vec![x.into(), y.into(), 7usize.into()]).unwrap();
        let text = render(&t);
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let rec = rdr.records().next().unwrap().unwrap();
        assert_eq!(rec[0].parse::<f64>().unwrap().to_bits(), x.to_bits());
        assert_eq!(rec[1].parse::<f64>().unwrap().to_bits(), y.to_bits());
        assert_eq!(&rec[2], "7");
    }

    #[test]
    fn comma_is_quoted() {
        let mut t = CsvTable::new(&["name"]);
        t.push(vec!["a,b".into()]).unwrap();
        assert_eq!(render(&t), "name\n\"a,b\"\n");
    }

    #[test]
    fn ragged_row_rejected() {
        let mut t = CsvTable::new(&["a", "b"]);
        assert!(t.push(vec![1.0.into()]).is_err());
    }

    #[test]
    fn writes_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_csv(&[vec![1.5.into()]], &["v"], &p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "v\n1.5000000000000000e0\n");
    }
}
