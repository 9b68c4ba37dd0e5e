//! Report files: CSV tables and versioned JSON, staged in memory and written
//! atomically once a command has finished computing.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use hartogs::domain::CPoint;
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn csv<R, I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator,
        R::Item: AsRef<[u8]>,
    {
        let mut wtr = csv_writer(Vec::new());
        wtr.write_record(header)?;
        for row in rows {
            wtr.write_record(row)?;
        }
        self.files.push((name.to_string(), wtr.into_inner().map_err(|e| e.into_error())?));
        Ok(())
    }

    pub fn raw(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    /// `value` with `"schema": "hartogs.<kind>/1"` in front.
    pub fn json<T: Serialize>(&mut self, name: &str, kind: &str, value: &T) -> Result<()> {
        let mut obj = serde_json::Map::new();
        obj.insert("schema".into(), format!("hartogs.{kind}/{SCHEMA_VERSION}").into());
        match serde_json::to_value(value)? {
            serde_json::Value::Object(m) => obj.extend(m),
            other => {
                obj.insert("data".into(), other);
            }
        }
        let mut bytes = serde_json::to_vec_pretty(&obj)?;
        bytes.push(b'\n');
        self.files.push((name.to_string(), bytes));
        Ok(())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    /// Write every file into `dir` through a temporary file and a rename.
    pub fn commit(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut written = Vec::new();
        for (name, bytes) in &self.files {
            let target = dir.join(name);
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(bytes)?;
            tmp.as_file().sync_all()?;
            tmp.persist(&target).with_context(|| format!("writing {}", target.display()))?;
            written.push(target);
        }
        Ok(written)
    }
}

pub fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

/// Prefix every record of a CSV table with a `fingerprint` column.
pub fn with_fingerprint(table: &[u8], fingerprint: &str) -> Result<Vec<u8>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(table);
    let mut wtr = csv_writer(Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let first = if i == 0 { "fingerprint" } else { fingerprint };
        wtr.write_record(std::iter::once(first).chain(rec.iter()))?;
    }
    Ok(wtr.into_inner().map_err(|e| e.into_error())?)
}

pub fn fmt_f(x: f64) -> String {
    format!("{x:e}")
}

/// `re+imi` per coordinate, joined by `;`.
pub fn fmt_point(z: &CPoint) -> String {
    z.coords.iter().map(|c| format!("{}{:+}i", c.re, c.im)).collect::<Vec<_>>().join(";")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fingerprint_column_is_prepended() {
        let out = with_fingerprint(b"a,b\n1,2\n3,4\n", "n=2;k=1;b=1").unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "fingerprint,a,b\nn=2;k=1;b=1,1,2\nn=2;k=1;b=1,3,4\n");
    }

    #[test]
    fn commit_writes_all_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut o = Outputs::default();
        o.csv("t.csv", &["x"], [["1"], ["2"]]).unwrap();
        o.json("s.json", "test", &serde_json::json!({"a": 1})).unwrap();
        o.commit(dir.path()).unwrap();
        assert_eq!(std::fs::read_to_string(dir.path().join("t.csv")).unwrap(), "x\n1\n2\n");
        let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("s.json")).unwrap()).unwrap();
        assert_eq!(v["schema"], "hartogs.test/1");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);
    }
}
