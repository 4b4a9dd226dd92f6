//! CSV output with a config-echo header and full-precision floats.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};

/// 17 significant digits: round-trips every f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct CsvWriter {
    path: PathBuf,
    w: BufWriter<File>,
}

impl CsvWriter {
    pub fn create(path: PathBuf, config: &serde_json::Value) -> Result<Self> {
        let file = File::create(&path).with_context(|| format!("creating {path:?}"))?;
        let mut w = BufWriter::new(file);
        writeln!(w, "# config: {}", serde_json::to_string(config)?)?;
        Ok(CsvWriter { path, w })
    }

    pub fn row_header(&mut self, cols: &[&str]) -> Result<()> {
        writeln!(self.w, "{}", cols.join(","))?;
        Ok(())
    }

    pub fn row<S: AsRef<str>>(&mut self, cols: &[S]) -> Result<()> {
        let line: Vec<&str> = cols.iter().map(|c| c.as_ref()).collect();
        writeln!(self.w, "{}", line.join(","))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.w
            .flush()
            .with_context(|| format!("flushing {:?}", self.path))?;
        Ok(())
    }
}
