//! Output directory handling: long-format CSV tables and one `summary.json`.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

use crate::config::Format;

pub struct Sink {
    dir: PathBuf,
    formats: Vec<Format>,
    written: Vec<String>,
}

impl Sink {
    pub fn create(dir: &Path, formats: &[Format]) -> anyhow::Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), formats: formats.to_vec(), written: Vec::new() })
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    /// Writes `name` with a header row; rows must match the header width.
    pub fn table<I, R>(&mut self, name: &str, header: &[&str], rows: I) -> anyhow::Result<()>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator,
        R::Item: AsRef<[u8]>,
    {
        if !self.wants(Format::Csv) {
            return Ok(());
        }
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn summary<T: Serialize>(&mut self, value: &T) -> anyhow::Result<()> {
        if !self.wants(Format::Summary) {
            return Ok(());
        }
        let path = self.dir.join("summary.json");
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        self.written.push("summary.json".into());
        Ok(())
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }
}

/// Shortest round-trip form; empty for non-finite values.
pub fn num(x: f64) -> String {
    if !x.is_finite() {
        String::new()
    } else if x != 0.0 && (x.abs() < 1e-4 || x.abs() >= 1e15) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// `None` for non-finite values so they serialize as JSON `null`.
pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}
