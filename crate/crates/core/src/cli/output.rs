//! CSV tables and run manifests.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::Result;

/// SHA-256 of the canonical config text, hex encoded.
pub fn config_hash(canonical: &str) -> String {
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

/// Collects output files for one command and writes the manifest that
/// names them.
pub struct OutputDir {
    dir: PathBuf,
    hash: String,
    files: Vec<String>,
}

impl OutputDir {
    pub fn create(dir: &Path, hash: String) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            hash,
            files: Vec::new(),
        })
    }

    pub fn manifest_name(&self) -> String {
        format!("manifest-{}.json", &self.hash[..8])
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Write a CSV whose first line points at the manifest.
    pub fn csv(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<()> {
        let mut text = format!("# manifest: {}\n", self.manifest_name());
        text.push_str(&header.join(","));
        text.push('\n');
        for row in rows {
            debug_assert_eq!(row.len(), header.len());
            text.push_str(&row.join(","));
            text.push('\n');
        }
        fs::write(self.path(name), text)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(self.path(name), text)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    pub fn finish(self, command: &str, config: Value, summary: Value, elapsed: Duration) -> Result<PathBuf> {
        let manifest = serde_json::json!({
            "program": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "config_hash": self.hash,
            "config": config,
            "outputs": self.files,
            "summary": summary,
            "elapsed_seconds": elapsed.as_secs_f64(),
        });
        let path = self.path(&self.manifest_name());
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}

pub fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

/// Rates and other small positive quantities: four significant digits.
pub fn sci(x: f64) -> String {
    format!("{x:.4e}")
}

/// Shortest text that round-trips to the same `f64`, in exponent form for
/// very small or large magnitudes.
pub fn raw(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}
