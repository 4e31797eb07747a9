use std::fmt::Write as _;
use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

/// Reproducibility record written next to every run's outputs.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: String,
    pub config_digest: String,
    pub seed: u64,
    pub artifact_version: String,
    pub outputs: Vec<PathBuf>,
    pub wall_time: f64,
    pub resolved_config: String,
}

pub fn digest(text: &str) -> String {
    let hash = Sha256::digest(text.as_bytes());
    hash.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

impl RunManifest {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command = {}", self.command);
        let _ = writeln!(out, "config_digest = {}", self.config_digest);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "artifact_version = {}", self.artifact_version);
        let names: Vec<String> = self.outputs.iter().map(|p| p.display().to_string()).collect();
        let _ = writeln!(out, "outputs = {}", names.join(","));
        let _ = writeln!(out, "wall_time = {:.3}", self.wall_time);
        for line in self.resolved_config.lines() {
            let _ = writeln!(out, "config.{line}");
        }
        out
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(format!("{}.manifest", self.command));
        fs::write(&path, self.render()).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

/// Write `contents` to `dir/name` and return the path.
pub fn write_output(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// Append one summary line to the results ledger in `dir`.
pub fn append_result(dir: &Path, line: &str) -> Result<()> {
    let path = dir.join("results.log");
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .with_context(|| format!("opening {}", path.display()))?;
    writeln!(f, "{line}")?;
    Ok(())
}
