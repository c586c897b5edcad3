//! Atomic artifact writing and the run manifest.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliResult;

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest {
        let _ = write!(s, "{b:02x}");
    }
    s
}

#[derive(Clone, Debug, Serialize)]
pub struct Artifact {
    pub file: String,
    pub sha256: String,
}

/// Output directory collecting the files of one run.
pub struct OutputDir {
    dir: PathBuf,
    artifacts: Vec<Artifact>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), artifacts: Vec::new() })
    }

    pub fn artifacts(&self) -> &[Artifact] {
        &self.artifacts
    }

    /// Write through a temporary file in the same directory, then rename.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        write_atomic(&self.dir, name, bytes)?;
        self.artifacts.push(Artifact { file: name.to_string(), sha256: sha256_hex(bytes) });
        Ok(())
    }

    /// CSV with a `# schema:` first line.
    pub fn csv(&mut self, name: &str, schema: &str, rows: &[String]) -> CliResult<()> {
        let mut body = format!("# schema: {schema}\n");
        for r in rows {
            body.push_str(r);
            body.push('\n');
        }
        self.write(name, body.as_bytes())
    }

    pub fn manifest(&self, manifest: &Manifest) -> CliResult<()> {
        let mut json = serde_json::to_vec_pretty(manifest).expect("manifest serialises");
        json.push(b'\n');
        write_atomic(&self.dir, "manifest.json", &json)
    }
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> CliResult<()> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(dir.join(name)).map_err(|e| e.error)?;
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub spec_sha256: String,
    pub seed: u64,
    pub threads: usize,
    pub fpp_version: String,
    pub parallel_backend: bool,
    pub wall_time_s: f64,
    pub artifacts: Vec<Artifact>,
}

/// Comma-joined `Display` values.
pub fn row<T: std::fmt::Display>(fields: &[T]) -> String {
    let mut s = String::new();
    for (i, f) in fields.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{f}");
    }
    s
}

/// `prefix_1,...,prefix_d`.
pub fn axis_columns(prefix: &str, d: usize) -> String {
    (1..=d).map(|i| format!("{prefix}_{i}")).collect::<Vec<_>>().join(",")
}
