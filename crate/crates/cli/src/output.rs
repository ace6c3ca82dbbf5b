//! File emission: atomic writes, CSV tables, and the run manifest.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

use crate::config::RunConfig;

/// Write `content` to `dir/name` atomically (temp file + rename).
pub fn write_atomic(dir: &Path, name: &str, content: &[u8]) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut f = std::fs::File::create(&tmp)
            .with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(content)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, &target)
        .with_context(|| format!("renaming into place: {}", target.display()))?;
    Ok(target)
}

/// Serialize as pretty JSON and write atomically.
pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> anyhow::Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(dir, name, text.as_bytes())
}

/// A CSV table builder; floats go through `Display`, which round-trips
/// exactly when re-parsed.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        let mut buf = String::new();
        buf.push_str(header);
        buf.push('\n');
        Csv { buf }
    }

    pub fn row(&mut self, fields: &[&dyn std::fmt::Display]) {
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            self.buf.push_str(&f.to_string());
        }
        self.buf.push('\n');
    }

    pub fn write(&self, dir: &Path, name: &str) -> anyhow::Result<PathBuf> {
        write_atomic(dir, name, self.buf.as_bytes())
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool_version: &'static str,
    command: &'a str,
    seed: Option<u64>,
    config_hash: String,
    config: &'a RunConfig,
}

/// Every run drops a manifest with the full resolved configuration, its
/// hash, the seed and the tool version — enough to reproduce the run.
pub fn write_manifest(dir: &Path, command: &str, config: &RunConfig) -> anyhow::Result<PathBuf> {
    write_json(
        dir,
        "run-manifest.json",
        &Manifest {
            tool_version: env!("CARGO_PKG_VERSION"),
            command,
            seed: config.seed,
            config_hash: config.content_hash(),
            config,
        },
    )
}
