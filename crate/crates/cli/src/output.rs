//! Output sinks and run manifests.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use crate::Failure;

/// Where a payload goes: a file, or stdout for `-`.
#[derive(Clone, Debug)]
pub enum Output {
    Stdout,
    File(PathBuf),
}

impl Output {
    pub fn parse(s: &str) -> Self {
        if s == "-" {
            Output::Stdout
        } else {
            Output::File(PathBuf::from(s))
        }
    }

    pub fn write(&self, text: &str) -> Result<(), Failure> {
        match self {
            Output::Stdout => {
                use std::io::Write;
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(|e| Failure::Io(format!("stdout: {e}")))
            }
            Output::File(p) => {
                std::fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))
            }
        }
    }
}

/// `dir/name.ext` → `dir/name<suffix>.ext`.
pub fn sibling(p: &Path, suffix: &str) -> PathBuf {
    let stem = p
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match p.extension() {
        Some(ext) => format!("{stem}{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}{suffix}"),
    };
    p.with_file_name(name)
}

/// `report.json` → `report.json.manifest.json`.
pub fn manifest_path(p: &Path) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Record of one invocation, written next to its outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Value,
    pub seed: u64,
    pub tool_version: String,
    pub outputs: Vec<PathBuf>,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn new(
        command: &str,
        parameters: Value,
        seed: u64,
        outputs: Vec<PathBuf>,
        start: Instant,
    ) -> Self {
        RunManifest {
            command: command.into(),
            parameters,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            outputs,
            wall_time_s: start.elapsed().as_secs_f64(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), Failure> {
        let mut text =
            serde_json::to_string_pretty(self).map_err(|e| Failure::Internal(e.to_string()))?;
        text.push('\n');
        Output::File(path.to_path_buf()).write(&text)
    }
}
