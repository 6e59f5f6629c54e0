//! Run manifests: enough to re-execute a command and check that it
//! reproduces its outputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use ecoc::{Error, Result};

pub const MANIFEST_FORMAT: &str = "ecoc-run/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format: String,
    pub tool_version: String,
    pub command: String,
    /// Command line without the program name.
    pub argv: Vec<String>,
    pub cwd: String,
    pub options: Value,
    pub seed: Option<u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub started_unix: u64,
    pub finished_unix: u64,
}

pub fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Files under `path` (itself if a file), sorted.
fn expand(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_dir() {
        let mut out = Vec::new();
        let entries = fs::read_dir(path).map_err(|e| Error::io(path, e))?;
        for e in entries {
            let e = e.map_err(|e| Error::io(path, e))?;
            out.extend(expand(&e.path())?);
        }
        out.sort();
        Ok(out)
    } else {
        Ok(vec![path.to_path_buf()])
    }
}

pub fn digest_paths(paths: &[PathBuf]) -> Result<Vec<FileDigest>> {
    let mut out = Vec::new();
    for p in paths {
        for f in expand(p)? {
            let bytes = fs::read(&f).map_err(|e| Error::io(&f, e))?;
            out.push(FileDigest {
                path: f.display().to_string(),
                sha256: hex::encode(Sha256::digest(&bytes)),
            });
        }
    }
    Ok(out)
}

/// Where the manifest for an output goes: `<out>.run.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(".run.json");
    PathBuf::from(s)
}

pub fn write(path: &Path, m: &RunManifest) -> Result<()> {
    let mut text = serde_json::to_string_pretty(m).map_err(|e| Error::invalid(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read(path: &Path) -> Result<RunManifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let m: RunManifest = serde_json::from_str(&text).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
    if m.format != MANIFEST_FORMAT {
        return Err(Error::invalid(format!("unsupported manifest format `{}`", m.format)));
    }
    Ok(m)
}

/// Paths whose digests differ between two lists (or are missing).
pub fn mismatches(expected: &[FileDigest], actual: &[FileDigest]) -> Vec<String> {
    let mut bad: Vec<String> = expected
        .iter()
        .filter(|e| !actual.iter().any(|a| a == *e))
        .map(|e| e.path.clone())
        .collect();
    bad.extend(
        actual
            .iter()
            .filter(|a| !expected.iter().any(|e| e.path == a.path))
            .map(|a| a.path.clone()),
    );
    bad
}
