use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{rt, HarnessError, Result};
use crate::layout::{MANIFEST_FILE, TIMINGS_FILE};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub codec: String,
    pub config: serde_json::Value,
    pub stages: BTreeMap<String, StageRecord>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    /// Digest of the stage parameters and upstream inventories it ran with.
    pub inputs_digest: String,
    /// Relative path -> sha256.
    pub files: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub evaluations: BTreeMap<String, EvaluationSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationSummary {
    pub transform: String,
    pub detector: String,
    pub scenes: usize,
    pub excluded: Vec<String>,
    pub operating_area: f64,
    pub guarantee_area: f64,
}

/// JSON bytes as written for every artifact: pretty-printed, newline-terminated.
pub fn json_bytes<T: Serialize>(v: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(v).expect("artifact data serializes");
    bytes.push(b'\n');
    bytes
}

/// Writes through a temporary sibling so a crash never leaves half a file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes).map_err(HarnessError::io(&tmp))?;
    std::fs::rename(&tmp, path).map_err(HarnessError::io(path))
}

impl Manifest {
    pub fn path(out: &Path) -> PathBuf {
        out.join(MANIFEST_FILE)
    }

    pub fn load(out: &Path) -> Result<Option<Self>> {
        let path = Self::path(out);
        match std::fs::read(&path) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map(Some)
                .map_err(rt(format!("{}", path.display()))),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(HarnessError::io(&path)(e)),
        }
    }

    pub fn save(&self, out: &Path) -> Result<()> {
        write_atomic(&Self::path(out), &json_bytes(self))
    }

    pub fn all_files(&self) -> BTreeMap<&str, &str> {
        self.stages
            .values()
            .flat_map(|s| s.files.iter().map(|(p, h)| (p.as_str(), h.as_str())))
            .collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub seconds: f64,
    pub skipped: bool,
}

/// Wall-clock timings live beside the manifest so the manifest stays reproducible.
pub fn save_timings(out: &Path, timings: &BTreeMap<String, StageTiming>) -> Result<()> {
    write_atomic(&out.join(TIMINGS_FILE), &json_bytes(timings))
}

pub fn load_timings(out: &Path) -> BTreeMap<String, StageTiming> {
    std::fs::read(out.join(TIMINGS_FILE))
        .ok()
        .and_then(|b| serde_json::from_slice(&b).ok())
        .unwrap_or_default()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifyReport {
    pub checked: usize,
    pub missing: Vec<String>,
    pub corrupted: Vec<String>,
    pub unlisted: Vec<String>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.missing.is_empty() && self.corrupted.is_empty() && self.unlisted.is_empty()
    }
}

fn walk(root: &Path, dir: &Path, out: &mut Vec<String>) -> Result<()> {
    for entry in std::fs::read_dir(dir).map_err(HarnessError::io(dir))? {
        let entry = entry.map_err(HarnessError::io(dir))?;
        let path = entry.path();
        if path.is_dir() {
            walk(root, &path, out)?;
        } else {
            let rel = path.strip_prefix(root).expect("walk stays under root");
            let parts: Vec<String> = rel
                .components()
                .map(|c| c.as_os_str().to_string_lossy().into_owned())
                .collect();
            out.push(parts.join("/"));
        }
    }
    Ok(())
}

/// Checks every listed file against its checksum and looks for files the
/// manifest does not know about.
pub fn verify(out: &Path) -> Result<VerifyReport> {
    let manifest = Manifest::load(out)?
        .ok_or_else(|| HarnessError::Runtime(format!("no {MANIFEST_FILE} in {}", out.display())))?;
    let listed = manifest.all_files();
    let mut report = VerifyReport::default();
    for (rel, hash) in &listed {
        report.checked += 1;
        match std::fs::read(out.join(rel)) {
            Ok(bytes) if sha256_hex(&bytes) == *hash => {}
            Ok(_) => report.corrupted.push(rel.to_string()),
            Err(_) => report.missing.push(rel.to_string()),
        }
    }
    let mut present = Vec::new();
    walk(out, out, &mut present)?;
    present.sort();
    report.unlisted = present
        .into_iter()
        .filter(|p| p != MANIFEST_FILE && p != TIMINGS_FILE && !listed.contains_key(p.as_str()))
        .collect();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha_of_empty() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn verify_detects_problems() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path();
        std::fs::create_dir_all(out.join("a")).unwrap();
        std::fs::write(out.join("a/x.txt"), b"x").unwrap();
        std::fs::write(out.join("a/y.txt"), b"y").unwrap();
        let mut m = Manifest::default();
        let mut rec = StageRecord::default();
        rec.files.insert("a/x.txt".into(), sha256_hex(b"x"));
        rec.files.insert("a/y.txt".into(), sha256_hex(b"y"));
        m.stages.insert("s".into(), rec);
        m.save(out).unwrap();
        assert!(verify(out).unwrap().ok());

        std::fs::write(out.join("a/y.txt"), b"changed").unwrap();
        std::fs::write(out.join("stray"), b"").unwrap();
        std::fs::remove_file(out.join("a/x.txt")).unwrap();
        let r = verify(out).unwrap();
        assert_eq!(r.missing, vec!["a/x.txt"]);
        assert_eq!(r.corrupted, vec!["a/y.txt"]);
        assert_eq!(r.unlisted, vec!["stray"]);
        assert_eq!(r.checked, 2);
    }
}
