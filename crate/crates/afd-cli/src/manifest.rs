//! Run manifest: tool version, seed, config digest and a digest-carrying
//! inventory of every emitted file.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in digest {
        write!(hex, "{b:02x}").unwrap();
    }
    hex
}

pub struct Manifest {
    pub command: String,
    pub seed: u64,
    pub config_digest: String,
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &str, seed: u64, config_bytes: &[u8]) -> Self {
        Manifest {
            command: command.to_string(),
            seed,
            config_digest: sha256_hex(config_bytes),
            entries: Vec::new(),
        }
    }

    /// Writes `content` under `dir/name` and records its digest.
    pub fn emit(&mut self, dir: &Path, name: &str, content: &str) -> Result<(), String> {
        let path = dir.join(name);
        std::fs::write(&path, content)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        self.entries
            .push((name.to_string(), sha256_hex(content.as_bytes())));
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<(), String> {
        let created = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let mut out = String::new();
        writeln!(out, "tool = \"afd {}\"", env!("CARGO_PKG_VERSION")).unwrap();
        writeln!(out, "command = \"{}\"", self.command).unwrap();
        writeln!(out, "seed = {}", self.seed).unwrap();
        writeln!(out, "config_sha256 = \"{}\"", self.config_digest).unwrap();
        writeln!(out, "created_unix = {created}").unwrap();
        for (name, digest) in &self.entries {
            writeln!(out).unwrap();
            writeln!(out, "[[files]]").unwrap();
            writeln!(out, "path = \"{name}\"").unwrap();
            writeln!(out, "sha256 = \"{digest}\"").unwrap();
        }
        let path = dir.join("manifest.toml");
        std::fs::write(&path, out).map_err(|e| format!("cannot write {}: {e}", path.display()))
    }
}
