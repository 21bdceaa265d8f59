use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// An input file as recorded in the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct InputRecord {
    pub path: String,
    pub sha256: String,
}

/// Provenance record written next to every batch of outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub tool_version: String,
    pub output_dir: String,
    /// Hash over the subcommand, every input's contents and every option.
    pub input_hash: String,
    pub inputs: Vec<InputRecord>,
    pub options: BTreeMap<String, String>,
    pub outputs: Vec<String>,
}

fn hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(2 * bytes.len());
    for b in bytes {
        let _ = write!(s, "{b:02x}");
    }
    s
}

/// Collects inputs, options and outputs in memory; nothing touches the
/// output directory until [`OutputBatch::finish`].
pub struct OutputBatch {
    subcommand: String,
    dir: PathBuf,
    inputs: Vec<(String, Vec<u8>)>,
    options: BTreeMap<String, String>,
    files: Vec<(String, Vec<u8>)>,
}

impl OutputBatch {
    pub fn new(subcommand: &str, dir: PathBuf) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            dir,
            inputs: Vec::new(),
            options: BTreeMap::new(),
            files: Vec::new(),
        }
    }

    pub fn input(&mut self, label: impl Into<String>, contents: impl Into<Vec<u8>>) {
        self.inputs.push((label.into(), contents.into()));
    }

    pub fn option(&mut self, key: &str, value: impl ToString) {
        self.options.insert(key.to_string(), value.to_string());
    }

    pub fn file(&mut self, name: impl Into<String>, contents: impl Into<Vec<u8>>) {
        self.files.push((name.into(), contents.into()));
    }

    pub fn manifest(&self) -> RunManifest {
        let mut all = Sha256::new();
        all.update(self.subcommand.as_bytes());
        let mut inputs = Vec::new();
        for (label, bytes) in &self.inputs {
            let digest = Sha256::digest(bytes);
            all.update(label.as_bytes());
            all.update(digest);
            inputs.push(InputRecord {
                path: label.clone(),
                sha256: hex(&digest),
            });
        }
        for (k, v) in &self.options {
            all.update(k.as_bytes());
            all.update(b"=");
            all.update(v.as_bytes());
            all.update(b"\n");
        }
        RunManifest {
            subcommand: self.subcommand.clone(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            output_dir: self.dir.display().to_string(),
            input_hash: hex(&all.finalize()),
            inputs,
            options: self.options.clone(),
            outputs: self.files.iter().map(|(n, _)| n.clone()).collect(),
        }
    }

    /// Write every collected file and `manifest.toml`; returns the manifest.
    pub fn finish(self) -> Result<RunManifest, String> {
        let manifest = self.manifest();
        let text = toml::to_string_pretty(&manifest).map_err(|e| e.to_string())?;
        write_all(&self.dir, &self.files).map_err(|e| format!("writing {}: {e}", self.dir.display()))?;
        fs::write(self.dir.join("manifest.toml"), text).map_err(|e| e.to_string())?;
        Ok(manifest)
    }
}

fn write_all(dir: &Path, files: &[(String, Vec<u8>)]) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    for (name, bytes) in files {
        let path = dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, bytes)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_depends_on_inputs_and_options() {
        let make = |input: &str, opt: &str| {
            let mut b = OutputBatch::new("trim", PathBuf::from("out"));
            b.input("config", input);
            b.option("alpha", opt);
            b.manifest().input_hash
        };
        assert_eq!(make("a", "0.1"), make("a", "0.1"));
        assert_ne!(make("a", "0.1"), make("b", "0.1"));
        assert_ne!(make("a", "0.1"), make("a", "0.2"));
    }

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(
            hex(&Sha256::digest(b"")),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
