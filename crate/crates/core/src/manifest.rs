//! Output writers and run manifests.
//!
//! Every file goes through [`OutputDir`], which remembers what it wrote so the
//! manifest can list a SHA-256 per file. Nothing time- or host-dependent is
//! recorded, so re-running the same manifest reproduces it byte for byte.
//! Numbers are written with Rust's `Display`, which never uses locale
//! separators.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Result;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "OUTCOMES_OUT_DIR";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct FileChecksum {
    pub file: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct RunManifest {
    pub subcommand: String,
    pub params: serde_json::Value,
    pub seed: Option<u64>,
    pub version: String,
    pub outputs: Vec<FileChecksum>,
}

impl RunManifest {
    pub fn new(subcommand: &str, params: serde_json::Value, seed: Option<u64>) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            params,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: Vec::new(),
        }
    }
}

/// One CSV table with a header row.
#[derive(Clone, Debug, Default)]
pub struct Csv {
    text: String,
    width: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Csv { text, width: header.len() }
    }

    /// Appends a row; cells are already formatted.
    pub fn row<I, S>(&mut self, cells: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut n = 0;
        for (i, c) in cells.into_iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            let c = c.as_ref();
            if c.contains([',', '"', '\n']) {
                let _ = write!(self.text, "\"{}\"", c.replace('"', "\"\""));
            } else {
                self.text.push_str(c);
            }
            n += 1;
        }
        debug_assert_eq!(n, self.width, "row width differs from header");
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

/// Shortest round-trip decimal, scientific outside `[1e-4, 1e15)`; non-finite
/// values become `nan`, `inf`, `-inf`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else if x != 0.0 && (x.abs() < 1e-4 || x.abs() >= 1e15) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// Optional float, empty cell for `None`.
pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Directory that tracks the files written into it.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: impl AsRef<Path>) -> Result<Self> {
        fs::create_dir_all(root.as_ref())?;
        Ok(OutputDir { root: root.as_ref().to_path_buf(), written: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(name);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(&path, bytes)?;
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
        Ok(path)
    }

    pub fn write_csv(&mut self, name: &str, csv: &Csv) -> Result<PathBuf> {
        self.write_bytes(name, csv.as_str().as_bytes())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = to_json(value)?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// Hashes every written file (in write order) and stores the manifest as
    /// [`MANIFEST_FILE`].
    pub fn finish(self, manifest: RunManifest) -> Result<RunManifest> {
        self.finish_as(manifest, MANIFEST_FILE)
    }

    /// Same as [`OutputDir::finish`] with a chosen manifest file name.
    pub fn finish_as(self, mut manifest: RunManifest, name: &str) -> Result<RunManifest> {
        manifest.outputs = self
            .written
            .iter()
            .map(|name| {
                let bytes = fs::read(self.root.join(name))?;
                Ok(FileChecksum { file: name.clone(), sha256: sha256_hex(&bytes) })
            })
            .collect::<Result<_>>()?;
        let mut text = to_json(&manifest)?;
        text.push('\n');
        fs::write(self.root.join(name), text)?;
        Ok(manifest)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| crate::Error::Io(e.to_string()))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads a manifest back (for `repro --manifest`).
pub fn read_manifest(path: impl AsRef<Path>) -> Result<serde_json::Value> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| crate::Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quoting_and_numbers() {
        let mut c = Csv::new(&["a", "b"]);
        c.row(["1", "x,y"]);
        c.row([num(0.1), num(f64::NAN)]);
        assert_eq!(c.as_str(), "a,b\n1,\"x,y\"\n0.1,nan\n");
        assert_eq!(num(1.25e-30), "1.25e-30");
        assert_eq!(num(2.0), "2");
        assert_eq!(opt_num(None), "");
    }

    #[test]
    fn checksums_are_stable() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        let dir = std::env::temp_dir().join(format!("outcomes-manifest-{}", std::process::id()));
        let run = || {
            let mut out = OutputDir::create(&dir).unwrap();
            out.write_json("x.json", &serde_json::json!({"b": 1, "a": [1.5, 2]})).unwrap();
            out.finish(RunManifest::new("t", serde_json::json!({"m": 3}), Some(7))).unwrap();
            fs::read(dir.join(MANIFEST_FILE)).unwrap()
        };
        assert_eq!(run(), run());
        let _ = fs::remove_dir_all(&dir);
    }
}
